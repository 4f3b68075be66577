"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line (shown even
when output capture is on) and then asserts the same condition.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy.cluster.hierarchy import cophenet, linkage
from scipy.spatial.distance import squareform

from dirnet import (
    Diagram,
    ExperimentConfig,
    FiniteNetwork,
    MeasuredNetwork,
    bottleneck,
    compute_diagrams,
    directed_circle,
    dn_exact,
    dn_to_point,
    dowker_duality_check,
    max_min_mass,
    nonreciprocal,
    reciprocal,
    run_convergence_experiment,
    validate_ultrametric,
)
from dirnet.network import DirectedCircle
from dirnet.persistence import check_filtration, dowker_sink_filtration, dowker_source_filtration, rips_filtration
from dirnet.sampling import convergence_bound

from conftest import random_network, three_component_network
from oracles import chain_nonreciprocal, chain_reciprocal, dn_by_correspondences, max_min_mass_bruteforce

PI = math.pi


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {detail}")

    return emit


def binomial_slack(bound, trials):
    return 3 * math.sqrt(bound * (1 - bound) / trials)


def test_criterion_1_dowker_circles(report):
    start = time.perf_counter()
    worst = 0.0
    shapes_ok = True
    for n in range(3, 21):
        d1 = compute_diagrams("dowker-si", directed_circle(n), maxdim=1)[1]
        expected = np.array([[2 * PI / n, 2 * PI / n * math.ceil(n / 2)]])
        if d1.pairs.shape != expected.shape:
            shapes_ok = False
            continue
        worst = max(worst, float(np.abs(d1.pairs - expected).max()))
    elapsed = time.perf_counter() - start
    ok = shapes_ok and worst <= 1e-9 and elapsed < 5
    report(1, ok, f"n=3..20 max error {worst:.2e}, {elapsed:.2f}s")
    assert shapes_ok and worst <= 1e-9
    assert elapsed < 5


def test_criterion_2_dowker_duality(report):
    start = time.perf_counter()
    rng = np.random.default_rng(2002)
    failures = 0
    for _ in range(200):
        w = rng.uniform(0, 10, (6, 6))
        np.fill_diagonal(w, 0)
        if not dowker_duality_check(w, maxdim=1):
            failures += 1
    elapsed = time.perf_counter() - start
    report(2, failures == 0 and elapsed < 30, f"200 random 6-node nets, {failures} mismatches, {elapsed:.2f}s")
    assert failures == 0
    assert elapsed < 30


def test_criterion_3_stability(report):
    start = time.perf_counter()
    rng = np.random.default_rng(3003)
    worst_slack = -math.inf
    checks = 0
    for _ in range(50):
        a = random_network(rng, int(rng.integers(1, 6)))
        b = random_network(rng, int(rng.integers(1, 6)))
        dn = dn_exact(a, b)
        for kind in ("rips", "dowker-si"):
            da = compute_diagrams(kind, a, 1)
            db = compute_diagrams(kind, b, 1)
            for k in (0, 1):
                worst_slack = max(worst_slack, bottleneck(da[k], db[k]) - 2 * dn)
                checks += 1
    elapsed = time.perf_counter() - start
    ok = worst_slack <= 1e-9 and elapsed < 300
    report(3, ok, f"{checks} checks, max d_B - 2 d_N = {worst_slack:.3e}, {elapsed:.2f}s")
    assert worst_slack <= 1e-9
    assert elapsed < 300


def _corpus():
    rng = np.random.default_rng(4004)
    nets = [FiniteNetwork.from_matrix([[a]]) for a in (0.0, 1.0, -2.5)]
    nets.append(directed_circle(3))
    nets.append(directed_circle(4))
    while len(nets) < 30:
        n = int(rng.integers(1, 5))
        nets.append(random_network(rng, n, dissimilarity=bool(rng.integers(2))))
    return nets


def test_criterion_4_network_distance(report):
    nets = _corpus()
    k = len(nets)
    dn = np.zeros((k, k))
    worst = 0.0
    for i, j in itertools.product(range(k), repeat=2):
        dn[i, j] = dn_exact(nets[i], nets[j])
        if i <= j:
            oracle = dn_by_correspondences(nets[i].weights, nets[j].weights)
            worst = max(worst, abs(dn[i, j] - oracle))
    axioms = (
        np.all(dn >= 0)
        and np.all(np.diag(dn) == 0)
        and np.allclose(dn, dn.T, atol=1e-12, rtol=0)
        and np.all(dn[:, None, :] <= dn[:, :, None] + dn[None, :, :] + 1e-12)
    )
    one_point = dn_exact(FiniteNetwork.from_matrix([[5.0]]), FiniteNetwork.from_matrix([[1.0]])) == 2.0
    to_point = all(
        dn_exact(net, FiniteNetwork.from_matrix([[0.7]])) == pytest.approx(dn_to_point(net, 0.7), abs=1e-12)
        for net in nets
    )
    ok = worst <= 1e-12 and axioms and one_point and to_point
    report(4, ok, f"{k * (k + 1) // 2} pairs vs oracle max error {worst:.1e}, axioms {axioms}, closed forms {one_point and to_point}")
    assert worst <= 1e-12
    assert axioms and one_point and to_point


def test_criterion_5_circle_clustering(report):
    start = time.perf_counter()
    problems = []
    for n in range(2, 17):
        w = directed_circle(n).weights
        off = ~np.eye(n, dtype=bool)
        nr, r = nonreciprocal(w).u, reciprocal(w).u
        if not np.allclose(nr[off], 2 * PI / n, atol=1e-12, rtol=0):
            problems.append(f"nr n={n}")
        if not (np.all(r[off] >= PI - 1e-12) and np.all(r[off] <= PI + 2 * PI / n + 1e-12)):
            problems.append(f"r n={n}")
        if n <= 7:
            if not np.array_equal(nr, chain_nonreciprocal(w)):
                problems.append(f"nr oracle n={n}")
            if not np.array_equal(r, chain_reciprocal(w)):
                problems.append(f"r oracle n={n}")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 60
    report(5, ok, f"n=2..16, problems {problems or 'none'}, {elapsed:.2f}s")
    assert not problems
    assert elapsed < 60


def test_criterion_6_sampling_bound(report):
    start = time.perf_counter()
    truth = MeasuredNetwork.uniform(directed_circle(5), [tuple(range(5))])
    eps = 1.0
    mass = max_min_mass(truth, eps / 2)
    oracle_mass = max_min_mass_bruteforce(truth.network.weights, truth.measure, truth.components, eps / 2)
    cfg = ExperimentConfig(truth, eps, [5, 10, 20], 1000, seed=20240601, method="dn")
    rows = run_convergence_experiment(cfg)
    lines, ok = [], mass == pytest.approx(oracle_mass)
    for row in rows:
        assert row.bound_raw == pytest.approx(convergence_bound(mass, row.n))
        limit = row.bound_clamped + binomial_slack(row.bound_clamped, row.trials)
        ok &= row.empirical_freq <= limit
        lines.append(f"n={row.n} freq {row.empirical_freq:.3f} <= {limit:.3f}")
    in_window = 0.05 < rows[-1].bound_clamped < 0.9
    elapsed = time.perf_counter() - start
    ok = ok and in_window and elapsed < 600
    report(6, ok, f"M={mass:.3f}; " + "; ".join(lines) + f"; bound(20)={rows[-1].bound_clamped:.3f}; {elapsed:.1f}s")
    assert mass == pytest.approx(oracle_mass)
    assert in_window
    for row in rows:
        assert row.empirical_freq <= row.bound_clamped + binomial_slack(row.bound_clamped, row.trials)
    assert elapsed < 600


def test_criterion_7_clustering_convergence(report):
    start = time.perf_counter()
    truth = three_component_network()
    eps = 0.5
    mass = max_min_mass(truth, eps / 2)
    oracle_mass = max_min_mass_bruteforce(truth.network.weights, truth.measure, truth.components, eps / 2)
    failures, lines = [], []
    for method in ("nr", "r"):
        cfg = ExperimentConfig(truth, eps, [10, 20, 40], 1000, seed=99, method=method)
        rows = run_convergence_experiment(cfg)
        for row in rows:
            if row.empirical_freq > row.bound_clamped + binomial_slack(row.bound_clamped, row.trials):
                failures.append(f"{method} bound n={row.n}")
        medians = [row.statistic_median for row in rows]
        if any(b > a for a, b in zip(medians, medians[1:])):
            failures.append(f"{method} medians {medians}")
        lines.append(
            f"{method}: freq {[r.empirical_freq for r in rows]} vs bound "
            f"{[round(r.bound_clamped, 4) for r in rows]}, medians {[round(m, 4) for m in medians]}"
        )
    elapsed = time.perf_counter() - start
    ok = not failures and mass == pytest.approx(oracle_mass) and elapsed < 600
    report(7, ok, f"M={mass:.3f}; " + "; ".join(lines) + f"; {elapsed:.1f}s")
    assert mass == pytest.approx(oracle_mass)
    assert not failures
    assert elapsed < 600


@pytest.mark.slow
def test_criterion_8_continuous_circle(report):
    start = time.perf_counter()
    cfg = ExperimentConfig(DirectedCircle(), 0.35, [25, 50, 100, 200], 20, seed=8008, method="dowker")
    rows = run_convergence_experiment(cfg)
    medians = [row.statistic_median for row in rows]
    monotone = all(b <= a for a, b in zip(medians, medians[1:]))
    elapsed = time.perf_counter() - start
    ok = monotone and medians[-1] <= 0.35 and elapsed < 900
    report(8, ok, f"medians {[round(m, 4) for m in medians]} for m=25,50,100,200; {elapsed:.1f}s")
    assert monotone
    assert medians[-1] <= 0.35
    assert elapsed < 900


def test_criterion_9_property_suites(report):
    rng = np.random.default_rng(9009)
    failures = {}

    def fail(name):
        failures[name] = failures.get(name, 0) + 1

    diagrams = []
    for _ in range(40):
        n = int(rng.integers(1, 7))
        w = rng.uniform(-1, 5, (n, n))
        nr, r = nonreciprocal(w).u, reciprocal(w).u
        if not (validate_ultrametric(nr)[0] and validate_ultrametric(r)[0]):
            fail("ultrametric validity")
        if not np.all(nr <= r):
            fail("nr <= r")
        for build in (rips_filtration, dowker_sink_filtration, dowker_source_filtration):
            try:
                check_filtration(build(w, 2))
            except Exception:
                fail("filtration monotonicity")
        p = rng.permutation(n)
        wp = w[np.ix_(p, p)]
        if not (np.array_equal(nonreciprocal(wp).u, nr[np.ix_(p, p)])
                and np.array_equal(reciprocal(wp).u, r[np.ix_(p, p)])):
            fail("ultrametric equivariance")
        for kind in ("rips", "dowker-si"):
            dg = compute_diagrams(kind, w, 1)
            if compute_diagrams(kind, wp, 1) != dg:
                fail("diagram equivariance")
            diagrams.append(dg[1])
    for _ in range(20):
        pts = rng.uniform(size=(int(rng.integers(2, 8)), 2))
        d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        single = squareform(cophenet(linkage(squareform(d, checks=False), "single")))
        if not (np.allclose(reciprocal(d).u, single, atol=1e-12)
                and np.allclose(nonreciprocal(d).u, single, atol=1e-12)):
            fail("symmetric collapse to single linkage")
    for _ in range(30):
        diagrams.append(Diagram(1, np.sort(rng.uniform(0, 3, (int(rng.integers(0, 4)), 2)), axis=1)))
    picks = rng.integers(len(diagrams), size=(300, 3))
    for i, j, k in picks:
        a, b, c = diagrams[i], diagrams[j], diagrams[k]
        ab, ba = bottleneck(a, b), bottleneck(b, a)
        if ab != ba or ab < 0 or bottleneck(a, a) != 0:
            fail("bottleneck symmetry")
        if bottleneck(a, c) > ab + bottleneck(b, c) + 1e-12:
            fail("bottleneck triangle")
    report(9, not failures, f"failures {failures or 'none'}")
    assert not failures
