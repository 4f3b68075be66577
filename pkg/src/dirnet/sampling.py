"""Epsilon-systems, minimal-mass functionals, seeded sampling and convergence runs.

A finite cover is an epsilon-system when, for every ordered pair of blocks
``(U_i, U_j)``, the weights ``{e(x, x') : x in U_i, x' in U_j}`` fit in an
open interval of radius ``eps``, i.e. their spread is strictly below
``2 * eps``. The minimal-mass functional of a cover is its smallest positive
block mass; its supremum over refined systems drives the sampling bound
``(1 - M)**n / M``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence, Union

import numpy as np

from ._validation import check_index_set, check_weights
from .clustering import component_target_nr, component_target_r, nonreciprocal, reciprocal
from .distance import dn_exact
from .exceptions import BudgetExceededError, NetworkValidationError
from .network import (
    TWO_PI,
    DirectedCircle,
    FiniteNetwork,
    MeasuredNetwork,
    circle_weights,
    subnetwork,
)
from .persistence import Diagram, bottleneck, dowker_sink_filtration, persistence

log = logging.getLogger(__name__)

EXACT_MASS_MAX_SUPPORT = 10
METHODS = ("dn", "nr", "r", "dowker")
CSV_HEADER = [
    "n", "trials", "empirical_freq", "bound_raw", "bound_clamped",
    "statistic_median", "epsilon", "method", "seed",
]
CIRCLE_LIMIT_DIAGRAM = Diagram(1, np.array([[0.0, math.pi]]))


@dataclass(frozen=True)
class Cover:
    """Finite cover of node indices; blocks may overlap but must be nonempty."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(sorted(set(int(i) for i in b))) for b in self.blocks)
        if not blocks or any(not b for b in blocks):
            raise NetworkValidationError("cover blocks must be nonempty")
        object.__setattr__(self, "blocks", blocks)

    def check_covers(self, n):
        for b in self.blocks:
            check_index_set(b, n, "cover element")
        missing = set(range(n)) - {i for b in self.blocks for i in b}
        if missing:
            raise NetworkValidationError(f"cover misses nodes {sorted(missing)}")


def _as_cover(cover):
    return cover if isinstance(cover, Cover) else Cover(tuple(cover))


def _spread_ok(w, bi, bj, eps):
    vals = w[np.ix_(bi, bj)]
    return vals.max() - vals.min() < 2 * eps


def is_epsilon_system(net, cover, eps, refined=False, components=None):
    """Whether ``cover`` is an ``eps``-system on ``net``.

    With ``refined=True`` every block must also sit inside one of the
    declared ``components`` (a partition of node indices).
    """
    if not eps > 0:
        raise NetworkValidationError("eps must be positive")
    w = check_weights(net)
    cover = _as_cover(cover)
    cover.check_covers(w.shape[0])
    if refined:
        if components is None:
            raise NetworkValidationError("refined check needs declared components")
        owner = {i: c for c, block in enumerate(components) for i in block}
        for b in cover.blocks:
            if len({owner[i] for i in b}) != 1:
                return False
    blocks = [list(b) for b in cover.blocks]
    return all(_spread_ok(w, bi, bj, eps) for bi in blocks for bj in blocks)


def minimal_mass(cover, m):
    """Smallest positive block mass of ``cover`` under the measure of ``m``."""
    mu = m.measure if isinstance(m, MeasuredNetwork) else np.asarray(m, dtype=np.float64)
    masses = [float(mu[list(b)].sum()) for b in _as_cover(cover).blocks]
    positive = [x for x in masses if x > 0]
    if not positive:
        raise NetworkValidationError("every cover block has zero mass")
    return min(positive)


def _support_setup(m):
    sub = m.support_network()
    comps = sub.components
    declared = comps is not None
    if not declared:
        comps = (tuple(range(sub.network.n_nodes)),)
    return sub, comps, declared


def _candidate_blocks(w, comps, eps):
    """Self-compatible subsets of each component, as bitmasks."""
    out = []
    for comp in comps:
        for r in range(1, len(comp) + 1):
            for sub in combinations(comp, r):
                idx = list(sub)
                if _spread_ok(w, idx, idx, eps):
                    out.append(sum(1 << i for i in sub))
    return out


def _members(mask):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def max_min_mass(m, eps, mode="exact"):
    """Supremum of the minimal mass over refined ``eps``-systems of the support.

    ``exact`` searches all covers built from self-compatible blocks (support
    of at most 10 nodes); ``greedy`` returns the minimal mass of one
    partition grown largest-mass-first, a lower bound on the exact value.
    Without declared components the whole support is treated as a single
    component and a warning is logged.
    """
    if not eps > 0:
        raise NetworkValidationError("eps must be positive")
    sub, comps, declared = _support_setup(m)
    if not declared:
        log.warning("no components declared; treating the support as one component")
    w = sub.network.weights
    mu = sub.measure
    if mode == "greedy":
        return _greedy_mass(w, mu, comps, eps)
    if mode != "exact":
        raise NetworkValidationError(f"mode must be 'exact' or 'greedy', got {mode!r}")
    n = w.shape[0]
    if n > EXACT_MASS_MAX_SUPPORT:
        raise BudgetExceededError(
            "EXACT_MASS_MAX_SUPPORT",
            f"exact search supports at most {EXACT_MASS_MAX_SUPPORT} support nodes, got {n}",
        )
    return _exact_mass(w, mu, comps, eps)


def _exact_mass(w, mu, comps, eps):
    n = w.shape[0]
    blocks = _candidate_blocks(w, comps, eps)
    mass = {b: float(mu[_members(b)].sum()) for b in blocks}
    members = {b: _members(b) for b in blocks}
    compat = {
        b: {c for c in blocks if _spread_ok(w, members[b], members[c], eps)
            and _spread_ok(w, members[c], members[b], eps)}
        for b in blocks
    }
    full = (1 << n) - 1
    # try thresholds from the largest block mass down; first feasible one wins
    for t in sorted(set(mass.values()), reverse=True):
        usable = [b for b in blocks if mass[b] >= t]
        if _cover_exists(usable, compat, full):
            return t
    return float(mu.min())


def _cover_exists(usable, compat, full):
    by_node = {}
    for b in usable:
        for i in _members(b):
            by_node.setdefault(i, []).append(b)

    def extend(covered, chosen, allowed):
        if covered == full:
            return True
        # branch on the uncovered node with the fewest admissible blocks
        best = None
        for i in range(full.bit_length()):
            if covered >> i & 1:
                continue
            opts = [b for b in by_node.get(i, ()) if b in allowed]
            if best is None or len(opts) < len(best):
                best = opts
                if not opts:
                    return False
        for b in sorted(best, key=lambda b: -bin(b).count("1")):
            if extend(covered | b, chosen + [b], allowed & compat[b]):
                return True
        return False

    return extend(0, [], set(usable))


def _greedy_mass(w, mu, comps, eps):
    owner = {i: c for c, comp in enumerate(comps) for i in comp}
    order = sorted(range(w.shape[0]), key=lambda i: (-mu[i], i))
    blocks = []
    for i in order:
        for b in blocks:
            if owner[b[0]] != owner[i]:
                continue
            trial = b + [i]
            if all(
                _spread_ok(w, trial, o, eps) and _spread_ok(w, o, trial, eps)
                for o in blocks if o is not b
            ) and _spread_ok(w, trial, trial, eps):
                b.append(i)
                break
        else:
            blocks.append([i])
    return min(float(mu[b].sum()) for b in blocks)


def convergence_bound(mass, n):
    """``(1 - mass)**n / mass``, unclamped."""
    if not 0 < mass <= 1:
        raise NetworkValidationError("mass must lie in (0, 1]")
    return (1.0 - mass) ** n / mass


def sample_indices(m, n, seed):
    """Distinct node indices drawn by ``n`` i.i.d. draws from the measure, sorted."""
    if n < 1:
        raise NetworkValidationError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    draws = rng.choice(m.network.n_nodes, size=n, p=m.measure)
    return sorted(set(int(i) for i in draws))


def sample_iid(m, n, seed):
    """Subnetwork on the distinct nodes of an i.i.d. sample of size ``n``."""
    return subnetwork(m.network, sample_indices(m, n, seed))


def sample_circle(n, seed):
    """``n`` i.i.d. uniform points on the directed circle with arc-length weights."""
    if n < 1:
        raise NetworkValidationError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, TWO_PI, size=n)
    return FiniteNetwork.from_matrix(circle_weights(angles))


@dataclass
class ExperimentConfig:
    """One convergence experiment.

    ``ground_truth`` is a :class:`MeasuredNetwork` or a continuous
    :class:`DirectedCircle`; ``method`` is one of ``dn``, ``nr``, ``r``,
    ``dowker``.
    """

    ground_truth: Union[MeasuredNetwork, DirectedCircle]
    epsilon: float
    sizes: Sequence[int]
    trials: int
    seed: int
    method: str = "dn"
    jobs: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise NetworkValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.epsilon > 0:
            raise NetworkValidationError("epsilon must be positive")
        if not self.sizes or any(int(s) < 1 for s in self.sizes):
            raise NetworkValidationError("sample sizes must be positive")
        if int(self.trials) < 1:
            raise NetworkValidationError("trials must be positive")
        if isinstance(self.ground_truth, DirectedCircle):
            if not self.ground_truth.is_continuous:
                self.ground_truth = MeasuredNetwork.uniform(self.ground_truth.network())
            elif self.method != "dowker":
                raise NetworkValidationError("the continuous circle supports only method 'dowker'")
        elif not isinstance(self.ground_truth, MeasuredNetwork):
            raise NetworkValidationError("ground_truth must be a MeasuredNetwork or DirectedCircle")
        if self.method in ("nr", "r") and self.ground_truth.components is None:
            raise NetworkValidationError(f"method {self.method!r} needs declared components")


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    trials: int
    empirical_freq: float
    bound_raw: float
    bound_clamped: float
    statistic_median: float
    epsilon: float
    method: str
    seed: int
    statistics: tuple = field(default=(), repr=False, compare=False)

    def as_csv_row(self):
        return [self.n, self.trials, self.empirical_freq, self.bound_raw, self.bound_clamped,
                self.statistic_median, self.epsilon, self.method, self.seed]


def trial_seed(master, n, trial):
    """Per-trial seed depending only on (master seed, size, trial index)."""
    return np.random.SeedSequence([int(master) & (2**64 - 1), int(n), int(trial)])


class _Statistic:
    """Computes the trial statistic, memoised on the sampled index set."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.cache = {}
        gt = cfg.ground_truth
        if isinstance(gt, DirectedCircle):
            self.target = CIRCLE_LIMIT_DIAGRAM
            return
        self.support = gt.support_network()
        if cfg.method == "dn":
            self.target = self.support.network
        elif cfg.method == "nr":
            self.target = component_target_nr(self.support).as_network()
        elif cfg.method == "r":
            self.target = component_target_r(self.support).as_network()
        else:
            self.target = persistence(dowker_sink_filtration(self.support.network.weights, 1))[1]

    def __call__(self, n, trial):
        seed = trial_seed(self.cfg.seed, n, trial)
        if isinstance(self.cfg.ground_truth, DirectedCircle):
            sample = sample_circle(n, seed)
            return bottleneck(self.target, persistence(dowker_sink_filtration(sample.weights, 1))[1])
        idx = tuple(sample_indices(self.support, n, seed))
        if idx not in self.cache:
            self.cache[idx] = self._finite(subnetwork(self.support.network, idx))
        return self.cache[idx]

    def _finite(self, sample):
        method = self.cfg.method
        if method == "dn":
            return dn_exact(self.target, sample)
        if method == "nr":
            return dn_exact(self.target, nonreciprocal(sample).as_network())
        if method == "r":
            return dn_exact(self.target, reciprocal(sample).as_network())
        return bottleneck(self.target, persistence(dowker_sink_filtration(sample.weights, 1))[1])


_WORKER_STAT = None


def _worker_init(cfg):
    global _WORKER_STAT
    _WORKER_STAT = _Statistic(cfg)


def _worker_run(args):
    return _WORKER_STAT(*args)


def theoretical_mass(cfg):
    """``M`` entering the bound: at ``eps/2`` for d_N and clustering, ``eps/4`` for Dowker.

    Returns None for the continuous circle, where it is not computable.
    """
    if isinstance(cfg.ground_truth, DirectedCircle):
        return None
    scale = 4.0 if cfg.method == "dowker" else 2.0
    return max_min_mass(cfg.ground_truth, cfg.epsilon / scale, mode="exact")


def run_convergence_experiment(cfg):
    """Run every (size, trial) and summarise one :class:`ExperimentRow` per size.

    The empirical frequency counts trials whose statistic is at least
    ``epsilon``. Results do not depend on ``cfg.jobs`` or scheduling.
    """
    mass = theoretical_mass(cfg)
    tasks = [(int(n), t) for n in cfg.sizes for t in range(int(cfg.trials))]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs, initializer=_worker_init, initargs=(cfg,)) as pool:
            values = list(pool.map(_worker_run, tasks, chunksize=max(1, len(tasks) // (4 * cfg.jobs))))
    else:
        stat = _Statistic(cfg)
        values = [stat(n, t) for n, t in tasks]
    rows = []
    per = int(cfg.trials)
    for k, n in enumerate(cfg.sizes):
        stats = np.array(values[k * per:(k + 1) * per], dtype=np.float64)
        if mass is None:
            raw = clamped = math.nan
        else:
            raw = convergence_bound(mass, int(n))
            clamped = min(raw, 1.0)
        rows.append(ExperimentRow(
            n=int(n),
            trials=per,
            empirical_freq=float(np.mean(stats >= cfg.epsilon)),
            bound_raw=raw,
            bound_clamped=clamped,
            statistic_median=float(np.median(stats)),
            epsilon=float(cfg.epsilon),
            method=cfg.method,
            seed=int(cfg.seed),
            statistics=tuple(stats.tolist()),
        ))
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row.as_csv_row()])
    return buf.getvalue()
