import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dirnet import directed_circle
from dirnet.cli import main
from dirnet.network import dumps_network

PI = math.pi


def run(argv, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdin=io.StringIO(stdin), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def circle6():
    return dumps_network(directed_circle(6))


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_model_then_cluster(circle6):
    code, out, _ = run(["model", "circle", "--nodes", "6"])
    assert code == 0 and json.loads(out) == json.loads(circle6)
    code, out, _ = run(["cluster", "nr"], out)
    assert code == 0
    u = np.array(json.loads(out)["weights"])
    np.testing.assert_allclose(u[~np.eye(6, dtype=bool)], PI / 3)


def test_cluster_tree(circle6):
    code, out, _ = run(["cluster", "r", "--tree"], circle6)
    tree = json.loads(out)
    heights = [m["height"] for m in tree["merges"]]
    assert heights == pytest.approx([PI, PI, PI, 4 * PI / 3])
    assert [sorted(map(sorted, m["blocks"])) for m in tree["merges"][:3]] == [
        [["0"], ["3"]], [["1"], ["4"]], [["2"], ["5"]]
    ]


def test_persist_dowker(circle6):
    code, out, _ = run(["persist", "dowker-si", "--maxdim", "1"], circle6)
    assert code == 0
    d0, d1 = json.loads(out)
    assert d1["dim"] == 1
    assert d1["pairs"] == [[pytest.approx(PI / 3), pytest.approx(PI)]]
    assert len(d0["pairs"]) == 6
    assert [p[1] for p in d0["pairs"]].count("inf") == 1


def test_persist_text(circle6):
    code, out, _ = run(["persist", "dowker-so", "--text"], circle6)
    assert out.splitlines()[0] == "# dim 0"
    assert out.splitlines()[-2] == "# dim 1"
    assert out.count("inf)") == 1
    assert len(out.splitlines()) == 9


def test_dist_exact(tmp_path):
    a = write(tmp_path, "a.json", {"nodes": ["p"], "weights": [[5]]})
    b = write(tmp_path, "b.json", {"nodes": ["q"], "weights": [[1]]})
    code, out, _ = run(["dist", "exact", a, b])
    assert code == 0 and json.loads(out) == 2.0


def test_dist_to_point_and_linf(tmp_path):
    a = write(tmp_path, "a.json", {"nodes": ["0", "1"], "weights": [[0, 1], [2, 0]]})
    b = write(tmp_path, "b.json", {"nodes": ["0", "1"], "weights": [[1, 2], [3, 1]]})
    assert json.loads(run(["dist", "to-point", "1", a])[1]) == 0.5
    assert json.loads(run(["dist", "linf", a, b])[1]) == 0.5
    assert run(["dist", "to-point", "x", a])[0] == 2


def test_dist_budget_exit(tmp_path):
    a = write(tmp_path, "a.json", dumps_network(directed_circle(7)))
    code, _, err = run(["dist", "exact", a, a])
    assert code == 3
    assert "DIRNET_DN_BUDGET" in err


def test_malformed_json():
    code, _, err = run(["cluster", "nr"], '{"nodes": ["a"],\n "weights": [[0]')
    assert code == 2
    assert "line 2" in err


def test_field_diagnostic():
    code, _, err = run(["cluster", "nr"], '{"nodes": ["a"], "weights": [["x"]]}')
    assert code == 2
    assert "weights[0][0]" in err


def test_bad_flags():
    assert run(["model", "circle", "--nodes", "0"])[0] == 2
    assert run(["persist", "rips", "--maxdim", "-1"], "")[0] == 2
    assert run(["frobnicate"])[0] == 2


def test_missing_file():
    code, _, err = run(["cluster", "nr", "/nonexistent/x.json"])
    assert code == 2 and "x.json" in err


def test_epsilon(tmp_path):
    net = {"nodes": ["a", "b", "c"], "weights": [[0, 0.1, 0.2], [0.1, 0, 0.1], [0.2, 0.1, 0]],
           "components": [["a", "b", "c"]]}
    path = write(tmp_path, "n.json", net)
    code, out, _ = run(["epsilon", "check", path, "--eps", "0.2", "--cover", '[["a","b"],["c"]]'])
    assert json.loads(out) == {"is_epsilon_system": True}
    code, out, _ = run(["epsilon", "search", path, "--eps", "0.2"])
    assert json.loads(out) == {"max_min_mass": 1.0, "mode": "exact", "components_declared": True}
    assert run(["epsilon", "check", path, "--eps", "0.2", "--cover", '[["z"]]'])[0] == 2
    assert run(["epsilon", "search", path, "--eps", "0"])[0] == 2


def test_sample_reproducible(circle6):
    a = run(["sample", "--n", "4", "--seed", "9"], circle6)[1]
    b = run(["sample", "--n", "4", "--seed", "9"], circle6)[1]
    assert a == b
    c = run(["sample", "--circle", "--n", "5", "--seed", "2"])[1]
    assert len(json.loads(c)["nodes"]) == 5


def test_experiment(tmp_path, circle6):
    cfg = {"ground_truth": json.loads(circle6), "epsilon": 1.0, "sizes": [3, 6], "trials": 4, "seed": 1}
    path = write(tmp_path, "cfg.json", cfg)
    code, out, _ = run(["experiment", "--config", path])
    rows = json.loads(out)
    assert code == 0 and [r["n"] for r in rows] == [3, 6]
    code, out, _ = run(["experiment", "--config", path, "--csv"])
    assert out.splitlines()[0].startswith("n,trials,empirical_freq")


def test_experiment_continuous_circle_null_bound(tmp_path):
    cfg = {"ground_truth": "circle", "method": "dowker", "epsilon": 0.5, "sizes": [8], "trials": 2, "seed": 0}
    code, out, _ = run(["experiment", "--config", write(tmp_path, "c.json", cfg)])
    assert code == 0
    assert "NaN" not in out
    assert json.loads(out)[0]["bound_raw"] is None


def test_experiment_bad_config(tmp_path):
    assert run(["experiment", "--config", write(tmp_path, "c.json", {"epsilon": 1})])[0] == 2
    bad = {"ground_truth": "circle", "epsilon": 1, "sizes": [3], "trials": 1, "seed": 0}
    assert run(["experiment", "--config", write(tmp_path, "d.json", bad)])[0] == 2


def test_round_trip_byte_identical(circle6, tmp_path):
    path = write(tmp_path, "c.json", circle6)
    out = run(["sample", path, "--n", "1000", "--seed", "0"])[1]
    assert out.strip() == circle6
    assert (tmp_path / "c.json").read_text() == circle6


def test_console_pipeline():
    model = subprocess.run(
        [sys.executable, "-m", "dirnet", "model", "circle", "--nodes", "6"],
        capture_output=True, text=True, check=True,
    )
    res = subprocess.run(
        [sys.executable, "-m", "dirnet", "persist", "dowker-si", "--maxdim", "1"],
        input=model.stdout, capture_output=True, text=True,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)[1]["pairs"] == [[pytest.approx(PI / 3), pytest.approx(PI)]]
