"""Command-line front end.

Every subcommand reads network JSON from a file argument or standard input
and writes JSON to standard output, so commands compose with pipes::

    dirnet model circle --nodes 6 | dirnet persist dowker-si --maxdim 1

Exit status: 0 on success, 2 on invalid input, 3 when a size budget trips.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .clustering import merge_tree, nonreciprocal, reciprocal
from .distance import dn_exact, dn_to_point, dn_upper_linf
from .exceptions import BudgetExceededError, NetworkValidationError
from .network import (
    DirectedCircle,
    FiniteNetwork,
    MeasuredNetwork,
    cycle_network,
    directed_circle,
    network_from_dict,
    network_to_dict,
)
from .persistence import compute_diagrams
from .sampling import (
    CSV_HEADER,
    ExperimentConfig,
    is_epsilon_system,
    max_min_mass,
    rows_to_csv,
    sample_circle,
    sample_iid,
)

EXIT_INPUT = 2
EXIT_BUDGET = 3


class InputError(Exception):
    pass


def _read_text(path, stdin):
    if path in (None, "-"):
        return stdin.read(), "<stdin>"
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read(), path
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _parse_json(text, source):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _load_any(path, stdin):
    text, source = _read_text(path, stdin)
    data = _parse_json(text, source)
    try:
        return network_from_dict(data)
    except NetworkValidationError as exc:
        raise InputError(f"{source}: {exc}") from None


def _load_network(path, stdin):
    net = _load_any(path, stdin)
    return net.network if isinstance(net, MeasuredNetwork) else net


def _load_measured(path, stdin):
    net = _load_any(path, stdin)
    if isinstance(net, FiniteNetwork):
        net = MeasuredNetwork.uniform(net)
    return net


def _emit(obj, out):
    out.write(json.dumps(obj))
    out.write("\n")


def _cmd_cluster(args, stdin, out):
    net = _load_network(args.file, stdin)
    ult = nonreciprocal(net) if args.method == "nr" else reciprocal(net)
    if args.tree:
        _emit(merge_tree(ult).to_dict(), out)
    else:
        _emit(network_to_dict(ult.as_network()), out)


def _cmd_persist(args, stdin, out):
    net = _load_network(args.file, stdin)
    diagrams = compute_diagrams(args.filtration, net.weights, args.maxdim)
    if args.text:
        for dgm in diagrams:
            out.write(f"# dim {dgm.dim}\n")
            if len(dgm):
                out.write(dgm.barcode() + "\n")
    else:
        _emit([d.to_dict() for d in diagrams], out)


def _cmd_dist(args, stdin, out):
    if args.kind == "to-point":
        if len(args.operands) != 2:
            raise InputError("dist to-point takes ALPHA and one network file")
        try:
            alpha = float(args.operands[0])
        except ValueError:
            raise InputError(f"ALPHA must be a number, got {args.operands[0]!r}") from None
        _emit(dn_to_point(_load_network(args.operands[1], stdin), alpha), out)
        return
    if len(args.operands) != 2:
        raise InputError(f"dist {args.kind} takes two network files")
    if args.operands.count("-") > 1:
        raise InputError("at most one operand may come from standard input")
    a = _load_network(args.operands[0], stdin)
    b = _load_network(args.operands[1], stdin)
    if args.kind == "exact":
        _emit(dn_exact(a, b), out)
    else:
        try:
            _emit(dn_upper_linf(a, b.weights), out)
        except NetworkValidationError as exc:
            raise InputError(str(exc)) from None


def _cmd_model(args, stdin, out):
    if args.nodes < 1:
        raise InputError("--nodes must be at least 1")
    net = directed_circle(args.nodes) if args.model == "circle" else cycle_network(args.nodes)
    _emit(network_to_dict(net), out)


def _parse_cover(text, net):
    data = _parse_json(text, "--cover")
    if not isinstance(data, list) or not all(isinstance(b, list) for b in data):
        raise InputError("--cover must be a JSON list of node-id lists")
    pos = {v: i for i, v in enumerate(net.nodes)}
    try:
        return [[pos[v] for v in b] for b in data]
    except KeyError as exc:
        raise InputError(f"--cover mentions unknown node {exc.args[0]!r}") from None


def _cmd_epsilon(args, stdin, out):
    m = _load_measured(args.file, stdin)
    if args.action == "check":
        if args.cover is None:
            raise InputError("epsilon check needs --cover")
        cover = _parse_cover(args.cover, m.network)
        ok = is_epsilon_system(m.network, cover, args.eps, args.refined, m.components)
        _emit({"is_epsilon_system": ok}, out)
    else:
        value = max_min_mass(m, args.eps, args.mode)
        _emit({"max_min_mass": value, "mode": args.mode,
               "components_declared": m.components is not None}, out)


def _cmd_sample(args, stdin, out):
    if args.n < 1:
        raise InputError("--n must be at least 1")
    if args.circle:
        net = sample_circle(args.n, args.seed)
    else:
        net = sample_iid(_load_measured(args.file, stdin), args.n, args.seed)
    _emit(network_to_dict(net), out)


def config_from_dict(data):
    """Build an :class:`ExperimentConfig` from the experiment JSON file."""
    if not isinstance(data, dict):
        raise InputError("experiment config must be a JSON object")
    missing = [k for k in ("ground_truth", "epsilon", "sizes", "trials", "seed") if k not in data]
    if missing:
        raise InputError(f"experiment config: missing field(s) {', '.join(missing)}")
    gt = data["ground_truth"]
    if gt == "circle":
        gt = DirectedCircle()
    else:
        try:
            gt = network_from_dict(gt)
        except NetworkValidationError as exc:
            raise InputError(f"experiment config: field 'ground_truth': {exc}") from None
        if isinstance(gt, FiniteNetwork):
            gt = MeasuredNetwork.uniform(gt)
    try:
        fields = dict(
            epsilon=float(data["epsilon"]),
            sizes=[int(s) for s in data["sizes"]],
            trials=int(data["trials"]),
            seed=int(data["seed"]),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"experiment config: bad numeric field: {exc}") from None
    return ExperimentConfig(ground_truth=gt, method=data.get("method", "dn"), **fields)


def _cmd_experiment(args, stdin, out):
    from .sampling import run_convergence_experiment

    text, source = _read_text(args.config, stdin)
    cfg = config_from_dict(_parse_json(text, source))
    cfg.jobs = args.jobs
    if isinstance(cfg.ground_truth, MeasuredNetwork) and cfg.ground_truth.components is None:
        sys.stderr.write("note: no components declared; the support is treated as one component\n")
    rows = run_convergence_experiment(cfg)
    if args.csv:
        out.write(rows_to_csv(rows))
    else:
        # the continuous circle has no computable bound: report null, not NaN
        _emit([
            {k: (None if isinstance(v, float) and math.isnan(v) else v)
             for k, v in zip(CSV_HEADER, r.as_csv_row())}
            for r in rows
        ], out)


def build_parser():
    parser = argparse.ArgumentParser(prog="dirnet", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="hierarchical clustering -> ultrametric network JSON")
    p.add_argument("method", choices=["nr", "r"], help="nonreciprocal or reciprocal")
    p.add_argument("file", nargs="?", help="network JSON (default: stdin)")
    p.add_argument("--tree", action="store_true", help="emit the merge tree instead")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("persist", help="persistence diagrams as JSON (or --text barcodes)")
    p.add_argument("filtration", choices=["rips", "dowker-si", "dowker-so"])
    p.add_argument("file", nargs="?", help="network JSON (default: stdin)")
    p.add_argument("--maxdim", type=int, default=1, help="top homology dimension (default 1)")
    p.add_argument("--text", action="store_true", help="barcode text, one [b, d) per line")
    p.set_defaults(func=_cmd_persist)

    p = sub.add_parser("dist", help="network distance: exact A B | to-point ALPHA A | linf A B")
    p.add_argument("kind", choices=["exact", "to-point", "linf"])
    p.add_argument("operands", nargs="+", metavar="ARG")
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("model", help="emit a model network")
    p.add_argument("model", choices=["circle", "cycle"])
    p.add_argument("--nodes", type=int, required=True)
    p.set_defaults(func=_cmd_model)

    p = sub.add_parser("epsilon", help="check a cover or search for the best minimal mass")
    p.add_argument("action", choices=["check", "search"])
    p.add_argument("file", nargs="?", help="network JSON (default: stdin)")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--cover", help="JSON list of node-id lists (check)")
    p.add_argument("--refined", action="store_true", help="require blocks inside components (check)")
    p.add_argument("--mode", choices=["exact", "greedy"], default="exact", help="search mode")
    p.set_defaults(func=_cmd_epsilon)

    p = sub.add_parser("sample", help="seeded i.i.d. sample as network JSON")
    p.add_argument("file", nargs="?", help="network JSON with optional measure (default: stdin)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--circle", action="store_true", help="sample the continuous directed circle")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("experiment", help="run a convergence experiment from a JSON config")
    p.add_argument("--config", required=True, help="experiment JSON ('-' for stdin)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None, stdin=None, stdout=None, stderr=None):
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "eps", 1.0) is not None and getattr(args, "eps", 1.0) <= 0:
        stderr.write("dirnet: --eps must be positive\n")
        return EXIT_INPUT
    if getattr(args, "maxdim", 0) < 0 or getattr(args, "jobs", 1) < 1:
        stderr.write("dirnet: --maxdim must be >= 0 and --jobs >= 1\n")
        return EXIT_INPUT
    try:
        args.func(args, stdin, stdout)
    except (InputError, NetworkValidationError) as exc:
        stderr.write(f"dirnet: {exc}\n")
        return EXIT_INPUT
    except BudgetExceededError as exc:
        stderr.write(f"dirnet: budget {exc.guard} exceeded: {exc}\n")
        return EXIT_BUDGET
    return 0


def run():
    sys.exit(main())
