"""``dconvex`` command-line tool.

Exit codes: 0 success, 1 internal error, 2 usage or input error, 3 a
correctness invariant was breached (probability deviation above tolerance).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__
from .bn import DiscreteBn
from .convexity import cmdsa
from .dag import Dag
from .errors import DconvexError
from .experiments import Report, compare, drc_network, drc_random, generate, learn_eval
from .netio import load_network, write_bif, write_edges, write_json

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_BREACH = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, net_required: bool = False):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--net", required=net_required,
                   help="network file, or the name of a bundled network such as 'alarm'")
    p.add_argument("--format", choices=["bif", "json", "edges"],
                   help="network file format (default: guessed from the extension)")
    p.add_argument("--out", help="write the report here (.csv for CSV, anything else for JSON)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--budget-secs", type=float, default=None,
                   help="stop starting new units after this many seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dconvex",
                                     description="d-convex hulls and hull-based inference for Bayesian networks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hull", help="d-convex hull of a set of named vertices")
    _common(p, net_required=True)
    p.add_argument("query", nargs="+", help="vertex names")

    p = sub.add_parser("drc", help="dimension-reduction capability experiment")
    _common(p)
    p.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 600, 800])
    p.add_argument("--p", type=float, default=0.01, help="edge probability for random DAGs")
    p.add_argument("--nets", type=int, default=50, help="random networks per size")
    p.add_argument("--queries", type=int, default=20, help="query sets per network")
    p.add_argument("--r-min", type=int, default=2)
    p.add_argument("--r-max", type=int, default=8)

    p = sub.add_parser("compare", help="global VE against hull + local VE")
    _common(p, net_required=True)
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-9, help="maximum allowed probability deviation")

    p = sub.add_parser("learn-eval", help="KL of hull models fitted from samples")
    _common(p)
    p.add_argument("--sizes", type=int, nargs="+", default=[20, 40, 60, 80, 100])
    p.add_argument("--p-extra", type=float, nargs="+", default=[0.1, 0.05, 0.01, 0.005])
    p.add_argument("--nets", type=int, default=10)
    p.add_argument("--queries", type=int, default=5)
    p.add_argument("--q-size", type=int, default=5)
    p.add_argument("--samples", type=int, nargs="+", default=[1000, 5000])
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--extra", choices=["pair", "vertex"], default="pair",
                   help="how extra tree edges are drawn (see random_tree_dag)")
    p.add_argument("--cardinality", type=int, default=2)

    p = sub.add_parser("gen", help="write random networks with random CPTs")
    _common(p)
    p.add_argument("--kind", choices=["er", "tree"], default="er")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.01, help="edge (or extra-edge) probability")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--cardinality", type=int, default=2)
    p.add_argument("--max-parents", type=int, default=3)
    p.add_argument("--extra", choices=["pair", "vertex"], default="pair")
    return parser


def _positive(args, *names):
    for name in names:
        v = getattr(args, name, None)
        vals = v if isinstance(v, list) else [v]
        if any(x is None or x <= 0 for x in vals):
            raise UsageError(f"--{name.replace('_', '-')} must be positive")


def _load(args):
    try:
        return load_network(args.net, args.format)
    except (OSError, KeyError) as e:
        raise UsageError(f"cannot load network {args.net!r}: {e}") from e
    except DconvexError as e:
        raise UsageError(f"cannot load network {args.net!r}: {e}") from e


def _emit(report: Report, out):
    if out:
        text = report.to_csv() if str(out).lower().endswith(".csv") else report.to_json()
        Path(out).write_text(text, encoding="utf-8", newline="")
    for agg in report.aggregates:
        print(json.dumps(agg, sort_keys=True))
    if report.partial:
        print("warning: time budget exhausted, report is partial", file=sys.stderr)


def cmd_hull(args) -> int:
    net = _load(args)
    g = net if isinstance(net, Dag) else net.dag
    unknown = [s for s in args.query if s not in g.names]
    if unknown:
        raise UsageError(f"unknown vertex name(s): {', '.join(unknown)}")
    res = cmdsa(g, g.vertex_set(args.query))
    row = {"network": getattr(net, "name", args.net), "query": sorted(args.query),
           "hull": res.names(g), "hull_size": len(res.hull), "drc": float(res.drc),
           "drc_exact": str(res.drc), "iterations": res.iterations}
    print(f"hull: {' '.join(row['hull'])}")
    print(f"drc: {row['drc']:.6g} ({res.drc})")
    print(f"iterations: {res.iterations}")
    if args.out:
        Path(args.out).write_text(json.dumps(row, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_drc(args) -> int:
    _positive(args, "nets", "queries", "r_min", "r_max", "jobs")
    if args.r_min > args.r_max:
        raise UsageError("--r-min exceeds --r-max")
    if args.net:
        net = _load(args)
        g = net if isinstance(net, Dag) else net.dag
        label = getattr(net, "name", Path(args.net).stem)
        report = drc_network(g, label, args.queries, args.r_min, args.r_max, args.seed)
    else:
        _positive(args, "sizes")
        if not 0 <= args.p <= 1:
            raise UsageError("--p must lie in [0, 1]")
        report = drc_random(args.sizes, args.p, args.nets, args.queries, args.r_min, args.r_max,
                            args.seed, args.jobs, args.budget_secs)
    _emit(report, args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    _positive(args, "queries")
    net = _load(args)
    if not isinstance(net, DiscreteBn):
        raise UsageError("compare needs a network with CPTs (bif or json)")
    report = compare(net, args.queries, args.seed, args.tol, args.budget_secs)
    _emit(report, args.out)
    if not report.aggregates[0]["within_tolerance"]:
        print(f"error: probability deviation {report.aggregates[0]['max_deviation']!r} "
              f"exceeds {args.tol!r}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def cmd_learn_eval(args) -> int:
    _positive(args, "sizes", "nets", "queries", "q_size", "samples", "jobs", "cardinality")
    if any(not 0 <= p <= 1 for p in args.p_extra):
        raise UsageError("--p-extra values must lie in [0, 1]")
    if args.smoothing < 0:
        raise UsageError("--smoothing must be non-negative")
    report = learn_eval(args.sizes, args.p_extra, args.nets, args.queries, args.q_size,
                        args.samples, args.smoothing, args.extra, args.cardinality, args.seed,
                        args.jobs, args.budget_secs)
    _emit(report, args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    _positive(args, "n", "count", "cardinality", "max_parents")
    if not 0 <= args.p <= 1:
        raise UsageError("--p must lie in [0, 1]")
    fmt = args.format or "json"
    nets = generate(args.kind, args.n, args.p, args.count, args.cardinality, args.max_parents,
                    args.seed, args.extra)
    suffix = {"json": ".json", "bif": ".bif", "edges": ".edges"}[fmt]
    writer = {"json": write_json, "bif": write_bif, "edges": lambda bn: write_edges(bn.dag)}[fmt]
    if args.out is None:
        for bn in nets:
            sys.stdout.write(writer(bn))
        return EXIT_OK
    out = Path(args.out)
    if args.count == 1 and out.suffix:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(writer(nets[0]), encoding="utf-8")
    else:
        out.mkdir(parents=True, exist_ok=True)
        for bn in nets:
            (out / (bn.name + suffix)).write_text(writer(bn), encoding="utf-8")
    return EXIT_OK


COMMANDS = {"hull": cmd_hull, "drc": cmd_drc, "compare": cmd_compare,
            "learn-eval": cmd_learn_eval, "gen": cmd_gen}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    warnings.simplefilter("default")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"dconvex: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001 - reported as an internal error
        print(f"dconvex: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
