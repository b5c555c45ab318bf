"""
Command-line entry point.

    cliquesplit spectrum         [--config FILE] [--seed S] [--n N] [--p P] [--out DIR]
    cliquesplit resource-alloc   [--config FILE] [--seed S] [--iters K] [--out DIR]
    cliquesplit consensus-lasso  [--config FILE] [--seed S] [--graph-seed G] [--iters K] [--out DIR]
    cliquesplit solve CONFIG     [--out DIR]
    cliquesplit gen-graph        --n N --p P --seed S --out FILE

``--strict`` makes the exit code nonzero when an invariant monitor fails.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import CliqueSplitError
from ..graph import erdos_renyi, write_graph
from .config import ExperimentKind, config_from_dict, load_config
from .experiments import run_experiment
from .io import write_table

EXIT_INVARIANT = 1
EXIT_ERROR = 2


def _config(args, kind, defaults):
    if args.config:
        cfg = load_config(args.config)
        if cfg.kind is not kind:
            raise CliqueSplitError(f"config kind is {cfg.kind.value}, expected {kind.value}")
    else:
        cfg = config_from_dict(defaults(args))
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    return cfg


def _spectrum_defaults(a):
    return {"kind": "spectrum_study",
            "graph": {"generator": "erdos_renyi", "n": a.n, "p": a.p, "seed": a.seed},
            "seeds": {"graph": a.seed}, "output_dir": "results"}


def _resource_defaults(a):
    return {"kind": "resource_allocation", "seeds": {"data": a.seed},
            "params": {"iters": a.iters}, "output_dir": "results"}


def _lasso_defaults(a):
    return {"kind": "consensus_lasso",
            "graph": {"generator": "erdos_renyi", "n": a.n, "p": a.p, "seed": a.graph_seed},
            "seeds": {"data": a.seed, "graph": a.graph_seed},
            "params": {"iters": a.iters}, "output_dir": "results"}


def build_parser():
    ap = argparse.ArgumentParser(prog="cliquesplit", description=__doc__.split("\n")[1].strip() or None)
    ap.add_argument("--strict", action="store_true", help="nonzero exit if an invariant monitor fails")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="spectra of Phi and comparison mixing matrices")
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=50)
    sp.add_argument("--p", type=float, default=0.2)
    sp.add_argument("--out")

    ra = sub.add_parser("resource-alloc", help="CD-DYS on the resource allocation problem")
    ra.add_argument("--config")
    ra.add_argument("--seed", type=int, default=0)
    ra.add_argument("--iters", type=int, default=5000)
    ra.add_argument("--out")

    cl = sub.add_parser("consensus-lasso", help="NIDS with five mixing matrices on consensus lasso")
    cl.add_argument("--config")
    cl.add_argument("--seed", type=int, default=0)
    cl.add_argument("--graph-seed", type=int, default=0)
    cl.add_argument("--n", type=int, default=50)
    cl.add_argument("--p", type=float, default=0.2)
    cl.add_argument("--iters", type=int, default=300)
    cl.add_argument("--out")

    so = sub.add_parser("solve", help="run an experiment from a JSON config")
    so.add_argument("config")
    so.add_argument("--out")

    gg = sub.add_parser("gen-graph", help="write a seeded connected G(n, p) edge list")
    gg.add_argument("--n", type=int, required=True)
    gg.add_argument("--p", type=float, required=True)
    gg.add_argument("--seed", type=int, required=True)
    gg.add_argument("--out", required=True)
    gg.add_argument("--allow-disconnected", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-graph":
            g = erdos_renyi(args.n, args.p, args.seed, connected=not args.allow_disconnected)
            write_graph(g, args.out)
            print(f"wrote {args.out}: n={g.n}, {len(g.edges)} edges")
            return 0
        if args.command == "solve":
            cfg = load_config(args.config)
            if args.out:
                cfg.output_dir = args.out
        else:
            kind, defaults = {
                "spectrum": (ExperimentKind.SPECTRUM_STUDY, _spectrum_defaults),
                "resource-alloc": (ExperimentKind.RESOURCE_ALLOCATION, _resource_defaults),
                "consensus-lasso": (ExperimentKind.CONSENSUS_LASSO, _lasso_defaults),
            }[args.command]
            cfg = _config(args, kind, defaults)
        table = run_experiment(cfg)
        paths = write_table(table, cfg.output_dir)
    except (CliqueSplitError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    for name, rep in table.runs.items():
        last = rep.residual[-1] if rep.residual else float("nan")
        print(f"{name}: {rep.iterations} iterations, final residual {last:.3e}")
    failed = [k for k, v in table.invariants.items() if not v]
    for k in failed:
        print(f"invariant failed: {k}", file=sys.stderr)
    print(f"wrote {len(paths)} files to {cfg.output_dir}")
    if args.strict and failed:
        return EXIT_INVARIANT
    return 0


if __name__ == "__main__":
    sys.exit(main())
