"""Command line: ``stlflow compile|solve|bench``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import (
    ENCODINGS,
    Scenario,
    compile_instance,
    decode_plan,
    format_summary,
    model_stats,
    run_benchmark,
    run_one,
)
from .model import export_lp


def _seeds(text: str) -> list:
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(s) for s in text.split(",") if s]


def cmd_compile(args) -> int:
    sc = Scenario.load(args.scenario)
    inst = sc.instantiate(args.seed)
    model, extra = compile_instance(inst, args.encoding, **sc.encoding_options)
    if args.export_lp:
        Path(args.export_lp).write_text(export_lp(model))
    if args.stats or not args.export_lp:
        print(json.dumps(model_stats(model, extra), sort_keys=True))
    return 0


def cmd_solve(args) -> int:
    sc = Scenario.load(args.scenario)
    rec, res, inst, model = run_one(
        sc, args.seed, args.encoding, args.trace_out,
        time_limit=args.time_limit, gap_tol=args.gap, node_limit=args.node_limit,
        lp_method=args.lp_method,
    )
    out = {k: getattr(rec, k) for k in rec.__dataclass_fields__}
    out["best_bound"] = res.best_bound
    out["root_bound"] = res.root_bound
    if res.x is not None:
        out["plan"] = decode_plan(inst, model, res.x)
    print(json.dumps(out, default=str))
    return 0 if rec.status == "optimal" else 1


def cmd_bench(args) -> int:
    sc = Scenario.load(args.scenario)
    seeds = _seeds(args.seeds) if args.seeds else None
    encs = [e.strip() for e in args.encodings.split(",")]
    for e in encs:
        if e not in ENCODINGS:
            raise SystemExit(f"unknown encoding {e!r}")
    records = run_benchmark(
        sc, seeds, encs, args.out,
        time_limit=args.time_limit, node_limit=args.node_limit, lp_method=args.lp_method,
    )
    sys.stdout.write(format_summary(records))
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="stlflow", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="build the model and report its size")
    c.add_argument("--scenario", required=True)
    c.add_argument("--encoding", choices=ENCODINGS, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--export-lp", metavar="PATH")
    c.add_argument("--stats", action="store_true")
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("solve", help="solve one seed with branch and bound")
    s.add_argument("--scenario", required=True)
    s.add_argument("--encoding", choices=ENCODINGS, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace-out", metavar="PATH")
    s.add_argument("--time-limit", type=float)
    s.add_argument("--node-limit", type=int)
    s.add_argument("--gap", type=float)
    s.add_argument("--lp-method", choices=("simplex", "highs"))
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run both encodings over a seed range")
    b.add_argument("--scenario", required=True)
    b.add_argument("--seeds", help="a..b or comma list (default: scenario seeds)")
    b.add_argument("--encodings", default="tree,flow")
    b.add_argument("--out", required=True)
    b.add_argument("--time-limit", type=float)
    b.add_argument("--node-limit", type=int)
    b.add_argument("--lp-method", choices=("simplex", "highs"))
    b.set_defaults(func=cmd_bench)

    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
