"""Command line entry point: ``qcost analyze`` and ``qcost oracle``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

import numpy as np

from . import oracle
from .certificate import SolverError
from .driver import AnalysisConfig, analyze, count_gate, count_iterations, result_json
from .frontend import FrontendError, UnsupportedFeature, load_file
from .frontend.ast import Program

EXIT_BOUND = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_UNKNOWN = 10


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcost", description="Expected-cost bounds for IMQ programs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    a = sub.add_parser("analyze", help="infer an upper bound on the expected cost")
    a.add_argument("file")
    a.add_argument("--json", metavar="PATH", help="write the result as JSON ('-' for stdout)")
    a.add_argument("--emit-smt", metavar="DIR", help="write every constraint system as SMT-LIB2")
    a.add_argument("--dump-terms", action="store_true")
    a.add_argument("--dump-constraints", action="store_true")
    a.add_argument("--solver", metavar="PATH", help="SMT solver binary (default: $QCOST_SOLVER or z3)")
    a.add_argument("--backend", choices=("auto", "smt"), default="auto",
                   help="auto: linear programming with exact reconstruction, SMT as fallback")
    a.add_argument("--timeout", type=float, default=10.0, metavar="SECS", help="per solver call")
    a.add_argument("--budget", type=float, default=120.0, metavar="SECS", help="whole analysis")
    a.add_argument("--max-degree", type=int, default=3, metavar="N")
    a.add_argument("--density-level", type=int, choices=(0, 1, 2), default=1)
    a.add_argument("--count-gate", metavar="G", help="charge one unit per application of gate G")
    a.add_argument("--count-iterations", action="store_true", help="charge one unit per loop iteration")

    o = sub.add_parser("oracle", help="truncated expected cost by numeric simulation")
    o.add_argument("file")
    o.add_argument("--samples", type=int, default=1)
    o.add_argument("--depth", type=int, default=512, help="unrollings per loop entry")
    o.add_argument("--state", metavar="FILE", help="JSON initial state; random states otherwise")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--count-gate", metavar="G")
    o.add_argument("--count-iterations", action="store_true")
    return ap


def _instrument(prog: Program, args) -> Program:
    body = prog.body
    if args.count_gate:
        body = count_gate(body, args.count_gate)
    if args.count_iterations:
        body = count_iterations(body)
    return Program(prog.decls, body, {})


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_analyze(args) -> int:
    try:
        prog = _instrument(load_file(args.file), args)
    except OSError as exc:
        print(f"qcost: cannot read {args.file}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedFeature as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        print("Unknown (unsupported input)")
        if args.json:
            _write_json(args.json, json.dumps({
                "outcome": "Unknown", "bound_text": None, "reason": "unsupported", "diagnostic": exc.msg,
                "per_loop": [], "stats": {"constraints": 0, "smt_calls": 0, "attempts": 0, "wall_ms": 0.0},
            }, indent=2, sort_keys=True))
        return EXIT_UNKNOWN
    except FrontendError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = AnalysisConfig(
        timeout=args.timeout, budget=args.budget, solver=args.solver, backend=args.backend,
        max_degree=max(1, args.max_degree), density_level=args.density_level,
        max_density_level=max(args.density_level, 2), emit_smt=args.emit_smt,
        dump_terms=args.dump_terms, dump_constraints=args.dump_constraints,
    )
    try:
        res = analyze(prog, cfg, _stem(args.file))
    except SolverError as exc:
        print(f"qcost: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for d in res.dumps:
        print(d)
    for r in res.per_loop:
        print(f"{r.loc}: {r.invariant_text}")
    if res.outcome == "Bound":
        print(f"Bound: {res.bound_text}")
    else:
        print(f"Unknown ({res.reason})")
    if args.json:
        _write_json(args.json, result_json(res))
    return EXIT_BOUND if res.outcome == "Bound" else EXIT_UNKNOWN


def _write_json(path: str, text: str) -> None:
    if path == "-":
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_oracle(args) -> int:
    try:
        prog = _instrument(load_file(args.file), args)
        fixed = oracle.load_state(args.state, prog) if args.state else None
    except OSError as exc:
        print(f"qcost: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FrontendError, ValueError, KeyError) as exc:
        print(f"qcost: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rng = np.random.default_rng(args.seed)
    for i in range(max(1, args.samples)):
        store, rho = fixed if fixed else oracle.sample_state(prog, rng)
        run = oracle.expected_cost(prog, store, rho, args.depth)
        print(json.dumps({"sample": i, "cost": run.cost, "terminated": run.terminated,
                          "truncated": run.truncated, "dropped": run.dropped,
                          "classical": store}, sort_keys=True))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.cmd == "analyze":
        return cmd_analyze(args)
    return cmd_oracle(args)


if __name__ == "__main__":
    sys.exit(main())
