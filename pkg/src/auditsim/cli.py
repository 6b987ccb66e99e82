"""Command-line front end: run, check, explore, bench.

Exit codes: 0 ok, 1 not linearizable, 2 config or parse error, 3 runtime
assertion or step-bound violation, 4 checkers disagree, 5 a failing trace
found by explore, 6 interleaving or search cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import defaultdict
from typing import Any

from . import bench
from .base import WTuple
from .checker import Verdict, certify, check_bruteforce, spec_for
from .sim import (
    BudgetExceeded,
    Exhaustive,
    RandomSchedule,
    RoundRobin,
    ScheduleExhausted,
    Trace,
    WellFormedness,
    explore,
    run,
)
from .traceio import emit_trace, parse_trace
from .workloads import ConfigError, RunConfig, build, consensus_problems

EXIT_OK, EXIT_NONLIN, EXIT_CONFIG, EXIT_RUNTIME, EXIT_DISAGREE, EXIT_FAILING, EXIT_CAP = range(7)

CERTIFIABLE = ("register", "llsc")


def _cap(args: argparse.Namespace) -> int | None:
    env = os.environ.get("AUDITSIM_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"AUDITSIM_CAP must be an integer, got {env!r}") from None
    return args.cap


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        object=args.object, writers=args.writers, readers=args.readers, auditors=args.auditors,
        resources=args.resources, procs=args.procs, ops_per_proc=args.ops_per_proc,
        mix=args.mix, seed=args.seed,
    )
    cfg.validate()
    return cfg


def _schedule(args: argparse.Namespace) -> Any:
    if args.schedule == "rr":
        return RoundRobin()
    if args.schedule == "random":
        return RandomSchedule(args.seed)
    return Exhaustive(args.depth)


def _write_trace(trace: Trace, path: str | None) -> None:
    if path is None or path == "-":
        emit_trace(trace, sys.stdout)
        return
    with open(path, "w", encoding="utf-8") as fh:
        emit_trace(trace, fh)


def check_trace(trace: Trace, mode: str = "both", spec_name: str | None = None,
                budget: int | None = None) -> tuple[int, dict]:
    """Check one trace; returns ``(exit code, verdict json)``."""
    kind = trace.meta.get("object", {}).get("kind", spec_name)
    spec = spec_for(trace.meta, spec_name)
    if mode != "bruteforce" and (kind not in CERTIFIABLE or trace.meta.get("mode") == "threads"):
        if mode == "certify":
            raise ConfigError(f"the certifying linearizer does not handle {kind!r} traces")
        mode = "bruteforce"
    verdicts: dict[str, Verdict] = {}
    if mode in ("bruteforce", "both"):
        verdicts["bruteforce"] = check_bruteforce(trace, spec, **({"budget": budget} if budget else {}))
    if mode in ("certify", "both"):
        verdicts["certify"] = certify(trace, spec)
    first = next(iter(verdicts.values()))
    out = first.to_json()
    if len(verdicts) > 1:
        out["checkers"] = {k: v.to_json() for k, v in verdicts.items()}
        if len({v.linearizable for v in verdicts.values()}) > 1:
            return EXIT_DISAGREE, out
    return (EXIT_OK if first.linearizable else EXIT_NONLIN), out


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _config(args)
    obj, progs = build(cfg)
    try:
        trace = run(obj, progs, _schedule(args))
    except ScheduleExhausted as exc:
        print(f"warning: {exc}", file=sys.stderr)
        trace = exc.trace
    trace.meta["config"] = cfg.as_dict()
    _write_trace(trace, args.trace)
    if cfg.object == "consensus":
        problems = consensus_problems(trace)
        if problems:
            print("; ".join(problems), file=sys.stderr)
            return EXIT_RUNTIME
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    try:
        with open(args.path, encoding="utf-8") as fh:
            trace = parse_trace(fh)
        trace.operations()
    except (OSError, ValueError) as exc:
        print(f"cannot read trace: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, verdict = check_trace(trace, args.mode, args.spec, _cap(args))
    print(json.dumps(verdict, default=repr))
    return code


def _llsc_collisions(trace: Trace) -> str | None:
    """Among SCs whose w-tuples share a cell, exactly one may succeed."""
    by_cell: dict[str, list] = defaultdict(list)
    for op in trace.operations():
        if op.op != "sc" or not op.complete:
            continue
        for ev in op.prims:
            if ev.op == "write" and isinstance(ev.args[0], WTuple):
                by_cell[ev.obj].append(op.result)
    for cell, results in by_cell.items():
        if len(results) > 1 and sum(1 for r in results if r) != 1:
            return f"{cell}: SC results {results}"
    return None


def cmd_explore(args: argparse.Namespace) -> int:
    cfg = _config(args)
    obj, progs = build(cfg)
    cap = _cap(args)
    stats: dict[str, Any] = {"traces": 0, "max_loop_iters": 0, "max_steps": {}}
    try:
        for trace in explore(obj, progs, depth=args.depth, cap=cap, memo=True, reduce=True):
            stats["traces"] += 1
            for op in trace.operations():
                stats["max_loop_iters"] = max(stats["max_loop_iters"], op.ann.get("loop_iters", 0))
                if op.complete:
                    prev = stats["max_steps"].get(op.op, 0)
                    stats["max_steps"][op.op] = max(prev, op.ann.get("steps", 0))
            problem = None
            if cfg.object == "consensus":
                problems = consensus_problems(trace)
                problem = "; ".join(problems) if problems else None
            else:
                code, verdict = check_trace(trace, args.mode)
                if code != EXIT_OK:
                    problem = verdict
                elif cfg.object == "llsc":
                    problem = _llsc_collisions(trace)
            if problem is not None:
                print(json.dumps({"failing_trace": stats["traces"], "problem": problem},
                                 default=repr))
                if args.trace:
                    _write_trace(trace, args.trace)
                return EXIT_FAILING
    except BudgetExceeded as exc:
        print(f"BudgetExceeded: {exc}; no claim is made about the unexplored interleavings",
              file=sys.stderr)
        return EXIT_CAP
    print(json.dumps(stats, sort_keys=True))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.object not in CERTIFIABLE:
        raise ConfigError("bench supports --object register or llsc")
    if args.sweep:
        report = bench.sweep(args.object, range(2, args.sweep + 1), args.total_ops, args.seed)
        print(json.dumps(report, sort_keys=True))
        ok = report["within_bound"] and all(g["linear"] for g in report["growth"].values())
        return EXIT_OK if ok else EXIT_RUNTIME
    cfg = _config(args)
    size = cfg.writers if cfg.object == "llsc" else cfg.writers + cfg.readers
    if args.total_ops:
        cfg.ops_per_proc = -(-args.total_ops // size)
    rows = bench.summarize(bench.step_counts(cfg), size)
    worst = max(r["c"] for r in rows.values())
    print(json.dumps({"size": size, "ops": rows, "worst_c": worst, "bound_c": bench.STEP_BOUND_C},
                     sort_keys=True))
    return EXIT_OK if worst <= bench.STEP_BOUND_C else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--object", choices=["register", "llsc", "denylist", "consensus"],
                        default="register")
    common.add_argument("--writers", type=int, default=1, help="n (llsc: process count)")
    common.add_argument("--readers", type=int, default=1, help="m")
    common.add_argument("--auditors", type=int, default=0)
    common.add_argument("--resources", type=int, default=1, help="deny-list resources")
    common.add_argument("--procs", type=int, default=2, help="deny-list/consensus processes")
    common.add_argument("--ops-per-proc", type=int, default=1)
    common.add_argument("--mix", choices=["fixed", "random"], default="fixed",
                        help="fixed role scripts or random role-legal op draws")
    common.add_argument("--schedule", choices=["rr", "random", "exhaustive"], default="rr")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--depth", type=int, default=None, help="exhaustive step bound")
    common.add_argument("--trace", default=None, help="trace output path (default stdout)")
    common.add_argument("--mode", choices=["bruteforce", "certify", "both"], default="both")
    common.add_argument("--cap", type=int, default=None,
                        help="interleaving / search-node cap (AUDITSIM_CAP overrides)")

    parser = argparse.ArgumentParser(prog="auditsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run one workload and write its trace")
    p_check = sub.add_parser("check", parents=[common], help="check a JSONL trace")
    p_check.add_argument("path")
    p_check.add_argument("--spec", choices=["register", "llsc", "denylist"], default=None)
    sub.add_parser("explore", parents=[common], help="check every interleaving")
    p_bench = sub.add_parser("bench", parents=[common], help="step-count statistics")
    p_bench.add_argument("--total-ops", type=int, default=1000)
    p_bench.add_argument("--sweep", type=int, default=0,
                         help="report m+n = 2..SWEEP with a linear-growth fit")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    handler = {"run": cmd_run, "check": cmd_check, "explore": cmd_explore,
               "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except (ConfigError, WellFormedness) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"BudgetExceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except AssertionError as exc:
        print(f"runtime assertion failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
