"""Step-count statistics for the register and LL/SC objects.

An operation's step count is the number of primitives it applied (recorded
by the simulator as the ``steps`` annotation).  The claim under test is that
every operation takes at most ``C * (m + n)`` steps for a fixed ``C``.
"""

from __future__ import annotations

import statistics
from collections import defaultdict

import numpy as np

from .sim import RandomSchedule, run
from .workloads import RunConfig, build

#: Frozen bound.  The longest READ path is 21 steps (fast path plus three
#: full loop iterations), so at m+n = 2 that needs C >= 10.5; WRITE takes at
#: most 2m+5 steps and AUDIT 3.  Random 1000-op workloads at m+n = 2..16 peak
#: at C = 7.5 (a 15-step READ at m+n = 2).
STEP_BOUND_C = 11

#: Tolerated superlinear share of the fitted max-steps curve.
SUPERLINEAR_TOLERANCE = 0.05


def split(size: int) -> tuple[int, int]:
    """Writers and readers for a register with ``size = m + n`` processes."""
    n = max(1, size // 2)
    return n, size - n


def step_counts(cfg: RunConfig, seed: int | None = None) -> dict[str, list[int]]:
    obj, progs = build(cfg)
    trace = run(obj, progs, RandomSchedule(cfg.seed if seed is None else seed))
    out: dict[str, list[int]] = defaultdict(list)
    for op in trace.operations():
        if op.complete:
            out[op.op].append(op.ann["steps"])
    return dict(out)


def workload(obj: str, size: int, total_ops: int = 1000, seed: int = 0) -> RunConfig:
    if obj == "llsc":
        per = -(-total_ops // size)
        return RunConfig(object="llsc", writers=size, ops_per_proc=per, mix="random", seed=seed)
    n, m = split(size)
    per = -(-total_ops // size)
    return RunConfig(object="register", writers=n, readers=m, ops_per_proc=per,
                     mix="random", seed=seed)


def summarize(counts: dict[str, list[int]], size: int) -> dict:
    rows = {}
    for kind, xs in sorted(counts.items()):
        rows[kind] = {"ops": len(xs), "max": max(xs), "mean": round(statistics.fmean(xs), 3),
                      "c": round(max(xs) / size, 3)}
    return rows


def growth_check(sizes: list[int], maxima: list[float]) -> dict:
    """Fit max-steps against size with a quadratic and measure its superlinear part.

    ``share`` is the quadratic term's contribution at the largest size relative
    to the linear fit's value there; linear growth means ``share`` stays under
    :data:`SUPERLINEAR_TOLERANCE`.
    """
    s = np.asarray(sizes, dtype=float)
    y = np.asarray(maxima, dtype=float)
    slope, intercept = np.polyfit(s, y, 1)
    quad = np.polyfit(s, y, 2)[0]
    top = s.max()
    linear_at_top = intercept + slope * top
    share = max(0.0, quad) * top * top / max(linear_at_top, 1e-9)
    residual = float(np.sqrt(np.mean((y - (intercept + slope * s)) ** 2)))
    return {"slope": float(slope), "intercept": float(intercept), "quad": float(quad),
            "share": float(share), "rms_residual": residual,
            "linear": bool(share <= SUPERLINEAR_TOLERANCE)}


def sweep(obj: str = "register", sizes: range = range(2, 17), total_ops: int = 1000,
          seed: int = 0) -> dict:
    per_size = {}
    for size in sizes:
        per_size[size] = summarize(step_counts(workload(obj, size, total_ops, seed)), size)
    kinds = sorted({k for rows in per_size.values() for k in rows})
    growth = {}
    for kind in kinds:
        pts = [(size, rows[kind]["max"]) for size, rows in per_size.items() if kind in rows]
        if len(pts) >= 3:
            growth[kind] = growth_check([p[0] for p in pts], [p[1] for p in pts])
    worst = max(rows[k]["c"] for rows in per_size.values() for k in rows)
    return {"sizes": per_size, "growth": growth, "worst_c": worst, "bound_c": STEP_BOUND_C,
            "within_bound": worst <= STEP_BOUND_C}
