"""Brute-force linearizability checking for small histories.

Depth-first search over the operations that are minimal in real-time order,
memoizing failed ``(linearized set, spec state)`` pairs.  Pending operations
may be linearized with whatever response the sequential specification gives, or left out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..sim import BudgetExceeded, Operation, Trace


@dataclass
class Verdict:
    linearizable: bool
    witness: list[int] | None = None
    violation: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"linearizable": self.linearizable, "witness": self.witness,
                "violation": self.violation}


def _ops(history: Trace | list[Operation]) -> list[Operation]:
    return history.operations() if isinstance(history, Trace) else list(history)


def search(ops: list[Operation], spec: Any, budget: int = 1_000_000) -> list[int] | None:
    """Return a witness order (opids) or ``None``; raise BudgetExceeded past ``budget`` nodes."""
    n = len(ops)
    done_mask = 0
    for i, op in enumerate(ops):
        if op.complete:
            done_mask |= 1 << i
    preds = []
    for op in ops:
        mask = 0
        for j, other in enumerate(ops):
            if other.complete and other.respond < op.invoke:
                mask |= 1 << j
        preds.append(mask)

    failed: set = set()
    nodes = 0

    def dfs(mask: int, state: Any) -> list[int] | None:
        nonlocal nodes
        if mask & done_mask == done_mask:
            return []
        key = (mask, state)
        if key in failed:
            return None
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"linearizability search exceeded {budget} nodes")
        for i in range(n):
            if mask >> i & 1 or preds[i] & ~mask:
                continue
            op = ops[i]
            resp, nxt = spec.step(state, op.proc, op.op, op.args)
            if op.complete and resp != op.result:
                continue
            rest = dfs(mask | 1 << i, nxt)
            if rest is not None:
                return [i] + rest
        failed.add(key)
        return None

    order = dfs(0, spec.initial())
    return None if order is None else [ops[i].opid for i in order]


def prefix_ops(ops: list[Operation], cut: int) -> list[Operation]:
    """Operations as seen in the history prefix ending before event seq ``cut``."""
    out = []
    for op in ops:
        if op.invoke >= cut:
            continue
        if op.complete and op.respond < cut:
            out.append(op)
        else:
            out.append(Operation(op.opid, op.proc, op.op, op.args, op.invoke))
    return out


def minimal_failing_prefix(ops: list[Operation], spec: Any, budget: int = 1_000_000) -> dict:
    """Shortest history prefix that is already not linearizable (found by bisection)."""
    cuts = sorted({op.invoke for op in ops} | {op.respond for op in ops if op.complete})
    lo, hi = 0, len(cuts) - 1  # the full history (cuts[-1] included) fails
    while lo < hi:
        mid = (lo + hi) // 2
        if search(prefix_ops(ops, cuts[mid] + 1), spec, budget) is None:
            hi = mid
        else:
            lo = mid + 1
    prefix = prefix_ops(ops, cuts[lo] + 1)
    return {"last_seq": cuts[lo], "history_events": lo + 1,
            "ops": [op.opid for op in prefix]}


def check_bruteforce(history: Trace | list[Operation], spec: Any,
                     budget: int = 1_000_000) -> Verdict:
    ops = _ops(history)
    witness = search(ops, spec, budget)
    if witness is not None:
        return Verdict(True, witness=witness)
    return Verdict(False, violation=minimal_failing_prefix(ops, spec, budget))


def replay(ops_by_id: dict[int, Operation], order: list[int], spec: Any) -> str | None:
    """Check a total order against real time and the sequential specification; return a reason or None."""
    pos = {opid: i for i, opid in enumerate(order)}
    if len(pos) != len(order):
        return "an operation appears twice"
    for op in ops_by_id.values():
        if op.complete and op.opid not in pos:
            return f"complete operation {op.opid} missing"
    for a in order:
        for b in order[pos[a] + 1:]:
            ob = ops_by_id[b]
            if ob.complete and ob.respond < ops_by_id[a].invoke:
                return f"operation {b} precedes {a} in real time but is ordered after it"
    state = spec.initial()
    for opid in order:
        op = ops_by_id[opid]
        resp, state = spec.step(state, op.proc, op.op, op.args)
        if op.complete and resp != op.result:
            return f"operation {opid} ({op.op} by p{op.proc}) returned {op.result!r}, spec says {resp!r}"
    return None
