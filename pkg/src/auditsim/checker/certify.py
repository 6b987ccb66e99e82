"""Certifying linearizer for the auditable register and LL/SC traces.

Every operation gets a kind and a sliding-register index from the trace's
primitive events and the final contents of ``SLR``; operations are then
ordered block by block (by index) and within a block by fixed rules:

1. silent reads, direct reads and audits that saw no w-tuple, in the order
   of their access to ``SLR[x]``
2. helped reads (by process id), then audits that saw a w-tuple, in the
   order of their read of ``SLR[x]``
3. writes whose w-tuple is not first, in write order
4. the write whose w-tuple is first

For LL/SC the write part is flipped (the successful SC first, then the failed
ones in w-tuple order), and SCs that gave up before writing are placed in
the block of the ``M.widx`` they read, after every operation of that block
that finished before they started.

The resulting order is then replayed against the sequential spec.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from ..base import WTuple, first_wtuple
from ..register import readers
from ..sim import Operation, Trace
from .bruteforce import Verdict, replay
from .specs import LLSCSpec, RegisterSpec


class MalformedTrace(ValueError):
    pass


class RuleViolation(AssertionError):
    pass


READ_KINDS = {"read", "ll"}
WRITE_KINDS = {"write", "sc"}


@dataclass
class Classified:
    opid: int
    kind: str  # SilentRead, DirectRead, HelpedRead, VisibleWrite, HiddenWrite,
    #            DefinitiveAudit, NonDefinitiveAudit, SilentSC, Unclassified
    idx: int | None = None
    key: int = 0  # ordering key inside the block (a seq number or a pid)
    response: Any = None


class _Layout:
    def __init__(self, meta: dict) -> None:
        obj = meta.get("object", meta)
        self.kind = obj.get("kind")
        if self.kind not in ("register", "llsc"):
            raise MalformedTrace(f"certifier handles register and llsc traces, not {self.kind!r}")
        self.name = obj["name"]
        self.v0 = obj.get("v0", 0)
        self.j0 = obj.get("j0")
        self.capacity = obj.get("capacity")
        if self.j0 is None or self.capacity is None:
            raise MalformedTrace("object metadata lacks j0/capacity")
        self._slr = re.compile(re.escape(self.name) + r"\.SLR\[(-?\d+)\]$")
        self.m_name = f"{self.name}.M"

    def slr_index(self, obj: str | None) -> int | None:
        if obj is None:
            return None
        hit = self._slr.match(obj)
        return int(hit.group(1)) if hit else None


def final_windows(trace: Trace, layout: _Layout) -> dict[int, tuple]:
    windows: dict[int, list] = {-1: [WTuple(layout.j0, layout.v0, frozenset())]}
    for ev in trace.events:
        if ev.kind != "prim" or ev.op != "write":
            continue
        x = layout.slr_index(ev.obj)
        if x is None:
            continue
        win = windows.setdefault(x, [])
        win.append(ev.args[0])
        del win[:-layout.capacity]
    return {x: tuple(w) for x, w in windows.items()}


def _value_at(windows: dict[int, tuple], x: int) -> Any:
    wt = first_wtuple(windows.get(x, ()))
    if wt is None:
        raise RuleViolation(f"SLR[{x}] holds no w-tuple but a value is needed from it")
    return wt.value


def _classify_read(op: Operation, windows: dict, layout: _Layout) -> Classified:
    prims = op.prims
    first = prims[0] if prims else None
    x0 = op.ann.get("x0")
    if x0 is None:
        x0 = layout.slr_index(first.obj) if first is not None and first.op == "read" else -1
        x0 = -1 if x0 is None else x0
    if (op.complete and first is not None and layout.slr_index(first.obj) == x0 and x0 >= 0
            and first.op == "read" and first_wtuple(first.result) is None):
        return Classified(op.opid, "SilentRead", x0, first.seq, op.result)
    for x in sorted(k for k in windows if k > x0):
        win = windows[x]
        if op.proc not in readers(win):
            continue
        wt_pos = next((i for i, e in enumerate(win) if isinstance(e, WTuple)), len(win))
        response = op.result if op.complete else _value_at(windows, x - 1)
        if op.proc in win[:wt_pos]:
            seq = next((ev.seq for ev in prims if ev.op == "write"
                        and layout.slr_index(ev.obj) == x and ev.args[0] == op.proc), None)
            if seq is None:
                raise RuleViolation(f"op {op.opid}: p{op.proc} in SLR[{x}] but never wrote there")
            return Classified(op.opid, "DirectRead", x, seq, response)
        return Classified(op.opid, "HelpedRead", x, op.proc, response)
    if op.complete:
        raise RuleViolation(f"op {op.opid}: completed read found in no SLR window")
    return Classified(op.opid, "Unclassified")


def _classify_write(op: Operation, windows: dict, layout: _Layout) -> Classified:
    for ev in op.prims:
        if ev.op == "write" and isinstance(ev.args[0], WTuple):
            x = layout.slr_index(ev.obj)
            mine = ev.args[0]
            visible = first_wtuple(windows.get(x, ())) == mine
            if op.op == "sc":
                response = op.result if op.complete else visible
            else:
                response = None
            return Classified(op.opid, "VisibleWrite" if visible else "HiddenWrite",
                              x, ev.seq, response)
    if op.op == "sc" and op.complete:
        if not op.prims or op.prims[0].obj != layout.m_name:
            raise MalformedTrace(f"op {op.opid}: SC did not start by reading M")
        return Classified(op.opid, "SilentSC", op.prims[0].result.widx, op.invoke, op.result)
    if op.complete:
        raise RuleViolation(f"op {op.opid}: completed write left no w-tuple")
    return Classified(op.opid, "Unclassified")


def _classify_audit(op: Operation, layout: _Layout) -> Classified:
    if not op.complete:
        return Classified(op.opid, "Unclassified")
    if len(op.prims) < 2 or op.prims[0].obj != layout.m_name:
        raise MalformedTrace(f"op {op.opid}: audit does not read M then SLR")
    x = op.prims[0].result.widx
    read = op.prims[1]
    if layout.slr_index(read.obj) != x:
        raise MalformedTrace(f"op {op.opid}: audit read SLR cell {read.obj}, expected index {x}")
    kind = "NonDefinitiveAudit" if first_wtuple(read.result) is None else "DefinitiveAudit"
    return Classified(op.opid, kind, x, read.seq, op.result)


def classify(trace: Trace) -> dict[int, Classified]:
    layout = _Layout(trace.meta)
    windows = final_windows(trace, layout)
    out = {}
    for op in trace.operations():
        if op.op in READ_KINDS:
            c = _classify_read(op, windows, layout)
        elif op.op in WRITE_KINDS:
            c = _classify_write(op, windows, layout)
        elif op.op == "audit":
            c = _classify_audit(op, layout)
        else:
            raise MalformedTrace(f"op {op.opid}: cannot certify operation {op.op!r}")
        out[op.opid] = c
    return out


def build_linearization(trace: Trace, classes: dict[int, Classified]) -> list[tuple[int, Any]]:
    """Order the classified operations; returns ``(opid, response)`` pairs."""
    llsc = _Layout(trace.meta).kind == "llsc"
    ops = {op.opid: op for op in trace.operations()}
    blocks: dict[int, dict[str, list[Classified]]] = {}
    for c in classes.values():
        if c.kind == "Unclassified":
            continue
        blocks.setdefault(c.idx, {}).setdefault(c.kind, []).append(c)

    order: list[Classified] = []
    for x in sorted(blocks):
        b = blocks[x]
        get = lambda *kinds: [c for k in kinds for c in b.get(k, [])]  # noqa: E731
        first = sorted(get("SilentRead", "DirectRead", "NonDefinitiveAudit"), key=lambda c: c.key)
        helped = sorted(get("HelpedRead"), key=lambda c: c.key)
        definitive = sorted(get("DefinitiveAudit"), key=lambda c: c.key)
        hidden = sorted(get("HiddenWrite"), key=lambda c: c.key)
        visible = get("VisibleWrite")
        if len(visible) > 1:
            raise RuleViolation(f"block {x} has {len(visible)} visible writes")
        if hidden and not visible:
            raise RuleViolation(f"block {x} has hidden writes but no visible one")
        writes = visible + hidden if llsc else hidden + visible
        block = first + helped + definitive + writes
        for sc in sorted(get("SilentSC"), key=lambda c: c.key):
            started = ops[sc.opid].invoke
            at = 0
            for i, c in enumerate(block):
                other = ops[c.opid]
                if c.kind != "SilentSC" and other.complete and other.respond < started:
                    at = i + 1
            block.insert(at, sc)
        order.extend(block)
    return [(c.opid, c.response) for c in order]


def verify_certificate(trace: Trace, lin: list[tuple[int, Any]], spec: Any = None) -> str | None:
    """``None`` if ``lin`` respects real time and replays under the sequential specification, else the reason."""
    layout = _Layout(trace.meta)
    if spec is None:
        spec = LLSCSpec(layout.v0) if layout.kind == "llsc" else RegisterSpec(layout.v0)
    ops = {op.opid: op for op in trace.operations()}
    order = [opid for opid, _ in lin]
    reason = replay(ops, order, spec)
    if reason is not None:
        return reason
    # pending operations must have been given the response the sequential specification computes
    state = spec.initial()
    for opid, assigned in lin:
        op = ops[opid]
        resp, state = spec.step(state, op.proc, op.op, op.args)
        if not op.complete and resp != assigned:
            return f"pending operation {opid} was assigned {assigned!r}, spec says {resp!r}"
    return None


def certify(trace: Trace, spec: Any = None) -> Verdict:
    try:
        classes = classify(trace)
        lin = build_linearization(trace, classes)
    except (RuleViolation, MalformedTrace) as exc:
        return Verdict(False, violation={"rule": type(exc).__name__, "reason": str(exc)})
    reason = verify_certificate(trace, lin, spec)
    if reason is not None:
        return Verdict(False, violation={"rule": "replay", "reason": reason,
                                         "order": [opid for opid, _ in lin]})
    return Verdict(True, witness=[opid for opid, _ in lin],
                   extra={"classes": {k: (c.kind, c.idx) for k, c in classes.items()}})
