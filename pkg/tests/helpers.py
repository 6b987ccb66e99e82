from __future__ import annotations

from auditsim.base import drive


def call(obj, proc, op, *args, ann=None):
    """Run one operation solo, to completion, outside the simulator."""
    return drive(obj.start(proc, op, args, {} if ann is None else ann))


def with_result(trace, seq, result):
    """Copy of ``trace`` with the event at ``seq`` given a different result."""
    from dataclasses import replace

    from auditsim.sim import Trace

    events = [replace(e, result=result) if e.seq == seq else e for e in trace.events]
    return Trace(events, dict(trace.annotations), dict(trace.meta))


def corrupt_audit(trace, pair):
    """Add ``pair`` to the first completed audit's response."""
    op = next(o for o in trace.operations() if o.op == "audit" and o.complete)
    return with_result(trace, op.respond, op.result | {pair})


def corrupt_read(trace, value="never-written"):
    """Make the first completed read return ``value``."""
    op = next(o for o in trace.operations() if o.op in ("read", "ll") and o.complete)
    return with_result(trace, op.respond, value)


def both_scs_succeed(trace):
    """Make every completed SC report success."""
    for op in trace.operations():
        if op.op == "sc" and op.complete:
            trace = with_result(trace, op.respond, True)
    return trace


def colliding_llsc_trace():
    """An n=2 LL/SC trace where both LLs finish before either SC starts and the
    two SCs put their w-tuples in the same cell."""
    from auditsim import AuditableLLSC, explore
    from auditsim.base import WTuple

    progs = {1: [("ll", ()), ("sc", ("a",))], 2: [("ll", ()), ("sc", ("b",))]}
    for t in explore(AuditableLLSC(2, 0), progs, memo=True, reduce=True):
        ops = t.operations()
        lls = [o for o in ops if o.op == "ll"]
        scs = [o for o in ops if o.op == "sc"]
        if max(o.respond for o in lls) > min(o.invoke for o in scs):
            continue
        cells = {e.obj for o in scs for e in o.prims
                 if e.op == "write" and isinstance(e.args[0], WTuple)}
        if len(cells) == 1 and all(any(e.op == "write" for e in o.prims) for o in scs):
            return t
    raise AssertionError("no colliding interleaving found")
