from __future__ import annotations

import pytest

from auditsim import (
    AuditableRegister,
    BudgetExceeded,
    DenyList,
    Exhaustive,
    RandomSchedule,
    ScheduleExhausted,
    explore,
    run,
    run_threaded,
)
from auditsim.base import Memory, SharedObject, SWMRRegister, WTuple
from auditsim.checker import RegisterSpec, check_bruteforce
from auditsim.traceio import dumps


class Touch(SharedObject):
    """Each op writes its own register ``steps`` times."""

    kind = "touch"
    operations = frozenset({"touch"})

    def __init__(self, procs):
        self.memory = Memory()
        self.regs = {p: SWMRRegister(f"T[{p}]", p, 0, self.memory) for p in procs}

    def touch(self, p, steps, ann=None):
        for i in range(steps):
            yield self.regs[p], "write", (i,)
        return steps


def test_empty_programs_give_empty_trace():
    assert run(AuditableRegister(1, 1), {}).events == []


@pytest.mark.parametrize("steps, expected", [(1, 2), (2, 6)])
def test_explore_counts_interleavings(steps, expected):
    progs = {1: [("touch", (steps,))], 2: [("touch", (steps,))]}
    assert len(list(explore(Touch([1, 2]), progs))) == expected


def test_explore_single_process():
    assert len(list(explore(Touch([1]), {1: [("touch", (3,))]}))) == 1


def test_explore_cap():
    progs = {1: [("touch", (2,))], 2: [("touch", (2,))]}
    with pytest.raises(BudgetExceeded):
        list(explore(Touch([1, 2]), progs, cap=5))


def test_explore_restores_state():
    reg = AuditableRegister(1, 1)
    progs = {1: [("write", (5,))], 2: [("read", ())]}
    before = reg.memory.snapshot()
    for _ in explore(reg, progs, memo=True, reduce=True):
        pass
    assert reg.memory.snapshot() == before


def test_solo_write_primitives():
    reg = AuditableRegister(1, 1, v0=0)
    t = run(reg, {1: [("write", (5,))]})
    prims = [(e.obj, e.op) for e in t.events if e.kind == "prim"]
    assert prims == [
        ("AR.M", "read"),
        ("AR.H[2]", "read"),
        ("AR.SLR[0]", "write"),
        ("AR.SLR[0]", "read"),
        ("AR.SLR[-1]", "read"),
        ("AR.M", "write_max"),
    ]
    assert t.events[0].kind == "invoke" and t.events[-1].kind == "respond"
    writes = [e for e in t.events if e.op == "write" and e.kind == "prim"]
    assert writes[0].args == (WTuple(1, 5),)


def test_random_runs_are_deterministic():
    progs = {1: [("write", (1,)), ("write", (2,))], 2: [("read", ())] * 2, 3: [("audit", ())]}
    a = run(AuditableRegister(1, 1), progs, RandomSchedule(7))
    b = run(AuditableRegister(1, 1), progs, RandomSchedule(7))
    assert dumps(a) == dumps(b)


def test_exhaustive_schedule_bound():
    progs = {1: [("write", (1,))], 2: [("read", ())]}
    with pytest.raises(ScheduleExhausted) as info:
        run(AuditableRegister(1, 1), progs, Exhaustive(3))
    assert info.value.trace.events
    full = run(AuditableRegister(1, 1), progs, Exhaustive())
    assert all(op.complete for op in full.operations())


def test_zero_primitive_operation_takes_one_step():
    dl = DenyList(2, ["x"])
    t = run(dl, {1: [("append", ("x",)), ("prove", ("x",))]})
    prove = t.operations()[1]
    assert prove.complete and prove.prims == []


def _histories(traces):
    """Histories up to the order of concurrent invocations."""
    out = set()
    for t in traces:
        ops = t.operations()
        ident, seen = {}, {}
        for op in ops:
            ident[op.opid] = (op.proc, seen.get(op.proc, 0))
            seen[op.proc] = seen.get(op.proc, 0) + 1
        shape = frozenset((ident[op.opid], op.op, op.args, op.result) for op in ops)
        prec = frozenset((ident[a.opid], ident[b.opid]) for a in ops for b in ops
                         if a.complete and a.respond < b.invoke)
        out.add((shape, prec))
    return out


@pytest.mark.parametrize("make, progs", [
    (lambda: DenyList(2, ["x"]), {1: [("append", ("x",))], 2: [("prove", ("x",))]}),
    (lambda: AuditableRegister(1, 1), {1: [("write", ("a",))], 2: [("read", ())]}),
])
def test_reductions_keep_every_history(make, progs):
    full = _histories(explore(make(), progs))
    reduced = _histories(explore(make(), progs, memo=True, reduce=True))
    assert full == reduced


def test_threaded_mode_is_linearizable():
    reg = AuditableRegister(2, 2, v0=0)
    progs = {1: [("write", ("a",))] * 3, 2: [("write", ("b",))] * 3,
             3: [("read", ())] * 3, 4: [("read", ())] * 3, 5: [("audit", ())]}
    t = run_threaded(reg, progs)
    assert t.meta["mode"] == "threads"
    assert check_bruteforce(t, RegisterSpec(0)).linearizable
