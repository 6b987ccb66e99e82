from __future__ import annotations

import pytest
from helpers import call

from auditsim import AuditableLLSC, WellFormedness, explore, run
from auditsim.base import WTuple


def test_fresh_ll_returns_v0():
    assert call(AuditableLLSC(2, 0), 1, "ll") == 0


def test_ll_sees_successful_sc():
    obj = AuditableLLSC(2, 0)
    call(obj, 1, "ll")
    assert call(obj, 1, "sc", 7) is True
    assert call(obj, 2, "ll") == 7


def test_double_ll_rejected():
    obj = AuditableLLSC(2, 0)
    call(obj, 1, "ll")
    with pytest.raises(WellFormedness):
        call(obj, 1, "ll")
    with pytest.raises(WellFormedness):
        call(obj, 2, "sc", 1)
    with pytest.raises(WellFormedness):
        run(AuditableLLSC(2, 0), {1: [("sc", (1,))]})


def test_interfering_sc_fails_without_slr_write():
    obj = AuditableLLSC(2, 0)
    call(obj, 1, "ll")
    call(obj, 2, "ll")
    assert call(obj, 2, "sc", 9) is True
    before = obj.SLR.state
    ann: dict = {}
    assert call(obj, 1, "sc", 5, ann=ann) is False
    assert ann["path"] == "silent"
    assert obj.SLR.state == before


def test_audits():
    obj = AuditableLLSC(2, 0)
    assert call(obj, 3, "audit") == frozenset()
    call(obj, 1, "ll")
    assert call(obj, 3, "audit") == {(1, 0)}
    call(obj, 2, "ll")
    call(obj, 2, "sc", 7)
    call(obj, 1, "sc", 8)
    call(obj, 1, "ll")
    assert (1, 7) in call(obj, 3, "audit")
    assert call(obj, 3, "audit_writers") == {(2, 7)}


def test_capacity_is_2n():
    obj = AuditableLLSC(3, 0)
    assert obj.meta()["capacity"] == 6
    assert obj.SLR.window(-1) == (WTuple(obj.j0, 0),)


def test_racing_scs_exactly_one_wins():
    progs = {1: [("ll", ()), ("sc", ("a",))], 2: [("ll", ()), ("sc", ("b",))]}
    collided = 0
    for trace in explore(AuditableLLSC(2, 0), progs, memo=True, reduce=True):
        cells: dict = {}
        for op in trace.operations():
            if op.op != "sc":
                continue
            for ev in op.prims:
                if ev.op == "write" and isinstance(ev.args[0], WTuple):
                    cells.setdefault(ev.obj, []).append(op.result)
        for results in cells.values():
            if len(results) == 2:
                collided += 1
                assert sorted(results) == [False, True]
    assert collided > 0
