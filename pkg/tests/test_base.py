from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from auditsim.base import (
    BOTTOM,
    NONE,
    TOP,
    MaxRegister,
    MaxTriple,
    Memory,
    SlidingArray,
    SlidingRegister,
    SWMRRegister,
    WrongWriter,
    WTuple,
    first_wtuple,
)


def test_swmr_initial_and_last_write_wins():
    h = SWMRRegister("H[1]", writer=1, initial=-1)
    assert h.read() == -1
    h.write(5, proc=1)
    assert h.read() == 5
    h.write(7, proc=1)
    assert h.read() == 7


def test_swmr_rejects_foreign_writer():
    h = SWMRRegister("H[1]", writer=1, initial=-1)
    with pytest.raises(WrongWriter):
        h.apply("write", (3,), proc=2)


@pytest.mark.parametrize(
    "k, start, entry, expected",
    [(3, (), 5, (5,)), (2, (1, 2), 3, (2, 3)), (3, (1, 2, 3), 4, (2, 3, 4))],
)
def test_sliding_write(k, start, entry, expected):
    r = SlidingRegister("r", k, start)
    r.write(entry)
    assert r.read() == expected


def test_sliding_rejects_bad_capacity():
    with pytest.raises(ValueError):
        SlidingRegister("r", 0)
    with pytest.raises(ValueError):
        SlidingRegister("r", 1, (1, 2))


def test_sliding_array_initial_cells():
    init = WTuple(1, 0)
    slr = SlidingArray("SLR", 4, {-1: (init,)})
    assert slr.window(0) == ()
    assert slr.cell(0).read() == ()
    assert slr.window(-1) == (init,)
    with pytest.raises(IndexError):
        slr.cell(-2)


def test_sliding_array_two_writes():
    slr = SlidingArray("SLR", 4)
    slr.cell(0).write(1)
    slr.cell(0).write(WTuple(2, 9))
    assert slr.window(0) == (1, WTuple(2, 9))
    assert repr(slr.window(0)[1]) == "(w,2,9,{})"


def test_max_register_fresh_and_ordering():
    m = MaxRegister("M", 2)
    assert m.read() == MaxTriple(0, (-1, -1), frozenset())
    m.write_max(MaxTriple(2, (0, -1), frozenset()))
    assert m.read().widx == 2
    m.write_max(MaxTriple(1, (5, 5), frozenset()))
    assert m.read().widx == 2


def test_max_register_fold():
    m = MaxRegister("M", 1)
    for w in (1, 3, 2):
        m.write_max(MaxTriple(w, (w,), frozenset({(1, w)})))
    assert m.read() == MaxTriple(3, (3,), frozenset({(1, 3)}))


def test_max_register_tie_is_noop():
    m = MaxRegister("M", 1)
    t = MaxTriple(2, (0,), frozenset({(1, "a")}))
    m.write_max(t)
    m.write_max(t)
    assert m.read() == t
    with pytest.raises(AssertionError):
        m.write_max(MaxTriple(2, (1,), frozenset()))


def test_first_wtuple_and_sentinels():
    assert first_wtuple((3, WTuple(1, 8), WTuple(2, 9))) == WTuple(1, 8)
    assert first_wtuple((3, 4)) is None
    assert BOTTOM is not TOP and NONE is None
    assert repr(BOTTOM) == "BOTTOM"


def test_memory_snapshot_restore():
    mem = Memory()
    h = SWMRRegister("H", 1, -1, mem)
    s = SlidingArray("S", 2, memory=mem)
    snap = mem.snapshot()
    h.write(4)
    s.cell(3).write("x")
    mem.restore(snap)
    assert h.read() == -1
    assert s.window(3) == ()


def test_memory_rejects_duplicate_names():
    mem = Memory()
    SWMRRegister("H", 1, memory=mem)
    with pytest.raises(ValueError):
        SWMRRegister("H", 1, memory=mem)


@given(st.integers(1, 8), st.lists(st.integers(), max_size=50))
def test_sliding_keeps_last_k(k, xs):
    r = SlidingRegister("r", k)
    model: list = []
    for x in xs:
        r.write(x)
        model.append(x)
        assert r.read() == tuple(model[-k:])


@given(st.lists(st.integers(1, 20), max_size=30))
def test_max_register_monotone(widxs):
    m = MaxRegister("M", 1)
    seen = [0]
    for w in widxs:
        before = m.read().widx
        m.write_max(MaxTriple(w, (w,), frozenset()))
        seen.append(w)
        assert m.read().widx >= before
        assert m.read().widx == max(seen)


@given(st.lists(st.integers(), min_size=1, max_size=10))
def test_reads_are_isolated(xs):
    r = SlidingRegister("r", 4)
    r.write(0)
    got = r.read()
    for x in xs:
        r.write(x)
    assert got == (0,)
    m = MaxRegister("M", 1)
    t = m.read()
    m.write_max(MaxTriple(5, (1,), frozenset({1})))
    assert t == MaxTriple(0, (-1,), frozenset())
