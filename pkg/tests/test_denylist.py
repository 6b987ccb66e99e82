from __future__ import annotations

import pytest
from helpers import call

from auditsim import DenyList, UnknownResource, WellFormedness, run


def test_append_then_own_prove_is_free():
    dl = DenyList(2, ["x"])
    call(dl, 1, "append", "x")
    t = run(dl, {1: [("prove", ("x",))]})
    op = t.operations()[0]
    assert op.result is False and op.prims == [] and op.ann["path"] == "own-append"


def test_append_is_idempotent_and_per_resource():
    dl = DenyList(2, ["x", "y"])
    call(dl, 1, "append", "x")
    call(dl, 1, "append", "x")
    assert call(dl, 2, "prove", "y") is True


def test_prove_validity():
    dl = DenyList(2, ["x"])
    assert call(dl, 1, "prove", "x") is True
    call(dl, 2, "append", "x")
    assert call(dl, 1, "prove", "x") is False


def test_read_one():
    dl = DenyList(3, ["x"])
    assert call(dl, 4, "read_one", "x") == frozenset()
    assert call(dl, 2, "prove", "x") is True
    assert call(dl, 4, "read_one", "x") == {(2, "x")}
    call(dl, 1, "append", "x")
    assert call(dl, 3, "prove", "x") is False
    ann: dict = {}
    assert call(dl, 4, "read_one", "x", ann=ann) == {(2, "x")}
    assert ann["collects"] <= 3 + 1


def test_read_all():
    dl = DenyList(2, [])
    assert call(dl, 3, "read_all") == frozenset()
    dl = DenyList(2, ["x"])
    call(dl, 1, "prove", "x")
    assert call(dl, 3, "read_all") == call(dl, 3, "read_one", "x")
    dl = DenyList(2, ["x", "y"])
    call(dl, 1, "prove", "x")
    call(dl, 2, "prove", "y")
    assert call(dl, 3, "read_all") == {(1, "x"), (2, "y")}


def test_errors():
    dl = DenyList(2, ["x"], managers=[1])
    with pytest.raises(UnknownResource):
        call(dl, 1, "prove", "nope")
    with pytest.raises(WellFormedness):
        call(dl, 2, "append", "x")
    with pytest.raises(ValueError):
        DenyList(1, ["x"])
