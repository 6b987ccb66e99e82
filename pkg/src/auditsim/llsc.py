"""Auditable LL/SC for n processes over 2n-sliding registers.

LL is the register READ, SC is the register WRITE with two changes: it gives
up without touching ``SLR`` when a newer write already happened since the
caller's LL, and it reports whether its own w-tuple came first in its cell.
"""

from __future__ import annotations

from typing import Any

from .base import Memory, WellFormedness, first_wtuple
from .register import AuditableRegister


class AuditableLLSC(AuditableRegister):
    kind = "llsc"
    operations = frozenset({"ll", "sc", "audit", "audit_writers"})

    def __init__(
        self,
        n: int,
        v0: Any = 0,
        *,
        j0: int | None = None,
        procs: list[int] | None = None,
        name: str = "LS",
        memory: Memory | None = None,
    ) -> None:
        procs = list(procs) if procs is not None else list(range(1, n + 1))
        super().__init__(
            n, n, v0, j0=j0, writers=procs, readers=procs, name=name,
            memory=memory, capacity=2 * n,
        )
        self.procs = procs
        self._last_key = f"{name}.last"

    def meta(self) -> dict:
        return {"kind": self.kind, "name": self.name, "n": self.n, "v0": self.v0,
                "j0": self.j0, "capacity": self.k, "procs": self.procs}

    def check_script(self, proc: int, script: list) -> None:
        last = None
        for op, _args in script:
            if op in ("ll", "sc") and proc not in self.procs:
                raise WellFormedness(f"p{proc} does not use {self.name}")
            if op == "ll":
                if last == "ll":
                    raise WellFormedness(f"p{proc}: two LLs without an SC in between")
                last = "ll"
            elif op == "sc":
                if last != "ll":
                    raise WellFormedness(f"p{proc}: SC without a preceding LL")
                last = "sc"

    def _step_protocol(self, p: int, op: str) -> None:
        loc = self.memory.local(p)
        last = loc.get(self._last_key)
        if op == "ll" and last == "ll":
            raise WellFormedness(f"p{p}: two LLs without an SC in between")
        if op == "sc" and last != "ll":
            raise WellFormedness(f"p{p}: SC without a preceding LL")
        loc[self._last_key] = op

    def ll(self, p: int, ann: dict | None = None):
        self._step_protocol(p, "ll")
        return (yield from self.read(p, ann=ann))

    def sc(self, p: int, v: Any, ann: dict | None = None):
        ann = {} if ann is None else ann
        self._step_protocol(p, "sc")
        lsr, _ = self.reader_state(p)
        top = yield self.M, "read", ()
        if top.widx > lsr:
            # a successful SC happened since p's last LL
            ann.update(path="silent", idx=top.widx)
            return False
        ann["path"] = "announce"
        return (yield from self._announce(p, v, top, ann))

    def audit_writers(self, p: int, ann: dict | None = None):
        """Pairs ``(j, v)`` for every SC whose w-tuple came first in its cell."""
        top = yield self.M, "read", ()
        out = set()
        for x in range(top.widx + 1):
            window = yield self.SLR.cell(x), "read", ()
            wt = first_wtuple(window)
            if wt is not None:
                out.add((wt.writer, wt.value))
        return frozenset(out)
