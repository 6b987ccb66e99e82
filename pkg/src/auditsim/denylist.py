"""Immediate deny list built from single-writer auditable registers.

For every resource ``x`` and process ``p_i`` there is a register
``AR[x][i]`` written only by ``p_i`` and read by everyone else, initially
``True``.  APPEND writes ``False`` into the caller's own register; PROVE reads
the others' registers and fails on the first ``False``.  A prove leaves a
trace in the audit sets of everything it read, so READ recovers the valid
proves by auditing (a double collect until two consecutive collects agree).
"""

from __future__ import annotations

from typing import Hashable, Iterable

from .base import Memory, SharedObject, WellFormedness
from .register import AuditableRegister


class UnknownResource(KeyError):
    pass


class DenyList(SharedObject):
    kind = "denylist"
    operations = frozenset({"append", "prove", "read_one", "read_all"})

    def __init__(
        self,
        n: int,
        resources: Iterable[Hashable],
        *,
        procs: list[int] | None = None,
        managers: Iterable[int] | None = None,
        provers: Iterable[int] | None = None,
        name: str = "DL",
        memory: Memory | None = None,
    ) -> None:
        if n < 2:
            raise ValueError("a deny list needs at least two processes")
        self.n = n
        self.procs = list(procs) if procs is not None else list(range(1, n + 1))
        if len(self.procs) != n:
            raise ValueError("process id list does not match n")
        self.resources = sorted(resources)
        self.managers = frozenset(managers) if managers is not None else frozenset(self.procs)
        self.provers = frozenset(provers) if provers is not None else frozenset(self.procs)
        self.name = name
        self.memory = memory if memory is not None else Memory()
        self.AR = {
            x: {
                i: AuditableRegister(
                    1, n - 1, True,
                    writers=[i], readers=[j for j in self.procs if j != i],
                    name=f"{name}.AR[{x}][{i}]", memory=self.memory,
                )
                for i in self.procs
            }
            for x in self.resources
        }

    def meta(self) -> dict:
        return {"kind": self.kind, "name": self.name, "n": self.n,
                "procs": self.procs, "resources": list(self.resources)}

    def check_script(self, proc: int, script: list) -> None:
        for op, args in script:
            if op in ("append", "prove", "read_one") and args[0] not in self.AR:
                raise UnknownResource(args[0])
            if op == "append" and proc not in self.managers:
                raise WellFormedness(f"p{proc} may not append")
            if op == "prove" and proc not in self.provers:
                raise WellFormedness(f"p{proc} may not prove")

    def _row(self, x: Hashable) -> dict[int, AuditableRegister]:
        try:
            return self.AR[x]
        except KeyError:
            raise UnknownResource(x) from None

    def _flag(self, x: Hashable) -> str:
        return f"{self.name}.appended[{x}]"

    def append(self, p: int, x: Hashable, ann: dict | None = None):
        row = self._row(x)
        if p not in self.managers:
            raise WellFormedness(f"p{p} may not append")
        yield from row[p].write(p, False)
        self.memory.local(p)[self._flag(x)] = True
        return None

    def prove(self, p: int, x: Hashable, ann: dict | None = None):
        ann = {} if ann is None else ann
        row = self._row(x)
        if p not in self.provers:
            raise WellFormedness(f"p{p} may not prove")
        if self.memory.local(p).get(self._flag(x), False):
            ann["path"] = "own-append"
            return False
        for j in self.procs:
            if j == p:
                continue
            if not (yield from row[j].read(p)):
                ann["path"] = "denied"
                return False
        ann["path"] = "read-all-true"
        return True

    def _collect(self, p: int, x: Hashable):
        row = self._row(x)
        audits = {}
        for j in self.procs:
            audits[j] = yield from row[j].audit(p)
        # q proved x validly iff every register other than q's own saw q read True
        return frozenset(
            (q, x) for q in self.procs
            if all((q, True) in audits[j] for j in self.procs if j != q)
        )

    def read_one(self, p: int, x: Hashable, ann: dict | None = None):
        ann = {} if ann is None else ann
        self._row(x)
        collects = 0
        c2: frozenset = frozenset()
        while True:
            c1 = c2
            c2 = yield from self._collect(p, x)
            collects += 1
            if c1 == c2:
                # a successful double collect
                ann["collects"] = collects
                return c2

    def read_all(self, p: int, ann: dict | None = None):
        ann = {} if ann is None else ann
        sweeps = 0
        cur: frozenset = frozenset()
        while True:
            prev = cur
            found: set = set()
            for x in self.resources:
                found |= yield from self._collect(p, x)
            cur = frozenset(found)
            sweeps += 1
            if prev == cur:
                ann["sweeps"] = sweeps
                return cur
