"""Consensus among m+n processes from one (m, n) auditable register per level.

The participants split into readers ``R`` (the m lowest ids) and writers
``W``.  Each side first agrees internally (recursively, a singleton side just
keeps its own proposal), publishes the agreed value in its SWMR register
``S[p]``, then touches the register ``AR`` (initially BOTTOM): writers write
TOP, readers read.  Every participant then audits ``AR``.  If some reader is
reported with BOTTOM, a read came before every write and the readers' value
wins; otherwise the writers' value wins.
"""

from __future__ import annotations

from typing import Any

from .base import BOTTOM, NONE, TOP, Memory, SharedObject, SWMRRegister, WellFormedness
from .register import AuditableRegister


class DoublePropose(WellFormedness):
    pass


class Consensus(SharedObject):
    kind = "consensus"
    operations = frozenset({"propose"})

    def __init__(
        self,
        participants: list[int],
        m: int | None = None,
        *,
        name: str = "C",
        memory: Memory | None = None,
    ) -> None:
        participants = sorted(participants)
        if len(participants) < 2 or len(set(participants)) != len(participants):
            raise ValueError("consensus needs at least two distinct participants")
        k = len(participants)
        m = m if m is not None else k // 2
        if not 1 <= m <= k - 1:
            raise ValueError(f"need 1 <= m <= {k - 1} readers, got {m}")
        self.participants = participants
        self.m, self.n = m, k - m
        self.name = name
        self.memory = memory if memory is not None else Memory()
        self.R = participants[:m]
        self.W = participants[m:]
        self.AR = AuditableRegister(self.n, self.m, BOTTOM, writers=self.W, readers=self.R,
                                    name=f"{name}.AR", memory=self.memory)
        self.S = {p: SWMRRegister(f"{name}.S[{p}]", p, NONE, self.memory) for p in participants}
        # readers recurse as (m-1, 1), writers as (1, n-1)
        self.sub_R = Consensus(self.R, len(self.R) - 1, name=f"{name}.R",
                               memory=self.memory) if len(self.R) > 1 else None
        self.sub_W = Consensus(self.W, 1, name=f"{name}.W",
                               memory=self.memory) if len(self.W) > 1 else None
        self._flag = f"{name}.proposed"

    def meta(self) -> dict:
        return {"kind": self.kind, "name": self.name, "participants": self.participants,
                "m": self.m, "n": self.n}

    def check_script(self, proc: int, script: list) -> None:
        if proc not in self.participants and script:
            raise WellFormedness(f"p{proc} does not participate in {self.name}")
        if sum(1 for op, _ in script if op == "propose") > 1:
            raise DoublePropose(f"p{proc} proposes more than once")

    def propose(self, p: int, v: Any, ann: dict | None = None):
        ann = {} if ann is None else ann
        if p not in self.participants:
            raise WellFormedness(f"p{p} does not participate in {self.name}")
        if v is NONE or v is BOTTOM or v is TOP:
            raise ValueError(f"cannot propose the reserved value {v!r}")
        loc = self.memory.local(p)
        if loc.get(self._flag):
            raise DoublePropose(f"p{p} already proposed to {self.name}")
        loc[self._flag] = True

        is_reader = p in self.R
        sub = self.sub_R if is_reader else self.sub_W
        agreed = (yield from sub.propose(p, v)) if sub is not None else v
        yield self.S[p], "write", (agreed,)
        if is_reader:
            # only the audit outcome matters; the value read is discarded
            ann["ar_read"] = yield from self.AR.read(p)
        else:
            yield from self.AR.write(p, TOP)
        pairs = yield from self.AR.audit(p)
        readers_win = any(q in self.R and val is BOTTOM for q, val in pairs)
        ann["branch"] = "readers" if readers_win else "writers"
        for q in (self.R if readers_win else self.W):
            got = yield self.S[q], "read", ()
            if got is not NONE:
                return got
        raise AssertionError(f"{self.name}: winning side published no value")
