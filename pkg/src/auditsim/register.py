"""Wait-free n-writer m-reader auditable register over (m+n)-sliding registers.

Shared memory:

* ``M``   max register holding ``(widx, ridx, auditset)``
* ``SLR`` unbounded array of (m+n)-sliding registers, ``SLR[-1]`` preloaded
  with the initial value's w-tuple
* ``H``   one SWMR register per reader announcing its current attempt

Window entries are process ids (reader announcements) or :class:`WTuple`.
Process ids are the caller's ids; ``ridx`` and ``H`` are indexed by reader
position.
"""

from __future__ import annotations

from typing import Any, Iterable

from .base import (
    NONE,
    MaxRegister,
    MaxTriple,
    Memory,
    SharedObject,
    SlidingArray,
    SWMRRegister,
    WellFormedness,
    WTuple,
    first_wtuple,
)


class MissingWTuple(AssertionError):
    """getValue found no w-tuple where the algorithm guarantees one."""


def readers(window: Iterable) -> frozenset:
    """Ids recorded in ``window``: those before the first w-tuple plus its help set."""
    out = set()
    for entry in window:
        if isinstance(entry, WTuple):
            out |= entry.help
            break
        out.add(entry)
    return frozenset(out)


def has_wtuple(window: Iterable) -> bool:
    return any(isinstance(e, WTuple) for e in window)


class AuditableRegister(SharedObject):
    kind = "register"
    operations = frozenset({"read", "write", "audit"})

    def __init__(
        self,
        n: int,
        m: int,
        v0: Any = 0,
        *,
        j0: int | None = None,
        writers: list[int] | None = None,
        readers: list[int] | None = None,
        name: str = "AR",
        memory: Memory | None = None,
        capacity: int | None = None,
    ) -> None:
        if n < 1 or m < 1:
            raise ValueError(f"need n >= 1 writers and m >= 1 readers, got n={n}, m={m}")
        self.n, self.m, self.v0 = n, m, v0
        self.writers = list(writers) if writers is not None else list(range(1, n + 1))
        self.readers = list(readers) if readers is not None else list(range(n + 1, n + m + 1))
        if len(self.writers) != n or len(self.readers) != m:
            raise ValueError("writer/reader id lists do not match n/m")
        self.name = name
        self.memory = memory if memory is not None else Memory()
        self.k = capacity if capacity is not None else m + n
        self.j0 = j0 if j0 is not None else self.writers[0]
        self._rpos = {pid: i for i, pid in enumerate(self.readers)}
        self.M = MaxRegister(f"{name}.M", m, self.memory)
        self.SLR = SlidingArray(
            f"{name}.SLR", self.k, {-1: (WTuple(self.j0, v0, frozenset()),)}, self.memory
        )
        self.H = [SWMRRegister(f"{name}.H[{pid}]", pid, -1, self.memory) for pid in self.readers]
        self._lsr_key = f"{name}.lsr"
        self._lval_key = f"{name}.lval"

    def meta(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "v0": self.v0,
            "j0": self.j0,
            "capacity": self.k,
            "writers": self.writers,
            "readers": self.readers,
        }

    def check_script(self, proc: int, script: list) -> None:
        for op, _args in script:
            if op == "read" and proc not in self._rpos:
                raise WellFormedness(f"p{proc} is not a reader of {self.name}")
            if op == "write" and proc not in self.writers:
                raise WellFormedness(f"p{proc} is not a writer of {self.name}")

    # -- helpers -------------------------------------------------------------

    def get_value(self, sn: int):
        window = yield self.SLR.cell(sn), "read", ()
        wt = first_wtuple(window)
        if wt is None:
            raise MissingWTuple(f"{self.name}.SLR[{sn}] holds no w-tuple: {window!r}")
        return wt.value

    def _record(self, ids: frozenset, x: int, val: Any, ridx: tuple, auditset: frozenset):
        ridx = list(ridx)
        pairs = set()
        for j in ids:
            ridx[self._rpos[j]] = x
            pairs.add((j, val))
        return tuple(ridx), auditset | pairs

    def reader_state(self, proc: int) -> tuple[int, Any]:
        loc = self.memory.local(proc)
        return loc.get(self._lsr_key, -1), loc.get(self._lval_key, NONE)

    def _save(self, proc: int, lsr: int, lval: Any) -> None:
        loc = self.memory.local(proc)
        loc[self._lsr_key] = lsr
        loc[self._lval_key] = lval

    # -- operations ----------------------------------------------------------

    def read(self, p: int, ann: dict | None = None):
        ann = {} if ann is None else ann
        if p not in self._rpos:
            raise WellFormedness(f"p{p} is not a reader of {self.name}")
        ri = self._rpos[p]
        lsr, lval = self.reader_state(p)
        ann.update(x0=lsr, loop_iters=0, path=None)
        if lsr >= 0:
            window = yield self.SLR.cell(lsr), "read", ()
            if not has_wtuple(window):
                ann["path"] = "silent"
                return lval
            widx, ridx, auditset = yield self.M, "read", ()
            assert widx >= lsr, f"M.widx={widx} fell below lsr={lsr}"
            if widx == lsr:
                ridx, auditset = self._record(readers(window), lsr, lval, ridx, auditset)
                yield self.M, "write_max", (MaxTriple(lsr + 1, ridx, auditset),)
        while True:
            ann["loop_iters"] += 1
            widx, ridx, auditset = yield self.M, "read", ()
            if ridx[ri] > lsr:
                # found help
                lsr = ridx[ri]
                lval = yield from self.get_value(lsr - 1)
                self._save(p, lsr, lval)
                ann["path"] = "helped"
                return lval
            lsr = widx
            self._save(p, lsr, lval)
            yield self.H[ri], "write", (lsr,)
            yield self.SLR.cell(lsr), "write", (p,)
            window = yield self.SLR.cell(lsr), "read", ()
            lval = yield from self.get_value(lsr - 1)
            self._save(p, lsr, lval)
            if has_wtuple(window):
                ridx, auditset = self._record(readers(window), lsr, lval, ridx, auditset)
                yield self.M, "write_max", (MaxTriple(lsr + 1, ridx, auditset),)
            if p in readers(window):
                ann["path"] = "loop"
                return lval

    def _announce(self, p: int, v: Any, top: MaxTriple, ann: dict):
        """Shared body of WRITE and SC once ``M`` has been read into ``top``."""
        widx, ridx, auditset = top
        to_help = set()
        for j in self.readers:
            a = yield self.H[self._rpos[j]], "read", ()
            if ridx[self._rpos[j]] < a:
                window = yield self.SLR.cell(a), "read", ()
                if j not in readers(window):
                    to_help.add(j)
        mine = WTuple(p, v, frozenset(to_help))
        yield self.SLR.cell(widx), "write", (mine,)
        window = yield self.SLR.cell(widx), "read", ()
        val = yield from self.get_value(widx - 1)
        ridx, auditset = self._record(readers(window), widx, val, ridx, auditset)
        yield self.M, "write_max", (MaxTriple(widx + 1, ridx, auditset),)
        ann["idx"] = widx
        ann["help"] = tuple(sorted(to_help))
        return first_wtuple(window) == mine

    def write(self, p: int, v: Any, ann: dict | None = None):
        ann = {} if ann is None else ann
        if p not in self.writers:
            raise WellFormedness(f"p{p} is not a writer of {self.name}")
        top = yield self.M, "read", ()
        yield from self._announce(p, v, top, ann)
        return None

    def audit(self, p: int, ann: dict | None = None):
        ann = {} if ann is None else ann
        widx, _ridx, auditset = yield self.M, "read", ()
        window = yield self.SLR.cell(widx), "read", ()
        val = yield from self.get_value(widx - 1)
        ann["idx"] = widx
        ann["definitive"] = has_wtuple(window)
        return auditset | {(j, val) for j in readers(window)}
