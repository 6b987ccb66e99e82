"""Linearizable base objects: SWMR registers, k-sliding registers and max registers.

Every object keeps its whole state in one immutable value (``state``) so a
simulator can snapshot and restore shared memory cheaply.  Values handed out
by ``read`` are immutable too, so callers can never alias object state.
"""

from __future__ import annotations

import threading
from typing import Any, Hashable, NamedTuple

#: Distinguished "no value" marker.  Application values must never be ``None``.
NONE = None


class Sentinel:
    """A named singleton value (used for the consensus bottom/top markers)."""

    __slots__ = ("name",)
    _registry: dict[str, "Sentinel"] = {}

    def __new__(cls, name: str) -> "Sentinel":
        existing = cls._registry.get(name)
        if existing is not None:
            return existing
        obj = super().__new__(cls)
        obj.name = name
        cls._registry[name] = obj
        return obj

    def __repr__(self) -> str:
        return self.name

    def __reduce__(self):
        return (Sentinel, (self.name,))

    def __lt__(self, other: Any) -> bool:
        return repr(self) < repr(other)


BOTTOM = Sentinel("BOTTOM")
TOP = Sentinel("TOP")


class WTuple(NamedTuple):
    """Write announcement stored in a sliding register: (w, writer, value, help)."""

    writer: int
    value: Any
    help: frozenset = frozenset()

    def __repr__(self) -> str:
        return f"(w,{self.writer},{self.value!r},{set(self.help) or '{}'})"


class MaxTriple(NamedTuple):
    """Payload of the max register, ordered by ``widx`` only."""

    widx: int
    ridx: tuple[int, ...]
    auditset: frozenset


def is_wtuple(entry: Any) -> bool:
    return isinstance(entry, WTuple)


def first_wtuple(window: tuple) -> WTuple | None:
    for entry in window:
        if isinstance(entry, WTuple):
            return entry
    return None


class WrongWriter(Exception):
    """A process other than the designated writer wrote a SWMR register."""


class WellFormedness(Exception):
    """A process script or invocation breaks the object's usage rules."""


class BaseObject:
    """Common plumbing: a name, an immutable ``state`` and a lock for thread mode."""

    def __init__(self, name: str, memory: "Memory | None" = None) -> None:
        self.name = name
        self._lock = threading.Lock()
        if memory is not None:
            memory.register(self)

    @property
    def state(self) -> Hashable:
        raise NotImplementedError

    @state.setter
    def state(self, value: Hashable) -> None:
        raise NotImplementedError

    def apply(self, method: str, args: tuple, proc: int | None = None) -> Any:
        """Apply one primitive atomically (the unit the simulator counts as a step)."""
        with self._lock:
            return getattr(self, method)(*args, proc=proc)


class SWMRRegister(BaseObject):
    def __init__(self, name: str, writer: int, initial: Any = NONE, memory: "Memory | None" = None):
        super().__init__(name, memory)
        self.writer = writer
        self._value = initial

    @property
    def state(self) -> Hashable:
        return self._value

    @state.setter
    def state(self, value: Hashable) -> None:
        self._value = value

    def read(self, proc: int | None = None) -> Any:
        return self._value

    def write(self, value: Any, proc: int | None = None) -> None:
        if proc is not None and proc != self.writer:
            raise WrongWriter(f"{self.name}: p{proc} is not the writer p{self.writer}")
        self._value = value


class SlidingRegister(BaseObject):
    """k-sliding register: keeps the last k entries written, oldest first."""

    def __init__(self, name: str, k: int, initial: tuple = (), memory: "Memory | None" = None):
        if k < 1:
            raise ValueError(f"sliding register capacity must be positive, got {k}")
        if len(initial) > k:
            raise ValueError("initial window longer than capacity")
        super().__init__(name, memory)
        self.k = k
        self._window: tuple = tuple(initial)

    @property
    def state(self) -> Hashable:
        return self._window

    @state.setter
    def state(self, value: Hashable) -> None:
        self._window = value

    def read(self, proc: int | None = None) -> tuple:
        return self._window

    def write(self, entry: Any, proc: int | None = None) -> None:
        window = self._window + (entry,)
        if len(window) > self.k:
            window = window[len(window) - self.k:]
        self._window = window


class SlidingArray(BaseObject):
    """Unbounded array ``SLR[-1..]`` of k-sliding registers, allocated on first touch."""

    def __init__(self, name: str, k: int, initial: dict[int, tuple] | None = None,
                 memory: "Memory | None" = None):
        if k < 1:
            raise ValueError(f"window capacity must be positive, got {k}")
        super().__init__(name, memory)
        self.k = k
        self._cells: dict[int, SlidingRegister] = {}
        self._cells_lock = threading.Lock()
        self._initial = dict(initial or {})
        for idx, window in self._initial.items():
            self.cell(idx).state = tuple(window)

    def cell(self, idx: int) -> SlidingRegister:
        if idx < -1:
            raise IndexError(f"{self.name}: index {idx} below -1")
        reg = self._cells.get(idx)
        if reg is None:
            with self._cells_lock:
                reg = self._cells.get(idx)
                if reg is None:
                    reg = SlidingRegister(f"{self.name}[{idx}]", self.k)
                    self._cells[idx] = reg
        return reg

    def window(self, idx: int) -> tuple:
        reg = self._cells.get(idx)
        return reg.read() if reg is not None else ()

    def indices(self) -> list[int]:
        return sorted(i for i, reg in self._cells.items() if reg.read())

    @property
    def state(self) -> Hashable:
        return tuple(
            (idx, reg.state) for idx, reg in sorted(self._cells.items()) if reg.state
        )

    @state.setter
    def state(self, value: Hashable) -> None:
        seen = set()
        for idx, cell_state in value:
            self.cell(idx).state = cell_state
            seen.add(idx)
        for idx, reg in self._cells.items():
            if idx not in seen:
                reg.state = ()


class MaxRegister(BaseObject):
    """Max register over :class:`MaxTriple`, ordered by ``widx``.

    On an exact ``widx`` tie the stored payload is kept.
    """

    def __init__(self, name: str, m: int, memory: "Memory | None" = None):
        super().__init__(name, memory)
        self._triple = MaxTriple(0, (-1,) * m, frozenset())

    @property
    def state(self) -> Hashable:
        return self._triple

    @state.setter
    def state(self, value: Hashable) -> None:
        self._triple = value

    def read(self, proc: int | None = None) -> MaxTriple:
        return self._triple

    def write_max(self, triple: MaxTriple, proc: int | None = None) -> None:
        triple = MaxTriple(triple.widx, tuple(triple.ridx), frozenset(triple.auditset))
        cur = self._triple
        if triple.widx > cur.widx:
            self._triple = triple
        elif triple.widx == cur.widx:
            assert triple == cur, f"{self.name}: divergent payloads for widx={cur.widx}"


class Memory:
    """Registry of the base objects of one system plus per-process local variables.

    Local variables live here (keyed by process) so that a process's durable
    state can be frozen and thawed together with shared memory.
    """

    def __init__(self) -> None:
        self.objects: dict[str, BaseObject] = {}
        self.locals: dict[int, dict[str, Any]] = {}

    def register(self, obj: BaseObject) -> None:
        if obj.name in self.objects:
            raise ValueError(f"duplicate base object name {obj.name!r}")
        self.objects[obj.name] = obj

    def snapshot(self) -> tuple:
        return tuple(obj.state for obj in self.objects.values())

    def restore(self, snap: tuple) -> None:
        for obj, state in zip(self.objects.values(), snap):
            obj.state = state

    def local(self, proc: int) -> dict[str, Any]:
        loc = self.locals.get(proc)
        if loc is None:
            loc = self.locals[proc] = {}
        return loc

    def freeze_local(self, proc: int) -> tuple:
        return tuple(sorted(self.locals.get(proc, {}).items()))

    def thaw_local(self, proc: int, frozen: tuple) -> None:
        self.locals[proc] = dict(frozen)


class SharedObject:
    """A high-level object whose operations are generators of primitive requests.

    An operation yields ``(base_object, method, args)`` triples; whoever drives
    the generator applies the primitive and sends the result back in.  The
    generator's return value is the operation's response.
    """

    kind = "object"
    operations: frozenset[str] = frozenset()

    memory: Memory

    def start(self, proc: int, op: str, args: tuple = (), ann: dict | None = None):
        if op not in self.operations:
            raise ValueError(f"{self.kind} has no operation {op!r}")
        return getattr(self, op)(proc, *args, ann=ann)

    def check_script(self, proc: int, script: list) -> None:
        """Raise if ``script`` violates the object's usage rules for ``proc``."""

    def meta(self) -> dict:
        return {"kind": self.kind}


def drive(gen) -> Any:
    """Run an operation generator to completion outside any simulator."""
    try:
        obj, method, args = next(gen)
        while True:
            obj, method, args = gen.send(obj.apply(method, args))
    except StopIteration as stop:
        return stop.value
