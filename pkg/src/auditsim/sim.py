"""Deterministic step-level simulator for shared objects.

A *step* of process ``p`` applies exactly one primitive on one base object.
The invocation event of an operation is emitted together with its first
primitive and the response together with its last, so every scheduling point
is a primitive (an operation that needs no primitive takes one empty step).

Operations are generators (see :class:`~auditsim.base.SharedObject`), which
cannot be copied.  To backtrack, the machine keeps, per process, the local
variables at operation start plus the results of the primitives applied so
far, and rebuilds the generator by replaying those results.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Any, Iterator

from .base import SharedObject, WellFormedness

__all__ = [
    "BudgetExceeded",
    "Event",
    "Exhaustive",
    "Machine",
    "Operation",
    "RandomSchedule",
    "RoundRobin",
    "ScheduleExhausted",
    "Trace",
    "WellFormedness",
    "explore",
    "run",
    "run_threaded",
]


class ScheduleExhausted(Exception):
    """The exhaustive depth bound stopped a run in the middle of an operation."""

    def __init__(self, message: str, trace: "Trace") -> None:
        super().__init__(message)
        self.trace = trace


class BudgetExceeded(Exception):
    """More interleavings (or search nodes) than the configured cap."""


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str  # "invoke" | "respond" | "prim"
    proc: int
    op: str
    args: tuple = ()
    obj: str | None = None
    result: Any = None


@dataclass
class Operation:
    opid: int
    proc: int
    op: str
    args: tuple
    invoke: int
    respond: int | None = None
    result: Any = None
    prims: list[Event] = field(default_factory=list)
    ann: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return self.respond is not None


@dataclass
class Trace:
    events: list[Event] = field(default_factory=list)
    annotations: dict[int, dict] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def operations(self) -> list[Operation]:
        """High-level operations in invocation order; ``opid`` is that order."""
        ops: list[Operation] = []
        open_: dict[int, Operation] = {}
        for ev in self.events:
            if ev.kind == "invoke":
                if ev.proc in open_:
                    raise ValueError(f"p{ev.proc} invoked twice without responding (seq {ev.seq})")
                op = Operation(len(ops), ev.proc, ev.op, ev.args, ev.seq,
                               ann=self.annotations.get(len(ops), {}))
                ops.append(op)
                open_[ev.proc] = op
            elif ev.kind == "respond":
                op = open_.pop(ev.proc, None)
                if op is None:
                    raise ValueError(f"response without invocation at seq {ev.seq}")
                op.respond, op.result = ev.seq, ev.result
            elif ev.kind == "prim":
                op = open_.get(ev.proc)
                if op is None:
                    raise ValueError(f"primitive outside any operation at seq {ev.seq}")
                op.prims.append(ev)
            else:
                raise ValueError(f"unknown event kind {ev.kind!r}")
        return ops

    def history(self) -> list[Event]:
        return [ev for ev in self.events if ev.kind != "prim"]


# -- schedules ---------------------------------------------------------------


class RoundRobin:
    """Cycle through the processes in id order, skipping finished ones."""

    def __init__(self) -> None:
        self._last: int | None = None

    def choose(self, enabled: list[int]) -> int:
        nxt = [p for p in enabled if self._last is None or p > self._last]
        self._last = nxt[0] if nxt else enabled[0]
        return self._last


class RandomSchedule:
    """Pick uniformly among runnable processes with a seeded generator."""

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed
        self._rng = random.Random(seed)

    def choose(self, enabled: list[int]) -> int:
        return self._rng.choice(enabled)


@dataclass
class Exhaustive:
    """Depth-first enumeration; as a ``run`` schedule it yields the first interleaving."""

    depth: int | None = None


# -- machine -----------------------------------------------------------------


@dataclass
class _Proc:
    script: list
    pos: int = 0
    opid: int | None = None
    results: tuple = ()
    start_locals: tuple = ()
    gen: Any = None
    request: Any = None
    done: bool = False  # request holds the response value


class Machine:
    def __init__(self, obj: SharedObject, programs: dict[int, list], *, validate: bool = True):
        self.obj = obj
        self.memory = obj.memory
        self.programs = {p: [(op, tuple(args)) for op, args in script]
                         for p, script in programs.items()}
        if validate:
            for p, script in self.programs.items():
                for op, _ in script:
                    if op not in obj.operations:
                        raise WellFormedness(f"p{p}: {obj.kind} has no operation {op!r}")
                obj.check_script(p, script)
        self.procs = sorted(self.programs)
        for p in self.procs:
            self.memory.local(p)
        self.ps = {p: _Proc(self.programs[p]) for p in self.procs}
        self.events: list[Event] = []
        self.annotations: dict[int, dict] = {}
        self.next_opid = 0
        # history abstraction for memoization: finished operations (with their
        # responses) and the real-time precedence pairs between operations
        self._done: list = []
        self._prec: list = []

    # state queries

    def enabled(self) -> list[int]:
        return [p for p in self.procs
                if self.ps[p].opid is not None or self.ps[p].pos < len(self.ps[p].script)]

    def in_operation(self) -> list[int]:
        return [p for p in self.procs if self.ps[p].opid is not None]

    def trace(self) -> Trace:
        return Trace(list(self.events),
                     {k: dict(v) for k, v in self.annotations.items()},
                     self.meta())

    def meta(self) -> dict:
        return {"object": self.obj.meta()}

    # stepping

    def _emit(self, kind: str, proc: int, op: str, args: tuple = (), obj: str | None = None,
              result: Any = None) -> None:
        self.events.append(Event(len(self.events), kind, proc, op, args, obj, result))

    def _advance(self, st: _Proc, value: Any, first: bool = False) -> None:
        try:
            st.request = next(st.gen) if first else st.gen.send(value)
            st.done = False
        except StopIteration as stop:
            st.request = stop.value
            st.done = True

    def step(self, p: int) -> list:
        """Run one step of ``p``; returns a record that :meth:`undo` accepts."""
        st = self.ps[p]
        undo = [p, st.pos, st.opid, st.results, st.start_locals, self.memory.freeze_local(p),
                len(self.events), len(self._done), len(self._prec), self.next_opid, None, None]
        if st.opid is None:
            op, args = st.script[st.pos]
            st.opid = self.next_opid
            self.next_opid += 1
            st.start_locals = self.memory.freeze_local(p)
            st.results = ()
            ann: dict = {}
            self.annotations[st.opid] = ann
            self._emit("invoke", p, op, args)
            self._prec.extend((d[0], (p, st.pos)) for d in self._done)
            st.gen = self.obj.start(p, op, args, ann)
            self._advance(st, None, first=True)
        elif st.gen is None:
            self._rebuild(p)
        if not st.done:
            target, method, margs = st.request
            undo[10], undo[11] = target, target.state
            result = target.apply(method, margs, proc=p)
            self._emit("prim", p, method, margs, target.name, result)
            st.results += (result,)
            self._advance(st, result)
        if st.done:
            op, _ = st.script[st.pos]
            ann = self.annotations[st.opid]
            ann["steps"] = len(st.results)
            self._emit("respond", p, op, (), None, st.request)
            self._done.append(((p, st.pos), st.request, tuple(sorted(ann.items()))))
            st.pos += 1
            st.opid = None
            st.gen = None
            st.request = None
            st.done = False
        return undo

    def undo(self, record: list) -> None:
        """Take back the step that returned ``record`` (steps are undone newest first)."""
        p, pos, opid, results, start_locals, locals_, n_ev, n_done, n_prec, next_opid, \
            target, prev = record
        if target is not None:
            target.state = prev
        del self.events[n_ev:]
        del self._done[n_done:]
        del self._prec[n_prec:]
        if next_opid < self.next_opid:
            del self.annotations[next_opid]
        self.next_opid = next_opid
        st = self.ps[p]
        st.pos, st.opid, st.results, st.start_locals = pos, opid, results, start_locals
        st.request, st.done = None, False
        if opid is None:
            st.gen = None
            self.memory.thaw_local(p, locals_)
        else:
            self._rebuild(p)

    def _rebuild(self, p: int) -> None:
        st = self.ps[p]
        op, args = st.script[st.pos]
        self.memory.thaw_local(p, st.start_locals)
        ann = self.annotations[st.opid]
        ann.clear()
        st.gen = self.obj.start(p, op, args, ann)
        self._advance(st, None, first=True)
        for r in st.results:
            self._advance(st, r)

    # backtracking

    def snapshot(self) -> tuple:
        return (
            self.memory.snapshot(),
            tuple(self.memory.freeze_local(p) for p in self.procs),
            tuple((st.pos, st.opid, st.results, st.start_locals) for st in self.ps.values()),
            len(self.events),
            (len(self._done), len(self._prec)),
            self.next_opid,
        )

    def restore(self, snap: tuple) -> None:
        mem, locs, procs, n_events, (n_done, n_prec), next_opid = snap
        self.memory.restore(mem)
        for p, frozen in zip(self.procs, locs):
            self.memory.thaw_local(p, frozen)
        del self.events[n_events:]
        del self._done[n_done:]
        del self._prec[n_prec:]
        for opid in [k for k in self.annotations if k >= next_opid]:
            del self.annotations[opid]
        self.next_opid = next_opid
        for st, (pos, opid, results, start_locals) in zip(self.ps.values(), procs):
            st.pos, st.opid, st.results, st.start_locals = pos, opid, results, start_locals
            st.gen = st.request = None
            st.done = False
        for p in self.in_operation():
            self._rebuild(p)

    def key(self) -> tuple:
        """Everything that determines the future, plus the history so far up to
        what linearizability can observe: which operations ran, their responses
        and annotations, and which finished before which started."""
        return (
            self.memory.snapshot(),
            tuple(self.memory.freeze_local(p) for p in self.procs),
            tuple((st.pos, st.results, st.start_locals) for st in self.ps.values()),
            frozenset(self._done),
            frozenset(self._prec),
        )


def run(obj: SharedObject, programs: dict[int, list], schedule: Any = None,
        *, max_steps: int | None = None) -> Trace:
    """Execute ``programs`` to completion (or until a bound) under ``schedule``."""
    schedule = schedule if schedule is not None else RoundRobin()
    if isinstance(schedule, Exhaustive):
        for trace in explore(obj, programs, depth=schedule.depth):
            if trace.meta.get("truncated") and any(
                    op.respond is None for op in trace.operations()):
                raise ScheduleExhausted("depth bound hit in the middle of an operation", trace)
            return trace
        return Trace(meta={"object": obj.meta()})
    m = Machine(obj, programs)
    steps = 0
    while True:
        enabled = m.enabled()
        if not enabled or (max_steps is not None and steps >= max_steps):
            break
        m.step(schedule.choose(enabled))
        steps += 1
    trace = m.trace()
    if isinstance(schedule, RandomSchedule):
        trace.meta["seed"] = schedule.seed
    return trace


def _footprint(m: Machine, p: int) -> tuple | None:
    """(object, writes?) of p's next step, or None when the step starts an operation."""
    st = m.ps[p]
    if st.opid is None or st.gen is None:
        return None
    target, method, _ = st.request
    return target.name, method != "read"


def _independent(a: tuple | None, b: tuple | None) -> bool:
    # Steps that start an operation conflict with everything, which keeps the
    # order of every response relative to every later invocation intact.
    if a is None or b is None:
        return False
    return a[0] != b[0] or not (a[1] or b[1])


def explore(obj: SharedObject, programs: dict[int, list], depth: int | None = None,
            cap: int | None = None, memo: bool = False, reduce: bool = False) -> Iterator[Trace]:
    """Yield one trace per interleaving, children visited in process-id order.

    ``memo`` skips a state already expanded after an equivalent history: its
    continuations were enumerated the first time, so every distinct history
    (operations, responses, real-time order) is still produced.

    ``reduce`` adds sleep sets: of two interleavings that differ only by
    swapping adjacent commuting steps (different base objects, or two reads)
    only one is produced.  Every history, annotation and final state of the
    full enumeration still shows up in some produced trace.
    """
    m = Machine(obj, programs)
    root = m.snapshot()
    seen: dict = {}
    count = 0

    def visit(used: int, sleep: frozenset) -> Iterator[Trace]:
        nonlocal count
        enabled = m.enabled()
        candidates = [p for p in enabled if p not in sleep]
        if memo:
            key = m.key()
            prev = seen.get(key)
            if prev is not None:
                if prev <= sleep:
                    return
                # only what was asleep last time is still unexplored from here
                candidates = [p for p in enabled if p in prev and p not in sleep]
                seen[key] = prev & sleep
            else:
                seen[key] = sleep
        if not enabled or (depth is not None and used >= depth):
            count += 1
            if cap is not None and count > cap:
                raise BudgetExceeded(f"more than {cap} interleavings")
            trace = m.trace()
            if enabled:
                trace.meta["truncated"] = True
            yield trace
            return
        if not candidates:
            return
        foot = {p: _footprint(m, p) for p in enabled} if reduce else {}
        asleep = set(sleep)
        for p in candidates:
            child = frozenset(q for q in asleep if _independent(foot[q], foot[p])) \
                if reduce else frozenset()
            record = m.step(p)
            yield from visit(used + 1, child)
            m.undo(record)
            if reduce:
                asleep.add(p)

    try:
        yield from visit(0, frozenset())
    finally:
        m.restore(root)


def run_threaded(obj: SharedObject, programs: dict[int, list]) -> Trace:
    """Run each process on its own thread; only invoke/respond events are recorded."""
    for p, script in programs.items():
        obj.check_script(p, [(op, tuple(a)) for op, a in script])
        obj.memory.local(p)
    lock = threading.Lock()
    events: list[Event] = []
    annotations: dict[int, dict] = {}
    errors: list[BaseException] = []

    def emit(kind: str, p: int, op: str, args: tuple = (), result: Any = None) -> int | None:
        with lock:
            events.append(Event(len(events), kind, p, op, args, None, result))
            if kind == "invoke":
                opid = sum(1 for e in events if e.kind == "invoke") - 1
                annotations[opid] = {}
                return opid
        return None

    def body(p: int) -> None:
        try:
            for op, args in programs[p]:
                args = tuple(args)
                opid = emit("invoke", p, op, args)
                ann: dict = {}
                gen = obj.start(p, op, args, ann)
                steps = 0
                try:
                    target, method, margs = next(gen)
                    while True:
                        steps += 1
                        target, method, margs = gen.send(target.apply(method, margs, proc=p))
                except StopIteration as stop:
                    result = stop.value
                ann["steps"] = steps
                with lock:
                    annotations[opid] = ann
                emit("respond", p, op, (), result)
        except BaseException as exc:  # surfaced after join
            errors.append(exc)

    threads = [threading.Thread(target=body, args=(p,)) for p in sorted(programs)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return Trace(events, annotations, {"object": obj.meta(), "mode": "threads"})
