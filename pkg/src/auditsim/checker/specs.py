"""Sequential specifications as pure transition functions.

``spec.step(state, proc, op, args)`` returns ``(response, next_state)``.
States are hashable so the brute-force search can memoize on them.
Responses are deterministic, so a spec accepts an observed response exactly
when it equals the computed one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable


class UnknownOperation(ValueError):
    pass


@dataclass(frozen=True)
class RegisterSpec:
    """Auditable register: reads leave (reader, value) pairs that audits report."""

    v0: Any = 0
    name: str = "register"

    def initial(self) -> Hashable:
        return (self.v0, frozenset())

    def step(self, state: Hashable, proc: int, op: str, args: tuple) -> tuple[Any, Hashable]:
        value, pairs = state
        if op == "read":
            return value, (value, pairs | {(proc, value)})
        if op == "write":
            return None, (args[0], pairs)
        if op == "audit":
            return pairs, state
        raise UnknownOperation(op)


@dataclass(frozen=True)
class LLSCSpec:
    """Auditable LL/SC: SC by p succeeds iff no successful SC since p's last LL."""

    v0: Any = 0
    name: str = "llsc"

    def initial(self) -> Hashable:
        return (self.v0, frozenset(), frozenset())

    def step(self, state: Hashable, proc: int, op: str, args: tuple) -> tuple[Any, Hashable]:
        value, pairs, links = state
        if op == "ll":
            return value, (value, pairs | {(proc, value)}, links | {proc})
        if op == "sc":
            if proc in links:
                return True, (args[0], pairs, frozenset())
            return False, (value, pairs, links)
        if op == "audit":
            return pairs, state
        raise UnknownOperation(op)


@dataclass(frozen=True)
class DenyListSpec:
    """Immediate deny list: a prove is valid iff no append of its resource precedes it."""

    name: str = "denylist"

    def initial(self) -> Hashable:
        return (frozenset(), frozenset())

    def step(self, state: Hashable, proc: int, op: str, args: tuple) -> tuple[Any, Hashable]:
        appended, valid = state
        if op == "append":
            return None, (appended | {args[0]}, valid)
        if op == "prove":
            x = args[0]
            if x in appended:
                return False, state
            return True, (appended, valid | {(proc, x)})
        if op == "read_one":
            return frozenset(pr for pr in valid if pr[1] == args[0]), state
        if op == "read_all":
            return valid, state
        raise UnknownOperation(op)


def spec_for(meta: dict, name: str | None = None):
    """Pick the sequential specification for a trace's object metadata (or an explicit spec name)."""
    obj = meta.get("object", meta)
    kind = name or obj.get("kind")
    if kind == "register":
        return RegisterSpec(obj.get("v0", 0))
    if kind == "llsc":
        return LLSCSpec(obj.get("v0", 0))
    if kind == "denylist":
        return DenyListSpec()
    raise ValueError(f"no sequential specification for {kind!r}")
