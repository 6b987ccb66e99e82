"""Build an object plus per-process op scripts from a run configuration.

Process ids: register writers are ``1..n`` and readers ``n+1..n+m``; LL/SC,
deny-list and consensus processes are ``1..k``.  Auditors always come after
the object's own processes.  Written values are tagged ``"v<proc>.<count>"``
so every written value is unique.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from typing import Any

from .base import SharedObject
from .consensus import Consensus
from .denylist import DenyList
from .llsc import AuditableLLSC
from .register import AuditableRegister

OBJECTS = ("register", "llsc", "denylist", "consensus")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    object: str = "register"
    writers: int = 1
    readers: int = 1
    auditors: int = 0
    resources: int = 1
    procs: int = 2
    ops_per_proc: int = 1
    mix: str = "fixed"  # "fixed" role scripts or "random" role-legal draws
    seed: int = 0

    def validate(self) -> None:
        if self.object not in OBJECTS:
            raise ConfigError(f"unknown object {self.object!r}; choose from {', '.join(OBJECTS)}")
        if self.mix not in ("fixed", "random"):
            raise ConfigError(f"unknown mix {self.mix!r}")
        for name in ("writers", "readers", "auditors", "resources", "procs", "ops_per_proc"):
            if getattr(self, name) < 0:
                raise ConfigError(f"--{name.replace('_', '-')} must be >= 0")
        if self.object == "register" and (self.writers < 1 or self.readers < 1):
            raise ConfigError("register needs at least one writer and one reader")
        if self.object == "llsc" and self.writers < 1:
            raise ConfigError("llsc needs at least one process (--writers)")
        if self.object in ("denylist", "consensus") and self.procs < 2:
            raise ConfigError(f"{self.object} needs --procs >= 2")
        if self.object == "denylist" and self.resources < 1 and self.mix == "fixed":
            raise ConfigError("denylist scripts need at least one resource")

    def as_dict(self) -> dict:
        return asdict(self)


class _Values:
    def __init__(self) -> None:
        self._count: dict[int, int] = {}

    def next(self, p: int) -> str:
        c = self._count.get(p, 0)
        self._count[p] = c + 1
        return f"v{p}.{c}"


def build(cfg: RunConfig) -> tuple[SharedObject, dict[int, list]]:
    cfg.validate()
    rng = random.Random(cfg.seed)
    values = _Values()
    k = cfg.ops_per_proc
    progs: dict[int, list] = {}

    if cfg.object == "register":
        obj: SharedObject = AuditableRegister(cfg.writers, cfg.readers, 0)
        for p in obj.writers:
            ops = ["write"] * k if cfg.mix == "fixed" else [rng.choice(("write", "audit")) for _ in range(k)]
            progs[p] = [(op, (values.next(p),) if op == "write" else ()) for op in ops]
        for p in obj.readers:
            ops = ["read"] * k if cfg.mix == "fixed" else [rng.choice(("read", "audit")) for _ in range(k)]
            progs[p] = [(op, ()) for op in ops]
        first_auditor = cfg.writers + cfg.readers + 1

    elif cfg.object == "llsc":
        obj = AuditableLLSC(cfg.writers, 0)
        for p in obj.procs:
            script, last = [], None
            for _ in range(k):
                nxt = "sc" if last == "ll" else "ll"
                if cfg.mix == "random" and rng.random() < 1 / 3:
                    script.append(("audit", ()))
                    continue
                script.append((nxt, (values.next(p),) if nxt == "sc" else ()))
                last = nxt
            progs[p] = script
        first_auditor = cfg.writers + 1

    elif cfg.object == "denylist":
        res = list(range(cfg.resources))
        obj = DenyList(cfg.procs, res)
        for p in obj.procs:
            script = []
            for i in range(k):
                if cfg.mix == "fixed":
                    x = res[i % len(res)]
                    op = "append" if (p + i) % 3 == 0 else "prove"
                    script.append((op, (x,)))
                else:
                    op = rng.choice(("append", "prove", "read_one", "read_all") if res else ("read_all",))
                    script.append((op, () if op == "read_all" else (rng.choice(res),)))
            progs[p] = script
        first_auditor = cfg.procs + 1

    else:
        obj = Consensus(list(range(1, cfg.procs + 1)))
        for p in obj.participants:
            progs[p] = [("propose", (values.next(p),))]
        first_auditor = cfg.procs + 1

    for a in range(first_auditor, first_auditor + cfg.auditors):
        if cfg.object == "denylist":
            progs[a] = [(("read_one", (res[i % len(res)],)) if res and i % 2 == 0 else ("read_all", ()))
                        for i in range(k)]
        elif cfg.object != "consensus":
            progs[a] = [("audit", ())] * k
    return obj, progs


def decisions(trace) -> dict[int, Any]:
    """Decided value per process in a consensus trace (completed proposes only)."""
    return {op.proc: op.result for op in trace.operations() if op.op == "propose" and op.complete}


def consensus_problems(trace) -> list[str]:
    """Agreement, validity and termination violations in a complete consensus trace."""
    problems = []
    ops = [op for op in trace.operations() if op.op == "propose"]
    proposals = {op.args[0] for op in ops}
    decided = {op.result for op in ops if op.complete}
    if any(not op.complete for op in ops):
        problems.append("termination: some propose did not finish")
    if len(decided) > 1:
        problems.append(f"agreement: decided {sorted(map(repr, decided))}")
    if not decided <= proposals:
        problems.append(f"validity: decided {sorted(map(repr, decided - proposals))} never proposed")
    return problems
