"""Auditable shared objects on sliding and max registers, with a step-level
simulator and linearizability checkers."""

from .base import BOTTOM, NONE, TOP, MaxTriple, WellFormedness, WTuple
from .consensus import Consensus, DoublePropose
from .denylist import DenyList, UnknownResource
from .llsc import AuditableLLSC
from .register import AuditableRegister, MissingWTuple
from .sim import (
    BudgetExceeded,
    Exhaustive,
    RandomSchedule,
    RoundRobin,
    ScheduleExhausted,
    Trace,
    explore,
    run,
    run_threaded,
)
from .traceio import emit_trace, parse_trace

__all__ = [
    "BOTTOM",
    "NONE",
    "TOP",
    "AuditableLLSC",
    "AuditableRegister",
    "BudgetExceeded",
    "Consensus",
    "DenyList",
    "DoublePropose",
    "Exhaustive",
    "MaxTriple",
    "MissingWTuple",
    "RandomSchedule",
    "RoundRobin",
    "ScheduleExhausted",
    "Trace",
    "UnknownResource",
    "WTuple",
    "WellFormedness",
    "emit_trace",
    "explore",
    "parse_trace",
    "run",
    "run_threaded",
]
