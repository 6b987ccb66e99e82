"""Linearizability checking: sequential specs, brute-force search, certifying linearizer."""

from .bruteforce import (
    Verdict,
    check_bruteforce,
    minimal_failing_prefix,
    prefix_ops,
    replay,
    search,
)
from .certify import (
    MalformedTrace,
    RuleViolation,
    build_linearization,
    certify,
    classify,
    verify_certificate,
)
from .specs import DenyListSpec, LLSCSpec, RegisterSpec, spec_for

__all__ = [
    "DenyListSpec",
    "LLSCSpec",
    "MalformedTrace",
    "RegisterSpec",
    "RuleViolation",
    "Verdict",
    "build_linearization",
    "certify",
    "check_bruteforce",
    "classify",
    "minimal_failing_prefix",
    "prefix_ops",
    "replay",
    "search",
    "search",
    "spec_for",
    "verify_certificate",
]
