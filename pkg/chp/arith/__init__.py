"""Arithmetic closing rules: trace abstraction, Presburger, linear reals and the SMT bridge."""

from .abstraction import AbstractionMap, abstract_traces
from .dispatch import CLOSED, OPEN, DispatchResult, dispatch
from .linear_real import decide_linear, decide_real
from .presburger import decide_presburger
from .result import INVALID, UNKNOWN, VALID, ArithResult
from .smt import SmtBridge

__all__ = [
    "AbstractionMap",
    "ArithResult",
    "CLOSED",
    "DispatchResult",
    "INVALID",
    "OPEN",
    "SmtBridge",
    "UNKNOWN",
    "VALID",
    "abstract_traces",
    "decide_linear",
    "decide_presburger",
    "decide_real",
    "dispatch",
]
