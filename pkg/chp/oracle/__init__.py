"""Bounded executable semantics used as ground truth for the calculus."""

from .evaluate import eval_term
from .runs import check_prefix_total, runs
from .satisfy import Oracle, satisfies, valid_on
from .state import Budget, Computation, Event, RecEvent, RunSet, State, Verdict

__all__ = [
    "Budget",
    "Computation",
    "Event",
    "Oracle",
    "RecEvent",
    "RunSet",
    "State",
    "Verdict",
    "check_prefix_total",
    "eval_term",
    "runs",
    "satisfies",
    "valid_on",
]
