"""
Three-valued satisfaction over budgeted run sets.

Connectives are Kleene. A box is FALSE as soon as one enumerated run
violates it; otherwise it is UNKNOWN when the run set was truncated or a
subformula was UNKNOWN, and TRUE when everything checked out.
"""

from __future__ import annotations

import logging
from typing import Dict, Iterable, Optional, Tuple

from ..static import channels
from ..syntax.ast import (
    AcBox,
    And,
    Box,
    Cmp,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Prefix,
    Sort,
    Term,
    Truth,
    Var,
    formula_terms,
    subterms,
)
from .evaluate import eval_term
from .runs import RunEnumerator
from .state import Budget, RawTrace, State, Verdict

logger = logging.getLogger(__name__)

_COMPARE = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def is_prefix(t1: RawTrace, t2: RawTrace) -> bool:
    return len(t1) <= len(t2) and tuple(t2[: len(t1)]) == tuple(t1)


def _mentions(term: Term, var: Var) -> bool:
    return any(t == var for t in subterms(term))


class Oracle:
    """
    Memoizing evaluator of formulas in states under one budget.

    `strict_commit=False` switches the commitment condition of ac-boxes to
    quantify over all prefixes, including the full trace.
    """

    def __init__(self, budget: Budget, strict_commit: bool = True):
        self.budget = budget
        self.strict_commit = strict_commit
        self.enumerator = RunEnumerator(budget, self.satisfies)
        self._cache: Dict[Tuple[State, Formula], Verdict] = {}

    def satisfies(self, state: State, formula: Formula) -> Verdict:
        key = (state, formula)
        cached = self._cache.get(key)
        if cached is None:
            cached = self._satisfies(state, formula)
            self._cache[key] = cached
        return cached

    def _satisfies(self, v: State, formula: Formula) -> Verdict:
        match formula:
            case Truth(value):
                return Verdict.of(value)
            case Cmp(op, l, r):
                return Verdict.of(_COMPARE[op](eval_term(l, v), eval_term(r, v)))
            case Prefix(l, r):
                return Verdict.of(is_prefix(eval_term(l, v), eval_term(r, v)))
            case Not(a):
                return ~self.satisfies(v, a)
            case And(l, r):
                left = self.satisfies(v, l)
                if left is Verdict.FALSE:
                    return left
                return left & self.satisfies(v, r)
            case Or(l, r):
                left = self.satisfies(v, l)
                if left is Verdict.TRUE:
                    return left
                return left | self.satisfies(v, r)
            case Implies(l, r):
                left = self.satisfies(v, l)
                if left is Verdict.FALSE:
                    return Verdict.TRUE
                return left.implies(self.satisfies(v, r))
            case Iff(l, r):
                a, b = self.satisfies(v, l), self.satisfies(v, r)
                return (a & b) | (~a & ~b)
            case Forall(var, body):
                result = Verdict.TRUE
                for value in self.candidates(var, body, v):
                    result = result & self.satisfies(v.set(var, value), body)
                    if result is Verdict.FALSE:
                        break
                return result
            case Exists(var, body):
                result = Verdict.FALSE
                for value in self.candidates(var, body, v):
                    result = result | self.satisfies(v.set(var, value), body)
                    if result is Verdict.TRUE:
                        break
                return result
            case Box(program, post):
                return self._box(v, program, post)
            case AcBox(program, assumption, commitment, post):
                return self._acbox(v, program, assumption, commitment, post)
        raise TypeError(f"unknown formula {formula!r}")

    def candidates(self, var: Var, body: Formula, v: State) -> Iterable:
        """Finite range of a quantified variable."""
        if var.sort == Sort.REAL:
            return self.budget.values
        if var.sort == Sort.INT:
            return self.budget.naturals
        found = list(self.budget.trace_candidates())
        for term in formula_terms(body):
            for sub in subterms(term):
                if sub.sort == Sort.TRACE and not _mentions(sub, var):
                    value = eval_term(sub, v)
                    if value not in found:
                        found.append(value)
        return found

    def _box(self, v: State, program, post: Formula) -> Verdict:
        behaviours, truncated = self.enumerator.runs(program, v)
        result = Verdict.TRUE
        for trace, w in behaviours:
            if w is None:
                continue
            verdict = self.satisfies(w.concat(trace), post)
            if verdict is Verdict.FALSE:
                logger.debug(f"Box violated by run ending in {w!r}")
                return verdict
            result = result & verdict
        return Verdict.UNKNOWN if truncated and result is Verdict.TRUE else result

    def _acbox(self, v: State, program, assumption: Formula, commitment: Formula, post: Formula) -> Verdict:
        behaviours, truncated = self.enumerator.runs(program, v)
        result = Verdict.TRUE
        for trace, w in behaviours:
            # assumption verdicts on v·σ for σ = trace[:k], k = 0..len(trace)
            assumed = [self.satisfies(v.concat(trace[:k]), assumption) for k in range(len(trace) + 1)]
            strict = Verdict.TRUE
            for verdict in assumed[:-1]:
                strict = strict & verdict
            full = strict & assumed[-1]

            premise = strict if self.strict_commit else full
            verdict = premise.implies(self.satisfies(v.concat(trace), commitment))
            if w is not None:
                verdict = verdict & full.implies(self.satisfies(w.concat(trace), post))
            if verdict is Verdict.FALSE:
                logger.debug(f"Ac-box violated by trace of length {len(trace)}")
                return verdict
            result = result & verdict
        return Verdict.UNKNOWN if truncated and result is Verdict.TRUE else result


def budget_for(formula: Formula, budget: Optional[Budget]) -> Budget:
    budget = budget or Budget()
    if budget.channels:
        return budget
    names = channels(formula).names
    return budget.with_channels(names) if names else budget


def satisfies(state: State, formula: Formula, budget: Optional[Budget] = None, strict_commit: bool = True) -> Verdict:
    """v ⊨ φ under the budget; trace quantifiers use the formula's channels when the budget names none."""
    oracle = Oracle(budget_for(formula, budget), strict_commit)
    return oracle.satisfies(state, formula)


def valid_on(states: Iterable[State], formula: Formula, budget: Optional[Budget] = None, strict_commit: bool = True) -> Tuple[Verdict, Optional[State]]:
    """Conjunction of verdicts over sample states, with the first falsifying state."""
    oracle = Oracle(budget_for(formula, budget), strict_commit)
    result = Verdict.TRUE
    for state in states:
        verdict = oracle.satisfies(state, formula)
        if verdict is Verdict.FALSE:
            return verdict, state
        result = result & verdict
    return result, None
