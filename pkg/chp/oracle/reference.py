"""
Trace-free reference evaluator for the dL fragment.

Programs denote plain reachability relations (start state to final
states); there are no traces, no unfinished runs and no communication.
Formulas with communication, ac-boxes or trace terms are rejected. Kept
deliberately separate from `runs` so the two can be compared.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, FrozenSet, Set, Tuple

from ..shared.errors import UnsupportedError
from ..syntax.ast import (
    AcBox,
    And,
    Assign,
    Box,
    Choice,
    Cmp,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Loop,
    Not,
    Ode,
    Or,
    Par,
    Prefix,
    Program,
    RandomAssign,
    Receive,
    Send,
    Seq,
    Sort,
    Test,
    Truth,
    Var,
    formula_terms,
    subterms,
)
from .evaluate import eval_term
from .state import Budget, State, Verdict

Reach = Tuple[FrozenSet[State], bool]


def is_dl_formula(formula: Formula) -> bool:
    """True when the formula lies in the communication-free, trace-free dL fragment."""
    try:
        _check_fragment(formula)
    except UnsupportedError:
        return False
    return True


def _check_fragment(node) -> None:
    if isinstance(node, (AcBox, Prefix, Send, Receive, Par)):
        raise UnsupportedError(f"{node} is outside the dL fragment")
    if isinstance(node, Formula):
        for term in formula_terms(node):
            if any(t.sort in (Sort.TRACE, Sort.CHAN) for t in subterms(term)):
                raise UnsupportedError(f"trace term in {node}")
        for part in _children(node):
            _check_fragment(part)
        if isinstance(node, (Forall, Exists)) and node.var.sort == Sort.TRACE:
            raise UnsupportedError("trace quantifier outside the dL fragment")
    elif isinstance(node, Program):
        for part in _children(node):
            _check_fragment(part)


def _children(node):
    match node:
        case Not(a):
            return [a]
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r) | Seq(l, r) | Choice(l, r):
            return [l, r]
        case Forall(_, b) | Exists(_, b):
            return [b]
        case Box(p, post):
            return [p, post]
        case Loop(body):
            return [body]
        case Test(cond):
            return [cond]
        case Ode(_, constraint):
            return [constraint]
    return []


class ReferenceEvaluator:
    def __init__(self, budget: Budget):
        self.budget = budget
        self._cache: Dict[Tuple[Program, State], Reach] = {}

    def reach(self, program: Program, v: State) -> Reach:
        key = (program, v)
        if key not in self._cache:
            self._cache[key] = self._reach(program, v)
        return self._cache[key]

    def _reach(self, program: Program, v: State) -> Reach:
        match program:
            case Assign(x, e):
                return frozenset({v.set(x, eval_term(e, v))}), False
            case RandomAssign(x):
                return frozenset(v.set(x, a) for a in self.budget.values), False
            case Test(cond):
                verdict = self.holds(v, cond)
                return (frozenset({v}) if verdict is Verdict.TRUE else frozenset()), verdict is Verdict.UNKNOWN
            case Ode(bindings, constraint):
                if self.holds(v, constraint) is not Verdict.TRUE:
                    return frozenset(), False
                reached: Set[State] = set()
                for r in self.budget.durations:
                    w = v
                    for x, rhs in bindings:
                        w = w.set(x, v.get(x) + r * Fraction(eval_term(rhs, v)))
                    if self.holds(w, constraint) is Verdict.TRUE:
                        reached.add(w)
                return frozenset(reached), False
            case Seq(a, b):
                first, truncated = self.reach(a, v)
                reached = set()
                for u in first:
                    more, t = self.reach(b, u)
                    reached |= more
                    truncated = truncated or t
                return frozenset(reached), truncated
            case Choice(a, b):
                ra, ta = self.reach(a, v)
                rb, tb = self.reach(b, v)
                return ra | rb, ta or tb
            case Loop(body):
                reached = {v}
                frontier = {v}
                truncated = False
                for _ in range(self.budget.loop_depth + 1):
                    fresh = set()
                    for u in frontier:
                        step, t = self.reach(body, u)
                        truncated = truncated or t
                        fresh |= step - reached
                    if not fresh:
                        return frozenset(reached), truncated
                    reached |= fresh
                    frontier = fresh
                return frozenset(reached), True
        raise UnsupportedError(f"{program} is outside the dL fragment")

    def holds(self, v: State, formula: Formula) -> Verdict:
        match formula:
            case Truth(value):
                return Verdict.of(value)
            case Cmp(op, l, r):
                a, b = eval_term(l, v), eval_term(r, v)
                return Verdict.of(
                    {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
                )
            case Not(a):
                return ~self.holds(v, a)
            case And(l, r):
                return self.holds(v, l) & self.holds(v, r)
            case Or(l, r):
                return self.holds(v, l) | self.holds(v, r)
            case Implies(l, r):
                return self.holds(v, l).implies(self.holds(v, r))
            case Iff(l, r):
                a, b = self.holds(v, l), self.holds(v, r)
                return a.implies(b) & b.implies(a)
            case Forall(var, body):
                result = Verdict.TRUE
                for value in self._range(var):
                    result = result & self.holds(v.set(var, value), body)
                return result
            case Exists(var, body):
                result = Verdict.FALSE
                for value in self._range(var):
                    result = result | self.holds(v.set(var, value), body)
                return result
            case Box(program, post):
                reached, truncated = self.reach(program, v)
                result = Verdict.TRUE
                for w in reached:
                    result = result & self.holds(w, post)
                if truncated and result is Verdict.TRUE:
                    return Verdict.UNKNOWN
                return result
        raise UnsupportedError(f"{formula} is outside the dL fragment")

    def _range(self, var: Var):
        return self.budget.naturals if var.sort == Sort.INT else self.budget.values


def reference_satisfies(state: State, formula: Formula, budget: Budget | None = None) -> Verdict:
    """dL satisfaction computed without traces; raises UnsupportedError outside the fragment."""
    _check_fragment(formula)
    return ReferenceEvaluator(budget or Budget()).holds(state, formula)
