"""
Budgeted enumeration of prefix-closed, total run sets.

A run set from a start state v is kept as a set of behaviours (τ, w) with
w = None for ⊥. Nondeterministic choices range over the budget; loops are
unrolled up to the loop depth and the result is flagged `truncated` when
one more unrolling would still add behaviours.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterator, Optional, Set, Tuple

from ..shared.errors import UnsupportedError
from ..static import bound_vars, channels
from ..syntax.ast import (
    MU,
    And,
    Assign,
    Choice,
    Cmp,
    Formula,
    Loop,
    Ode,
    Par,
    Program,
    RandomAssign,
    Receive,
    Send,
    Seq,
    Term,
    Test,
    Truth,
    Var,
    subterms,
)
from .evaluate import eval_term
from .state import Budget, Computation, RecEvent, RecordedTrace, RunSet, State, Verdict, is_chronological

logger = logging.getLogger(__name__)

Behaviour = Tuple[RecordedTrace, Optional[State]]
Behaviours = FrozenSet[Behaviour]
TestFn = Callable[[State, Formula], Verdict]


def _degree(term: Term, evolving: FrozenSet[Var]) -> int:
    from ..syntax.ast import Add, Mul, Sub

    match term:
        case Var():
            return 1 if term in evolving else 0
        case Add(l, r) | Sub(l, r):
            return max(_degree(l, evolving), _degree(r, evolving))
        case Mul(l, r):
            return _degree(l, evolving) + _degree(r, evolving)
    return 0


def _check_convex(constraint: Formula, evolving: FrozenSet[Var]) -> None:
    """Domain constraints must be conjunctions of inequalities linear in the evolving variables."""
    match constraint:
        case Truth(True):
            return
        case And(l, r):
            _check_convex(l, evolving)
            _check_convex(r, evolving)
            return
        case Cmp(op, l, r) if op != "!=":
            if _degree(l, evolving) <= 1 and _degree(r, evolving) <= 1:
                return
    raise UnsupportedError(f"domain constraint {constraint} is not a conjunction of linear inequalities")


class RunEnumerator:
    """Enumerates behaviours of programs; `test` decides test conditions."""

    def __init__(self, budget: Budget, test: TestFn):
        self.budget = budget
        self.test = test
        self._cache: Dict[Tuple[Program, State], Tuple[Behaviours, bool]] = {}

    def runs(self, program: Program, state: State) -> Tuple[Behaviours, bool]:
        key = (program, state)
        cached = self._cache.get(key)
        if cached is None:
            cached = self._runs(program, state)
            self._cache[key] = cached
        return cached

    def _runs(self, program: Program, v: State) -> Tuple[Behaviours, bool]:
        least: Behaviour = ((), None)
        match program:
            case Assign(x, e):
                return frozenset({least, ((), v.set(x, eval_term(e, v)))}), False
            case RandomAssign(x):
                return frozenset({least} | {((), v.set(x, a)) for a in self.budget.values}), False
            case Test(cond):
                verdict = self.test(v, cond)
                if verdict is Verdict.TRUE:
                    return frozenset({least, ((), v)}), False
                return frozenset({least}), verdict is Verdict.UNKNOWN
            case Ode():
                return self._ode(program, v)
            case Send(chan, h, e):
                event = RecEvent(h.name, chan, Fraction(eval_term(e, v)), v.get(MU))
                return frozenset({least, ((event,), None), ((event,), v)}), False
            case Receive(chan, h, x):
                result: Set[Behaviour] = {least}
                for a in self.budget.values:
                    event = RecEvent(h.name, chan, a, v.get(MU))
                    result.add(((event,), None))
                    result.add(((event,), v.set(x, a)))
                return frozenset(result), False
            case Seq(a, b):
                return self._sequence(a, b, v)
            case Choice(a, b):
                ra, ta = self.runs(a, v)
                rb, tb = self.runs(b, v)
                return ra | rb, ta or tb
            case Loop(body):
                return self._loop(body, v)
            case Par(a, b):
                return self._parallel(a, b, v)
        raise TypeError(f"unknown program {program!r}")

    def _ode(self, ode: Ode, v: State) -> Tuple[Behaviours, bool]:
        evolving = frozenset(ode.variables) | {MU}
        for _, rhs in ode.bindings:
            if any(isinstance(t, Var) and t in evolving for t in subterms(rhs)):
                raise UnsupportedError(f"ODE {ode} is not constant-rate (right-hand side mentions evolving variables)")
        _check_convex(ode.constraint, evolving)

        rates = {x: Fraction(eval_term(rhs, v)) for x, rhs in ode.bindings}
        rates.setdefault(MU, Fraction(1))
        result: Set[Behaviour] = {((), None)}
        truncated = False
        start = self.test(v, ode.constraint)
        if start is Verdict.UNKNOWN:
            truncated = True
        if start is not Verdict.TRUE:
            return frozenset(result), truncated
        for r in self.budget.durations:
            w = v
            for x, rate in rates.items():
                w = w.set(x, v.get(x) + r * rate)
            end = self.test(w, ode.constraint)
            if end is Verdict.TRUE:
                result.add(((), w))
            elif end is Verdict.UNKNOWN:
                truncated = True
        return frozenset(result), truncated

    def _sequence(self, a: Program, b: Program, v: State) -> Tuple[Behaviours, bool]:
        first, truncated = self.runs(a, v)
        result: Set[Behaviour] = set()
        for trace, u in first:
            result.add((trace, None))
            if u is None:
                continue
            second, t2 = self.runs(b, u)
            truncated = truncated or t2
            for trace2, w in second:
                result.add((trace + trace2, w))
        return frozenset(result), truncated

    def _loop(self, body: Program, v: State) -> Tuple[Behaviours, bool]:
        result: Set[Behaviour] = {((), None), ((), v)}
        frontier: Set[Behaviour] = {((), v)}
        truncated = False
        for depth in range(self.budget.loop_depth + 1):
            fresh: Set[Behaviour] = set()
            for trace, u in frontier:
                step, t = self.runs(body, u)
                truncated = truncated or t
                for trace2, w in step:
                    candidate = (trace + trace2, w)
                    if candidate not in result:
                        fresh.add(candidate)
            if not fresh:
                return frozenset(result), truncated
            if depth == self.budget.loop_depth:
                logger.debug(f"Loop unrolling truncated at depth {depth}")
                return frozenset(result), True
            result |= fresh
            frontier = {(trace, w) for trace, w in fresh if w is not None}
        return frozenset(result), True

    def _parallel(self, a: Program, b: Program, v: State) -> Tuple[Behaviours, bool]:
        ra, ta = self.runs(a, v)
        rb, tb = self.runs(b, v)
        cn_a, cn_b = channels(a), channels(b)
        joint = cn_a & cn_b
        bound_a = bound_vars(a)
        result: Set[Behaviour] = set()
        for trace_a, wa in ra:
            for trace_b, wb in rb:
                if wa is not None and wb is not None and wa.get(MU) != wb.get(MU):
                    continue
                final = None if wa is None or wb is None else _merge(wa, wb, bound_a)
                for trace in _shuffles(trace_a, trace_b, joint):
                    if is_chronological(trace):
                        result.add((trace, final))
        return frozenset(result), ta or tb


def _merge(wa: State, wb: State, bound_a) -> State:
    merged = wb
    for var, value in wa.items():
        if bound_a.contains(var):
            merged = merged.set(var, value)
    for var, _ in wb.items():
        if bound_a.contains(var) and wa.get(var) != wb.get(var):
            merged = merged.set(var, wa.get(var))
    return merged


def _shuffles(ta: RecordedTrace, tb: RecordedTrace, joint) -> Iterator[RecordedTrace]:
    """Interleavings of ta and tb that identify joint-channel events."""

    def go(i: int, j: int) -> Iterator[RecordedTrace]:
        if i == len(ta) and j == len(tb):
            yield ()
            return
        if i < len(ta) and not joint.contains(ta[i].chan):
            for rest in go(i + 1, j):
                yield (ta[i],) + rest
        if j < len(tb) and not joint.contains(tb[j].chan):
            for rest in go(i, j + 1):
                yield (tb[j],) + rest
        if i < len(ta) and j < len(tb) and joint.contains(ta[i].chan) and ta[i] == tb[j]:
            for rest in go(i + 1, j + 1):
                yield (ta[i],) + rest

    return go(0, 0)


def runs(program: Program, state: State, budget: Optional[Budget] = None) -> RunSet:
    """The budgeted run set of `program` from `state`."""
    from .satisfy import Oracle

    oracle = Oracle(budget or Budget())
    behaviours, truncated = oracle.enumerator.runs(program, state)
    return RunSet(frozenset(Computation(state, trace, w) for trace, w in behaviours), truncated)


def check_prefix_total(computations, start_states=None) -> bool:
    """Prefix-closedness and totality of a set of computations."""
    members = {(c.start, c.trace, c.final) for c in computations}
    starts = set(start_states) if start_states is not None else {c.start for c in computations}
    for v in starts:
        if (v, (), None) not in members:
            return False
    for v, trace, _ in members:
        for k in range(len(trace) + 1):
            if (v, trace[:k], None) not in members:
                return False
    return True
