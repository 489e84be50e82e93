"""Valuation of terms in a state."""

from __future__ import annotations

from fractions import Fraction

from ..syntax.ast import (
    Add,
    ChanAt,
    ChanName,
    Concat,
    Const,
    Empty,
    Item,
    Len,
    Mul,
    Proj,
    Sort,
    Sub,
    Term,
    Time,
    Val,
    Var,
)
from .state import DEFAULT_CHANNEL, Event, State, Value


def _at(trace, index: int):
    if 0 <= index < len(trace):
        return trace[index]
    return None


def eval_term(term: Term, state: State) -> Value:
    """Value of `term`; out-of-range accesses give val=0, time=0 and the default channel."""
    match term:
        case Var():
            return state.get(term)
        case Const(value, sort):
            return int(value) if sort == Sort.INT else value
        case Add(l, r):
            return eval_term(l, state) + eval_term(r, state)
        case Sub(l, r):
            difference = eval_term(l, state) - eval_term(r, state)
            if term.sort == Sort.INT:
                return max(difference, 0)
            return difference
        case Mul(l, r):
            return eval_term(l, state) * eval_term(r, state)
        case Val(t, i):
            event = _at(eval_term(t, state), eval_term(i, state))
            return event.value if event is not None else Fraction(0)
        case Time(t, i):
            event = _at(eval_term(t, state), eval_term(i, state))
            return event.stamp if event is not None else Fraction(0)
        case ChanAt(t, i):
            event = _at(eval_term(t, state), eval_term(i, state))
            return event.chan if event is not None else DEFAULT_CHANNEL
        case Len(t):
            return len(eval_term(t, state))
        case ChanName(name):
            return name
        case Empty():
            return ()
        case Item(chan, value, stamp):
            return (Event(chan, Fraction(eval_term(value, state)), Fraction(eval_term(stamp, state))),)
        case Concat(l, r):
            return eval_term(l, state) + eval_term(r, state)
        case Proj(t, chans):
            return tuple(e for e in eval_term(t, state) if e.chan in chans)
    raise TypeError(f"cannot evaluate {term!r}")
