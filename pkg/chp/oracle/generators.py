"""
Seeded random generators of terms, programs, formulas and states.

Everything is drawn over a fixed sample vocabulary (x, y, z: R; n, m, k: Z;
h, g: T; channels c, d) and from a caller-supplied `random.Random`, so
test runs are reproducible from their seed.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from ..syntax.ast import (
    EPS,
    MU,
    TRUE,
    Add,
    And,
    Assign,
    Box,
    Choice,
    Cmp,
    Concat,
    Const,
    Declarations,
    Exists,
    Forall,
    Formula,
    Implies,
    Item,
    Len,
    Loop,
    Mul,
    Not,
    Ode,
    Or,
    Program,
    Proj,
    RandomAssign,
    Receive,
    Send,
    Seq,
    Sort,
    Sub,
    Term,
    Test,
    Time,
    Val,
    Var,
    nat,
    real,
)
from .state import Event, State

X = Var("x", Sort.REAL)
Y = Var("y", Sort.REAL)
Z = Var("z", Sort.REAL)
N = Var("n", Sort.INT)
M = Var("m", Sort.INT)
K = Var("k", Sort.INT)
H = Var("h", Sort.TRACE)
G = Var("g", Sort.TRACE)
CHANNELS = ("c", "d")
REALS = (X, Y, Z)
INTS = (N, M, K)

SMALL_CONSTANTS = (Fraction(0), Fraction(1), Fraction(2), Fraction(-1), Fraction(1, 2))
OPS = ("<", "<=", ">", ">=", "=", "!=")


def sample_declarations() -> Declarations:
    return Declarations(
        variables={"x": Sort.REAL, "y": Sort.REAL, "z": Sort.REAL, "n": Sort.INT, "h": Sort.TRACE, "g": Sort.TRACE},
        channels=list(CHANNELS),
        recorder="h",
    )


class Generator:
    """Random syntax and states over the sample vocabulary."""

    def __init__(self, rng: random.Random, reals: Sequence[Var] = REALS):
        self.rng = rng
        self.reals = tuple(reals)

    def choice(self, options):
        return options[self.rng.randrange(len(options))]

    # -- terms ---------------------------------------------------------------

    def constant(self) -> Const:
        return real(self.choice(SMALL_CONSTANTS))

    def real_term(self, depth: int = 2, variables: Optional[Sequence[Var]] = None) -> Term:
        """Polynomial real term."""
        variables = tuple(variables) if variables is not None else self.reals
        if depth <= 0 or self.rng.random() < 0.35:
            if variables and self.rng.random() < 0.6:
                return self.choice(variables)
            return self.constant()
        build = self.choice((Add, Sub, Mul, Add))
        return build(self.real_term(depth - 1, variables), self.real_term(depth - 1, variables))

    def linear_term(self, variables: Optional[Sequence[Var]] = None) -> Term:
        """Sum of constant multiples of variables plus a constant."""
        variables = tuple(variables) if variables is not None else self.reals
        term: Term = self.constant()
        for v in variables:
            if self.rng.random() < 0.6:
                term = Add(Mul(self.constant(), v), term)
        return term

    def trace_term(self, depth: int = 2) -> Term:
        if depth <= 0 or self.rng.random() < 0.3:
            return self.choice((H, G, EPS, self.item()))
        kind = self.rng.randrange(3)
        if kind == 0:
            return Concat(self.trace_term(depth - 1), self.trace_term(depth - 1))
        if kind == 1:
            chans = frozenset(c for c in CHANNELS if self.rng.random() < 0.5)
            return Proj(self.trace_term(depth - 1), chans)
        return self.item()

    def item(self) -> Item:
        stamp = self.choice((MU, real(0), real(1)))
        return Item(self.choice(CHANNELS), self.real_term(1), stamp)

    def int_term(self, depth: int = 2) -> Term:
        if depth <= 0 or self.rng.random() < 0.4:
            return self.choice((N, nat(self.rng.randrange(3)), Len(self.trace_term(1))))
        build = self.choice((Add, Sub))
        return build(self.int_term(depth - 1), self.int_term(depth - 1))

    def access_term(self, depth: int = 2) -> Term:
        """val/time access into a random trace term."""
        build = self.choice((Val, Time))
        return build(self.trace_term(depth), self.int_term(1))

    # -- formulas ------------------------------------------------------------

    def comparison(self, variables: Optional[Sequence[Var]] = None, linear: bool = False) -> Formula:
        if linear:
            return Cmp(self.choice(OPS), self.linear_term(variables), self.linear_term(variables))
        return Cmp(self.choice(OPS), self.real_term(1, variables), self.real_term(1, variables))

    def fol(self, depth: int = 2, variables: Optional[Sequence[Var]] = None, quantifiers: bool = True,
            linear: bool = False) -> Formula:
        """Quantifier-light first-order real arithmetic formula."""
        if depth <= 0 or self.rng.random() < 0.3:
            return self.comparison(variables, linear)
        sub = lambda: self.fol(depth - 1, variables, quantifiers, linear)
        kind = self.rng.randrange(5 if quantifiers else 4)
        if kind == 0:
            return Not(sub())
        if kind == 1:
            return And(sub(), sub())
        if kind == 2:
            return Or(sub(), sub())
        if kind == 3:
            return Implies(sub(), sub())
        var = self.choice(variables or self.reals)
        build = self.choice((Forall, Exists))
        return build(var, sub())

    def presburger_sentence(self, quantifiers: int = 2, coefficients: Sequence[int] = (1, 2),
                            bound: int = 4) -> Formula:
        """
        Closed integer formula whose quantifiers range over [-bound, bound].

        Each quantifier carries its range as a guard, so the sentence means
        the same over all of Z as over the bounded range.
        """
        bound_vars = INTS[: self.rng.randint(1, quantifiers)]

        def int_linear() -> Term:
            term: Term = nat(self.rng.randrange(4))
            for v in bound_vars:
                if self.rng.random() < 0.6:
                    term = Add(Mul(nat(self.choice(coefficients)), v), term)
            return term

        def body(depth: int) -> Formula:
            if depth <= 0 or self.rng.random() < 0.3:
                return Cmp(self.choice(OPS), int_linear(), int_linear())
            kind = self.rng.randrange(3)
            if kind == 0:
                return Not(body(depth - 1))
            build = And if kind == 1 else Or
            return build(body(depth - 1), body(depth - 1))

        sentence = body(2)
        for v in reversed(bound_vars):
            in_range = And(Cmp(">=", Add(v, nat(bound)), nat(0)), Cmp("<=", v, nat(bound)))
            if self.rng.random() < 0.5:
                sentence = Forall(v, Implies(in_range, sentence))
            else:
                sentence = Exists(v, And(in_range, sentence))
        return sentence

    def history_formula(self) -> Formula:
        """Formula over the recorder h only, usable as assumption or commitment."""
        projected = Proj(H, frozenset({self.choice(CHANNELS)}))
        kind = self.rng.randrange(4)
        if kind == 0:
            return TRUE
        if kind == 1:
            return Cmp(self.choice(("<=", ">=", "=")), Len(projected), nat(self.rng.randrange(3)))
        last = Sub(Len(projected), nat(1))
        guard = Cmp(">", Len(projected), nat(0))
        return Implies(guard, Cmp(self.choice(OPS), Val(projected, last), self.constant()))

    def dl_formula(self, depth: int = 2) -> Formula:
        """Formula of the communication-free dL fragment not mentioning global time."""
        if depth <= 0 or self.rng.random() < 0.25:
            return self.comparison()
        kind = self.rng.randrange(5)
        if kind == 0:
            return Box(self.program(2, communication=False), self.dl_formula(depth - 1))
        if kind == 1:
            return Not(self.dl_formula(depth - 1))
        if kind == 2:
            return And(self.dl_formula(depth - 1), self.dl_formula(depth - 1))
        if kind == 3:
            return Implies(self.dl_formula(depth - 1), self.dl_formula(depth - 1))
        return Forall(self.choice(self.reals), self.dl_formula(depth - 1))

    # -- programs ------------------------------------------------------------

    def ode(self, variables: Optional[Sequence[Var]] = None) -> Ode:
        variables = tuple(variables) if variables is not None else self.reals
        x = self.choice(variables)
        others = tuple(v for v in variables if v != x)
        rate = self.real_term(1, others) if others else self.constant()
        constraint = TRUE
        if self.rng.random() < 0.5:
            constraint = Cmp(self.choice(("<=", ">=")), x, real(self.choice((0, 1, 2))))
        return Ode(((x, rate),), constraint)

    def atomic(self, communication: bool = True, variables: Optional[Sequence[Var]] = None,
               recorder: Var = H, channels: Sequence[str] = CHANNELS) -> Program:
        variables = tuple(variables) if variables is not None else self.reals
        kinds = ["assign", "assign", "random", "test", "ode"]
        if communication:
            kinds += ["send", "send", "receive"]
        kind = self.choice(kinds)
        if kind == "assign":
            return Assign(self.choice(variables), self.real_term(1, variables))
        if kind == "random":
            return RandomAssign(self.choice(variables))
        if kind == "test":
            return Test(self.comparison(variables))
        if kind == "ode":
            return self.ode(variables)
        if kind == "send":
            return Send(self.choice(channels), recorder, self.real_term(1, variables))
        return Receive(self.choice(channels), recorder, self.choice(variables))

    def program(self, depth: int = 2, communication: bool = True, variables: Optional[Sequence[Var]] = None,
                recorder: Var = H, loops: bool = True, channels: Sequence[str] = CHANNELS) -> Program:
        """Random sequential program; loops are never nested."""
        if depth <= 0 or self.rng.random() < 0.3:
            return self.atomic(communication, variables, recorder, channels)
        kind = self.rng.randrange(4 if loops else 3)
        sub = lambda: self.program(depth - 1, communication, variables, recorder, False if kind == 3 else loops, channels)
        if kind in (0, 1):
            return Seq(sub(), sub())
        if kind == 2:
            return Choice(sub(), sub())
        return Loop(sub())

    def parallel_components(self, count: int = 2, depth: int = 1) -> List[Program]:
        """Loop-free components with disjoint real variables sharing channel c and recorder h."""
        components = []
        for i in range(count):
            variables = (self.reals[i % len(self.reals)],)
            components.append(self.program(depth, True, variables, H, loops=False, channels=("c",)))
        return components

    # -- states --------------------------------------------------------------

    def raw_trace(self, max_length: int = 2) -> Tuple[Event, ...]:
        events = []
        stamp = Fraction(0)
        for _ in range(self.rng.randrange(max_length + 1)):
            stamp += self.choice((Fraction(0), Fraction(1)))
            events.append(Event(self.choice(CHANNELS), self.choice(SMALL_CONSTANTS), stamp))
        return tuple(events)

    def state(self, values: Sequence[Fraction] = SMALL_CONSTANTS, with_time: bool = True) -> State:
        assignment = {v: self.choice(values) for v in self.reals}
        assignment[N] = self.rng.randrange(3)
        assignment[H] = self.raw_trace()
        assignment[G] = self.raw_trace()
        if with_time:
            assignment[MU] = self.choice((Fraction(0), Fraction(1), Fraction(2)))
        return State(assignment)

    def states(self, count: int, **kwargs) -> List[State]:
        return [self.state(**kwargs) for _ in range(count)]
