"""
Presburger arithmetic over the integers by Cooper-style quantifier
elimination.

Formulas are translated into an internal negation normal form whose atoms
are `t < 0`, `t = 0`, `t != 0` and `d | t`, `not d | t` for linear integer
polynomials t. Quantifiers are eliminated innermost first; the universal
closure of the input is then decided, and for invalid input a concrete
counterexample is searched within a bound derived from the eliminated
formula.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gcd
from typing import Dict, Iterator, List, Sequence, Tuple, Union

from ..shared.errors import UnsupportedError
from ..static import free_vars
from ..syntax.ast import (
    Add,
    And,
    Cmp,
    Const,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Mul,
    Not,
    Or,
    Sort,
    Sub,
    Term,
    Truth,
    Var,
)
from .result import INVALID, UNKNOWN, VALID, ArithResult

logger = logging.getLogger(__name__)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class Lin:
    """Linear integer polynomial sum(c_i * x_i) + const."""

    coeffs: Tuple[Tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def var(name: str) -> "Lin":
        return Lin(((name, 1),), 0)

    @staticmethod
    def _make(coeffs: Dict[str, int], const: int) -> "Lin":
        return Lin(tuple(sorted((x, c) for x, c in coeffs.items() if c)), const)

    def coeff(self, x: str) -> int:
        for y, c in self.coeffs:
            if y == x:
                return c
        return 0

    def variables(self) -> List[str]:
        return [x for x, _ in self.coeffs]

    def __add__(self, other: "Lin") -> "Lin":
        merged = dict(self.coeffs)
        for x, c in other.coeffs:
            merged[x] = merged.get(x, 0) + c
        return Lin._make(merged, self.const + other.const)

    def scale(self, k: int) -> "Lin":
        return Lin._make({x: c * k for x, c in self.coeffs}, self.const * k)

    def __neg__(self) -> "Lin":
        return self.scale(-1)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + (-other)

    def shift(self, k: int) -> "Lin":
        return Lin(self.coeffs, self.const + k)

    def without(self, x: str) -> "Lin":
        return Lin(tuple((y, c) for y, c in self.coeffs if y != x), self.const)

    def with_coeff(self, x: str, c: int) -> "Lin":
        merged = dict(self.coeffs)
        merged[x] = c
        return Lin._make(merged, self.const)

    def substitute(self, x: str, value: "Lin") -> "Lin":
        c = self.coeff(x)
        if not c:
            return self
        return self.without(x) + value.scale(c)

    def evaluate(self, env: Dict[str, int]) -> int:
        return self.const + sum(c * env[x] for x, c in self.coeffs)

    def is_ground(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class Lt:
    """t < 0"""

    t: Lin


@dataclass(frozen=True)
class Eq:
    """t = 0, or t != 0 when negated"""

    t: Lin
    negated: bool = False


@dataclass(frozen=True)
class Dvd:
    """d | t, or its negation"""

    d: int
    t: Lin
    negated: bool = False


@dataclass(frozen=True)
class PAnd:
    parts: Tuple["PFormula", ...]


@dataclass(frozen=True)
class POr:
    parts: Tuple["PFormula", ...]


PFormula = Union[bool, Lt, Eq, Dvd, PAnd, POr]


# ---------------------------------------------------------------------------
# Construction and simplification
# ---------------------------------------------------------------------------


def mk_and(parts: Sequence[PFormula]) -> PFormula:
    kept: List[PFormula] = []
    for part in parts:
        if part is False:
            return False
        if part is True:
            continue
        for p in part.parts if isinstance(part, PAnd) else (part,):
            if p not in kept:
                kept.append(p)
    if not kept:
        return True
    return kept[0] if len(kept) == 1 else PAnd(tuple(kept))


def mk_or(parts: Sequence[PFormula]) -> PFormula:
    kept: List[PFormula] = []
    for part in parts:
        if part is True:
            return True
        if part is False:
            continue
        for p in part.parts if isinstance(part, POr) else (part,):
            if p not in kept:
                kept.append(p)
    if not kept:
        return False
    return kept[0] if len(kept) == 1 else POr(tuple(kept))


def _atom(atom: PFormula) -> PFormula:
    """Evaluate ground atoms and drop trivial divisibility."""
    match atom:
        case Lt(t) if t.is_ground():
            return t.const < 0
        case Eq(t, negated) if t.is_ground():
            return (t.const == 0) != negated
        case Dvd(d, t, negated):
            if d == 1:
                return not negated
            if t.is_ground():
                return (t.const % d == 0) != negated
    return atom


def negate(f: PFormula) -> PFormula:
    match f:
        case bool():
            return not f
        case Lt(t):
            return Lt((-t).shift(-1))
        case Eq(t, negated):
            return Eq(t, not negated)
        case Dvd(d, t, negated):
            return Dvd(d, t, not negated)
        case PAnd(parts):
            return mk_or([negate(p) for p in parts])
        case POr(parts):
            return mk_and([negate(p) for p in parts])
    raise TypeError(f"not a Presburger formula: {f!r}")


def _map_atoms(f: PFormula, fn) -> PFormula:
    match f:
        case bool():
            return f
        case PAnd(parts):
            return mk_and([_map_atoms(p, fn) for p in parts])
        case POr(parts):
            return mk_or([_map_atoms(p, fn) for p in parts])
    return _atom(fn(f))


def atoms(f: PFormula) -> Iterator[PFormula]:
    match f:
        case bool():
            return
        case PAnd(parts) | POr(parts):
            for p in parts:
                yield from atoms(p)
        case _:
            yield f


def substitute(f: PFormula, x: str, value: Lin) -> PFormula:
    def step(atom):
        match atom:
            case Lt(t):
                return Lt(t.substitute(x, value))
            case Eq(t, negated):
                return Eq(t.substitute(x, value), negated)
            case Dvd(d, t, negated):
                return Dvd(d, t.substitute(x, value), negated)

    return _map_atoms(f, step)


def evaluate(f: PFormula, env: Dict[str, int]) -> bool:
    match f:
        case bool():
            return f
        case PAnd(parts):
            return all(evaluate(p, env) for p in parts)
        case POr(parts):
            return any(evaluate(p, env) for p in parts)
        case Lt(t):
            return t.evaluate(env) < 0
        case Eq(t, negated):
            return (t.evaluate(env) == 0) != negated
        case Dvd(d, t, negated):
            return (t.evaluate(env) % d == 0) != negated
    raise TypeError(f"not a Presburger formula: {f!r}")


def variables(f: PFormula) -> List[str]:
    seen: List[str] = []
    for atom in atoms(f):
        for x in atom.t.variables():
            if x not in seen:
                seen.append(x)
    return seen


# ---------------------------------------------------------------------------
# Cooper elimination
# ---------------------------------------------------------------------------


def _unit_coefficients(f: PFormula, x: str, l: int) -> PFormula:
    """Scale atoms so x has coefficient +-1, x now standing for l*x."""

    def step(atom):
        a = atom.t.coeff(x)
        if not a:
            return atom
        m = l // abs(a)
        t = atom.t.scale(m).with_coeff(x, 1 if a > 0 else -1)
        match atom:
            case Lt():
                return Lt(t)
            case Eq(_, negated):
                return Eq(t, negated)
            case Dvd(d, _, negated):
                return Dvd(d * m, t, negated)

    return _map_atoms(f, step)


def _minus_infinity(f: PFormula, x: str) -> PFormula:
    def step(atom):
        c = atom.t.coeff(x)
        if not c:
            return atom
        match atom:
            case Lt():
                return c > 0
            case Eq(_, negated):
                return negated
        return atom

    return _map_atoms(f, step)


def _boundary_points(f: PFormula, x: str) -> List[Lin]:
    points: List[Lin] = []
    for atom in atoms(f):
        c = atom.t.coeff(x)
        if not c:
            continue
        rest = atom.t.without(x)
        match atom:
            case Lt() if c < 0:
                point = rest
            case Eq(_, False):
                point = (-rest if c > 0 else rest).shift(-1)
            case Eq(_, True):
                point = -rest if c > 0 else rest
            case _:
                continue
        if point not in points:
            points.append(point)
    return points


def eliminate_exists(x: str, f: PFormula) -> PFormula:
    """Quantifier-free equivalent of exists x. f over the integers."""
    if x not in variables(f):
        return f
    l = 1
    for atom in atoms(f):
        a = atom.t.coeff(x)
        if a:
            l = _lcm(l, abs(a))
    g = _unit_coefficients(f, x, l)
    if l > 1:
        g = mk_and([g, Dvd(l, Lin.var(x))])
    delta = 1
    for atom in atoms(g):
        if isinstance(atom, Dvd) and atom.t.coeff(x):
            delta = _lcm(delta, atom.d)
    low = _minus_infinity(g, x)
    points = _boundary_points(g, x)
    disjuncts: List[PFormula] = []
    for j in range(1, delta + 1):
        disjuncts.append(substitute(low, x, Lin((), j)))
        for b in points:
            disjuncts.append(substitute(g, x, b.shift(j)))
    result = mk_or(disjuncts)
    logger.debug(f"Eliminated {x}: delta={delta}, {len(points)} boundary points")
    return result


def eliminate_all(f: PFormula, names: Sequence[str]) -> PFormula:
    for x in reversed(list(names)):
        f = eliminate_exists(x, f)
    return f


# ---------------------------------------------------------------------------
# Translation from formulas
# ---------------------------------------------------------------------------


def linear(term: Term) -> Lin:
    match term:
        case Var() if term.sort == Sort.INT:
            return Lin.var(term.name)
        case Const(value, _) if value.denominator == 1:
            return Lin((), int(value))
        case Add(l, r):
            return linear(l) + linear(r)
        case Sub(l, r):
            return linear(l) - linear(r)
        case Mul(l, r):
            a, b = linear(l), linear(r)
            if a.is_ground():
                return b.scale(a.const)
            if b.is_ground():
                return a.scale(b.const)
            raise UnsupportedError(f"nonlinear term {term}")
    raise UnsupportedError(f"{term} is not a linear integer term")


def _comparison(op: str, left: Term, right: Term) -> PFormula:
    t = linear(left) - linear(right)
    match op:
        case "<":
            return _atom(Lt(t))
        case "<=":
            return _atom(Lt(t.shift(-1)))
        case ">":
            return _atom(Lt(-t))
        case ">=":
            return _atom(Lt((-t).shift(-1)))
        case "=":
            return _atom(Eq(t))
        case "!=":
            return _atom(Eq(t, True))
    raise UnsupportedError(f"unknown comparison {op}")


def quantifier_free(formula: Formula) -> PFormula:
    """Eliminate every quantifier of an Int formula."""
    match formula:
        case Truth(value):
            return value
        case Cmp(op, l, r):
            return _comparison(op, l, r)
        case Not(a):
            return negate(quantifier_free(a))
        case And(l, r):
            return mk_and([quantifier_free(l), quantifier_free(r)])
        case Or(l, r):
            return mk_or([quantifier_free(l), quantifier_free(r)])
        case Implies(l, r):
            return mk_or([negate(quantifier_free(l)), quantifier_free(r)])
        case Iff(l, r):
            a, b = quantifier_free(l), quantifier_free(r)
            return mk_or([mk_and([a, b]), mk_and([negate(a), negate(b)])])
        case Exists(var, body) if var.sort == Sort.INT:
            return eliminate_exists(var.name, quantifier_free(body))
        case Forall(var, body) if var.sort == Sort.INT:
            return negate(eliminate_exists(var.name, negate(quantifier_free(body))))
    raise UnsupportedError(f"{formula} is not a Presburger formula")


# ---------------------------------------------------------------------------
# Decision
# ---------------------------------------------------------------------------


def _search_bound(f: PFormula) -> int:
    bound, period = 0, 1
    for atom in atoms(f):
        bound = max(bound, abs(atom.t.const))
        if isinstance(atom, Dvd):
            period = _lcm(period, atom.d)
    return bound + period + 1


def _candidates(bound: int) -> Iterator[int]:
    yield 0
    for k in range(1, bound + 1):
        yield k
        yield -k


def _witness(theta: PFormula, names: Sequence[str]) -> Dict[str, int]:
    env: Dict[str, int] = {}
    current = theta
    for i, x in enumerate(names):
        rest = eliminate_all(current, names[i + 1 :])
        for value in _candidates(_search_bound(rest)):
            if evaluate(substitute(rest, x, Lin((), value)), {}):
                env[x] = value
                current = substitute(current, x, Lin((), value))
                break
        else:
            raise UnsupportedError(f"no witness for {x} within the search bound")
    return env


def decide_presburger(formula: Formula) -> ArithResult:
    """Decide the universal closure of an integer formula; invalid results carry a counterexample."""
    free = free_vars(formula)
    if free.all_traces or any(v.sort != Sort.INT for v in free.finite):
        raise UnsupportedError(f"{formula} mentions non-integer variables")
    outer = [v.name for v in free]
    body = formula
    while isinstance(body, Forall) and body.var.sort == Sort.INT:
        if body.var.name not in outer:
            outer.append(body.var.name)
        body = body.body

    theta = negate(quantifier_free(body))
    if eliminate_all(theta, outer) is False:
        return ArithResult(VALID, method="PA")
    try:
        witness = _witness(theta, outer)
    except UnsupportedError as e:
        return ArithResult(UNKNOWN, method="PA", reason=str(e))
    return ArithResult(INVALID, witness={k: v for k, v in witness.items()}, method="PA")
