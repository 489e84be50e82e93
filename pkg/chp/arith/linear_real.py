"""
Linear real arithmetic by Fourier-Motzkin elimination over exact rationals.

Quantifiers are removed innermost first: the body is put into disjunctive
normal form, disequalities on the eliminated variable are split, an
equality on it is solved and substituted, and otherwise every lower bound
is paired with every upper bound. Nonlinear input is handed to the SMT
bridge by `decide_real`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Sequence, Tuple, Union

from ..shared.errors import SolverError, UnsupportedError
from ..static import free_vars
from ..syntax.ast import And, Cmp, Exists, Forall, Formula, Iff, Implies, Not, Or, Sort, Truth
from .polynomial import linear_form, to_sympy
from .result import INVALID, UNKNOWN, VALID, ArithResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RLin:
    coeffs: Tuple[Tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def make(coeffs: Dict[str, Fraction], const: Fraction) -> "RLin":
        return RLin(tuple(sorted((x, c) for x, c in coeffs.items() if c)), Fraction(const))

    def coeff(self, x: str) -> Fraction:
        return dict(self.coeffs).get(x, Fraction(0))

    def __add__(self, other: "RLin") -> "RLin":
        merged = dict(self.coeffs)
        for x, c in other.coeffs:
            merged[x] = merged.get(x, Fraction(0)) + c
        return RLin.make(merged, self.const + other.const)

    def scale(self, k: Fraction) -> "RLin":
        return RLin.make({x: c * k for x, c in self.coeffs}, self.const * k)

    def __sub__(self, other: "RLin") -> "RLin":
        return self + other.scale(Fraction(-1))

    def without(self, x: str) -> "RLin":
        return RLin(tuple((y, c) for y, c in self.coeffs if y != x), self.const)

    def substitute(self, x: str, value: "RLin") -> "RLin":
        c = self.coeff(x)
        return self.without(x) + value.scale(c) if c else self

    def evaluate(self, env: Dict[str, Fraction]) -> Fraction:
        return self.const + sum((c * env[x] for x, c in self.coeffs), Fraction(0))

    def is_ground(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class RAtom:
    """t op 0 with op one of <, <=, =, !="""

    op: str
    t: RLin


@dataclass(frozen=True)
class RAnd:
    parts: Tuple["RFormula", ...]


@dataclass(frozen=True)
class ROr:
    parts: Tuple["RFormula", ...]


RFormula = Union[bool, RAtom, RAnd, ROr]

_HOLDS = {
    "<": lambda v: v < 0,
    "<=": lambda v: v <= 0,
    "=": lambda v: v == 0,
    "!=": lambda v: v != 0,
}
_NEGATED = {"<": "<=", "<=": "<", "=": "!=", "!=": "="}


def _atom(op: str, t: RLin) -> RFormula:
    if t.is_ground():
        return _HOLDS[op](t.const)
    return RAtom(op, t)


def mk_and(parts: Sequence[RFormula]) -> RFormula:
    kept: List[RFormula] = []
    for part in parts:
        if part is False:
            return False
        if part is True:
            continue
        for p in part.parts if isinstance(part, RAnd) else (part,):
            if p not in kept:
                kept.append(p)
    if not kept:
        return True
    return kept[0] if len(kept) == 1 else RAnd(tuple(kept))


def mk_or(parts: Sequence[RFormula]) -> RFormula:
    kept: List[RFormula] = []
    for part in parts:
        if part is True:
            return True
        if part is False:
            continue
        for p in part.parts if isinstance(part, ROr) else (part,):
            if p not in kept:
                kept.append(p)
    if not kept:
        return False
    return kept[0] if len(kept) == 1 else ROr(tuple(kept))


def negate(f: RFormula) -> RFormula:
    match f:
        case bool():
            return not f
        case RAtom(op, t):
            # not (t < 0) is -t <= 0, not (t <= 0) is -t < 0
            if op in ("<", "<="):
                return RAtom(_NEGATED[op], t.scale(Fraction(-1)))
            return RAtom(_NEGATED[op], t)
        case RAnd(parts):
            return mk_or([negate(p) for p in parts])
        case ROr(parts):
            return mk_and([negate(p) for p in parts])
    raise TypeError(f"not a real formula: {f!r}")


def atoms(f: RFormula) -> Iterator[RAtom]:
    match f:
        case bool():
            return
        case RAnd(parts) | ROr(parts):
            for p in parts:
                yield from atoms(p)
        case RAtom():
            yield f


def substitute(f: RFormula, x: str, value: RLin) -> RFormula:
    match f:
        case bool():
            return f
        case RAnd(parts):
            return mk_and([substitute(p, x, value) for p in parts])
        case ROr(parts):
            return mk_or([substitute(p, x, value) for p in parts])
        case RAtom(op, t):
            return _atom(op, t.substitute(x, value))
    raise TypeError(f"not a real formula: {f!r}")


def evaluate(f: RFormula, env: Dict[str, Fraction]) -> bool:
    match f:
        case bool():
            return f
        case RAnd(parts):
            return all(evaluate(p, env) for p in parts)
        case ROr(parts):
            return any(evaluate(p, env) for p in parts)
        case RAtom(op, t):
            return _HOLDS[op](t.evaluate(env))
    raise TypeError(f"not a real formula: {f!r}")


def _dnf(f: RFormula) -> List[List[RAtom]]:
    match f:
        case True:
            return [[]]
        case False:
            return []
        case RAtom():
            return [[f]]
        case ROr(parts):
            return [c for p in parts for c in _dnf(p)]
        case RAnd(parts):
            result: List[List[RAtom]] = [[]]
            for p in parts:
                result = [a + b for a in result for b in _dnf(p)]
            return result
    raise TypeError(f"not a real formula: {f!r}")


def _split_disequalities(conjunct: List[RAtom], x: str) -> List[List[RAtom]]:
    result: List[List[RAtom]] = [[]]
    for atom in conjunct:
        if atom.op == "!=" and atom.t.coeff(x):
            below, above = RAtom("<", atom.t), RAtom("<", atom.t.scale(Fraction(-1)))
            result = [c + [below] for c in result] + [c + [above] for c in result]
        else:
            result = [c + [atom] for c in result]
    return result


def _eliminate_conjunct(conjunct: List[RAtom], x: str) -> RFormula:
    for atom in conjunct:
        c = atom.t.coeff(x)
        if atom.op == "=" and c:
            solution = atom.t.without(x).scale(Fraction(-1) / c)
            return mk_and([substitute(a, x, solution) for a in conjunct if a is not atom])

    kept: List[RFormula] = []
    lower: List[Tuple[RLin, bool]] = []
    upper: List[Tuple[RLin, bool]] = []
    for atom in conjunct:
        c = atom.t.coeff(x)
        if not c:
            kept.append(atom)
            continue
        bound = atom.t.without(x).scale(Fraction(-1) / c)
        strict = atom.op == "<"
        (upper if c > 0 else lower).append((bound, strict))
    for lo, lo_strict in lower:
        for hi, hi_strict in upper:
            kept.append(_atom("<" if lo_strict or hi_strict else "<=", lo - hi))
    return mk_and(kept)


def eliminate_exists(x: str, f: RFormula) -> RFormula:
    """Quantifier-free equivalent of exists x. f over the reals."""
    disjuncts: List[RFormula] = []
    for conjunct in _dnf(f):
        for split in _split_disequalities(conjunct, x):
            disjuncts.append(_eliminate_conjunct(split, x))
    return mk_or(disjuncts)


def eliminate_all(f: RFormula, names: Sequence[str]) -> RFormula:
    for x in reversed(list(names)):
        f = eliminate_exists(x, f)
    return f


def _linear(term) -> RLin:
    form = linear_form(to_sympy(term))
    if form is None:
        raise UnsupportedError(f"nonlinear term {term}")
    coeffs, const = form
    return RLin.make(coeffs, const)


def quantifier_free(formula: Formula) -> RFormula:
    match formula:
        case Truth(value):
            return value
        case Cmp(op, l, r):
            t = _linear(l) - _linear(r)
            if op == ">":
                return _atom("<", t.scale(Fraction(-1)))
            if op == ">=":
                return _atom("<=", t.scale(Fraction(-1)))
            return _atom(op, t)
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
        case Exists(var, body) if var.sort == Sort.REAL:
            return eliminate_exists(var.name, quantifier_free(body))
        case Forall(var, body) if var.sort == Sort.REAL:
            return negate(eliminate_exists(var.name, negate(quantifier_free(body))))
    raise UnsupportedError(f"{formula} is not a real arithmetic formula")


def _candidates(f: RFormula, x: str) -> List[Fraction]:
    points = sorted({-a.t.const / a.t.coeff(x) for a in atoms(f) if a.t.coeff(x)})
    found = {Fraction(0)}
    for p in points:
        found |= {p, p - 1, p + 1}
    for a, b in zip(points, points[1:]):
        found.add((a + b) / 2)
    return sorted(found, key=lambda v: (abs(v), v < 0))


def _witness(theta: RFormula, names: Sequence[str]) -> Dict[str, Fraction]:
    env: Dict[str, Fraction] = {}
    current = theta
    for i, x in enumerate(names):
        rest = eliminate_all(current, names[i + 1 :])
        for value in _candidates(rest, x):
            if evaluate(substitute(rest, x, RLin((), value)), {}):
                env[x] = value
                current = substitute(current, x, RLin((), value))
                break
        else:
            raise UnsupportedError(f"no witness for {x}")
    return env


def is_linear(formula: Formula) -> bool:
    try:
        quantifier_free_check(formula)
    except UnsupportedError:
        return False
    return True


def quantifier_free_check(formula: Formula) -> None:
    match formula:
        case Truth():
            return
        case Cmp(_, l, r):
            _linear(l)
            _linear(r)
            return
        case Not(a) | Forall(_, a) | Exists(_, a):
            quantifier_free_check(a)
            return
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            quantifier_free_check(l)
            quantifier_free_check(r)
            return
    raise UnsupportedError(f"{formula} is not a real arithmetic formula")


# Larger linear goals go to the SMT bridge when it is available; the DNF
# step of elimination is exponential in the number of atoms.
ELIMINATION_LIMIT = 16


def _size(formula: Formula) -> int:
    match formula:
        case Cmp():
            return 1
        case Not(a) | Forall(_, a) | Exists(_, a):
            return _size(a)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return _size(l) + _size(r)
    return 0


def decide_linear(formula: Formula) -> ArithResult:
    """Decide the universal closure of a linear real formula by elimination."""
    free = free_vars(formula)
    if free.all_traces or any(v.sort != Sort.REAL for v in free.finite):
        raise UnsupportedError(f"{formula} mentions non-real variables")
    outer = [v.name for v in free]
    body = formula
    while isinstance(body, Forall) and body.var.sort == Sort.REAL:
        if body.var.name not in outer:
            outer.append(body.var.name)
        body = body.body
    theta = negate(quantifier_free(body))
    if eliminate_all(theta, outer) is False:
        return ArithResult(VALID, method="real")
    try:
        return ArithResult(INVALID, witness=_witness(theta, outer), method="real")
    except UnsupportedError as e:
        return ArithResult(UNKNOWN, method="real", reason=str(e))


def decide_real(formula: Formula, smt=None) -> ArithResult:
    """
    Decide first-order real arithmetic.

    Linear sentences are decided here; nonlinear ones go to `smt` (an
    `SmtBridge`) and come back unknown when no solver is available.
    """
    if is_linear(formula):
        if smt is None or not smt.available or _size(formula) <= ELIMINATION_LIMIT:
            return decide_linear(formula)
    elif smt is None:
        return ArithResult(UNKNOWN, method="real", reason="nonlinear and no SMT solver configured")
    try:
        return smt.check_valid(formula)
    except SolverError as e:
        logger.warning(f"SMT solver failed: {e}")
        return ArithResult(UNKNOWN, method="real", reason=str(e))
