"""
Trace algebra.

`normalize` orients the trace laws (associativity and neutrality of
concatenation, distribution and cutting of projections, projection of
single items) left to right, innermost first, and adds h|{} -> eps.
Normal trace terms are right-associated concatenations of atoms, each a
trace variable, a projected trace variable or an item.

`simplify_access` unrolls lengths (len(te + <..>) = len(te) + 1) and
reduces val/time/chan accesses into concatenations when the base or
inductive guard is discharged by a length fact or by index arithmetic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .shared.errors import UnsupportedError
from .static import VarSet, bound_vars
from .syntax.ast import (
    EPS,
    AcBox,
    Add,
    And,
    Box,
    ChanAt,
    ChanName,
    Cmp,
    Concat,
    Const,
    Empty,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Item,
    Len,
    Mul,
    Not,
    Or,
    Prefix,
    Proj,
    Sort,
    Sub,
    Term,
    Time,
    Truth,
    Val,
    Var,
    conjuncts,
    subterms,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def _atoms(te: Term) -> List[Term]:
    match te:
        case Empty():
            return []
        case Concat(l, r):
            return _atoms(l) + _atoms(r)
        case Item(chan, value, stamp):
            return [Item(chan, normalize_term(value), normalize_term(stamp))]
        case Var():
            return [te]
        case Proj(inner, chans):
            return [p for a in _atoms(inner) if (p := _project_atom(a, chans)) is not None]
    raise TypeError(f"not a trace term: {te!r}")


def _project_atom(atom: Term, chans) -> Optional[Term]:
    match atom:
        case Item(chan, _, _):
            return atom if chan in chans else None
        case Var():
            return Proj(atom, frozenset(chans)) if chans else None
        case Proj(var, inner):
            cut = inner & frozenset(chans)
            return Proj(var, cut) if cut else None
    raise TypeError(f"not a trace atom: {atom!r}")


def _rebuild(atoms: Sequence[Term]) -> Term:
    if not atoms:
        return EPS
    result = atoms[-1]
    for atom in reversed(atoms[:-1]):
        result = Concat(atom, result)
    return result


def normalize(te: Term) -> Term:
    """Normal form of a trace term."""
    if te.sort != Sort.TRACE:
        raise TypeError(f"normalize expects a trace term, got {te}")
    return _rebuild(_atoms(te))


def atoms_of(te: Term) -> List[Term]:
    return _atoms(te)


def normalize_term(term: Term) -> Term:
    """Normalize every trace subterm of an arbitrary term."""
    match term:
        case _ if term.sort == Sort.TRACE:
            return normalize(term)
        case Add(l, r):
            return Add(normalize_term(l), normalize_term(r))
        case Sub(l, r):
            return Sub(normalize_term(l), normalize_term(r))
        case Mul(l, r):
            return Mul(normalize_term(l), normalize_term(r))
        case Val(t, i):
            return Val(normalize(t), normalize_term(i))
        case Time(t, i):
            return Time(normalize(t), normalize_term(i))
        case ChanAt(t, i):
            return ChanAt(normalize(t), normalize_term(i))
        case Len(t):
            return Len(normalize(t))
    return term


def map_formula_terms(formula: Formula, fn) -> Formula:
    """Apply `fn` to every term of the first-order parts of a formula."""
    match formula:
        case Truth():
            return formula
        case Cmp(op, l, r):
            return Cmp(op, fn(l), fn(r))
        case Prefix(l, r):
            return Prefix(fn(l), fn(r))
        case Not(a):
            return Not(map_formula_terms(a, fn))
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return type(formula)(map_formula_terms(l, fn), map_formula_terms(r, fn))
        case Forall(v, b) | Exists(v, b):
            return type(formula)(v, map_formula_terms(b, fn))
        case Box(p, post):
            return Box(p, map_formula_terms(post, fn))
        case AcBox(p, a, c, post):
            return AcBox(p, map_formula_terms(a, fn), map_formula_terms(c, fn), map_formula_terms(post, fn))
    raise TypeError(f"unknown formula {formula!r}")


def normalize_formula(formula: Formula) -> Formula:
    return map_formula_terms(formula, normalize_term)


# ---------------------------------------------------------------------------
# Int index arithmetic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearNat:
    """Linear combination of natural-valued atoms plus a constant."""

    coefficients: Tuple[Tuple[Term, int], ...] = ()
    constant: int = 0

    @staticmethod
    def atom(term: Term) -> "LinearNat":
        return LinearNat(((term, 1),), 0)

    def _as_dict(self) -> Dict[Term, int]:
        return dict(self.coefficients)

    @staticmethod
    def _from(coefficients: Dict[Term, int], constant: int) -> "LinearNat":
        items = tuple(sorted(((t, c) for t, c in coefficients.items() if c != 0), key=lambda tc: str(tc[0])))
        return LinearNat(items, constant)

    def __add__(self, other: "LinearNat") -> "LinearNat":
        merged = self._as_dict()
        for t, c in other.coefficients:
            merged[t] = merged.get(t, 0) + c
        return LinearNat._from(merged, self.constant + other.constant)

    def scale(self, k: int) -> "LinearNat":
        return LinearNat._from({t: c * k for t, c in self.coefficients}, self.constant * k)

    def __sub__(self, other: "LinearNat") -> "LinearNat":
        return self + other.scale(-1)

    def nonnegative(self) -> bool:
        """Syntactically nonnegative: all coefficients and the constant are >= 0."""
        return self.constant >= 0 and all(c >= 0 for _, c in self.coefficients)

    def is_zero(self) -> bool:
        return not self.coefficients and self.constant == 0

    def to_term(self) -> Term:
        parts: List[Term] = []
        for atom, c in self.coefficients:
            parts.append(atom if c == 1 else Mul(Const(Fraction(c), Sort.INT), atom))
        if self.constant or not parts:
            parts.append(Const(Fraction(self.constant), Sort.INT))
        result = parts[0]
        for part in parts[1:]:
            result = Add(result, part)
        return result


def linear_nat(term: Term) -> LinearNat:
    """Linear form of an Int term using unroll and nonnegativity of naturals."""
    match term:
        case Const(value, _):
            return LinearNat((), int(value))
        case Add(l, r):
            return linear_nat(l) + linear_nat(r)
        case Mul(l, r):
            a, b = linear_nat(l), linear_nat(r)
            if not a.coefficients:
                return b.scale(a.constant)
            if not b.coefficients:
                return a.scale(b.constant)
            return LinearNat.atom(term)
        case Sub(l, r):
            difference = linear_nat(l) - linear_nat(r)
            if difference.nonnegative():
                return difference
            return LinearNat.atom(Sub(normalize_term(l), normalize_term(r)))
        case Len(t):
            result = LinearNat()
            for atom in _atoms(t):
                result = result + (LinearNat((), 1) if isinstance(atom, Item) else LinearNat.atom(Len(atom)))
            return result
    return LinearNat.atom(normalize_term(term))


# ---------------------------------------------------------------------------
# Length facts and accessor simplification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LengthFact:
    """`len(trace) = index` or `len(trace) > index`, as found in a sequent context."""

    trace: Term
    relation: str  # "=" or ">"
    index: Term

    @property
    def difference(self) -> LinearNat:
        return linear_nat(Len(self.trace)) - linear_nat(self.index)


def length_facts(formulas: Iterable[Formula]) -> List[LengthFact]:
    """Collect length facts from the top-level conjuncts of antecedent formulas."""
    facts: List[LengthFact] = []
    for formula in formulas:
        for atom in conjuncts(formula):
            if not isinstance(atom, Cmp):
                continue
            op, l, r = atom.op, atom.left, atom.right
            if isinstance(r, Len) and not isinstance(l, Len):
                op = {"=": "=", "<": ">", ">": "<"}.get(op, "")
                l, r = r, l
            if not isinstance(l, Len):
                continue
            if op in ("=", ">"):
                facts.append(LengthFact(l.trace, op, r))
    return facts


def _equal_guard(difference: LinearNat, facts: Sequence[LengthFact]) -> bool:
    if difference.is_zero():
        return True
    for fact in facts:
        if fact.relation == "=":
            d = fact.difference
            if (difference - d).is_zero() or (difference + d).is_zero():
                return True
    return False


def _greater_guard(difference: LinearNat, facts: Sequence[LengthFact]) -> bool:
    if difference.nonnegative() and difference.constant >= 1:
        return True
    for fact in facts:
        d = fact.difference
        if fact.relation == ">":
            # difference >= d >= 1
            if (difference - d).nonnegative():
                return True
        elif fact.relation == "=":
            for shifted in (difference - d, difference + d):
                if shifted.nonnegative() and shifted.constant >= 1:
                    return True
    return False


def _access(kind: type, trace: Term, index: Term, facts: Sequence[LengthFact]) -> Optional[Term]:
    """One base/inductive access step, or None when no guard is discharged."""
    atoms = _atoms(trace)
    if not atoms or not isinstance(atoms[-1], Item):
        return None
    prefix, last = _rebuild(atoms[:-1]), atoms[-1]
    difference = linear_nat(Len(prefix)) - linear_nat(index)
    if _equal_guard(difference, facts):
        if kind is Val:
            return last.value
        if kind is Time:
            return last.stamp
        return ChanName(last.chan)
    if _greater_guard(difference, facts):
        return kind(prefix, index)
    return None


def simplify_access(term: Term, facts: Sequence[LengthFact] = ()) -> Term:
    """Reduce accessors and lengths over concatenations where the guards allow."""
    match term:
        case Len(t):
            return linear_nat(term).to_term() if _atoms(t) != [t] else term
        case Val(t, i) | Time(t, i) | ChanAt(t, i):
            index = simplify_access(i, facts)
            kind = type(term)
            trace = normalize(t)
            reduced = _access(kind, trace, index, facts)
            if reduced is None:
                return kind(t, index) if index != i else term
            logger.debug(f"Trace access {term} -> {reduced}")
            return simplify_access(reduced, facts)
        case Add(l, r):
            return Add(simplify_access(l, facts), simplify_access(r, facts))
        case Sub(l, r):
            return Sub(simplify_access(l, facts), simplify_access(r, facts))
        case Mul(l, r):
            return Mul(simplify_access(l, facts), simplify_access(r, facts))
        case Item(c, v, s):
            return Item(c, simplify_access(v, facts), simplify_access(s, facts))
        case Concat(l, r):
            return Concat(simplify_access(l, facts), simplify_access(r, facts))
        case Proj(t, chans):
            return Proj(simplify_access(t, facts), chans)
    return term


def _facts_outside(facts: Sequence[LengthFact], bound) -> List[LengthFact]:
    """Facts that survive below a binder of the variables in `bound`."""
    kept = []
    for fact in facts:
        mentioned = [t for t in (*subterms(fact.trace), *subterms(fact.index)) if isinstance(t, Var)]
        if not any(bound.contains(v) for v in mentioned):
            kept.append(fact)
    return kept


def trace_algebra(formula: Formula, facts: Sequence[LengthFact] = ()) -> Formula:
    """Normalize traces, then simplify accessors in every term of a formula.

    Facts are dropped below quantifiers and modalities that rebind one of
    their variables.
    """
    simplify = lambda t: simplify_access(normalize_term(t), facts)  # noqa: E731
    match formula:
        case Truth():
            return formula
        case Cmp(op, l, r):
            return Cmp(op, simplify(l), simplify(r))
        case Prefix(l, r):
            return Prefix(simplify(l), simplify(r))
        case Not(a):
            return Not(trace_algebra(a, facts))
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return type(formula)(trace_algebra(l, facts), trace_algebra(r, facts))
        case Forall(v, b) | Exists(v, b):
            return type(formula)(v, trace_algebra(b, _facts_outside(facts, VarSet.of(v))))
        case Box(p, post):
            return Box(p, trace_algebra(post, _facts_outside(facts, bound_vars(p))))
        case AcBox(p, a, c, post):
            inner = _facts_outside(facts, bound_vars(p))
            return AcBox(p, trace_algebra(a, inner), trace_algebra(c, inner), trace_algebra(post, inner))
    raise TypeError(f"unknown formula {formula!r}")


# ---------------------------------------------------------------------------
# Ground prefix decision
# ---------------------------------------------------------------------------


def is_ground(term: Term) -> bool:
    return not any(isinstance(t, Var) for t in subterms(term))


def prefix_decide(t1: Term, t2: Term) -> bool:
    """Decide t1 ⪯ t2 for ground trace terms by event comparison."""
    if not (is_ground(t1) and is_ground(t2)):
        raise UnsupportedError(f"prefix_decide needs ground traces, got {t1} and {t2}")
    from .oracle.evaluate import eval_term
    from .oracle.state import State

    empty = State()
    e1, e2 = eval_term(t1, empty), eval_term(t2, empty)
    return len(e1) <= len(e2) and tuple(e2[: len(e1)]) == tuple(e1)
