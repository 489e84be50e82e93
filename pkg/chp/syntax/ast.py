"""
Abstract syntax of dLCHP: sorted terms, communicating hybrid programs and
formulas with dynamic and assumption-commitment (ac) boxes.

All nodes are immutable, hashable dataclasses so they can be shared between
threads, used as dictionary keys and compared structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union


class Sort(Enum):
    REAL = "R"
    INT = "Z"
    CHAN = "C"
    TRACE = "T"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class Term:
    """Base class of all terms."""

    __slots__ = ()

    @property
    def sort(self) -> Sort:  # pragma: no cover - overridden
        raise NotImplementedError

    def __str__(self) -> str:
        from .render import render

        return render(self)


@dataclass(frozen=True)
class Var(Term):
    name: str
    var_sort: Sort

    @property
    def sort(self) -> Sort:
        return self.var_sort

    @property
    def is_global_time(self) -> bool:
        return self.name == MU_NAME


@dataclass(frozen=True)
class Const(Term):
    value: Fraction
    const_sort: Sort = Sort.REAL

    @property
    def sort(self) -> Sort:
        return self.const_sort


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term

    @property
    def sort(self) -> Sort:
        return self.left.sort


@dataclass(frozen=True)
class Sub(Term):
    """Subtraction; truncated (monus) on Int because Int values are naturals."""

    left: Term
    right: Term

    @property
    def sort(self) -> Sort:
        return self.left.sort


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term

    @property
    def sort(self) -> Sort:
        return self.left.sort


@dataclass(frozen=True)
class Val(Term):
    trace: Term
    index: Term

    @property
    def sort(self) -> Sort:
        return Sort.REAL


@dataclass(frozen=True)
class Time(Term):
    trace: Term
    index: Term

    @property
    def sort(self) -> Sort:
        return Sort.REAL


@dataclass(frozen=True)
class Len(Term):
    trace: Term

    @property
    def sort(self) -> Sort:
        return Sort.INT


@dataclass(frozen=True)
class ChanName(Term):
    name: str

    @property
    def sort(self) -> Sort:
        return Sort.CHAN


@dataclass(frozen=True)
class ChanAt(Term):
    trace: Term
    index: Term

    @property
    def sort(self) -> Sort:
        return Sort.CHAN


@dataclass(frozen=True)
class Empty(Term):
    @property
    def sort(self) -> Sort:
        return Sort.TRACE


@dataclass(frozen=True)
class Item(Term):
    chan: str
    value: Term
    stamp: Term

    @property
    def sort(self) -> Sort:
        return Sort.TRACE


@dataclass(frozen=True)
class Concat(Term):
    left: Term
    right: Term

    @property
    def sort(self) -> Sort:
        return Sort.TRACE


@dataclass(frozen=True)
class Proj(Term):
    trace: Term
    chans: FrozenSet[str]

    @property
    def sort(self) -> Sort:
        return Sort.TRACE


MU_NAME = "mu"
MU = Var(MU_NAME, Sort.REAL)
EPS = Empty()
ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
INT_ZERO = Const(Fraction(0), Sort.INT)
INT_ONE = Const(Fraction(1), Sort.INT)


def real(value: Union[int, str, Fraction]) -> Const:
    return Const(Fraction(value))


def nat(value: int) -> Const:
    return Const(Fraction(value), Sort.INT)


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------


class Program:
    __slots__ = ()

    def __str__(self) -> str:
        from .render import render

        return render(self)


@dataclass(frozen=True)
class Assign(Program):
    var: Var
    term: Term


@dataclass(frozen=True)
class RandomAssign(Program):
    var: Var


@dataclass(frozen=True)
class Ode(Program):
    bindings: Tuple[Tuple[Var, Term], ...]
    constraint: "Formula"

    @property
    def variables(self) -> Tuple[Var, ...]:
        return tuple(x for x, _ in self.bindings)

    def rhs(self, x: Var) -> Optional[Term]:
        for y, e in self.bindings:
            if y == x:
                return e
        return None


@dataclass(frozen=True)
class Test(Program):
    cond: "Formula"


@dataclass(frozen=True)
class Seq(Program):
    left: Program
    right: Program


@dataclass(frozen=True)
class Choice(Program):
    left: Program
    right: Program


@dataclass(frozen=True)
class Loop(Program):
    body: Program


@dataclass(frozen=True)
class Send(Program):
    chan: str
    recorder: Var
    term: Term


@dataclass(frozen=True)
class Receive(Program):
    chan: str
    recorder: Var
    var: Var


@dataclass(frozen=True)
class Par(Program):
    left: Program
    right: Program


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        from .render import render

        return render(self)


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)

COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Cmp(Formula):
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Prefix(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    program: Program
    post: Formula


@dataclass(frozen=True)
class AcBox(Formula):
    program: Program
    assumption: Formula
    commitment: Formula
    post: Formula


Node = Union[Term, Program, Formula]

SKIP = Test(TRUE)


# ---------------------------------------------------------------------------
# Smart constructors and sugar
# ---------------------------------------------------------------------------


def conj(*formulas: Formula) -> Formula:
    """Right-nested conjunction that drops `true` units."""
    parts = [f for f in formulas if f != TRUE]
    if not parts:
        return TRUE
    result = parts[-1]
    for f in reversed(parts[:-1]):
        result = And(f, result)
    return result


def disj(*formulas: Formula) -> Formula:
    parts = [f for f in formulas if f != FALSE]
    if not parts:
        return FALSE
    result = parts[-1]
    for f in reversed(parts[:-1]):
        result = Or(f, result)
    return result


def conjuncts(formula: Formula) -> List[Formula]:
    if isinstance(formula, And):
        return conjuncts(formula.left) + conjuncts(formula.right)
    if formula == TRUE:
        return []
    return [formula]


def same_conjunction(a: Formula, b: Formula) -> bool:
    """Equality of conjunctions modulo association and `true` units."""
    return conjuncts(a) == conjuncts(b)


def if_then(cond: Formula, body: Program) -> Program:
    """`if (cond) { body }` as `(?cond; body) ++ ?!cond`."""
    return Choice(Seq(Test(cond), body), Test(Not(cond)))


def match_if(program: Program) -> Optional[Tuple[Formula, Program]]:
    if (
        isinstance(program, Choice)
        and isinstance(program.left, Seq)
        and isinstance(program.left.left, Test)
        and isinstance(program.right, Test)
        and program.right.cond == Not(program.left.left.cond)
    ):
        return program.left.left.cond, program.left.right
    return None


def last_index(trace: Term) -> Term:
    """Index of the last item, len(te) - 1 (Notation: val(te) is val(te[len(te)-1]))."""
    return Sub(Len(trace), INT_ONE)


def forall_many(variables: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Forall(v, body)
    return body


def subterms(term: Term) -> Iterator[Term]:
    """Pre-order iteration over a term and its subterms."""
    yield term
    match term:
        case Add(l, r) | Sub(l, r) | Mul(l, r) | Concat(l, r):
            yield from subterms(l)
            yield from subterms(r)
        case Val(t, i) | Time(t, i) | ChanAt(t, i):
            yield from subterms(t)
            yield from subterms(i)
        case Len(t) | Proj(t, _):
            yield from subterms(t)
        case Item(_, v, s):
            yield from subterms(v)
            yield from subterms(s)


def formula_terms(formula: Formula) -> Iterator[Term]:
    """Top-level terms of the atoms of a formula (not descending into programs)."""
    match formula:
        case Cmp(_, l, r) | Prefix(l, r):
            yield l
            yield r
        case Not(a):
            yield from formula_terms(a)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            yield from formula_terms(l)
            yield from formula_terms(r)
        case Forall(_, b) | Exists(_, b):
            yield from formula_terms(b)
        case Box(_, p):
            yield from formula_terms(p)
        case AcBox(_, a, c, p):
            yield from formula_terms(a)
            yield from formula_terms(c)
            yield from formula_terms(p)


def is_first_order(formula: Formula) -> bool:
    match formula:
        case Box() | AcBox():
            return False
        case Not(a):
            return is_first_order(a)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return is_first_order(l) and is_first_order(r)
        case Forall(_, b) | Exists(_, b):
            return is_first_order(b)
    return True


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProgramDef:
    param: Optional[Var]
    body: Program


@dataclass
class Declarations:
    """Sorted variable, channel and abbreviation declarations of a problem."""

    variables: Dict[str, Sort] = field(default_factory=dict)
    channels: List[str] = field(default_factory=list)
    recorder: Optional[str] = None
    programs: Dict[str, ProgramDef] = field(default_factory=dict)
    formulas: Dict[str, Formula] = field(default_factory=dict)

    def names(self) -> set:
        return (
            set(self.variables)
            | set(self.channels)
            | set(self.programs)
            | set(self.formulas)
            | {MU_NAME}
        )

    def var(self, name: str) -> Var:
        if name == MU_NAME:
            return MU
        return Var(name, self.variables[name])

    def copy(self) -> "Declarations":
        return Declarations(
            dict(self.variables),
            list(self.channels),
            self.recorder,
            dict(self.programs),
            dict(self.formulas),
        )


@dataclass(frozen=True)
class Problem:
    decls: Declarations
    formula: Formula
