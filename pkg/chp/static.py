"""
Static semantics: bound, must-bound and free variables, accessed channels,
well-formedness of parallel compositions and ac-boxes, and the
noninterference check that gates the parallel composition rules.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Union

from .syntax.ast import (
    MU,
    AcBox,
    Add,
    And,
    Assign,
    Box,
    ChanAt,
    ChanName,
    Choice,
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
    Loop,
    Mul,
    Not,
    Ode,
    Or,
    Par,
    Prefix,
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
    Truth,
    Val,
    Var,
)

logger = logging.getLogger(__name__)

Node = Union[Term, Program, Formula]


# ---------------------------------------------------------------------------
# Variable and channel sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarSet:
    """A finite set of variables, optionally extended by all trace variables."""

    finite: FrozenSet[Var] = frozenset()
    all_traces: bool = False

    @staticmethod
    def of(*variables: Var) -> "VarSet":
        return VarSet(frozenset(variables))

    def contains(self, var: Var) -> bool:
        return var in self.finite or (self.all_traces and var.sort == Sort.TRACE)

    __contains__ = contains

    def union(self, other: "VarSet") -> "VarSet":
        return VarSet(self.finite | other.finite, self.all_traces or other.all_traces)

    def intersection(self, other: "VarSet") -> "VarSet":
        kept = {v for v in self.finite if other.contains(v)}
        kept |= {v for v in other.finite if self.contains(v)}
        return VarSet(frozenset(kept), self.all_traces and other.all_traces)

    def difference(self, other: "VarSet") -> "VarSet":
        kept = frozenset(v for v in self.finite if not other.contains(v))
        return VarSet(kept, self.all_traces and not other.all_traces)

    def issubset(self, other: "VarSet") -> bool:
        if self.all_traces and not other.all_traces:
            return False
        return all(other.contains(v) for v in self.finite)

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __le__ = issubset

    def without(self, *, mu: bool = False, traces: bool = False) -> "VarSet":
        """Drop global time and/or trace variables."""
        kept = frozenset(
            v
            for v in self.finite
            if not (mu and v.is_global_time) and not (traces and v.sort == Sort.TRACE)
        )
        return VarSet(kept, self.all_traces and not traces)

    def is_empty(self) -> bool:
        return not self.finite and not self.all_traces

    def names(self) -> List[str]:
        listed = sorted(v.name for v in self.finite)
        return listed + (["<all trace variables>"] if self.all_traces else [])

    def __iter__(self):
        return iter(sorted(self.finite, key=lambda v: v.name))

    def __str__(self) -> str:
        return "{" + ", ".join(self.names()) + "}"


EMPTY_VARS = VarSet()
ALL_TRACES = VarSet(frozenset(), True)


@dataclass(frozen=True)
class ChanSet:
    """A finite set of channel names or the full set of channels."""

    names: FrozenSet[str] = frozenset()
    full: bool = False

    @staticmethod
    def of(*names: str) -> "ChanSet":
        return ChanSet(frozenset(names))

    def contains(self, chan: str) -> bool:
        return self.full or chan in self.names

    __contains__ = contains

    def union(self, other: "ChanSet") -> "ChanSet":
        if self.full or other.full:
            return FULL_CHANS
        return ChanSet(self.names | other.names)

    def intersection(self, other: "ChanSet") -> "ChanSet":
        if self.full:
            return other
        if other.full:
            return self
        return ChanSet(self.names & other.names)

    def issubset(self, other: "ChanSet") -> bool:
        if other.full:
            return True
        if self.full:
            return False
        return self.names <= other.names

    __or__ = union
    __and__ = intersection
    __le__ = issubset

    def is_empty(self) -> bool:
        return not self.full and not self.names

    def __str__(self) -> str:
        if self.full:
            return "Chan"
        return "{" + ", ".join(sorted(self.names)) + "}"


NO_CHANS = ChanSet()
FULL_CHANS = ChanSet(frozenset(), True)


# ---------------------------------------------------------------------------
# Bound and must-bound variables
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def bound_vars(program: Program) -> VarSet:
    match program:
        case Assign(x, _) | RandomAssign(x):
            return VarSet.of(x)
        case Ode(bindings, _):
            return VarSet.of(*(x for x, _ in bindings), MU)
        case Test():
            return EMPTY_VARS
        case Send(_, h, _):
            return VarSet.of(h)
        case Receive(_, h, x):
            return VarSet.of(h, x)
        case Seq(a, b) | Choice(a, b) | Par(a, b):
            return bound_vars(a) | bound_vars(b)
        case Loop(body):
            return bound_vars(body)
    raise TypeError(f"unknown program {program!r}")


@lru_cache(maxsize=4096)
def must_bound_vars(program: Program) -> VarSet:
    match program:
        case Choice(a, b):
            return must_bound_vars(a) & must_bound_vars(b)
        case Seq(a, b) | Par(a, b):
            return must_bound_vars(a) | must_bound_vars(b)
        case Loop():
            return EMPTY_VARS
    return bound_vars(program)


# ---------------------------------------------------------------------------
# Free variables
# ---------------------------------------------------------------------------


def _term_free(term: Term) -> VarSet:
    match term:
        case Var():
            return VarSet.of(term)
        case Const() | ChanName() | Empty():
            return EMPTY_VARS
        case Add(l, r) | Sub(l, r) | Mul(l, r) | Concat(l, r):
            return _term_free(l) | _term_free(r)
        case Val(t, i) | Time(t, i) | ChanAt(t, i):
            return _term_free(t) | _term_free(i)
        case Len(t) | Proj(t, _):
            return _term_free(t)
        case Item(_, v, s):
            return _term_free(v) | _term_free(s)
    raise TypeError(f"unknown term {term!r}")


def _program_free(program: Program) -> VarSet:
    match program:
        case Assign(_, e):
            return _term_free(e)
        case RandomAssign():
            return EMPTY_VARS
        case Test(cond):
            return free_vars(cond)
        case Ode(bindings, constraint):
            result = VarSet.of(*(x for x, _ in bindings), MU) | free_vars(constraint)
            for _, e in bindings:
                result = result | _term_free(e)
            return result
        case Send(_, h, e):
            return VarSet.of(h, MU) | _term_free(e)
        case Receive(_, h, _):
            return VarSet.of(h, MU)
        case Seq(a, b):
            return _program_free(a) | (_program_free(b) - must_bound_vars(a))
        case Choice(a, b) | Par(a, b):
            return _program_free(a) | _program_free(b)
        case Loop(body):
            return _program_free(body)
    raise TypeError(f"unknown program {program!r}")


def _formula_free(formula: Formula) -> VarSet:
    match formula:
        case Truth():
            return EMPTY_VARS
        case Cmp(_, l, r) | Prefix(l, r):
            return _term_free(l) | _term_free(r)
        case Not(a):
            return _formula_free(a)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return _formula_free(l) | _formula_free(r)
        case Forall(v, b) | Exists(v, b):
            return _formula_free(b) - VarSet.of(v)
        case Box(p, post):
            return _program_free(p) | (_formula_free(post) - must_bound_vars(p))
        case AcBox(p, a, c, post):
            return (
                _program_free(p)
                | (_formula_free(post) - must_bound_vars(p))
                | _formula_free(a)
                | _formula_free(c)
            )
    raise TypeError(f"unknown formula {formula!r}")


@lru_cache(maxsize=8192)
def free_vars(node: Node) -> VarSet:
    if isinstance(node, Term):
        return _term_free(node)
    if isinstance(node, Program):
        return _program_free(node)
    return _formula_free(node)


def all_vars(program: Program) -> VarSet:
    """Every variable of a program, V(α) = FV(α) ∪ BV(α)."""
    return free_vars(program) | bound_vars(program)


# ---------------------------------------------------------------------------
# Accessed channels
# ---------------------------------------------------------------------------


def _term_channels(term: Term) -> ChanSet:
    match term:
        case Var(_, sort):
            return FULL_CHANS if sort == Sort.TRACE else NO_CHANS
        case Const() | ChanName() | Empty() | Item():
            return NO_CHANS
        case Add(l, r) | Sub(l, r) | Mul(l, r) | Concat(l, r):
            return _term_channels(l) | _term_channels(r)
        case Val(t, i) | Time(t, i) | ChanAt(t, i):
            return _term_channels(t) | _term_channels(i)
        case Len(t):
            return _term_channels(t)
        case Proj(t, chans):
            return _term_channels(t) & ChanSet(chans)
    raise TypeError(f"unknown term {term!r}")


def _program_channels(program: Program) -> ChanSet:
    match program:
        case Send(chan, _, _) | Receive(chan, _, _):
            return ChanSet.of(chan)
        case Seq(a, b) | Choice(a, b) | Par(a, b):
            return _program_channels(a) | _program_channels(b)
        case Loop(body):
            return _program_channels(body)
    return NO_CHANS


def _formula_channels(formula: Formula) -> ChanSet:
    match formula:
        case Truth():
            return NO_CHANS
        case Cmp(_, l, r) | Prefix(l, r):
            return _term_channels(l) | _term_channels(r)
        case Not(a):
            return _formula_channels(a)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return _formula_channels(l) | _formula_channels(r)
        case Forall(_, b) | Exists(_, b):
            return _formula_channels(b)
        case Box(_, post):
            return _formula_channels(post)
        case AcBox(_, a, c, post):
            return _formula_channels(post) | _formula_channels(a) | _formula_channels(c)
    raise TypeError(f"unknown formula {formula!r}")


@lru_cache(maxsize=8192)
def channels(node: Node) -> ChanSet:
    if isinstance(node, Term):
        return _term_channels(node)
    if isinstance(node, Program):
        return _program_channels(node)
    return _formula_channels(node)


# ---------------------------------------------------------------------------
# Well-formedness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # "shared-state" | "ac-reads-state" | "mu-write"
    where: str
    variables: tuple

    def __str__(self) -> str:
        return f"{self.kind}: {', '.join(self.variables)} in {self.where}"


@dataclass
class WellFormedReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "wellformed": self.ok,
            "violations": [
                {"kind": v.kind, "where": v.where, "variables": list(v.variables)}
                for v in self.violations
            ],
        }


def _interface_only(variables: VarSet, *, mu: bool) -> VarSet:
    """The part of `variables` outside {μ} ∪ TVar (or outside TVar when mu=False)."""
    return variables.without(mu=mu, traces=True)


def check_wellformed(node: Union[Program, Formula], allow_mu_write: bool = False) -> WellFormedReport:
    """Collect every Par, AcBox and global-time violation in `node`."""
    report = WellFormedReport()
    _check(node, report, allow_mu_write)
    if not report.ok:
        logger.debug(f"Ill-formed: {[str(v) for v in report.violations]}")
    return report


def _check(node, report: WellFormedReport, allow_mu_write: bool) -> None:
    match node:
        case Par(a, b):
            shared = _interface_only(all_vars(a) & bound_vars(b), mu=True) | _interface_only(
                all_vars(b) & bound_vars(a), mu=True
            )
            if not shared.is_empty():
                report.violations.append(Violation("shared-state", str(node), tuple(shared.names())))
            _check(a, report, allow_mu_write)
            _check(b, report, allow_mu_write)
        case Assign(x, _) | RandomAssign(x) | Receive(_, _, x) if x.is_global_time and not allow_mu_write:
            report.violations.append(Violation("mu-write", str(node), (x.name,)))
        case Test(cond):
            _check(cond, report, allow_mu_write)
        case Ode(_, constraint):
            _check(constraint, report, allow_mu_write)
        case Seq(a, b) | Choice(a, b):
            _check(a, report, allow_mu_write)
            _check(b, report, allow_mu_write)
        case Loop(body):
            _check(body, report, allow_mu_write)
        case AcBox(p, a, c, post):
            reads = _interface_only((free_vars(a) | free_vars(c)) & bound_vars(p), mu=False)
            if not reads.is_empty():
                report.violations.append(Violation("ac-reads-state", str(node), tuple(reads.names())))
            for part in (p, a, c, post):
                _check(part, report, allow_mu_write)
        case Box(p, post):
            _check(p, report, allow_mu_write)
            _check(post, report, allow_mu_write)
        case Not(a):
            _check(a, report, allow_mu_write)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            _check(l, report, allow_mu_write)
            _check(r, report, allow_mu_write)
        case Forall(_, b) | Exists(_, b):
            _check(b, report, allow_mu_write)


# ---------------------------------------------------------------------------
# Noninterference
# ---------------------------------------------------------------------------


def interference(A: Formula, C: Formula, psi: Formula, alpha: Program, beta: Program) -> List[str]:
    """The noninterference conditions that fail for β against the contract of α."""
    failures: List[str] = []
    bound_beta = bound_vars(beta)

    leaked = _interface_only(free_vars(psi) & bound_beta, mu=True)
    if not leaked.is_empty():
        failures.append(f"(1) FV(psi) ∩ BV(beta) = {leaked} not within {{mu}} ∪ TVar")

    for name, chi in (("A", A), ("C", C)):
        leaked = _interface_only(free_vars(chi) & bound_beta, mu=False)
        if not leaked.is_empty():
            failures.append(f"(2) FV({name}) ∩ BV(beta) = {leaked} not within TVar")

    cn_alpha, cn_beta = channels(alpha), channels(beta)
    for name, chi in (("A", A), ("C", C), ("psi", psi)):
        observed = channels(chi) & cn_beta
        if not observed.issubset(cn_alpha):
            failures.append(f"(3) CN({name}) ∩ CN(beta) = {observed} not within CN(alpha) = {cn_alpha}")
    return failures


def noninterferes(A: Formula, C: Formula, psi: Formula, alpha: Program, beta: Program) -> bool:
    return not interference(A, C, psi, alpha, beta)


def summary(node: Union[Program, Formula]) -> dict:
    """FV/BV/MBV/CN table used by `chp check`."""
    table = {"FV": free_vars(node).names(), "CN": str(channels(node))}
    if isinstance(node, Program):
        table["BV"] = bound_vars(node).names()
        table["MBV"] = must_bound_vars(node).names()
    return table


def programs_in(formula: Formula) -> Iterable[Program]:
    """Top-level programs of the modalities in a formula."""
    match formula:
        case Box(p, post):
            yield p
            yield from programs_in(post)
        case AcBox(p, a, c, post):
            yield p
            for part in (a, c, post):
                yield from programs_in(part)
        case Not(a):
            yield from programs_in(a)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            yield from programs_in(l)
            yield from programs_in(r)
        case Forall(_, b) | Exists(_, b):
            yield from programs_in(b)
