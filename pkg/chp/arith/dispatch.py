"""
Closing first-order sequents by arithmetic.

dispatch normalizes trace terms with the sequent's length facts, abstracts
the remaining trace atoms, removes truncated integer subtraction, and
relativizes integer variables to the naturals. Sort-pure parts go to the
Presburger procedure or the real decider; a mixed remainder goes to the
SMT bridge when one is available. Anything short of a definite "valid"
leaves the sequent open.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set, Tuple

from ..shared.errors import ChpError, UnsupportedError
from ..static import free_vars
from ..syntax.ast import (
    INT_ZERO,
    Add,
    And,
    Cmp,
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
    conj,
    conjuncts,
    disj,
    is_first_order,
    subterms,
)
from ..syntax.subst import fresh_name, names_in, substitute, term_vars
from ..traces import length_facts, trace_algebra
from .abstraction import abstract_traces, abstractable, mentions_traces
from .linear_real import decide_real
from .presburger import decide_presburger
from .result import VALID, ArithResult

logger = logging.getLogger(__name__)

CLOSED = "closed"
OPEN = "open"
METHODS = ("PA", "real", "TA", "auto")


@dataclass
class DispatchResult:
    status: str
    by: Optional[str] = None
    reason: str = ""
    attempts: List[ArithResult] = field(default_factory=list)

    @property
    def closed(self) -> bool:
        return self.status == CLOSED

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "by": self.by,
            "reason": self.reason,
            "attempts": [a.to_dict() for a in self.attempts],
        }


# ---------------------------------------------------------------------------
# Truncated subtraction and relativization
# ---------------------------------------------------------------------------


class _MonusLifter:
    """Replace Int subtraction a - b by fresh m with (a >= b -> m = a - b) & (a < b -> m = 0)."""

    def __init__(self, avoid: Set[str]):
        self.avoid = avoid
        self.facts: List[Formula] = []
        self.lifted: dict = {}

    def term(self, term: Term, bound: Set[Var]) -> Term:
        match term:
            case Sub(l, r) if term.sort == Sort.INT:
                l, r = self.term(l, bound), self.term(r, bound)
                if any(isinstance(t, Var) and t in bound for t in subterms(Sub(l, r))):
                    raise UnsupportedError(f"truncated subtraction {term} under a quantifier")
                key = Sub(l, r)
                if key not in self.lifted:
                    name = fresh_name("m", self.avoid)
                    self.avoid.add(name)
                    m = Var(name, Sort.INT)
                    self.lifted[key] = m
                    self.facts.append(Implies(Cmp(">=", l, r), Cmp("=", m, key)))
                    self.facts.append(Implies(Cmp("<", l, r), Cmp("=", m, INT_ZERO)))
                return self.lifted[key]
            case Add(l, r):
                return Add(self.term(l, bound), self.term(r, bound))
            case Sub(l, r):
                return Sub(self.term(l, bound), self.term(r, bound))
            case Mul(l, r):
                return Mul(self.term(l, bound), self.term(r, bound))
        return term

    def formula(self, formula: Formula, bound: Set[Var]) -> Formula:
        match formula:
            case Cmp(op, l, r):
                return Cmp(op, self.term(l, bound), self.term(r, bound))
            case Not(a):
                return Not(self.formula(a, bound))
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                return type(formula)(self.formula(l, bound), self.formula(r, bound))
            case Forall(v, b) | Exists(v, b):
                return type(formula)(v, self.formula(b, bound | {v}))
        return formula


def relativize(formula: Formula) -> Formula:
    """Restrict integer quantifiers to the naturals."""
    match formula:
        case Forall(v, b) if v.sort == Sort.INT:
            return Forall(v, Implies(Cmp(">=", v, INT_ZERO), relativize(b)))
        case Exists(v, b) if v.sort == Sort.INT:
            return Exists(v, And(Cmp(">=", v, INT_ZERO), relativize(b)))
        case Forall(v, b) | Exists(v, b):
            return type(formula)(v, relativize(b))
        case Not(a):
            return Not(relativize(a))
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return type(formula)(relativize(l), relativize(r))
    return formula


def sorts_of(formula: Formula) -> Set[Sort]:
    match formula:
        case Truth():
            return set()
        case Cmp(_, l, r):
            return {l.sort}
        case Not(a):
            return sorts_of(a)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return sorts_of(l) | sorts_of(r)
        case Forall(v, b) | Exists(v, b):
            return {v.sort} | sorts_of(b)
    return {Sort.TRACE}


def _natural_facts(formula: Formula) -> List[Formula]:
    return [Cmp(">=", v, INT_ZERO) for v in free_vars(formula) if v.sort == Sort.INT]


def _definition(formula: Formula) -> Optional[Tuple[Var, Term]]:
    match formula:
        case Cmp("=", Var() as h, te) if h.sort == Sort.TRACE and h not in term_vars(te):
            return h, te
        case Cmp("=", te, Var() as h) if h.sort == Sort.TRACE and h not in term_vars(te):
            return h, te
    return None


def inline_definitions(antecedent: List[Formula], succedent: List[Formula]) -> Tuple[List[Formula], List[Formula]]:
    """Eliminate antecedent equations h = te by substituting te for h everywhere else."""
    while True:
        for i, f in enumerate(antecedent):
            found = _definition(f)
            if found is not None:
                break
        else:
            return antecedent, succedent
        h, te = found
        rest = antecedent[:i] + antecedent[i + 1:]
        antecedent = [substitute(g, {h: te}) for g in rest]
        succedent = [substitute(g, {h: te}) for g in succedent]


def prepare(antecedent: Sequence[Formula], succedent: Sequence[Formula]) -> Tuple[List[Formula], List[Formula], bool]:
    """Trace algebra, abstraction and monus lifting; the flag says whether trace reasoning was used.

    Antecedent formulas the abstraction cannot express are dropped; this
    only weakens the sequent.
    """
    antecedent = [f for f in antecedent if is_first_order(f)]
    antecedent, succedent = inline_definitions(list(antecedent), list(succedent))
    facts = length_facts(antecedent)
    goal = Implies(conj(*antecedent), disj(*succedent))
    used_traces = mentions_traces(goal)
    rewritten_ante = [trace_algebra(f, facts) for f in antecedent]
    rewritten_succ = [trace_algebra(f, facts) for f in succedent]
    kept = [f for f in rewritten_ante if abstractable(f)]
    if len(kept) < len(rewritten_ante):
        logger.debug(f"Weakened away {len(rewritten_ante) - len(kept)} antecedent formula(s)")
    rewritten_ante = kept

    abstract, mapping = abstract_traces(Implies(conj(*rewritten_ante), disj(*rewritten_succ)))
    side: List[Formula] = []
    if mapping.side_facts:
        side = list(mapping.side_facts)
        abstract = abstract.right
    ante_part, succ_part = conjuncts(abstract.left), disjuncts(abstract.right)

    lifter = _MonusLifter(set(names_in(abstract)))
    ante_part = [lifter.formula(f, set()) for f in side + ante_part]
    succ_part = [lifter.formula(f, set()) for f in succ_part]
    ante_part = lifter.facts + ante_part
    whole = Implies(conj(*ante_part), disj(*succ_part))
    ante_part = _natural_facts(whole) + [relativize(f) for f in ante_part]
    succ_part = [relativize(f) for f in succ_part]
    return ante_part, succ_part, used_traces


def disjuncts(formula: Formula) -> List[Formula]:
    if isinstance(formula, Or):
        return disjuncts(formula.left) + disjuncts(formula.right)
    return [] if formula == Truth(False) else [formula]


def _decide(formula: Formula, sorts: Set[Sort], smt) -> Optional[ArithResult]:
    if sorts <= {Sort.INT}:
        return decide_presburger(formula)
    if sorts <= {Sort.REAL}:
        return decide_real(formula, smt)
    if smt is not None and smt.available:
        return smt.check_valid(formula)
    return None


def dispatch(sequent, which: str = "auto", smt=None) -> DispatchResult:
    """Try to close a first-order sequent; never raises, open is the safe answer."""
    antecedent, succedent = list(sequent.antecedent), list(sequent.succedent)
    if not all(is_first_order(f) for f in succedent):
        return DispatchResult(OPEN, reason="sequent contains modalities")
    try:
        ante, succ, used_traces = prepare(antecedent, succedent)
    except (UnsupportedError, ChpError) as e:
        return DispatchResult(OPEN, reason=str(e))

    attempts: List[ArithResult] = []
    failures: List[str] = []

    candidates: List[Tuple[Set[Sort], Formula]] = []
    whole = Implies(conj(*ante), disj(*succ))
    for sort in (Sort.INT, Sort.REAL):
        part_ante = [f for f in ante if sorts_of(f) <= {sort}]
        part_succ = [f for f in succ if sorts_of(f) <= {sort}]
        if part_succ and (len(part_ante), len(part_succ)) != (len(ante), len(succ)):
            candidates.append(({sort}, Implies(conj(*part_ante), disj(*part_succ))))
    candidates.append((sorts_of(whole), whole))

    for sorts, goal in candidates:
        if which == "PA" and not sorts <= {Sort.INT}:
            continue
        if which == "real" and not sorts <= {Sort.REAL}:
            continue
        try:
            result = _decide(goal, sorts, smt)
        except UnsupportedError as e:
            logger.debug(f"Arithmetic declined {goal}: {e}")
            continue
        except ChpError as e:
            logger.warning(f"Arithmetic failed on {goal}: {e}")
            failures.append(str(e))
            continue
        if result is None:
            continue
        attempts.append(result)
        if result.status == VALID:
            method = "PA" if sorts <= {Sort.INT} else "real"
            by = "TA" if used_traces and which == "TA" else method
            return DispatchResult(CLOSED, by=by, attempts=attempts)
    reason = "; ".join([str(a) for a in attempts] + failures) or "no applicable decision procedure"
    return DispatchResult(OPEN, reason=reason, attempts=attempts)
