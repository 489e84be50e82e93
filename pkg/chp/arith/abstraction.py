"""
Trace-term abstraction.

Maximal trace-involving arithmetic atoms (val, time and len over
normalized traces, chan accesses in channel comparisons) are replaced by
fresh variables so the arithmetic deciders can run "modulo trace terms".
Equal atoms share one variable, and every length variable n comes with
the side fact n >= 0. Only the sound direction is claimed: validity of the
result implies validity of the input.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Set, Tuple

from ..shared.errors import UnsupportedError
from ..syntax.ast import (
    INT_ZERO,
    TRUE,
    AcBox,
    Add,
    And,
    Box,
    ChanAt,
    ChanName,
    Cmp,
    Const,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Len,
    Mul,
    Not,
    Or,
    Prefix,
    Sort,
    Sub,
    Term,
    Time,
    Truth,
    Val,
    Var,
    conj,
    subterms,
)
from ..syntax.subst import fresh_name, names_in
from ..traces import is_ground, normalize, normalize_term, prefix_decide

logger = logging.getLogger(__name__)


@dataclass
class AbstractionMap:
    """Atom -> fresh variable, plus the side facts the replacement needs."""

    variables: Dict[Term, Var] = field(default_factory=dict)
    side_facts: List[Formula] = field(default_factory=list)
    channel_codes: Dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.variables)

    def to_dict(self) -> dict:
        return {
            "variables": {str(atom): var.name for atom, var in self.variables.items()},
            "side_facts": [str(f) for f in self.side_facts],
        }


class _Abstractor:
    def __init__(self, formula: Formula):
        self.map = AbstractionMap()
        self.avoid: Set[str] = set(names_in(formula))

    def fresh(self, atom: Term, sort: Sort, base: str) -> Var:
        found = self.map.variables.get(atom)
        if found is not None:
            return found
        name = fresh_name(base, self.avoid)
        self.avoid.add(name)
        var = Var(name, sort)
        self.map.variables[atom] = var
        if isinstance(atom, Len):
            self.map.side_facts.append(Cmp(">=", var, INT_ZERO))
        logger.debug(f"Abstracted {atom} as {name}")
        return var

    def check_unbound(self, atom: Term, bound: Set[Var]) -> None:
        caught = [t for t in subterms(atom) if isinstance(t, Var) and t in bound]
        if caught:
            raise UnsupportedError(f"quantified variable {caught[0].name} inside abstracted atom {atom}")

    def term(self, term: Term, bound: Set[Var]) -> Term:
        match term:
            case Val() | Time():
                atom = normalize_term(term)
                self.check_unbound(atom, bound)
                return self.fresh(atom, Sort.REAL, "a" if isinstance(term, Val) else "s")
            case Len():
                atom = normalize_term(term)
                self.check_unbound(atom, bound)
                return self.fresh(atom, Sort.INT, "n")
            case ChanAt():
                atom = normalize_term(term)
                self.check_unbound(atom, bound)
                return self.fresh(atom, Sort.INT, "k")
            case ChanName(name):
                code = self.map.channel_codes.setdefault(name, len(self.map.channel_codes))
                return Const(Fraction(code), Sort.INT)
            case Add(l, r):
                return Add(self.term(l, bound), self.term(r, bound))
            case Sub(l, r):
                return Sub(self.term(l, bound), self.term(r, bound))
            case Mul(l, r):
                return Mul(self.term(l, bound), self.term(r, bound))
        if term.sort == Sort.TRACE:
            raise UnsupportedError(f"trace term {term} outside an accessor")
        return term

    def formula(self, formula: Formula, bound: Set[Var]) -> Formula:
        match formula:
            case Truth():
                return formula
            case Cmp(op, l, r) if l.sort == Sort.TRACE:
                return self.trace_equation(op, l, r)
            case Cmp(op, l, r):
                return Cmp(op, self.term(l, bound), self.term(r, bound))
            case Prefix(l, r):
                if is_ground(l) and is_ground(r):
                    return Truth(prefix_decide(l, r))
                if normalize(l) == normalize(r):
                    return TRUE
                raise UnsupportedError(f"prefix atom {formula} cannot be abstracted")
            case Not(a):
                return Not(self.formula(a, bound))
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                return type(formula)(self.formula(l, bound), self.formula(r, bound))
            case Forall(var, body) | Exists(var, body):
                if var.sort == Sort.TRACE:
                    raise UnsupportedError(f"trace quantifier over {var.name} cannot be abstracted")
                return type(formula)(var, self.formula(body, bound | {var}))
            case Box() | AcBox():
                raise UnsupportedError("modal formulas cannot be abstracted")
        raise TypeError(f"unknown formula {formula!r}")

    def trace_equation(self, op: str, l: Term, r: Term) -> Formula:
        if is_ground(l) and is_ground(r):
            from ..oracle.evaluate import eval_term
            from ..oracle.state import State

            same = eval_term(l, State()) == eval_term(r, State())
            return Truth(same if op == "=" else not same)
        if normalize(l) == normalize(r):
            return Truth(op == "=")
        raise UnsupportedError(f"trace equation {l} {op} {r} cannot be abstracted")


def abstract_traces(formula: Formula) -> Tuple[Formula, AbstractionMap]:
    """Replace trace atoms by fresh variables; side facts become antecedents."""
    abstractor = _Abstractor(formula)
    body = abstractor.formula(formula, set())
    facts = abstractor.map.side_facts
    result = Implies(conj(*facts), body) if facts else body
    return result, abstractor.map


def mentions_traces(formula: Formula) -> bool:
    from ..syntax.ast import formula_terms

    return any(t.sort in (Sort.TRACE, Sort.CHAN) for term in formula_terms(formula) for t in subterms(term))


def abstractable(formula: Formula) -> bool:
    try:
        _Abstractor(formula).formula(formula, set())
    except UnsupportedError:
        return False
    return True
