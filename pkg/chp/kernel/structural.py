"""Propositional, quantifier, closing and trace-algebra rules of the sequent calculus."""

from __future__ import annotations

import logging
from typing import List, Optional

from ..shared.errors import SubstitutionError
from ..syntax.ast import (
    FALSE,
    TRUE,
    And,
    Cmp,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Var,
)
from ..syntax.subst import names_in, rename_free, substitute
from ..traces import length_facts, trace_algebra
from .rules import RuleContext, RuleResult, RuleSpec, rule
from .sequent import ANTECEDENT, SUCCEDENT, Position, Sequent

logger = logging.getLogger(__name__)


def _shape(kind):
    return lambda f: isinstance(f, kind)


def _here(ctx: RuleContext, *formulas: Formula) -> Sequent:
    """The goal with the principal formula replaced in place."""
    return ctx.sequent.replace(ctx.position.side, ctx.position.index, *formulas)


def _without(ctx: RuleContext) -> Sequent:
    return ctx.sequent.remove(ctx.position.side, ctx.position.index)


# ---------------------------------------------------------------------------
# Propositional rules
# ---------------------------------------------------------------------------


def impl_r(ctx: RuleContext) -> RuleResult:
    f: Implies = ctx.formula
    return ctx.result(_here(ctx, f.right).add(ANTECEDENT, f.left))


def impl_l(ctx: RuleContext) -> RuleResult:
    f: Implies = ctx.formula
    return ctx.result(_without(ctx).add(SUCCEDENT, f.left), _here(ctx, f.right))


def and_r(ctx: RuleContext) -> RuleResult:
    f: And = ctx.formula
    return ctx.result(_here(ctx, f.left), _here(ctx, f.right))


def and_l(ctx: RuleContext) -> RuleResult:
    f: And = ctx.formula
    return ctx.result(_here(ctx, f.left, f.right))


def or_r(ctx: RuleContext) -> RuleResult:
    f: Or = ctx.formula
    return ctx.result(_here(ctx, f.left, f.right))


def or_l(ctx: RuleContext) -> RuleResult:
    f: Or = ctx.formula
    return ctx.result(_here(ctx, f.left), _here(ctx, f.right))


def not_r(ctx: RuleContext) -> RuleResult:
    f: Not = ctx.formula
    return ctx.result(_without(ctx).add(ANTECEDENT, f.arg))


def not_l(ctx: RuleContext) -> RuleResult:
    f: Not = ctx.formula
    return ctx.result(_without(ctx).add(SUCCEDENT, f.arg))


def iff_r(ctx: RuleContext) -> RuleResult:
    f: Iff = ctx.formula
    rest = _without(ctx)
    return ctx.result(
        rest.add(ANTECEDENT, f.left).add(SUCCEDENT, f.right),
        rest.add(ANTECEDENT, f.right).add(SUCCEDENT, f.left),
    )


def cut(ctx: RuleContext) -> RuleResult:
    """Γ ⊢ φ, Δ and Γ, φ ⊢ Δ."""
    phi = ctx.formula_arg("formula")
    return ctx.result(ctx.sequent.add(SUCCEDENT, phi), ctx.sequent.add(ANTECEDENT, phi))


def weaken(ctx: RuleContext) -> RuleResult:
    if ctx.position is None:
        raise ctx.fail("needs a position")
    return ctx.result(_without(ctx))


# ---------------------------------------------------------------------------
# Quantifiers
# ---------------------------------------------------------------------------


def _skolemize(ctx: RuleContext) -> RuleResult:
    """Instantiate the bound variable by itself when it is not free elsewhere, by a fresh name otherwise."""
    f = ctx.formula
    requested = ctx.name_arg("name", None)
    elsewhere = ctx.sequent.free_vars(skip=(ctx.position.side, ctx.position.index))
    if requested is None and not elsewhere.contains(f.var):
        return ctx.result(_here(ctx, f.body))
    if requested == f.var.name and not elsewhere.contains(f.var):
        return ctx.result(_here(ctx, f.body))
    new = Var(ctx.fresh(f.var.name, requested), f.var.sort)
    return ctx.result(_here(ctx, rename_free(f.body, f.var, new)))


def _instantiate(ctx: RuleContext) -> RuleResult:
    f = ctx.formula
    term = ctx.term_arg("term")
    if term.sort != f.var.sort:
        raise ctx.fail(f"{term} has sort {term.sort}, {f.var.name} has sort {f.var.sort}")
    try:
        return ctx.result(_here(ctx, substitute(f.body, {f.var: term})))
    except SubstitutionError:
        # A variable new to the body may also take over binding positions.
        if not isinstance(term, Var) or term.name in names_in(f.body):
            raise
    return ctx.result(_here(ctx, rename_free(f.body, f.var, term)))


def forall_r(ctx: RuleContext) -> RuleResult:
    return _skolemize(ctx)


def exists_l(ctx: RuleContext) -> RuleResult:
    return _skolemize(ctx)


def forall_l(ctx: RuleContext) -> RuleResult:
    return _instantiate(ctx)


def exists_r(ctx: RuleContext) -> RuleResult:
    return _instantiate(ctx)


# ---------------------------------------------------------------------------
# Closing rules
# ---------------------------------------------------------------------------


def identity(ctx: RuleContext) -> RuleResult:
    succedent = ctx.sequent.succedent
    if ctx.position is not None:
        if ctx.position.side != SUCCEDENT:
            raise ctx.fail("position must address the succedent")
        if ctx.formula in ctx.sequent.antecedent:
            return RuleResult(closed_by="Id")
        raise ctx.fail(f"{ctx.formula} is not in the antecedent")
    if any(f in ctx.sequent.antecedent for f in succedent):
        return RuleResult(closed_by="Id")
    raise ctx.fail("no formula occurs on both sides")


def true_r(ctx: RuleContext) -> RuleResult:
    return RuleResult(closed_by="trueR")


def false_l(ctx: RuleContext) -> RuleResult:
    return RuleResult(closed_by="falseL")


def _reflexive(f: Formula) -> bool:
    return isinstance(f, Cmp) and f.op in ("=", "<=", ">=") and f.left == f.right


def equal(ctx: RuleContext) -> RuleResult:
    return RuleResult(closed_by="equal")


# ---------------------------------------------------------------------------
# Equational substitution
# ---------------------------------------------------------------------------


def _equation(ctx: RuleContext):
    position = ctx.position_arg("eq", None)
    ante = ctx.sequent.antecedent
    candidates = [position.index] if position is not None else range(len(ante))
    if position is not None and position.side != ANTECEDENT:
        raise ctx.fail("eq= must address an antecedent equation")
    for i in candidates:
        eq = ctx.sequent.at(ANTECEDENT, i)
        if isinstance(eq, Cmp) and eq.op == "=":
            if isinstance(eq.left, Var) and not eq.left.is_global_time:
                return i, eq.left, eq.right
            if isinstance(eq.right, Var) and not eq.right.is_global_time:
                return i, eq.right, eq.left
        if position is not None:
            raise ctx.fail(f"{eq} is not an equation with a variable side")
    raise ctx.fail("no equation x = e in the antecedent")


def _substitution(side: str):
    def run(ctx: RuleContext) -> RuleResult:
        index, var, term = _equation(ctx)
        sequent = ctx.sequent
        target: Optional[Position] = ctx.position
        if target is not None and target.side != side:
            raise ctx.fail(f"at= must address the {'antecedent' if side == ANTECEDENT else 'succedent'}")
        changed = False
        for i, f in enumerate(sequent.side(side)):
            if (side, i) == (ANTECEDENT, index) or (target is not None and target.index != i):
                continue
            new = substitute(f, {var: term})
            if new != f:
                sequent = sequent.replace(side, i, new)
                changed = True
        if not changed:
            raise ctx.fail(f"{var.name} does not occur where it could be replaced")
        return ctx.result(sequent)

    return run


# ---------------------------------------------------------------------------
# Trace algebra
# ---------------------------------------------------------------------------


def trace_step(ctx: RuleContext) -> RuleResult:
    """Normalize trace terms and simplify accessors using the antecedent's length facts."""
    facts = length_facts(ctx.sequent.antecedent)
    sequent = Sequent(
        tuple(trace_algebra(f, facts) for f in ctx.sequent.antecedent),
        tuple(trace_algebra(f, facts) for f in ctx.sequent.succedent),
    )
    if sequent == ctx.sequent:
        raise ctx.fail("no trace simplification applies")
    return ctx.result(sequent)


def _closing(name: str, fn, side: str, shape) -> RuleSpec:
    return rule(name, fn, side=side, shape=shape)


RULES: List[RuleSpec] = [
    rule("implR", impl_r, shape=_shape(Implies)),
    rule("implL", impl_l, side=ANTECEDENT, shape=_shape(Implies)),
    rule("andR", and_r, shape=_shape(And)),
    rule("andL", and_l, side=ANTECEDENT, shape=_shape(And)),
    rule("orR", or_r, shape=_shape(Or)),
    rule("orL", or_l, side=ANTECEDENT, shape=_shape(Or)),
    rule("notR", not_r, shape=_shape(Not)),
    rule("notL", not_l, side=ANTECEDENT, shape=_shape(Not)),
    rule("iffR", iff_r, shape=_shape(Iff)),
    rule("forallR", forall_r, shape=_shape(Forall), keys=frozenset({"name"})),
    rule("existsL", exists_l, side=ANTECEDENT, shape=_shape(Exists), keys=frozenset({"name"})),
    rule("forallL", forall_l, side=ANTECEDENT, shape=_shape(Forall), keys=frozenset({"term"}), positional=("term",)),
    rule("existsR", exists_r, shape=_shape(Exists), keys=frozenset({"term"}), positional=("term",)),
    rule("cut", cut, side=None, keys=frozenset({"formula"}), positional=("formula",)),
    rule("WL", weaken, side=ANTECEDENT),
    rule("WR", weaken, side=SUCCEDENT),
    rule("hide", weaken, side=None),
    rule("Id", identity, side=None),
    _closing("trueR", true_r, SUCCEDENT, lambda f: f == TRUE),
    _closing("falseL", false_l, ANTECEDENT, lambda f: f == FALSE),
    _closing("equal", equal, SUCCEDENT, _reflexive),
    rule("subsL", _substitution(ANTECEDENT), side=None, keys=frozenset({"eq"}), positional=("eq",)),
    rule("subsR", _substitution(SUCCEDENT), side=None, keys=frozenset({"eq"}), positional=("eq",)),
    rule("TA", trace_step, side=None),
]

# Names of the individual trace laws; each runs the whole trace-algebra step.
ALIASES = {
    "closeTrue": "trueR",
    "valAccessBase": "TA",
    "valAccessInd": "TA",
    "timeAccessBase": "TA",
    "timeAccessInd": "TA",
    "chanAccessBase": "TA",
    "chanAccessInd": "TA",
    "projIn": "TA",
    "projNotIn": "TA",
    "projEmpty": "TA",
    "projConcat": "TA",
    "lenEmpty": "TA",
    "lenItem": "TA",
    "lenConcat": "TA",
    "unroll": "TA",
}
