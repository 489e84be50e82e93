"""
Axioms and proof rules of the dLCHP calculus.

Equivalence axioms are rewrite functions `(formula, direction, ctx) ->
formula`; the kernel finds or checks the position and splices the result
back. Implication-shaped axioms (K, acDropComp) and the rules acMono and
acG are goal transformers on a top-level succedent ac-box.
"""

from __future__ import annotations

import logging
from typing import Dict, List

import sympy

from ..arith.polynomial import equal_polynomials, substitute_polynomial, symbol, to_sympy
from ..shared.errors import RuleError
from ..static import channels, check_wellformed, free_vars, interference
from ..syntax.ast import (
    MU,
    ONE,
    SKIP,
    TRUE,
    ZERO,
    AcBox,
    Add,
    And,
    Assign,
    Box,
    Choice,
    Cmp,
    Concat,
    Forall,
    Formula,
    Implies,
    Item,
    Loop,
    Mul,
    Ode,
    Par,
    RandomAssign,
    Receive,
    Send,
    Seq,
    Sort,
    Term,
    Test,
    Var,
    forall_many,
    same_conjunction,
)
from ..syntax.parser import is_real_arithmetic
from ..syntax.subst import names_in, rename_free, substitute, term_vars
from .rules import REWRITE, RuleContext, RuleResult, RuleSpec, rewrite, rule
from .sequent import SUCCEDENT, Sequent

logger = logging.getLogger(__name__)


def _not_applicable(ctx: RuleContext, formula: Formula) -> RuleError:
    return ctx.fail(f"not applicable to {formula}")


def _is_acbox(formula: Formula) -> bool:
    return isinstance(formula, AcBox)


# ---------------------------------------------------------------------------
# Atomic hybrid programs
# ---------------------------------------------------------------------------


def assign(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[x := e]ψ(x) ↔ ψ(e)"""
    match formula:
        case Box(Assign(x, e), post):
            return substitute(post, {x: e}, allow_mu=x.is_global_time)
    raise _not_applicable(ctx, formula)


def assign_eq(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[x := e]ψ ↔ ∀x (x = e → ψ) when x does not occur in e.

    Unlike `assign` this never substitutes into ψ, so it applies when a
    program in ψ binds a variable of e.
    """
    if direction == "lr":
        match formula:
            case Box(Assign(x, e), post) if not x.is_global_time and x not in term_vars(e):
                return Forall(x, Implies(Cmp("=", x, e), post))
    else:
        match formula:
            case Forall(x, Implies(Cmp("=", lhs, e), post)) if (
                lhs == x and x.sort == Sort.REAL and not x.is_global_time and x not in term_vars(e)
            ):
                return Box(Assign(x, e), post)
    raise _not_applicable(ctx, formula)


def nondet_assign(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[x := *]ψ ↔ ∀x ψ"""
    if direction == "lr":
        match formula:
            case Box(RandomAssign(x), post):
                return Forall(x, post)
    else:
        match formula:
            case Forall(x, body) if x.sort == Sort.REAL and not x.is_global_time:
                return Box(RandomAssign(x), body)
    raise _not_applicable(ctx, formula)


def test(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[?χ]ψ ↔ (χ → ψ)"""
    if direction == "lr":
        match formula:
            case Box(Test(cond), post):
                return Implies(cond, post)
    else:
        match formula:
            case Implies(cond, post) if is_real_arithmetic(cond):
                return Box(Test(cond), post)
    raise _not_applicable(ctx, formula)


def boxes_dual(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α]ψ ↔ [α]{true,true}ψ"""
    if direction == "lr":
        match formula:
            case Box(p, post):
                return AcBox(p, TRUE, TRUE, post)
    else:
        match formula:
            case AcBox(p, a, c, post) if a == TRUE and c == TRUE:
                return Box(p, post)
    raise _not_applicable(ctx, formula)


# ---------------------------------------------------------------------------
# Compound programs
# ---------------------------------------------------------------------------


def ac_composition(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α;β]{A,C}ψ ↔ [α]{A,C}[β]{A,C}ψ"""
    if direction == "lr":
        match formula:
            case AcBox(Seq(p, q), a, c, post):
                return AcBox(p, a, c, AcBox(q, a, c, post))
    else:
        match formula:
            case AcBox(p, a, c, AcBox(q, a2, c2, post)) if (a, c) == (a2, c2):
                return AcBox(Seq(p, q), a, c, post)
    raise _not_applicable(ctx, formula)


def ac_choice(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α ++ β]{A,C}ψ ↔ [α]{A,C}ψ ∧ [β]{A,C}ψ"""
    if direction == "lr":
        match formula:
            case AcBox(Choice(p, q), a, c, post):
                return And(AcBox(p, a, c, post), AcBox(q, a, c, post))
    else:
        match formula:
            case And(AcBox(p, a, c, post), AcBox(q, a2, c2, post2)) if (a, c, post) == (a2, c2, post2):
                return AcBox(Choice(p, q), a, c, post)
    raise _not_applicable(ctx, formula)


def ac_iteration(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α*]{A,C}ψ ↔ [?true]{A,C}ψ ∧ [α]{A,C}[α*]{A,C}ψ"""
    if direction == "lr":
        match formula:
            case AcBox(Loop(body) as loop, a, c, post):
                return And(AcBox(SKIP, a, c, post), AcBox(body, a, c, AcBox(loop, a, c, post)))
    else:
        match formula:
            case And(AcBox(skip, a, c, post), AcBox(body, a2, c2, AcBox(Loop(body2) as loop, a3, c3, post2))) if (
                skip == SKIP and body == body2 and a == a2 == a3 and c == c2 == c3 and post == post2
            ):
                return AcBox(loop, a, c, post)
    raise _not_applicable(ctx, formula)


def ac_induction(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α*]{A,C}ψ ↔ [?true]{A,C}ψ ∧ [α*]{A,true}(ψ → [α]{A,C}ψ)"""
    if direction == "lr":
        match formula:
            case AcBox(Loop(body) as loop, a, c, post):
                return And(
                    AcBox(SKIP, a, c, post),
                    AcBox(loop, a, TRUE, Implies(post, AcBox(body, a, c, post))),
                )
    else:
        match formula:
            case And(
                AcBox(skip, a, c, post),
                AcBox(Loop(body) as loop, a2, t, Implies(post2, AcBox(body2, a3, c3, post3))),
            ) if (
                skip == SKIP
                and t == TRUE
                and body == body2
                and a == a2 == a3
                and c == c3
                and post == post2 == post3
            ):
                return AcBox(loop, a, c, post)
    raise _not_applicable(ctx, formula)


def ac_base(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[?true]{A,C}ψ ↔ C ∧ (A → ψ)"""
    if direction == "lr":
        match formula:
            case AcBox(p, a, c, post) if p == SKIP:
                return And(c, Implies(a, post))
    else:
        match formula:
            case And(c, Implies(a, post)):
                return AcBox(SKIP, a, c, post)
    raise _not_applicable(ctx, formula)


# ---------------------------------------------------------------------------
# Continuous evolution
# ---------------------------------------------------------------------------


def gtime(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[{x'=ρ & χ}]ψ ↔ [{mu'=1, x'=ρ & χ}]ψ"""
    match formula:
        case Box(Ode(bindings, constraint), post):
            if direction == "lr" and MU not in formula.program.variables:
                return Box(Ode(((MU, ONE),) + bindings, constraint), post)
            if direction == "rl" and (MU, ONE) in bindings:
                return Box(Ode(tuple(b for b in bindings if b != (MU, ONE)), constraint), post)
    raise _not_applicable(ctx, formula)


def _closed_form(x: Var, rate: Term, t: Var) -> Term:
    if rate == ZERO:
        return x
    if rate == ONE:
        return Add(x, t)
    return Add(x, Mul(t, rate))


def _solutions(ode: Ode, t: Var, ctx: RuleContext) -> Dict[Var, Term]:
    odevars = set(ode.variables)
    solutions: Dict[Var, Term] = {}
    for x, rate in ode.bindings:
        if ctx.has(x.name):
            solutions[x] = ctx.term_arg(x.name, extra={t.name: Sort.REAL})
        elif not (term_vars(rate) & odevars):
            solutions[x] = _closed_form(x, rate, t)
        else:
            raise ctx.fail(f"{x.name}' = {rate} is not constant-rate; supply {x.name}=\"...\" as a function of {t.name}")
    unknown = set(ctx.app.keys()) - {x.name for x in odevars} - {"time", "dir", "lhs"}
    if unknown:
        raise ctx.fail(f"{', '.join(sorted(unknown))} not a variable of {ode}")
    return solutions


def _check_solutions(ode: Ode, solutions: Dict[Var, Term], t: Var, ctx: RuleContext) -> None:
    """y'(t) = ρ(y(t)) and y(0) = x, checked on exact polynomials."""
    ts = symbol(t)
    for x, rate in ode.bindings:
        y = to_sympy(solutions[x])
        if not equal_polynomials(sympy.diff(y, ts), substitute_polynomial(rate, solutions)):
            raise ctx.fail(f"derivative of {solutions[x]} is not {rate} along the solution")
        if not equal_polynomials(y.subs(ts, 0), symbol(x)):
            raise ctx.fail(f"{solutions[x]} does not start at {x.name} for {t.name} = 0")


def _assignment_order(ode: Ode, solutions: Dict[Var, Term], ctx: RuleContext) -> List[Var]:
    """Each variable is assigned before any variable its solution reads."""
    odevars = list(ode.variables)
    reads = {x: (term_vars(solutions[x]) & set(odevars)) - {x} for x in odevars}
    order: List[Var] = []
    remaining = list(odevars)
    while remaining:
        ready = [x for x in remaining if not any(x in reads[y] for y in remaining if y != x)]
        if not ready:
            raise ctx.fail("solutions depend on each other cyclically")
        order.append(ready[0])
        remaining.remove(ready[0])
    return order


def solution(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[{x'=ρ & χ}]ψ ↔ ∀t (t≥0 → (∀s (0≤s≤t → [x:=y(s)]χ)) → [x:=y(t)]ψ)

    Without a domain constraint the middle antecedent is omitted. Global
    time is added by gtime first when the evolution lacks it.
    """
    if not (isinstance(formula, Box) and isinstance(formula.program, Ode)):
        raise _not_applicable(ctx, formula)
    if MU not in formula.program.variables:
        formula = gtime(formula, "lr", ctx)
        ctx.steps.append("gtime")
    ode: Ode = formula.program
    t = Var(ctx.fresh("t", ctx.name_arg("time", None)), Sort.REAL)
    solutions = _solutions(ode, t, ctx)
    _check_solutions(ode, solutions, t, ctx)
    order = _assignment_order(ode, solutions, ctx)

    def after(at: Term, post: Formula) -> Formula:
        for x in reversed(order):
            post = Box(Assign(x, substitute(solutions[x], {t: at})), post)
        return post

    nonnegative = Cmp(">=", t, ZERO)
    if ode.constraint == TRUE:
        return Forall(t, Implies(nonnegative, after(t, formula.post)))
    s = Var(ctx.fresh("s"), Sort.REAL)
    domain = Forall(s, Implies(And(Cmp("<=", ZERO, s), Cmp("<=", s, t)), after(s, ode.constraint)))
    return Forall(t, Implies(nonnegative, Implies(domain, after(t, formula.post))))


# ---------------------------------------------------------------------------
# Communication
# ---------------------------------------------------------------------------


def send(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[ch(h)!e]ψ(h) ↔ ∀h0 (h0 = h·<ch,e,mu> → ψ(h0)) for fresh h0"""
    if direction == "lr":
        match formula:
            case Box(Send(chan, h, e), post):
                h0 = Var(ctx.fresh(f"{h.name}0", ctx.name_arg("fresh", None)), Sort.TRACE)
                extended = Concat(h, Item(chan, e, MU))
                return Forall(h0, Implies(Cmp("=", h0, extended), rename_free(post, h, h0)))
    else:
        match formula:
            case Forall(h0, Implies(Cmp("=", lhs, Concat(h, Item(chan, e, stamp))), body)) if (
                lhs == h0 and stamp == MU and h0 != h and h.name not in names_in(body)
            ):
                return Box(Send(chan, h, e), rename_free(body, h0, h))
    raise _not_applicable(ctx, formula)


def ac_com(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[ch(h)!e]{A,C}ψ ↔ C ∧ (A → [ch(h)!e](C ∧ (A → ψ)))"""
    if direction == "lr":
        match formula:
            case AcBox(Send() as p, a, c, post):
                return And(c, Implies(a, Box(p, And(c, Implies(a, post)))))
    else:
        match formula:
            case And(c, Implies(a, Box(Send() as p, And(c2, Implies(a2, post))))) if (c, a) == (c2, a2):
                return AcBox(p, a, c, post)
    raise _not_applicable(ctx, formula)


def com_dual(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[ch(h)?x]{A,C}ψ ↔ [x := *][ch(h)!x]{A,C}ψ"""
    if direction == "lr":
        match formula:
            case AcBox(Receive(chan, h, x), a, c, post):
                return Box(RandomAssign(x), AcBox(Send(chan, h, x), a, c, post))
    else:
        match formula:
            case Box(RandomAssign(x), AcBox(Send(chan, h, e), a, c, post)) if e == x:
                return AcBox(Receive(chan, h, x), a, c, post)
    raise _not_applicable(ctx, formula)


# ---------------------------------------------------------------------------
# Assumption-commitment reasoning
# ---------------------------------------------------------------------------


def ac_no_com(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α]{A,C}ψ ↔ C ∧ (A → [α]ψ) when α does not communicate"""
    if direction == "lr":
        match formula:
            case AcBox(p, a, c, post) if channels(p).is_empty():
                return And(c, Implies(a, Box(p, post)))
    else:
        match formula:
            case And(c, Implies(a, Box(p, post))) if channels(p).is_empty():
                result = AcBox(p, a, c, post)
                report = check_wellformed(result, allow_mu_write=True)
                if not report.ok:
                    raise ctx.fail(f"resulting ac-box is ill-formed: {report.violations[0]}")
                return result
    if isinstance(formula, AcBox):
        raise ctx.fail(f"CN({formula.program}) is not empty")
    raise _not_applicable(ctx, formula)


def ac_weak(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α]{A,C}ψ ↔ C ∧ [α]{A,C}(C ∧ (A → ψ))"""
    if direction == "lr":
        match formula:
            case AcBox(p, a, c, post):
                return And(c, AcBox(p, a, c, And(c, Implies(a, post))))
    else:
        match formula:
            case And(c, AcBox(p, a, c2, And(c3, Implies(a2, post)))) if c == c2 == c3 and a == a2:
                return AcBox(p, a, c, post)
    raise _not_applicable(ctx, formula)


def split_conjunction(ctx: RuleContext, whole: Formula, left_key: str, right_key: str, what: str):
    left, right = ctx.formula_arg(left_key, None), ctx.formula_arg(right_key, None)
    if left is None and right is None:
        if isinstance(whole, And):
            return whole.left, whole.right
        if whole == TRUE:
            return TRUE, TRUE
        raise ctx.fail(f"{what} {whole} is not a conjunction; give {left_key}= and {right_key}=")
    left = TRUE if left is None else left
    right = TRUE if right is None else right
    if not same_conjunction(whole, And(left, right)):
        raise ctx.fail(f"{what} {whole} is not {left} & {right}")
    return left, right


def ac_boxes_dist(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α]{A, C1 ∧ C2}(ψ1 ∧ ψ2) ↔ [α]{A,C1}ψ1 ∧ [α]{A,C2}ψ2"""
    if direction == "lr":
        match formula:
            case AcBox(p, a, c, post):
                c1, c2 = split_conjunction(ctx, c, "c1", "c2", "commitment")
                psi1, psi2 = split_conjunction(ctx, post, "psi1", "psi2", "postcondition")
                return And(AcBox(p, a, c1, psi1), AcBox(p, a, c2, psi2))
    else:
        match formula:
            case And(AcBox(p, a, c1, psi1), AcBox(p2, a2, c2, psi2)) if (p, a) == (p2, a2):
                return AcBox(p, a, And(c1, c2), And(psi1, psi2))
    raise _not_applicable(ctx, formula)


# ---------------------------------------------------------------------------
# Plain-box rewrites reduced to the ac-box axioms
# ---------------------------------------------------------------------------


def _via_ac(formula: Formula, direction: str, ctx: RuleContext, core, name: str) -> Formula:
    """Run an ac-box axiom on plain boxes: boxesDual, the axiom, boxesDual back."""
    if direction == "lr":
        if not isinstance(formula, Box):
            raise _not_applicable(ctx, formula)
        middle = core(boxes_dual(formula, "lr", ctx), "lr", ctx)
        ctx.steps.extend(["boxesDual", name])
        if isinstance(middle, And):
            ctx.steps.extend(["boxesDual(dir=rl, at=.0)", "boxesDual(dir=rl, at=.1)"])
            return And(boxes_dual(middle.left, "rl", ctx), boxes_dual(middle.right, "rl", ctx))
        inner = boxes_dual(middle.post, "rl", ctx)
        ctx.steps.extend(["boxesDual(dir=rl, at=.0)", "boxesDual(dir=rl)"])
        return boxes_dual(AcBox(middle.program, middle.assumption, middle.commitment, inner), "rl", ctx)
    match formula:
        case And(Box() as l, Box() as r):
            lifted = And(boxes_dual(l, "lr", ctx), boxes_dual(r, "lr", ctx))
        case Box(p, Box() as inner):
            lifted = AcBox(p, TRUE, TRUE, boxes_dual(inner, "lr", ctx))
        case _:
            raise _not_applicable(ctx, formula)
    ctx.steps.extend(["boxesDual", f"{name}(dir=rl)", "boxesDual(dir=rl)"])
    return boxes_dual(core(lifted, "rl", ctx), "rl", ctx)


def composition(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α;β]ψ ↔ [α][β]ψ"""
    return _via_ac(formula, direction, ctx, ac_composition, "acComposition")


def choice(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[α ++ β]ψ ↔ [α]ψ ∧ [β]ψ"""
    return _via_ac(formula, direction, ctx, ac_choice, "acChoice")


def receive(formula: Formula, direction: str, ctx: RuleContext) -> Formula:
    """[ch(h)?x]ψ ↔ [x := *][ch(h)!x]ψ"""
    if direction == "lr":
        match formula:
            case Box(Receive(), _):
                dual = com_dual(boxes_dual(formula, "lr", ctx), "lr", ctx)
                ctx.steps.extend(["boxesDual", "comDual", "boxesDual(dir=rl, at=.0)"])
                return Box(dual.program, boxes_dual(dual.post, "rl", ctx))
    else:
        match formula:
            case Box(RandomAssign(x), Box(Send(), _) as inner):
                lifted = Box(RandomAssign(x), boxes_dual(inner, "lr", ctx))
                ctx.steps.extend(["boxesDual(at=.0)", "comDual(dir=rl)", "boxesDual(dir=rl)"])
                return boxes_dual(com_dual(lifted, "rl", ctx), "rl", ctx)
    raise _not_applicable(ctx, formula)


# ---------------------------------------------------------------------------
# Implication-shaped axioms and rules
# ---------------------------------------------------------------------------


def k_rule(ctx: RuleContext) -> RuleResult:
    """[α]{A, C1∧C2}ψ from ∀̄K ∧ [α]{A1∧A2, C1∧C2}ψ where K ≡ A ∧ C1 ∧ C2 → A1 ∧ A2."""
    box = ctx.formula
    a1, a2 = ctx.formula_arg("a1"), ctx.formula_arg("a2")
    c1, c2 = split_conjunction(ctx, box.commitment, "c1", "c2", "commitment")
    condition = Implies(And(box.assumption, And(c1, c2)), And(a1, a2))
    fv = free_vars(condition)
    if fv.contains(MU):
        raise ctx.fail("the compositionality condition may not mention global time")
    closure = forall_many(sorted(fv.finite, key=lambda v: v.name), condition)
    premise = And(closure, AcBox(box.program, And(a1, a2), And(c1, c2), box.post))
    return ctx.result(ctx.sequent.replace(SUCCEDENT, ctx.position.index, premise))


def ac_drop_comp(ctx: RuleContext) -> RuleResult:
    """[α ∥ β]{A,C}ψ from [α]{A,C}ψ when β does not interfere with it."""
    box = ctx.formula
    if not isinstance(box.program, Par):
        raise _not_applicable(ctx, box)
    keep = ctx.name_arg("keep", "left")
    if keep not in ("left", "right"):
        raise ctx.fail(f"keep must be left or right, not {keep}")
    kept, dropped = (box.program.left, box.program.right)
    if keep == "right":
        kept, dropped = dropped, kept
    failures = interference(box.assumption, box.commitment, box.post, kept, dropped)
    if failures:
        raise ctx.fail("dropped component interferes: " + "; ".join(failures))
    premise = AcBox(kept, box.assumption, box.commitment, box.post)
    return ctx.result(ctx.sequent.replace(SUCCEDENT, ctx.position.index, premise))


def ac_mono(ctx: RuleContext) -> RuleResult:
    """[α]{A2,C2}ψ2 from [α]{A1,C1}ψ1 and the validities A2 → A1, C1 → C2, ψ1 → ψ2."""
    box = ctx.formula
    a1 = ctx.formula_arg("a1", box.assumption)
    c1 = ctx.formula_arg("c1", box.commitment)
    psi1 = ctx.formula_arg("psi1", box.post)
    stronger = AcBox(box.program, a1, c1, psi1)
    return ctx.result(
        ctx.sequent.replace(SUCCEDENT, ctx.position.index, stronger),
        Sequent((box.assumption,), (a1,)),
        Sequent((c1,), (box.commitment,)),
        Sequent((psi1,), (box.post,)),
    )


def ac_g(ctx: RuleContext) -> RuleResult:
    """[α]{A,C}ψ from the validity C ∧ ψ."""
    box = ctx.formula
    return ctx.result(Sequent((), (And(box.commitment, box.post),)))


def _box_over(program_type):
    return lambda f: isinstance(f, AcBox) and isinstance(f.program, program_type)


RULES: List[RuleSpec] = [
    rewrite("assign", assign, inverse="lhs", summary="[x := e]p <-> p(e)"),
    rewrite("assignEq", assign_eq, summary="[x := e]p <-> forall x (x = e -> p) if x not in e"),
    rewrite("nondetAssign", nondet_assign, summary="[x := *]p <-> forall x p"),
    rewrite("test", test, summary="[?q]p <-> (q -> p)"),
    rewrite("boxesDual", boxes_dual, summary="[a]p <-> [a]{true,true}p"),
    rewrite("acComposition", ac_composition, summary="[a;b]{A,C}p <-> [a]{A,C}[b]{A,C}p"),
    rewrite("acChoice", ac_choice, summary="[a++b]{A,C}p <-> [a]{A,C}p & [b]{A,C}p"),
    rewrite("acIteration", ac_iteration, summary="[a*]{A,C}p <-> [skip]{A,C}p & [a]{A,C}[a*]{A,C}p"),
    rewrite("acInduction", ac_induction, summary="[a*]{A,C}p <-> [skip]{A,C}p & [a*]{A,true}(p -> [a]{A,C}p)"),
    rewrite("acBase", ac_base, summary="[skip]{A,C}p <-> C & (A -> p)"),
    rewrite("gtime", gtime, summary="[{x'=e & q}]p <-> [{mu'=1, x'=e & q}]p"),
    rewrite("solution", solution, inverse=None, open_keys=True, keys=frozenset({"time"}),
            summary="[{x'=e & q}]p <-> forall t (t >= 0 -> ... -> [x := y(t)]p)"),
    rewrite("send", send, keys=frozenset({"fresh"}), summary="[c(h)!e]p(h) <-> forall h0 (h0 = h.<c,e,mu> -> p(h0))"),
    rewrite("acCom", ac_com, summary="[c(h)!e]{A,C}p <-> C & (A -> [c(h)!e](C & (A -> p)))"),
    rewrite("comDual", com_dual, summary="[c(h)?x]{A,C}p <-> [x := *][c(h)!x]{A,C}p"),
    rewrite("acNoCom", ac_no_com, summary="[a]{A,C}p <-> C & (A -> [a]p) if CN(a) is empty"),
    rewrite("acWeak", ac_weak, summary="[a]{A,C}p <-> C & [a]{A,C}(C & (A -> p))"),
    rewrite("acBoxesDist", ac_boxes_dist, keys=frozenset({"c1", "c2", "psi1", "psi2"}),
            summary="[a]{A,C1&C2}(p1&p2) <-> [a]{A,C1}p1 & [a]{A,C2}p2"),
    rewrite("composition", composition, summary="[a;b]p <-> [a][b]p"),
    rewrite("choice", choice, summary="[a++b]p <-> [a]p & [b]p"),
    rewrite("receive", receive, summary="[c(h)?x]p <-> [x := *][c(h)!x]p"),
    rule("K", k_rule, shape=_is_acbox, keys=frozenset({"a1", "a2", "c1", "c2"}),
         summary="compositionality: discharge sibling assumptions by commitments"),
    rule("acDropComp", ac_drop_comp, shape=_box_over(Par), keys=frozenset({"keep"}),
         summary="drop a noninterfering parallel component"),
    rule("acMono", ac_mono, shape=_is_acbox, keys=frozenset({"a1", "c1", "psi1"}),
         summary="monotonicity of ac-boxes"),
    rule("acG", ac_g, shape=_is_acbox, summary="generalization: premise |- C & p"),
]

assert all(spec.kind == REWRITE or spec.side == SUCCEDENT for spec in RULES)
