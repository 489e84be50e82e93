"""
Derived rules.

Each rule here (except CG) computes its premises by running kernel
primitives on a scratch proof state rooted at the goal; whatever stays open
there becomes a premise, and the primitive steps are recorded as the
expansion. A derived rule therefore cannot be less sound than the
primitives it is built from.

CG is the one primitive in this module. It introduces a ghost history
h0 = h·<ch,v,mu> and renames the program's recorder to h0. Programs never
read their recorder (tests, ODEs and program terms are real arithmetic), so
the renamed program behaves like the original one with a longer starting
history.
"""

from __future__ import annotations

import logging
from typing import List, Set

from ..shared.errors import RuleError
from ..static import channels, free_vars
from ..syntax.ast import (
    MU,
    TRUE,
    AcBox,
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
    Ode,
    Par,
    Program,
    RandomAssign,
    Receive,
    Send,
    Seq,
    Sort,
    Test,
    Var,
    is_first_order,
    match_if,
)
from ..syntax.subst import is_program_term, rename_recorder
from .axioms import split_conjunction
from .rules import RuleContext, RuleResult, RuleSpec, Scratch, rule
from .sequent import ANTECEDENT, OPEN, SUCCEDENT, L, R

logger = logging.getLogger(__name__)


def _is_true(f: Formula) -> bool:
    return f == TRUE


def _trim(s: Scratch, goal_id: int) -> int:
    return s.drop(goal_id, _is_true)


def _commitment_holds(s: Scratch, goal_id: int, box_index: int) -> None:
    """Close Γ, [α]{A,C}ψ ⊢ C, Δ by weakening the ac-box in the antecedent."""
    goal_id = s.only(goal_id, "acWeak", L(box_index))
    goal_id = s.only(goal_id, "andL", L(box_index))
    s.run(goal_id, "Id")


# ---------------------------------------------------------------------------
# Loops
# ---------------------------------------------------------------------------


def ac_invariant(ctx: RuleContext) -> RuleResult:
    """Γ ⊢ [α*]{A,C}I, Δ from I ⊢ [α]{A,C}I, given I ∈ Γ."""
    box: AcBox = ctx.formula
    inv, a, c = box.post, box.assumption, box.commitment
    if inv not in ctx.sequent.antecedent:
        raise ctx.fail(f"invariant {inv} is not an assumption of the goal")
    s = ctx.scratch()
    g = s.keep_only(s.root, L(ctx.sequent.antecedent.index(inv)), R(ctx.position.index))
    g = s.only(g, "acInduction", R(0))
    base, step = s.run(g, "andR", R(0))

    base = s.only(base, "acBase", R(0))
    holds, keeps = s.run(base, "andR", R(0))
    if _is_true(c):
        s.run(holds, "trueR", R(0))
    else:
        show, use = s.run(holds, "cut", formula=AcBox(box.program.body, a, c, inv))
        s.only(show, "WR", R(1))
        _commitment_holds(s, use, 1)
    keeps = s.only(keeps, "implR", R(0))
    s.run(keeps, "Id")

    step = s.only(step, "acG", R(0))
    true, step = s.run(step, "andR", R(0))
    s.run(true, "trueR", R(0))
    s.only(step, "implR", R(0))
    return s.result()


def _reestablish(s: Scratch, goal_id: int, body: Program, a: Formula, c: Formula, j: Formula) -> int:
    """Reduce C∧J ⊢ [α]{A,C}(C∧J) to C, J ⊢ [α]{A,C}J."""
    g = s.only(goal_id, "acWeak", R(0))
    holds, g = s.run(g, "andR", R(0))
    holds = s.only(holds, "andL", L(0))
    s.run(holds, "Id")

    middle = And(c, Implies(a, j))
    main, pa, pc, pp = s.run(g, "acMono", R(0), a1=a, c1=c, psi1=middle)
    s.run(pa, "Id")
    s.run(pc, "Id")

    # C ∧ (A → J) ⊢ C ∧ (A → C ∧ J)
    pp = s.only(pp, "andL", L(0))
    left, right = s.run(pp, "andR", R(0))
    s.run(left, "Id")
    right = s.only(right, "implR", R(0))
    left, right = s.run(right, "andR", R(0))
    s.run(left, "Id")
    missing, have = s.run(right, "implL", L(1))
    s.run(missing, "Id")
    s.run(have, "Id")

    show, use = s.run(main, "cut", formula=AcBox(body, a, c, j))
    show = s.only(show, "WR", R(1))
    leaf = s.only(show, "andL", L(0))
    use = s.only(use, "acWeak", L(1))
    use = s.only(use, "andL", L(1))
    s.run(use, "Id")
    return _trim(s, leaf)


def ac_loop(ctx: RuleContext) -> RuleResult:
    """Loop rule with invariant J.

    Premises: Γ ⊢ C ∧ J, Δ;  C, J ⊢ [α]{A,C}J;  C, J, A ⊢ ψ.
    """
    box: AcBox = ctx.formula
    i = ctx.position.index
    a, c, psi, body = box.assumption, box.commitment, box.post, box.program.body
    j = ctx.formula_arg("inv")
    jc = And(c, j)
    strong = AcBox(box.program, a, c, jc)
    s = ctx.scratch()
    n = len(ctx.sequent.antecedent)

    show, use = s.run(s.root, "cut", formula=Implies(jc, strong))
    show = s.keep_only(show, R(0))
    show = s.only(show, "implR", R(0))
    show = s.only(show, "acInvariant", R(0))
    step = _reestablish(s, show, body, a, c, j)

    base, use = s.run(use, "implL", L(n))
    base = s.only(base, "WR", R(i + 1))
    if _is_true(c):
        true, base = s.run(base, "andR", R(0))
        s.run(true, "trueR", R(0))

    use = s.only(use, "acWeak", R(i))
    holds, use = s.run(use, "andR", R(i))
    _commitment_holds(s, holds, n)
    main, pa, pc, pp = s.run(use, "acMono", R(i), a1=a, c1=c, psi1=jc)
    s.run(main, "Id", R(i))
    s.run(pa, "Id")
    s.run(pc, "Id")
    pp = s.only(pp, "andL", L(0))
    holds, post = s.run(pp, "andR", R(0))
    s.run(holds, "Id")
    post = _trim(s, s.only(post, "implR", R(0)))
    return s.result([base, step, post])


# ---------------------------------------------------------------------------
# Conditionals, parallel composition, communication
# ---------------------------------------------------------------------------


def if_rule(ctx: RuleContext) -> RuleResult:
    """Γ ⊢ [if (φ) {α}]ψ, Δ from Γ, φ ⊢ [α]ψ, Δ and Γ, ¬φ ⊢ ψ, Δ."""
    i = ctx.position.index
    if match_if(ctx.formula.program) is None:
        raise ctx.fail(f"{ctx.formula.program} is not a conditional")
    s = ctx.scratch()
    g = s.only(s.root, "choice", R(i))
    then, other = s.run(g, "andR", R(i))
    then = s.only(then, "composition", R(i))
    then = s.only(then, "test", R(i))
    then = s.only(then, "implR", R(i))
    other = s.only(other, "test", R(i))
    other = s.only(other, "implR", R(i))
    return s.result([then, other])


def ac_par_comp_right(ctx: RuleContext) -> RuleResult:
    """Split [α1 ∥ α2]{A, C1∧C2}(ψ1∧ψ2) into the components' contracts.

    Premises: ⊢ K (the compositionality condition with its variables
    universally closed and then instantiated);  Γ ⊢ [α1]{A1,C1}ψ1, Δ;
    Γ ⊢ [α2]{A2,C2}ψ2, Δ.
    """
    box: AcBox = ctx.formula
    i = ctx.position.index
    a1, a2 = ctx.formula_arg("a1"), ctx.formula_arg("a2")
    c1, c2 = split_conjunction(ctx, box.commitment, "c1", "c2", "commitment")
    psi1, psi2 = split_conjunction(ctx, box.post, "psi1", "psi2", "postcondition")
    given = {k: ctx.arg(k) for k in ("c1", "c2") if ctx.has(k)}
    given_post = {k: ctx.arg(k) for k in ("psi1", "psi2") if ctx.has(k)}

    s = ctx.scratch()
    g = s.only(s.root, "K", R(i), a1=a1, a2=a2, **given)
    condition, g = s.run(g, "andR", R(i))
    condition = s.keep_only(condition, R(i))
    while isinstance(s.sequent(condition).succedent[0], Forall):
        condition = s.only(condition, "forallR", R(0))

    g = s.only(g, "acBoxesDist", R(i), **given_post)
    first, second = s.run(g, "andR", R(i))
    leaves = [condition]
    for goal_id, a, c, psi, keep in ((first, a1, c1, psi1, "left"), (second, a2, c2, psi2, "right")):
        main, pa, pc, pp = s.run(goal_id, "acMono", R(i), a1=a, c1=c, psi1=psi)
        pa = s.only(pa, "andL", L(0))
        s.run(pa, "Id")
        s.run(pc, "Id")
        s.run(pp, "Id")
        leaves.append(s.only(main, "acDropComp", R(i), keep=keep))
    return s.result(leaves)


def ac_send_right(ctx: RuleContext) -> RuleResult:
    """Γ ⊢ [ch(h)!e]{A,C}ψ, Δ from the commitment now, and after the send.

    Premises: Γ ⊢ C, Δ;  Γ, A, h0 = h·<ch,e,mu> ⊢ C(h0), Δ;
    Γ, A, h0 = h·<ch,e,mu>, A(h0) ⊢ ψ(h0), Δ.
    """
    i = ctx.position.index
    s = ctx.scratch()
    g = s.only(s.root, "acCom", R(i))
    now, g = s.run(g, "andR", R(i))
    g = s.only(g, "implR", R(i))
    g = s.only(g, "send", R(i), fresh=ctx.name_arg("fresh", None))
    g = s.only(g, "forallR", R(i))
    g = s.only(g, "implR", R(i))
    after, post = s.run(g, "andR", R(i))
    post = s.only(post, "implR", R(i))

    leaves = []
    for goal_id in (now, after):
        if _is_true(s.sequent(goal_id).succedent[i]):
            s.run(goal_id, "trueR", R(i))
        else:
            leaves.append(_trim(s, goal_id))
    leaves.append(_trim(s, post))
    return s.result(leaves)


# ---------------------------------------------------------------------------
# Plain dynamic-logic rules
# ---------------------------------------------------------------------------


def mono(ctx: RuleContext) -> RuleResult:
    """Γ ⊢ [α]ψ2, Δ from Γ ⊢ [α]ψ1, Δ and ψ1 ⊢ ψ2."""
    i = ctx.position.index
    psi1 = ctx.formula_arg("psi1")
    s = ctx.scratch()
    g = s.only(s.root, "boxesDual", R(i))
    main, pa, pc, pp = s.run(g, "acMono", R(i), psi1=psi1)
    s.run(pa, "Id")
    s.run(pc, "Id")
    main = s.only(main, "boxesDual", R(i), dir="rl")
    return s.result([main, pp])


def generalization(ctx: RuleContext) -> RuleResult:
    """Γ ⊢ [α]ψ, Δ from ⊢ ψ."""
    s = ctx.scratch()
    g = s.only(s.root, "boxesDual", R(ctx.position.index))
    g = s.only(g, "acG", R(ctx.position.index))
    true, post = s.run(g, "andR", R(0))
    s.run(true, "trueR", R(0))
    return s.result([post])


# ---------------------------------------------------------------------------
# Symbolic execution
# ---------------------------------------------------------------------------


def _attempt(s: Scratch, goal_id: int, *names: str, i: int) -> List[int]:
    """Children of the first of `names` that applies at R(i)."""
    for name in names[:-1]:
        try:
            return s.run(goal_id, name, R(i))
        except RuleError:
            continue
    return s.run(goal_id, names[-1], R(i))


def _solve(s: Scratch, goal_id: int, i: int) -> int:
    """Solve an ODE box and assume its domain constraint at the endpoint t."""
    g = s.only(goal_id, "solution", R(i))
    g = s.only(g, "forallR", R(i))
    g = s.only(g, "implR", R(i))
    f = s.sequent(g).succedent[i]
    if isinstance(f, Implies) and isinstance(f.left, Forall):
        t = s.sequent(g).antecedent[-1].left
        g = s.only(g, "implR", R(i))
        g = s.only(g, "forallL", L(len(s.sequent(g).antecedent) - 1), term=t)
    return g


def _box_step(s: Scratch, g: int, i: int, f: Box) -> List[int]:
    match f.program:
        case Seq():
            return s.run(g, "composition", R(i))
        case Choice() as p if match_if(p) is not None:
            return s.run(g, "if", R(i))
        case Choice():
            return s.run(s.only(g, "choice", R(i)), "andR", R(i))
        case Assign():
            return _attempt(s, g, "assign", "assignEq", i=i)
        case RandomAssign():
            return s.run(g, "nondetAssign", R(i))
        case Test():
            return s.run(g, "test", R(i))
        case Ode():
            return [_solve(s, g, i)]
        case Send():
            return s.run(g, "send", R(i))
        case Receive():
            return s.run(g, "receive", R(i))
    return []


def _acbox_step(s: Scratch, g: int, i: int, f: AcBox) -> List[int]:
    match f.program:
        case Loop() | Par():
            return []
        case Seq() if not channels(f.program).is_empty():
            return s.run(g, "acComposition", R(i))
        case _ if channels(f.program).is_empty():
            return s.run(g, "acNoCom", R(i))
        case Choice():
            return s.run(g, "acChoice", R(i))
        case Send():
            return s.run(g, "acSendRight", R(i))
        case Receive():
            return s.run(g, "comDual", R(i))
    return []


def _settle(s: Scratch, goal_id: int) -> int:
    """Discharge the assignments left in front of antecedent formulas."""
    while True:
        try:
            goal_id = s.only(goal_id, "assign")
        except RuleError:
            return goal_id


def unfold(ctx: RuleContext) -> RuleResult:
    """Symbolically execute the loop- and parallel-free prefix of a (ac-)box.

    Works depth first on the principal formula with the plain and ac-box
    axioms, propositional rules and quantifier skolemization. Premises are
    the goals where execution stopped: first-order leaves that Id cannot
    close and boxes over loops or parallel compositions.
    """
    i = ctx.position.index
    s = ctx.scratch()
    pending, leaves = [s.root], []
    while pending:
        g = pending.pop()
        f = s.sequent(g).succedent[i]
        match f:
            case _ if f == TRUE:
                s.run(g, "trueR", R(i))
                children = []
            case Implies():
                children = [_trim(s, s.only(g, "implR", R(i)))]
            case And():
                children = s.run(g, "andR", R(i))
            case Forall():
                children = s.run(g, "forallR", R(i))
            case Box():
                children = _box_step(s, g, i, f)
            case AcBox():
                children = _acbox_step(s, g, i, f)
            case _:
                children = []
        if children:
            pending.extend(reversed(children))
        elif s.state.goal(g).status == OPEN:
            if is_first_order(f):
                try:
                    s.run(g, "Id", R(i))
                    continue
                except RuleError:
                    pass
            leaves.append(_settle(s, g))
    logger.debug("unfold stopped at %d goal(s)", len(leaves))
    return s.result(leaves)


def _recorders(program: Program) -> Set[str]:
    match program:
        case Send(_, h, _) | Receive(_, h, _):
            return {h.name}
        case Seq(left, right) | Choice(left, right) | Par(left, right):
            return _recorders(left) | _recorders(right)
        case Loop(body):
            return _recorders(body)
    return set()


def _default_recorder(ctx: RuleContext, program: Program) -> str:
    if ctx.state.decls.recorder:
        return ctx.state.decls.recorder
    found = _recorders(program)
    if len(found) != 1:
        raise ctx.fail("give recorder=: the program does not name exactly one recorder")
    return found.pop()


def communication_ghost(ctx: RuleContext) -> RuleResult:
    """Γ ⊢ [α(h)]ψ, Δ from Γ, h0 = h·<ch,v,mu> ⊢ [α(h0)]ψ, Δ with h0 fresh, h ∉ FV(ψ)."""
    box: Box = ctx.formula
    chan = ctx.name_arg("chan")
    known = ctx.state.decls.channels
    if known and chan not in known:
        raise ctx.fail(f"unknown channel {chan}")
    value = ctx.term_arg("value")
    if not is_program_term(value):
        raise ctx.fail(f"value {value} must be a real term without trace operators")
    h = Var(ctx.name_arg("recorder", None) or _default_recorder(ctx, box.program), Sort.TRACE)
    if free_vars(box.post).contains(h):
        raise ctx.fail(f"{h.name} occurs free in the postcondition")
    h0 = Var(ctx.fresh(f"{h.name}0", ctx.name_arg("fresh", None)), Sort.TRACE)
    ghost = Cmp("=", h0, Concat(h, Item(chan, value, MU)))
    renamed = Box(rename_recorder(box.program, h, h0), box.post)
    premise = ctx.sequent.replace(SUCCEDENT, ctx.position.index, renamed).add(ANTECEDENT, ghost)
    logger.debug("CG introduces %s", ghost)
    return ctx.result(premise)


def _acbox_over(program_type):
    return lambda f: isinstance(f, AcBox) and isinstance(f.program, program_type)


def _is_box(f: Formula) -> bool:
    return isinstance(f, Box)


def _is_modal(f: Formula) -> bool:
    return isinstance(f, (Box, AcBox))


def _is_if(f: Formula) -> bool:
    return isinstance(f, Box) and match_if(f.program) is not None


RULES: List[RuleSpec] = [
    rule("acInvariant", ac_invariant, shape=_acbox_over(Loop), derived=True,
         summary="loop invariant already assumed: premise I |- [a]{A,C}I"),
    rule("acLoop", ac_loop, shape=_acbox_over(Loop), keys=frozenset({"inv"}), positional=("inv",), derived=True,
         summary="loop rule with invariant J"),
    rule("if", if_rule, shape=_is_if, derived=True, summary="case split on a conditional"),
    rule("acParCompRight", ac_par_comp_right, shape=_acbox_over(Par),
         keys=frozenset({"a1", "a2", "c1", "c2", "psi1", "psi2"}), derived=True,
         summary="parallel composition by the components' contracts"),
    rule("acSendRight", ac_send_right, shape=_acbox_over(Send), keys=frozenset({"fresh"}), derived=True,
         summary="send under an ac-box"),
    rule("mono", mono, shape=_is_box, keys=frozenset({"psi1"}), positional=("psi1",), derived=True,
         summary="monotonicity of plain boxes"),
    rule("G", generalization, shape=_is_box, derived=True, summary="generalization: premise |- p"),
    rule("unfold", unfold, shape=_is_modal, derived=True,
         summary="symbolic execution up to loops and parallel compositions"),
    rule("CG", communication_ghost, shape=_is_box, keys=frozenset({"chan", "value", "recorder", "fresh"}),
         summary="communication ghost h0 = h.<ch,v,mu>"),
]
