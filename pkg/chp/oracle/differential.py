"""
Differential soundness testing of kernel rules against the oracle.

For every rule a seeded builder draws a goal inside the oracle fragment and
runs the kernel on it. Equivalence axioms yield an instance lhs ↔ rhs;
goal-transforming rules yield an instance "local premises ⇒ conclusion",
checked state by state. Premises that are validities by construction of
the instance (acMono's side premises, ⊢ K, loop invariance of a
state-independent invariant) are not sampled.

Seeded mutants rebuild an instance with a known-unsound variant of a rule;
the suite passes only if each mutant produces a discrepancy.

Usage:
    report = equivalent(lhs, rhs, states)
    result = check_rule("acCom", samples=200, seed=0)
    results = run_suite(RULES, samples=200, seed=0, workers=4)
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from tqdm import tqdm

from ..kernel.rules import apply
from ..kernel.sequent import ProofState, RuleApp, Sequent, init, init_sequent
from ..shared.checkpoint import Checkpoint
from ..shared.constants import DEFAULT_SAMPLES, REPORT_SCHEMA
from ..shared.errors import ChpError
from ..syntax.ast import (
    MU,
    TRUE,
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
    Len,
    Loop,
    Mul,
    Ode,
    Or,
    Par,
    Proj,
    RandomAssign,
    Receive,
    Send,
    Seq,
    Test,
    Var,
    forall_many,
    if_then,
    nat,
    real,
)
from ..syntax.subst import rename_free, substitute
from .generators import CHANNELS, G, H, X, Y, Z, Generator, sample_declarations
from .satisfy import Oracle, budget_for
from .state import Budget, State, Verdict

logger = logging.getLogger(__name__)

EQUIVALENCE = "equivalence"
INFERENCE = "inference"

STATES_PER_INSTANCE = 4
MAX_ATTEMPTS = 40


class Rejected(Exception):
    """The drawn instance does not fit the rule; draw again."""


@dataclass
class Instance:
    rule: str
    kind: str
    left: Formula
    right: Optional[Formula] = None
    premises: Tuple[Formula, ...] = ()
    strict_commit: bool = True

    def describe(self) -> str:
        if self.kind == EQUIVALENCE:
            return f"{self.left}  <->  {self.right}"
        return " ; ".join(str(p) for p in self.premises) + f"  ==>  {self.left}"


@dataclass
class Discrepancy:
    rule: str
    instance: str
    state: str
    left: str
    right: str

    def to_dict(self) -> Dict[str, str]:
        return {"rule": self.rule, "instance": self.instance, "state": self.state, "left": self.left, "right": self.right}


@dataclass
class EquivalenceReport:
    """Outcome of comparing two formulas (or premises and conclusion) over sample states."""

    samples: int = 0
    agreed: int = 0
    unknown: int = 0
    vacuous: int = 0
    discrepancies: List[Discrepancy] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.discrepancies

    def merge(self, other: "EquivalenceReport") -> None:
        self.samples += other.samples
        self.agreed += other.agreed
        self.unknown += other.unknown
        self.vacuous += other.vacuous
        self.discrepancies.extend(other.discrepancies)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "samples": self.samples,
            "agreed": self.agreed,
            "unknown": self.unknown,
            "vacuous": self.vacuous,
            "discrepancies": [d.to_dict() for d in self.discrepancies],
        }


def _oracle(formulas: Iterable[Formula], budget: Optional[Budget], strict_commit: bool) -> Oracle:
    return Oracle(budget_for(_conjoin(formulas), budget), strict_commit)


def _conjoin(formulas: Iterable[Formula]) -> Formula:
    result: Optional[Formula] = None
    for f in formulas:
        result = f if result is None else And(result, f)
    return TRUE if result is None else result


def equivalent(
    phi1: Formula,
    phi2: Formula,
    states: Iterable[State],
    budget: Optional[Budget] = None,
    strict_commit: bool = True,
    rule: str = "",
) -> EquivalenceReport:
    """Sample states where phi1 and phi2 get different definite verdicts."""
    oracle = _oracle((phi1, phi2), budget, strict_commit)
    report = EquivalenceReport()
    for state in states:
        report.samples += 1
        left, right = oracle.satisfies(state, phi1), oracle.satisfies(state, phi2)
        if not (left.definite and right.definite):
            report.unknown += 1
        elif left is right:
            report.agreed += 1
        else:
            report.discrepancies.append(Discrepancy(rule, f"{phi1}  <->  {phi2}", repr(state), left.value, right.value))
    return report


def entails(
    premises: Sequence[Formula],
    conclusion: Formula,
    states: Iterable[State],
    budget: Optional[Budget] = None,
    strict_commit: bool = True,
    rule: str = "",
) -> EquivalenceReport:
    """Sample states where every premise holds and the conclusion definitely fails."""
    oracle = _oracle((*premises, conclusion), budget, strict_commit)
    report = EquivalenceReport()
    for state in states:
        report.samples += 1
        verdict = Verdict.TRUE
        for premise in premises:
            verdict = verdict & oracle.satisfies(state, premise)
            if verdict is Verdict.FALSE:
                break
        if verdict is Verdict.FALSE:
            report.vacuous += 1
            continue
        result = oracle.satisfies(state, conclusion)
        if verdict is Verdict.TRUE and result is Verdict.FALSE:
            described = " ; ".join(str(p) for p in premises) + f"  ==>  {conclusion}"
            report.discrepancies.append(Discrepancy(rule, described, repr(state), verdict.value, result.value))
        elif verdict is Verdict.UNKNOWN or not result.definite:
            report.unknown += 1
        else:
            report.agreed += 1
    return report


# ---------------------------------------------------------------------------
# Instances produced by the kernel
# ---------------------------------------------------------------------------

DECLS = sample_declarations()


def _closure(sequent: Sequent, introduced: Sequence[str]) -> Formula:
    sorts = sequent.variables()
    bound = [Var(name, sorts[name]) for name in introduced if name in sorts]
    return forall_many(bound, sequent.as_formula())


def _run(state: ProofState, name: str, **args) -> Tuple[ProofState, List[Sequent], Tuple[str, ...]]:
    try:
        state = apply(state, RuleApp.of(name, "R0", **args))
    except ChpError as e:
        raise Rejected(str(e)) from None
    root = state.goal(state.root)
    return state, [state.goal(c).sequent for c in root.children], root.introduced


def rewrite_instance(rule: str, formula: Formula, **args) -> Instance:
    try:
        state = init(formula, DECLS)
    except ChpError as e:
        raise Rejected(str(e)) from None
    _, premises, introduced = _run(state, rule, **args)
    return Instance(rule, EQUIVALENCE, formula, premises[0].succedent[0])


def rule_instance(rule: str, sequent: Sequent, local: Optional[Sequence[int]] = None, **args) -> Instance:
    """Kernel premises at the `local` indices (all by default) must entail the conclusion."""
    state = init_sequent(sequent, DECLS)
    _, premises, introduced = _run(state, rule, **args)
    picked = range(len(premises)) if local is None else local
    closed = tuple(_closure(premises[i], introduced) for i in picked)
    return Instance(rule, INFERENCE, sequent.as_formula(), premises=closed)


def _goal(formula: Formula) -> Sequent:
    return Sequent((), (formula,))


def _post(gen: Generator) -> Formula:
    return gen.fol(1, quantifiers=False)


def _acbox(gen: Generator, program, post: Optional[Formula] = None) -> AcBox:
    return AcBox(program, gen.history_formula(), gen.history_formula(), post if post is not None else _post(gen))


def _small_program(gen: Generator, communication: bool = True, **kwargs):
    return gen.program(1, communication=communication, **kwargs)


def _send(gen: Generator, recorder: Var = H) -> Send:
    return Send(gen.choice(CHANNELS), recorder, gen.real_term(1))


def _tautology(gen: Generator) -> Formula:
    x = gen.choice((X, Y, Z))
    return gen.choice((
        TRUE,
        Cmp(">=", Mul(x, x), real(0)),
        Or(Cmp("<=", x, real(0)), Cmp(">", x, real(0))),
        Cmp(">=", Len(Proj(H, frozenset({gen.choice(CHANNELS)}))), nat(0)),
    ))


# -- axioms -------------------------------------------------------------------


def _assign(gen: Generator) -> Instance:
    x = gen.choice((X, Y, Z))
    post = gen.dl_formula(1) if gen.rng.random() < 0.3 else gen.fol(2)
    return rewrite_instance("assign", Box(Assign(x, gen.real_term(1)), post))


def _assign_eq(gen: Generator) -> Instance:
    x, *others = gen.rng.sample((X, Y, Z), 3)
    post = gen.dl_formula(1) if gen.rng.random() < 0.5 else gen.fol(2)
    return rewrite_instance("assignEq", Box(Assign(x, gen.real_term(1, others)), post))


def _nondet_assign(gen: Generator) -> Instance:
    return rewrite_instance("nondetAssign", Box(RandomAssign(gen.choice((X, Y, Z))), gen.fol(1)))


def _test(gen: Generator) -> Instance:
    return rewrite_instance("test", Box(Test(gen.comparison()), gen.fol(1)))


def _boxes_dual(gen: Generator) -> Instance:
    return rewrite_instance("boxesDual", Box(_small_program(gen), _post(gen)))


def _ac_composition(gen: Generator) -> Instance:
    return rewrite_instance("acComposition", _acbox(gen, Seq(_small_program(gen), _small_program(gen))))


def _ac_choice(gen: Generator) -> Instance:
    return rewrite_instance("acChoice", _acbox(gen, Choice(_small_program(gen), _small_program(gen))))


def _ac_iteration(gen: Generator) -> Instance:
    return rewrite_instance("acIteration", _acbox(gen, Loop(gen.atomic())))


def _ac_induction(gen: Generator) -> Instance:
    return rewrite_instance("acInduction", _acbox(gen, Loop(gen.atomic())))


def _ac_base(gen: Generator) -> Instance:
    return rewrite_instance("acBase", _acbox(gen, Test(TRUE)))


def _gtime(gen: Generator) -> Instance:
    return rewrite_instance("gtime", Box(gen.ode(), _post(gen)))


def _solution(gen: Generator) -> Instance:
    return rewrite_instance("solution", Box(gen.ode(), _post(gen)))


def _send_axiom(gen: Generator) -> Instance:
    post = And(gen.history_formula(), _post(gen))
    return rewrite_instance("send", Box(_send(gen), post))


def _ac_com(gen: Generator) -> Instance:
    return rewrite_instance("acCom", _acbox(gen, _send(gen)))


def _com_dual(gen: Generator) -> Instance:
    receive = Receive(gen.choice(CHANNELS), H, gen.choice((X, Y, Z)))
    return rewrite_instance("comDual", _acbox(gen, receive))


def _ac_no_com(gen: Generator) -> Instance:
    return rewrite_instance("acNoCom", _acbox(gen, _small_program(gen, communication=False)))


def _ac_weak(gen: Generator) -> Instance:
    return rewrite_instance("acWeak", _acbox(gen, _small_program(gen)))


def _ac_boxes_dist(gen: Generator) -> Instance:
    program = _small_program(gen)
    box = AcBox(program, gen.history_formula(), And(gen.history_formula(), gen.history_formula()),
                And(_post(gen), _post(gen)))
    return rewrite_instance("acBoxesDist", box)


# -- rules --------------------------------------------------------------------


def _k(gen: Generator) -> Instance:
    box = AcBox(_small_program(gen), gen.history_formula(), And(gen.history_formula(), gen.history_formula()), _post(gen))
    return rule_instance("K", _goal(box), a1=gen.history_formula(), a2=gen.history_formula())


def _components(gen: Generator) -> Tuple[Any, Any]:
    left, right = gen.parallel_components(2, depth=1)
    return left, right


def _ac_drop_comp(gen: Generator) -> Instance:
    left, right = _components(gen)
    post = gen.fol(1, variables=(X,), quantifiers=False)
    box = AcBox(Par(left, right), gen.history_formula(), gen.history_formula(), post)
    return rule_instance("acDropComp", _goal(box), keep="left")


def _ac_mono(gen: Generator) -> Instance:
    box = _acbox(gen, _small_program(gen))
    a1 = gen.choice((TRUE, box.assumption, Or(box.assumption, gen.history_formula())))
    c1 = gen.choice((box.commitment, And(box.commitment, gen.history_formula())))
    psi1 = gen.choice((box.post, And(box.post, _post(gen))))
    return rule_instance("acMono", _goal(box), local=(0,), a1=a1, c1=c1, psi1=psi1)


def _ac_g(gen: Generator) -> Instance:
    box = AcBox(_small_program(gen), gen.history_formula(), _tautology(gen), _tautology(gen))
    return rule_instance("acG", _goal(box), local=())


# -- derived rules ------------------------------------------------------------


def _if(gen: Generator) -> Instance:
    box = Box(if_then(gen.comparison(), _small_program(gen)), _post(gen))
    return rule_instance("if", _goal(box))


def _cg(gen: Generator) -> Instance:
    box = Box(_small_program(gen), _post(gen))
    return rule_instance("CG", _goal(box), chan=gen.choice(CHANNELS), value=gen.real_term(1), recorder="h")


def _loop_parts(gen: Generator):
    body = gen.program(1, communication=True, variables=(X,), loops=False)
    invariant = gen.fol(1, variables=(Y, Z), quantifiers=False)
    return Loop(body), invariant


def _ac_loop(gen: Generator) -> Instance:
    loop, inv = _loop_parts(gen)
    post = Or(inv, _post(gen))
    box = AcBox(loop, gen.history_formula(), TRUE, post)
    return rule_instance("acLoop", _goal(box), local=(0,), inv=inv)


def _ac_invariant(gen: Generator) -> Instance:
    loop, inv = _loop_parts(gen)
    box = AcBox(loop, gen.history_formula(), TRUE, inv)
    return rule_instance("acInvariant", Sequent((inv,), (box,)), local=())


def _ac_par_comp_right(gen: Generator) -> Instance:
    left, right = _components(gen)
    c1, c2 = gen.history_formula(), gen.history_formula()
    a1, a2 = gen.choice((TRUE, c2)), gen.choice((TRUE, c1))
    psi1 = gen.fol(1, variables=(X,), quantifiers=False)
    psi2 = gen.fol(1, variables=(Y,), quantifiers=False)
    box = AcBox(Par(left, right), gen.history_formula(), And(c1, c2), And(psi1, psi2))
    return rule_instance("acParCompRight", _goal(box), local=(1, 2), a1=a1, a2=a2)


def _ac_send_right(gen: Generator) -> Instance:
    return rule_instance("acSendRight", _goal(_acbox(gen, _send(gen))))


def _unfold(gen: Generator) -> Instance:
    program = gen.program(2, communication=True, loops=False)
    if gen.rng.random() < 0.5:
        return rule_instance("unfold", _goal(Box(program, _post(gen))))
    return rule_instance("unfold", _goal(_acbox(gen, program)))


BUILDERS: Dict[str, Callable[[Generator], Instance]] = {
    "assign": _assign,
    "assignEq": _assign_eq,
    "nondetAssign": _nondet_assign,
    "test": _test,
    "boxesDual": _boxes_dual,
    "acComposition": _ac_composition,
    "acChoice": _ac_choice,
    "acIteration": _ac_iteration,
    "acInduction": _ac_induction,
    "acBase": _ac_base,
    "gtime": _gtime,
    "solution": _solution,
    "send": _send_axiom,
    "acCom": _ac_com,
    "comDual": _com_dual,
    "acNoCom": _ac_no_com,
    "acWeak": _ac_weak,
    "acBoxesDist": _ac_boxes_dist,
    "K": _k,
    "acDropComp": _ac_drop_comp,
    "acMono": _ac_mono,
    "acG": _ac_g,
    "CG": _cg,
    "acLoop": _ac_loop,
    "if": _if,
    "acParCompRight": _ac_par_comp_right,
    "acSendRight": _ac_send_right,
    "acInvariant": _ac_invariant,
    "unfold": _unfold,
}

RULES: Tuple[str, ...] = tuple(BUILDERS)


# ---------------------------------------------------------------------------
# Seeded mutants
# ---------------------------------------------------------------------------


def _non_strict_commit(gen: Generator) -> Instance:
    instance = _ac_com(gen)
    instance.strict_commit = False
    return instance


def _send_without_freshness(gen: Generator) -> Instance:
    send = _send(gen)
    post = And(gen.history_formula(), Cmp(gen.choice(("=", "<=")), Len(G), Len(H)))
    extended = Concat(H, Item(send.chan, send.term, MU))
    return Instance("send", EQUIVALENCE, Box(send, post), Forall(G, Implies(Cmp("=", G, extended), rename_free(post, H, G))))


def _drop_comp_without_condition3(gen: Generator) -> Instance:
    left = gen.program(1, True, (X,), H, loops=False, channels=("c",))
    right = Send("d", H, gen.real_term(1, (Y,)))
    commitment = Cmp(gen.choice(("=", "<=")), Len(Proj(H, frozenset({"d"}))), nat(gen.rng.randrange(2)))
    premise = AcBox(left, TRUE, commitment, _post(gen))
    conclusion = AcBox(Par(left, right), TRUE, commitment, premise.post)
    return Instance("acDropComp", INFERENCE, conclusion, premises=(premise,))


def _ac_com_without_leading_commitment(gen: Generator) -> Instance:
    box = _acbox(gen, _send(gen))
    rhs = Implies(box.assumption, Box(box.program, And(box.commitment, Implies(box.assumption, box.post))))
    return Instance("acCom", EQUIVALENCE, box, rhs)


def _assign_first_occurrence(gen: Generator) -> Instance:
    x = gen.choice((X, Y, Z))
    value = gen.real_term(1)
    left, right = Add(x, gen.constant()), Mul(x, gen.constant())
    op = gen.choice(("<", "<=", "="))
    rhs = Cmp(op, substitute(left, {x: value}), right)
    return Instance("assign", EQUIVALENCE, Box(Assign(x, value), Cmp(op, left, right)), rhs)


def _ac_no_com_ignoring_channels(gen: Generator) -> Instance:
    box = _acbox(gen, Seq(_send(gen), _small_program(gen)))
    return Instance("acNoCom", EQUIVALENCE, box, And(box.commitment, Implies(box.assumption, Box(box.program, box.post))))


def _ac_weak_without_guard(gen: Generator) -> Instance:
    box = _acbox(gen, _small_program(gen))
    rhs = And(box.commitment, AcBox(box.program, box.assumption, box.commitment, And(box.commitment, box.post)))
    return Instance("acWeak", EQUIVALENCE, box, rhs)


def _ac_choice_disjunction(gen: Generator) -> Instance:
    left, right = _small_program(gen), _small_program(gen)
    box = _acbox(gen, Choice(left, right))
    rhs = Or(AcBox(left, box.assumption, box.commitment, box.post), AcBox(right, box.assumption, box.commitment, box.post))
    return Instance("acChoice", EQUIVALENCE, box, rhs)


def _com_dual_zero(gen: Generator) -> Instance:
    x = gen.choice((X, Y, Z))
    box = _acbox(gen, Receive(gen.choice(CHANNELS), H, x))
    rhs = Box(Assign(x, real(0)), AcBox(Send(box.program.chan, H, x), box.assumption, box.commitment, box.post))
    return Instance("comDual", EQUIVALENCE, box, rhs)


def _solution_ignoring_constraint(gen: Generator) -> Instance:
    ode = gen.ode()
    x = ode.variables[0]
    constrained = Ode(ode.bindings, Cmp("<=", x, real(gen.choice((0, 1)))))
    post = Cmp(gen.choice(("<=", "<")), x, real(gen.choice((0, 1, 2))))
    free = rewrite_instance("solution", Box(Ode(ode.bindings, TRUE), post))
    return Instance("solution", EQUIVALENCE, Box(constrained, post), free.right)


MUTANTS: Dict[str, Callable[[Generator], Instance]] = {
    "non-strict-commit": _non_strict_commit,
    "send-without-freshness": _send_without_freshness,
    "acDropComp-without-condition-3": _drop_comp_without_condition3,
    "acCom-without-leading-commitment": _ac_com_without_leading_commitment,
    "assign-first-occurrence": _assign_first_occurrence,
    "acNoCom-ignoring-channels": _ac_no_com_ignoring_channels,
    "acWeak-without-assumption-guard": _ac_weak_without_guard,
    "acChoice-disjunction": _ac_choice_disjunction,
    "comDual-zero": _com_dual_zero,
    "solution-ignoring-constraint": _solution_ignoring_constraint,
}


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def draw(builder: Callable[[Generator], Instance], gen: Generator) -> Instance:
    last = ""
    for _ in range(MAX_ATTEMPTS):
        try:
            return builder(gen)
        except Rejected as e:
            last = str(e)
    raise Rejected(f"no applicable instance in {MAX_ATTEMPTS} draws ({last})")


def check_instance(instance: Instance, states: Sequence[State], budget: Optional[Budget] = None) -> EquivalenceReport:
    if instance.kind == EQUIVALENCE:
        return equivalent(instance.left, instance.right, states, budget, instance.strict_commit, instance.rule)
    return entails(instance.premises, instance.left, states, budget, instance.strict_commit, instance.rule)


def _rng(seed: int, name: str) -> random.Random:
    return random.Random(f"{seed}:{name}")


def check_rule(
    name: str,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    budget: Optional[Budget] = None,
    mutant: bool = False,
    stop_on_discrepancy: bool = False,
) -> EquivalenceReport:
    """Sample `samples` instances of a rule (or mutant) and compare both sides."""
    builder = (MUTANTS if mutant else BUILDERS)[name]
    gen = Generator(_rng(seed, name))
    report = EquivalenceReport()
    for _ in range(samples):
        instance = draw(builder, gen)
        states = gen.states(STATES_PER_INSTANCE)
        try:
            report.merge(check_instance(instance, states, budget))
        except ChpError as e:
            logger.debug(f"{name}: oracle could not evaluate {instance.describe()}: {e}")
            report.samples += len(states)
            report.unknown += len(states)
        if stop_on_discrepancy and report.discrepancies:
            break
    return report


def process_rule(name: str, samples: int, seed: int, budget: Optional[Budget], mutant: bool) -> Dict[str, Any]:
    """Worker: never raises, returns a result dict."""
    try:
        report = check_rule(name, samples, seed, budget, mutant, stop_on_discrepancy=mutant)
    except Exception as e:
        return {"key": name, "mutant": mutant, "success": False, "error": f"{type(e).__name__}: {e}"}
    passed = bool(report.discrepancies) if mutant else report.ok
    return {
        "key": name,
        "mutant": mutant,
        "success": passed,
        "error": "" if passed else ("mutant not detected" if mutant else f"{len(report.discrepancies)} discrepancies"),
        "report": report.to_dict(),
    }


def run_suite(
    rules: Sequence[str] = RULES,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    budget: Optional[Budget] = None,
    workers: int = 4,
    mutants: Sequence[str] = (),
    checkpoint: Optional[Checkpoint] = None,
    progress: bool = True,
) -> List[Dict[str, Any]]:
    """Check rules and mutants in parallel; results sorted by item key."""
    items = [(name, False) for name in rules] + [(name, True) for name in mutants]
    results: List[Dict[str, Any]] = []
    pending = []
    for name, mutant in items:
        key = f"mutant:{name}" if mutant else name
        if checkpoint is not None and key in checkpoint.completed_items:
            checkpoint.skip(key)
            results.append(checkpoint.results.get(key, {"key": name, "mutant": mutant, "success": True}))
            continue
        pending.append((name, mutant, key))
    if checkpoint is not None:
        checkpoint.set_total(len(items))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {
            executor.submit(process_rule, name, samples, seed, budget, mutant): key
            for name, mutant, key in pending
        }
        for future in tqdm(as_completed(futures), total=len(futures), desc="oracle-test", disable=not progress):
            key = futures[future]
            result = future.result()
            results.append(result)
            if checkpoint is None:
                continue
            if result["success"]:
                checkpoint.complete(key, result)
            else:
                checkpoint.fail(key, result["error"])

    return sorted(results, key=lambda r: (r["mutant"], r["key"]))


def suite_report(results: Sequence[Dict[str, Any]], samples: int, seed: int) -> Dict[str, Any]:
    return {
        "schema": REPORT_SCHEMA,
        "seed": seed,
        "samples": samples,
        "success": all(r["success"] for r in results),
        "results": list(results),
    }
