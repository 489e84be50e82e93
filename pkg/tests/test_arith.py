from __future__ import annotations

import operator
import random

import pytest

from chp.arith import CLOSED, INVALID, OPEN, VALID, abstract_traces, decide_linear, decide_presburger, decide_real, dispatch
from chp.arith.abstraction import abstractable
from chp.arith.dispatch import inline_definitions, relativize
from chp.kernel import Sequent
from chp.oracle.generators import X, Y, Generator
from chp.oracle.satisfy import satisfies
from chp.oracle.state import State, Verdict
from chp.shared.errors import SolverError, UnsupportedError
from chp.syntax.ast import (
    TRUE,
    Add,
    And,
    Cmp,
    Const,
    Exists,
    Forall,
    Implies,
    Mul,
    Not,
    Or,
    Sort,
    Sub,
    Var,
    nat,
    real,
)


COMPARE = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "=": operator.eq,
    "!=": operator.ne,
}
BOUNDED = range(-4, 5)


def sequent(f, ante, succ) -> Sequent:
    return Sequent(tuple(f(a) for a in ante), tuple(f(s) for s in succ))


def ground(term, env):
    match term:
        case Var():
            return env[term.name]
        case Const():
            return term.value
        case Add(l, r):
            return ground(l, env) + ground(r, env)
        case Sub(l, r):
            return ground(l, env) - ground(r, env)
        case Mul(l, r):
            return ground(l, env) * ground(r, env)
    raise TypeError(term)


def brute_force(formula, env=None, domain=BOUNDED) -> bool:
    """Truth over plain integer arithmetic, quantifiers ranging over `domain`."""
    env = env or {}
    match formula:
        case Cmp(op, l, r):
            return COMPARE[op](ground(l, env), ground(r, env))
        case Not(a):
            return not brute_force(a, env, domain)
        case And(l, r):
            return brute_force(l, env, domain) and brute_force(r, env, domain)
        case Or(l, r):
            return brute_force(l, env, domain) or brute_force(r, env, domain)
        case Implies(l, r):
            return not brute_force(l, env, domain) or brute_force(r, env, domain)
        case Forall(var, body):
            return all(brute_force(body, {**env, var.name: v}, domain) for v in domain)
        case Exists(var, body):
            return any(brute_force(body, {**env, var.name: v}, domain) for v in domain)
    raise TypeError(formula)


class TestPresburger:
    def test_valid(self, f):
        assert decide_presburger(f("n + 1 > n")).valid

    def test_counterexample(self, f):
        result = decide_presburger(f("n >= 1"))
        assert result.invalid
        assert result.witness == {"n": 0}

    def test_parity(self, f):
        assert decide_presburger(f("forall k:Z k + k != 1")).valid

    def test_reals_are_rejected(self, f):
        with pytest.raises(UnsupportedError):
            decide_presburger(f("x > 0"))

    def test_relativize_restricts_integer_quantifiers(self, f):
        assert relativize(f("exists k:Z k = n")) == f("exists k:Z (k >= 0 & k = n)")

    def test_gap_between_strict_bounds(self, f):
        for text in ("forall n:Z (n < 1 | n > 1)", "n <= 0 | n >= 2"):
            result = decide_presburger(f(text))
            assert result.invalid, text
            assert result.witness == {"n": 1}

    def test_gap_leaves_goal_open(self, f):
        result = dispatch(sequent(f, [], ["n <= 0 | n >= 2"]), which="PA")
        assert result.status == OPEN
        assert result.attempts[-1].invalid

    def test_halving_has_odd_counterexample(self, f):
        result = decide_presburger(f("forall n:Z exists k:Z k + k = n"))
        assert result.invalid
        assert result.witness["n"] % 2 == 1

    def test_agrees_with_enumeration(self):
        gen = Generator(random.Random(7))
        for _ in range(100):
            sentence = gen.presburger_sentence(quantifiers=2, coefficients=(1, 2))
            expected = VALID if brute_force(sentence) else INVALID
            assert decide_presburger(sentence).status == expected, sentence

    @pytest.mark.slow
    def test_agrees_with_enumeration_three_quantifiers(self):
        gen = Generator(random.Random(11))
        for _ in range(500):
            sentence = gen.presburger_sentence(quantifiers=3, coefficients=(1,))
            expected = VALID if brute_force(sentence) else INVALID
            assert decide_presburger(sentence).status == expected, sentence


class TestLinearReal:
    def test_valid(self, f):
        assert decide_linear(f("x > y -> x + 1 > y")).valid

    def test_counterexample_falsifies(self, f):
        result = decide_linear(f("x > y -> x > 2*y"))
        assert result.invalid
        x, y = result.witness["x"], result.witness["y"]
        assert x > y and not x > 2 * y

    def test_alternating_quantifiers(self, f):
        assert decide_linear(f("forall x:R exists y:R y > x")).valid

    def test_agrees_with_evaluation(self):
        gen = Generator(random.Random(3))
        for _ in range(300):
            formula = gen.fol(2, (X, Y), quantifiers=False, linear=True)
            result = decide_linear(formula)
            falsified = [s for s in gen.states(10) if satisfies(s, formula) is Verdict.FALSE]
            if falsified:
                assert result.invalid, (formula, falsified[0])
            if result.invalid:
                witness = State({X: result.witness.get("x", 0), Y: result.witness.get("y", 0)})
                assert satisfies(witness, formula) is Verdict.FALSE, formula
            else:
                assert result.valid, formula

    @pytest.mark.smt
    def test_agrees_with_the_solver(self, smt):
        gen = Generator(random.Random(5))
        for _ in range(100):
            formula = gen.fol(3, (X, Y), quantifiers=True, linear=True)
            ours, theirs = decide_linear(formula), smt.check_valid(formula)
            if theirs.status in (VALID, INVALID) and ours.status in (VALID, INVALID):
                assert ours.status == theirs.status, formula

    def test_nonlinear_needs_a_solver(self, f):
        result = decide_real(f("x*x >= 0"))
        assert result.status == "unknown"

    @pytest.mark.smt
    def test_nonlinear_with_a_solver(self, f, smt):
        assert decide_real(f("x*x >= 0"), smt).valid
        result = decide_real(f("x*x > 0"), smt)
        assert result.invalid
        assert result.witness["x"] == 0


class TestAbstraction:
    def test_accessors_become_variables(self, f):
        formula, mapping = abstract_traces(f("val(h|{c}) > 0 -> val(h|{c}) >= 0"))
        a = Var("a", Sort.REAL)
        assert len(mapping) == 1
        assert formula == Implies(Cmp(">", a, real(0)), Cmp(">=", a, real(0)))

    def test_lengths_are_natural(self, f):
        formula, mapping = abstract_traces(f("len(h) > 0"))
        assert len(mapping.side_facts) == 1
        assert isinstance(formula, Implies)
        assert formula.left.op == ">=" and formula.left.right == nat(0)

    def test_equal_normal_forms(self, f):
        formula, _ = abstract_traces(f("h prefixof h + eps"))
        assert formula == TRUE

    def test_trace_quantifiers_are_not_abstractable(self, f):
        assert not abstractable(f("forall k:T len(k) >= 0"))
        assert not abstractable(f("[x := 1] true"))
        assert abstractable(f("len(h) >= 0"))


class TestDispatch:
    def test_real_arithmetic(self, f):
        result = dispatch(sequent(f, ["x > 0"], ["x + 1 > 0"]))
        assert result.status == CLOSED
        assert result.by == "real"

    def test_trace_lengths_by_presburger(self, f):
        result = dispatch(sequent(f, ["len(h|{c}) > 0"], ["len(h|{c} + <c, 1, mu>) > 1"]))
        assert result.closed
        assert result.by == "PA"

    def test_trace_method_is_reported(self, f):
        result = dispatch(sequent(f, ["len(h|{c}) > 0"], ["len(h|{c} + <c, 1, mu>) > 1"]), which="TA")
        assert result.by == "TA"

    def test_integers_are_naturals(self, f):
        assert dispatch(sequent(f, [], ["n >= 0"])).closed

    def test_truncated_subtraction(self, f):
        assert dispatch(sequent(f, [], ["len(h) - 1 <= len(h)"])).closed

    def test_modal_succedent_stays_open(self, f):
        result = dispatch(sequent(f, [], ["[x := 1] x > 0"]))
        assert result.status == OPEN
        assert "modalities" in result.reason

    def test_modal_antecedent_is_weakened_away(self, f):
        assert dispatch(sequent(f, ["[x := 1] x > 0", "y > 0"], ["y >= 0"])).closed

    def test_invalid_goal_stays_open(self, f):
        result = dispatch(sequent(f, [], ["x > 0"]))
        assert result.status == OPEN
        assert result.attempts and result.attempts[-1].invalid

    def test_method_filter(self, f):
        result = dispatch(sequent(f, ["x > 0"], ["x + 1 > 0"]), which="PA")
        assert result.status == OPEN
        assert result.reason == "no applicable decision procedure"

    def test_trace_definitions_are_inlined(self, f):
        ante, succ = inline_definitions([f("g = h + <c, 1, mu>")], [f("val(g|{c}) = 1")])
        assert ante == []
        assert succ == [f("val((h + <c, 1, mu>)|{c}) = 1")]
        assert dispatch(sequent(f, ["g = h + <c, 1, mu>"], ["val(g|{c}) = 1"])).closed

    @pytest.mark.smt
    def test_nonlinear_goal(self, f, smt):
        result = dispatch(sequent(f, ["x > 1"], ["x*x > 1"]), smt=smt)
        assert result.closed

    def test_report_serializes(self, f):
        data = dispatch(sequent(f, [], ["x > 0"])).to_dict()
        assert data["status"] == OPEN
        assert data["attempts"][0]["method"] == "real"

    def test_solver_failure_leaves_goal_open(self, f):
        class FailingSolver:
            available = True
            path = "/bin/false"

            def check_valid(self, formula):
                raise SolverError("solver exited with status 1")

        result = dispatch(sequent(f, ["n >= 1", "x > 0"], ["x + 1 > 0 | n >= 2"]), smt=FailingSolver())
        assert result.status == OPEN
        assert "exited with status 1" in result.reason
