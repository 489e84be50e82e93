from __future__ import annotations

import random
from fractions import Fraction

import pytest

from chp.oracle.evaluate import eval_term
from chp.oracle.generators import Generator
from chp.oracle.reference import is_dl_formula, reference_satisfies
from chp.oracle.runs import check_prefix_total, runs
from chp.oracle.satisfy import satisfies, valid_on
from chp.oracle.state import Budget, Event, RecEvent, State, Verdict
from chp.shared.errors import UnsupportedError
from chp.syntax import parse_problem
from chp.syntax.ast import MU, Sort, Sub, Val, Var, nat

X, Y = Var("x", Sort.REAL), Var("y", Sort.REAL)
H = Var("h", Sort.TRACE)


def sent(value, stamp=0, chan="c") -> Event:
    return Event(chan, Fraction(value), Fraction(stamp))


class TestState:
    def test_default_values_are_not_stored(self):
        assert State({X: 0, H: ()}) == State()
        assert hash(State({X: 0})) == hash(State())

    def test_set_returns_a_new_state(self):
        v = State()
        w = v.set(X, 2)
        assert v.get(X) == 0
        assert w.get(X) == Fraction(2)

    def test_concat_appends_to_recorders(self):
        v = State({H: (sent(1),)})
        w = v.concat((RecEvent("h", "c", Fraction(2), Fraction(1)),))
        assert w.get(H) == (sent(1), sent(2, 1))

    def test_verdict_algebra(self):
        assert Verdict.FALSE & Verdict.UNKNOWN is Verdict.FALSE
        assert Verdict.TRUE | Verdict.UNKNOWN is Verdict.TRUE
        assert ~Verdict.UNKNOWN is Verdict.UNKNOWN
        assert Verdict.FALSE.implies(Verdict.UNKNOWN) is Verdict.TRUE

    def test_trace_candidates_are_chronological(self):
        budget = Budget(channels=("c",), trace_length=2, trace_values=(Fraction(0), Fraction(1)),
                        trace_stamps=(Fraction(0),))
        candidates = budget.trace_candidates()
        assert () in candidates
        assert len(candidates) == 1 + 2 + 4

    def test_trace_candidates_use_the_value_and_duration_budget(self):
        candidates = Budget(channels=("c",)).trace_candidates()
        # 6 values x 4 stamps, then 36 value pairs x 10 ordered stamp pairs
        assert len(candidates) == 1 + 24 + 360
        assert all(a.stamp <= b.stamp for trace in candidates for a, b in zip(trace, trace[1:]))
        assert (sent(Fraction(1, 2), 2),) in candidates


class TestEvaluate:
    def test_out_of_range_access_defaults(self):
        assert eval_term(Val(H, nat(3)), State()) == 0

    def test_int_subtraction_is_truncated(self):
        assert eval_term(Sub(nat(1), nat(3)), State()) == 0

    def test_last_value(self, t):
        v = State({H: (sent(1), sent(3, 1, "d"), sent(7, 2))})
        assert eval_term(t("val(h|{c})"), v) == 7
        assert eval_term(t("chan(h[1])"), v) == "d"


class TestRuns:
    def test_assignment(self, p):
        result = runs(p("x := 1"), State())
        assert len(result) == 2
        (done,) = result.finished()
        assert done.final.get(X) == 1

    def test_send_has_an_unfinished_observation(self, p):
        result = runs(p("c(h)!y"), State({Y: 2, MU: 1}))
        event = RecEvent("h", "c", Fraction(2), Fraction(1))
        assert result.behaviours() == frozenset({((), None), ((event,), None), ((event,), State({Y: 2, MU: 1}))})

    def test_runs_are_prefix_closed_and_total(self, p):
        program = p("{x := 1; c(h)!x} ++ {d(h)?y}; c(h)!y")
        start = State()
        assert check_prefix_total(runs(program, start), [start])

    def test_parallel_synchronizes_joint_channels(self, corpus):
        from chp.syntax import parse_program_file

        _, program = parse_program_file((corpus / "prog.chp").read_text())
        finished = runs(program, State()).finished()
        assert len(finished) == 1
        (done,) = finished
        assert done.final.get(Y) == 2
        assert [e.value for e in done.trace] == [1]

    def test_ode_respects_its_domain(self, p):
        finals = {c.final.get(X) for c in runs(p("{x' = 1 & x <= 1}"), State()).finished()}
        assert finals == {Fraction(0), Fraction(1, 2), Fraction(1)}

    def test_ode_advances_global_time(self, p):
        finals = runs(p("{x' = 2}"), State()).finished()
        assert all(c.final.get(MU) * 2 == c.final.get(X) for c in finals)

    def test_nonconstant_ode_is_unsupported(self, p):
        with pytest.raises(UnsupportedError):
            runs(p("{x' = x}"), State())

    def test_unbounded_loop_is_truncated(self, p):
        assert runs(p("{x := x + 1}*"), State(), Budget(loop_depth=2)).truncated
        assert not runs(p("{x := 1}*"), State()).truncated


class TestSatisfaction:
    def test_example_formula(self, corpus):
        formula = parse_problem((corpus / "example1.dlchp").read_text()).formula
        assert satisfies(State(), formula) is Verdict.TRUE
        assert satisfies(State({H: (sent(2), sent(-1, 1))}), formula) is Verdict.FALSE

    @pytest.mark.parametrize("text", [
        "[x := 1] x > 0",
        "[{x' = 1 & x <= 1}] x <= 1",
        "forall u:R u*u >= 0",
        "exists u:R u > 1",
        "[c(h)!x] len(h) > 0",
        "[c(h)!x]{true, len(h) <= 1} true",
    ])
    def test_valid_formulas(self, f, text):
        assert satisfies(State(), f(text)) is Verdict.TRUE

    @pytest.mark.parametrize("text", [
        "forall k:T (len(k|{c}) > 0 -> val(k|{c}) != 1/2)",
        "forall k:T (len(k|{c}) > 0 -> time(k|{c}) <= 1)",
        "forall k:T (len(k|{c}) > 0 -> val(k|{c}) >= -1)",
    ])
    def test_trace_quantifiers_find_counterexamples(self, f, text):
        assert satisfies(State(), f(text)) is Verdict.FALSE

    def test_truncated_box_is_unknown(self, f):
        assert satisfies(State(), f("[{x := x + 1}*] x >= 0"), Budget(loop_depth=2)) is Verdict.UNKNOWN

    def test_falsified_loop_is_definite(self, f):
        assert satisfies(State(), f("[{x := x + 1}*] x <= 1"), Budget(loop_depth=2)) is Verdict.FALSE

    def test_commitment_relies_on_earlier_assumptions_only(self, corpus):
        formula = parse_problem((corpus / "remark1.dlchp").read_text()).formula
        assert satisfies(State({Y: 0}), formula) is Verdict.FALSE
        assert satisfies(State({Y: 1}), formula) is Verdict.TRUE

    def test_non_strict_commitment_reading(self, corpus):
        formula = parse_problem((corpus / "remark1.dlchp").read_text()).formula
        assert satisfies(State({Y: 0}), formula, strict_commit=False) is Verdict.TRUE

    def test_postcondition_needs_the_whole_assumption(self, f):
        formula = f("[c(h)!x]{len(h|{c}) > 0 -> val(h|{c}) > 0, true} false")
        assert satisfies(State({X: 0}), formula) is Verdict.TRUE
        assert satisfies(State({X: 1}), formula) is Verdict.FALSE

    def test_valid_on_reports_a_counterexample(self, f):
        verdict, witness = valid_on([State({X: 1}), State(), State({X: 2})], f("x > 0"))
        assert verdict is Verdict.FALSE
        assert witness == State()
        assert valid_on([State({X: 1})], f("x > 0")) == (Verdict.TRUE, None)


class TestReference:
    @pytest.mark.parametrize("text", [
        "[x := 1; {x' = 1 & x <= 2}] x <= 2",
        "[x := y ++ x := 2*y] x >= y",
        "[{x := x + 1}*] x >= 0",
        "forall u:R [x := u] x*x >= 0",
    ])
    def test_agrees_with_the_trace_semantics(self, f, text):
        formula = f(text)
        budget = Budget(loop_depth=2)
        for v in Generator(random.Random(3)).states(4, with_time=False):
            assert reference_satisfies(v, formula, budget) == satisfies(v, formula, budget)

    def test_communication_is_outside_the_fragment(self, f):
        formula = f("[c(h)!x] true")
        assert not is_dl_formula(formula)
        with pytest.raises(UnsupportedError):
            reference_satisfies(State(), formula)
