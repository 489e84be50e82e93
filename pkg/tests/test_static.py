from __future__ import annotations

import pytest

from chp.static import (
    ChanSet,
    VarSet,
    bound_vars,
    channels,
    check_wellformed,
    free_vars,
    interference,
    must_bound_vars,
    noninterferes,
    programs_in,
    summary,
)
from chp.syntax.ast import MU, TRUE, Assign, Sort, Var, real

X, Y, Z = (Var(n, Sort.REAL) for n in "xyz")
H = Var("h", Sort.TRACE)


class TestVariables:
    def test_assignment_binds_its_target(self, p):
        assert bound_vars(p("x := y + 1")) == VarSet.of(X)
        assert free_vars(p("x := y + 1")) == VarSet.of(Y)

    def test_ode_binds_global_time(self, p):
        bound = bound_vars(p("{x' = 1}"))
        assert MU in bound
        assert X in bound

    def test_send_reads_recorder_and_time(self, p):
        assert free_vars(p("c(h)!x")) == VarSet.of(H, MU, X)
        assert bound_vars(p("c(h)!x")) == VarSet.of(H)

    def test_receive_binds_the_target(self, p):
        assert bound_vars(p("c(h)?y")) == VarSet.of(H, Y)

    def test_must_bound_of_choice_is_the_intersection(self, p):
        program = p("{x := 1; y := 2} ++ {x := 3}")
        assert must_bound_vars(program) == VarSet.of(X)
        assert bound_vars(program) == VarSet.of(X, Y)

    def test_loop_must_bind_nothing(self, p):
        assert must_bound_vars(p("{x := 1}*")).is_empty()

    def test_sequence_hides_must_bound_reads(self, p):
        assert free_vars(p("x := 1; y := x")) == VarSet()

    def test_quantifier_and_box_scopes(self, f):
        assert free_vars(f("forall x:R x > y")) == VarSet.of(Y)
        assert free_vars(f("[x := 1] x > z")) == VarSet.of(Z)

    def test_all_traces_extension(self):
        everything = VarSet(frozenset({X}), all_traces=True)
        assert everything.contains(Var("g", Sort.TRACE))
        assert not everything.contains(Y)
        assert everything.without(traces=True) == VarSet.of(X)
        assert everything.names()[-1] == "<all trace variables>"


class TestChannels:
    def test_projection_limits_channels(self, f):
        assert channels(f("len(h|{c}) > 0")) == ChanSet.of("c")

    def test_unprojected_trace_reads_every_channel(self, f):
        assert channels(f("len(h) > 0")).full

    def test_program_channels(self, p):
        assert channels(p("c(h)!x; {d(h)?y}*")) == ChanSet.of("c", "d")

    def test_full_set_is_absorbing(self):
        full = ChanSet(frozenset(), True)
        assert (full | ChanSet.of("c")).full
        assert (full & ChanSet.of("c")) == ChanSet.of("c")
        assert not full.issubset(ChanSet.of("c"))


class TestWellFormedness:
    def test_convoy_is_wellformed(self, corpus):
        from chp.syntax import parse_problem

        problem = parse_problem((corpus / "convoy.dlchp").read_text())
        assert check_wellformed(problem.formula).ok

    def test_parallel_components_sharing_state(self, p):
        report = check_wellformed(p("x := 1 || y := x"))
        assert not report.ok
        assert report.violations[0].kind == "shared-state"
        assert report.violations[0].variables == ("x",)

    def test_parallel_components_share_time_and_traces(self, p):
        assert check_wellformed(p("{c(h)!x} || {c(h)?y; {y' = 1}}")).ok

    def test_contract_reading_program_state(self, f):
        report = check_wellformed(f("[x := 1]{x > 0, true} true"))
        assert [v.kind for v in report.violations] == ["ac-reads-state"]

    def test_contract_may_read_the_recorder(self, f):
        assert check_wellformed(f("[c(h)!x]{true, len(h|{c}) >= 0} true")).ok

    def test_writing_global_time(self):
        report = check_wellformed(Assign(MU, real(0)))
        assert [v.kind for v in report.violations] == ["mu-write"]
        assert check_wellformed(Assign(MU, real(0)), allow_mu_write=True).ok

    def test_report_serializes(self, p):
        data = check_wellformed(p("x := 1 || x := 2")).to_dict()
        assert data["wellformed"] is False
        assert data["violations"][0]["kind"] == "shared-state"


class TestNoninterference:
    def test_independent_components(self, f, p):
        A = f("true")
        C = f("val(h|{c}) >= 0")
        psi = f("x >= 0")
        assert noninterferes(A, C, psi, p("c(h)!x"), p("d(h)?y"))

    def test_postcondition_reads_other_state(self, f, p):
        failures = interference(TRUE, TRUE, f("y >= 0"), p("c(h)!x"), p("y := 1"))
        assert len(failures) == 1
        assert failures[0].startswith("(1)")

    def test_contract_reads_other_state(self, f, p):
        failures = interference(f("y > 0"), TRUE, TRUE, p("c(h)!x"), p("y := 1"))
        assert failures[0].startswith("(2)")

    def test_contract_observes_foreign_channel(self, f, p):
        failures = interference(f("len(h|{d}) > 0"), TRUE, TRUE, p("c(h)!x"), p("d(h)!y"))
        assert failures and all(x.startswith("(3)") for x in failures)

    def test_shared_channel_is_allowed(self, f, p):
        A = f("len(h|{c}) > 0")
        assert noninterferes(A, TRUE, TRUE, p("c(h)!x"), p("c(h)?y"))


class TestSummary:
    def test_program_table(self, p):
        table = summary(p("x := 1; c(h)!x"))
        assert table["BV"] == ["h", "x"]
        assert table["MBV"] == ["h", "x"]
        assert table["CN"] == "{c}"
        assert "mu" in table["FV"]

    def test_formula_table_has_no_bound_sets(self, f):
        assert set(summary(f("x > 0"))) == {"FV", "CN"}

    @pytest.mark.parametrize("text, count", [
        ("x > 0", 0),
        ("[x := 1] x > 0", 1),
        ("[x := 1] [c(h)!x]{true, true} x > 0", 2),
        ("forall y:R ([y := 1] true & [x := 2] true)", 2),
    ])
    def test_programs_in(self, f, text, count):
        assert len(list(programs_in(f(text)))) == count

