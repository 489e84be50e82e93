from __future__ import annotations

import random

import pytest

from chp.oracle.generators import Generator
from chp.shared.errors import DeclarationError, ParseError, SortError, SubstitutionError
from chp.syntax import (
    fresh_name,
    parse_problem,
    parse_program_file,
    render,
    rename_free,
    rename_recorder,
    substitute,
)
from chp.syntax.ast import (
    MU,
    TRUE,
    AcBox,
    Add,
    Assign,
    Box,
    ChanName,
    Choice,
    Cmp,
    Concat,
    Forall,
    Implies,
    Item,
    Len,
    Loop,
    Ode,
    Par,
    Proj,
    Receive,
    Send,
    Seq,
    Sort,
    Sub,
    Val,
    Var,
    match_if,
    nat,
    real,
)
X, Y, Z = (Var(n, Sort.REAL) for n in "xyz")
H = Var("h", Sort.TRACE)


class TestTerms:
    def test_last_value_of_projection(self, t):
        term = t("val(h|{c})")
        assert isinstance(term, Val)
        assert term.trace == Proj(H, frozenset({"c"}))
        assert term.index == Sub(Len(Proj(H, frozenset({"c"}))), nat(1))

    def test_trace_concatenation_uses_plus(self, t):
        term = t("h + <c, 5, mu>")
        assert term == Concat(H, Item("c", real(5), MU))
        assert term.sort == Sort.TRACE

    def test_len_is_integer(self, t):
        assert t("len(h)").sort == Sort.INT

    def test_chan_accessor_compares_with_channel_names(self, f):
        formula = f("chan(h) = c")
        assert formula.right == ChanName("c")

    def test_arithmetic_on_traces_is_rejected(self, t):
        with pytest.raises(SortError):
            t("h * 2")


class TestFormulas:
    def test_example_formula(self, f):
        formula = f("len(h|{c}) > 0 -> val(h|{c}) > 0")
        assert isinstance(formula, Implies)
        assert formula.left.left.sort == Sort.INT

    def test_acbox(self, f):
        formula = f("[c(h)!y]{len(h|{c})>0 -> val(h|{c})=1, len(h|{c})>0 -> val(h|{c})=1} true")
        assert isinstance(formula, AcBox)
        assert formula.program == Send("c", H, Y)
        assert formula.assumption == formula.commitment
        assert formula.post == TRUE

    def test_quantifier_scopes_its_variable(self, f):
        formula = f("forall u:R u >= x")
        assert isinstance(formula, Forall)
        assert formula.var == Var("u", Sort.REAL)

    def test_mu_is_global_time(self, f):
        assert f("mu >= 0").left == MU

    def test_undeclared_variable(self, f):
        with pytest.raises(DeclarationError, match="undeclared variable 'w'"):
            f("w > 0")

    def test_undeclared_channel(self, f):
        with pytest.raises(DeclarationError):
            f("[e(h)!x] true")

    def test_syntax_error_has_a_position(self, f):
        with pytest.raises(ParseError) as info:
            f("x > > 0")
        assert info.value.line == 1


class TestPrograms:
    def test_sequence_is_left_nested(self, p):
        program = p("x := 1; y := 2; z := 3")
        assert isinstance(program, Seq)
        assert isinstance(program.left, Seq)
        assert program.right == Assign(Z, real(3))

    def test_if_is_sugar_for_guarded_choice(self, p):
        program = p("if (x > 0) {y := 1}")
        assert isinstance(program, Choice)
        cond, body = match_if(program)
        assert cond == Cmp(">", X, real(0))
        assert body == Assign(Y, real(1))

    def test_ode_with_constraint(self, p):
        program = p("{x' = y, y' = 1 & x <= 3}")
        assert isinstance(program, Ode)
        assert [v.name for v, _ in program.bindings] == ["x", "y"]
        assert program.constraint == Cmp("<=", X, real(3))

    def test_communication_with_default_recorder(self, p):
        assert p("c!x") == Send("c", H, X)
        assert p("c?y") == Receive("c", H, Y)

    def test_loop_and_parallel(self, p):
        program = p("{c(h)!x}* || {c(h)?y}*")
        assert isinstance(program, Par)
        assert isinstance(program.left, Loop)

    def test_tests_must_be_real_arithmetic(self, p):
        with pytest.raises((SortError, ParseError)):
            p("?(len(h) > 0)")


class TestProblems:
    def test_convoy_parses(self, corpus):
        problem = parse_problem((corpus / "convoy.dlchp").read_text())
        assert problem.decls.recorder == "h"
        assert problem.decls.channels == ["vel", "pos"]
        box = problem.formula.right
        assert isinstance(box, Box)
        assert isinstance(box.program, Par)

    def test_program_definitions_take_a_recorder(self):
        problem = parse_problem(
            "var x:R; chan c; recorder h; program send(h) = c(h)!x;\n"
            "[send(h)] true"
        )
        assert problem.formula.program == Send("c", H, X)

    def test_redeclaration_is_rejected(self):
        with pytest.raises(DeclarationError):
            parse_problem("var x:R, x:R; true")

    def test_mu_cannot_be_declared(self):
        with pytest.raises(DeclarationError):
            parse_problem("var mu:R; true")

    def test_program_file(self, corpus):
        decls, program = parse_program_file((corpus / "prog.chp").read_text())
        assert isinstance(program, Par)
        assert decls.channels == ["c"]


class TestRender:
    @pytest.mark.parametrize("text", [
        "len(h|{c}) > 0 -> val(h|{c}) > 0",
        "[x := 1; {c(h)!x ++ skip}]{true, val(h|{c}) >= 0} x >= 0",
        "[{x' = y & x <= 3}] (x <= 3 | !(y > 0))",
        "forall u:R (u > 0 -> exists v:R v*v = u)",
        "time(h[0]) <= mu & h|{c, d} prefixof g",
    ])
    def test_reparses_to_the_same_tree(self, f, text):
        formula = f(text)
        assert f(render(formula)) == formula

    def test_if_renders_as_sugar(self, p):
        assert render(p("if (x > 0) {y := 1}")) == "if (x > 0) {y := 1}"

    def test_generated_formulas_reparse(self, f):
        gen = Generator(random.Random(1))
        for i in range(500):
            formula = gen.dl_formula(3) if i % 2 else gen.fol(3)
            assert f(render(formula)) == formula, render(formula)

    def test_generated_programs_reparse(self, p):
        gen = Generator(random.Random(2))
        for _ in range(500):
            program = gen.program(3)
            assert p(render(program)) == program, render(program)


class TestSubstitution:
    def test_free_occurrences_only(self, f):
        formula = f("x > 0 & forall x:R x > y")
        result = substitute(formula, {X: real(2)})
        assert result == f("2 > 0 & forall x:R x > y")

    def test_bound_variable_is_renamed_on_capture(self, f):
        result = substitute(f("forall y:R x > y"), {X: Y})
        fresh = Var("y_1", Sort.REAL)
        assert result == Forall(fresh, Cmp(">", Y, fresh))

    def test_program_binding_is_respected(self, f):
        with pytest.raises(SubstitutionError):
            substitute(f("[y := 1] x > y"), {X: Y})

    @pytest.mark.parametrize("text", [
        "[x := 1] x >= 0",
        "[x := *]{true, true} x >= 0",
        "y > 0 & [y := 2][x := 1] x >= y",
    ])
    def test_variable_rebound_by_a_program(self, f, text):
        with pytest.raises(SubstitutionError, match="x is bound by the program"):
            substitute(f(text), {X: Y})

    def test_rebinding_below_a_quantifier_of_the_same_name(self, f):
        formula = f("forall x:R [x := 1] x >= 0")
        assert substitute(formula, {X: Y}) == formula

    def test_identity_mapping(self, f):
        gen = Generator(random.Random(4))
        for _ in range(1000):
            formula = gen.dl_formula(3)
            assert substitute(formula, {X: X, Y: Y, Z: Z}) == formula

    def test_absent_variable_is_untouched(self):
        gen = Generator(random.Random(5), reals=(Y, Z))
        for _ in range(1000):
            formula = gen.dl_formula(3)
            assert substitute(formula, {X: real(1)}) == formula

    def test_rename_recorder_round_trip(self):
        gen = Generator(random.Random(6))
        fresh = Var("h_1", Sort.TRACE)
        for _ in range(1000):
            program = gen.program(3)
            assert rename_recorder(rename_recorder(program, H, fresh), fresh, H) == program

    def test_mu_needs_permission(self, f):
        formula = f("mu >= 0")
        with pytest.raises(SubstitutionError):
            substitute(formula, {MU: Add(MU, X)})
        assert substitute(formula, {MU: Add(MU, X)}, allow_mu=True) == Cmp(">=", Add(MU, X), real(0))

    def test_rename_free_stops_at_binders(self, f):
        formula = f("x > 0 & forall x:R x > 0")
        assert rename_free(formula, X, Z) == f("z > 0 & forall x:R x > 0")

    def test_rename_free_renames_program_variables(self, f):
        formula = f("[x := 1] x > 0")
        assert rename_free(formula, X, Z) == f("[z := 1] z > 0")

    def test_rename_recorder(self, p):
        g = Var("g", Sort.TRACE)
        assert rename_recorder(p("c(h)!x; d(h)?y"), H, g) == Seq(Send("c", g, X), Receive("d", g, Y))


class TestFreshName:
    def test_base_when_free(self):
        assert fresh_name("t", {"x", "y"}) == "t"

    def test_first_unused_suffix(self):
        assert fresh_name("t", {"t", "t_1"}) == "t_2"

    def test_never_returns_an_avoided_name(self):
        taken = {"h0"} | {f"h0_{i}" for i in range(1, 20)}
        assert fresh_name("h0", taken) not in taken

    def test_successive_names_are_distinct(self):
        taken = {"x", "t_3"}
        names = []
        for _ in range(100):
            name = fresh_name("t", taken)
            assert name not in taken
            taken.add(name)
            names.append(name)
        assert len(set(names)) == 100
