from __future__ import annotations

from dataclasses import replace

import pytest

from chp.kernel import (
    Position,
    ProofState,
    RuleApp,
    Sequent,
    apply,
    audit_freshness,
    check_script,
    close_oracle,
    init,
    lookup,
    parse_script,
    render_script,
    rule_names,
)
from chp.kernel.script import Branch, Oracle, Qed, Step
from chp.kernel.sequent import ANTECEDENT, SUCCEDENT, L, R
from chp.shared.errors import IllFormedError, ParseError, RuleError
from chp.syntax.ast import (
    MU,
    ZERO,
    Add,
    Assign,
    Box,
    Cmp,
    Concat,
    Forall,
    Implies,
    Item,
    Send,
    Sort,
    Var,
    real,
)

X = Var("x", Sort.REAL)
H = Var("h", Sort.TRACE)


@pytest.fixture
def start(f, decls):
    return lambda text: init(f(text), decls)


def step(state: ProofState, name: str, position=None, goal=None, **args) -> ProofState:
    return apply(state, RuleApp.of(name, position, goal, **args))


def open_sequents(state: ProofState):
    return [state.goal(g).sequent for g in state.open_goals()]


def sequent(f, ante, succ) -> Sequent:
    return Sequent(tuple(f(a) for a in ante), tuple(f(s) for s in succ))


class TestSequent:
    def test_position_syntax(self):
        assert Position.parse("L1.0.1") == L(1, 0, 1)
        assert str(R(0, 1)) == "R0.1"
        with pytest.raises(RuleError):
            Position.parse("X3")

    def test_new_formulas_go_to_the_inside(self, f):
        s = sequent(f, ["x > 0"], ["y > 0"])
        assert s.add(ANTECEDENT, f("z > 0")).antecedent == (f("x > 0"), f("z > 0"))
        assert s.add(SUCCEDENT, f("z > 0")).succedent == (f("z > 0"), f("y > 0"))

    def test_init_rejects_ill_formed_goals(self, f, decls):
        with pytest.raises(IllFormedError):
            init(f("[x := 1 || y := x] true"), decls)

    def test_open_goals_in_premise_order(self, f, start):
        state = step(start("x > 0 & y > 0"), "andR")
        assert open_sequents(state) == [sequent(f, [], ["x > 0"]), sequent(f, [], ["y > 0"])]
        assert state.goal(0).status == "expanded"

    def test_freshness_audit(self, start):
        state = start("x > 0")
        assert audit_freshness(state) == []
        clashing = replace(state, goals={0: replace(state.goal(0), introduced=("x",))})
        assert audit_freshness(clashing) == ["@0: x already occur in the conclusion"]


class TestStructural:
    def test_implication_right(self, f, start):
        state = step(start("x > 0 -> x >= 0"), "implR")
        assert open_sequents(state) == [sequent(f, ["x > 0"], ["x >= 0"])]

    def test_identity_closes(self, start):
        state = step(step(start("x > 0 -> x > 0"), "implR"), "Id")
        assert state.is_closed
        assert state.goal(1).closed_by == "Id"

    def test_skolemization_keeps_unused_names(self, f, start):
        state = step(start("forall x:R x*x >= 0"), "forallR")
        assert open_sequents(state) == [sequent(f, [], ["x*x >= 0"])]

    def test_skolemization_renames_clashing_names(self, start):
        state = step(step(start("x > 0 -> forall x:R x >= 0"), "implR"), "forallR")
        x1 = Var("x_1", Sort.REAL)
        (goal,) = open_sequents(state)
        assert goal.succedent == (Cmp(">=", x1, ZERO),)
        assert state.goal(1).introduced == ("x_1",)

    def test_instantiation(self, start):
        state = step(start("(forall u:R u*u >= 0) -> y*y >= 0"), "implR")
        state = step(state, "forallL", term="y")
        assert step(state, "Id").is_closed

    def test_cut(self, f, start):
        state = step(start("y > 0"), "cut", formula="x > 0")
        assert open_sequents(state) == [sequent(f, [], ["x > 0", "y > 0"]), sequent(f, ["x > 0"], ["y > 0"])]

    def test_unknown_rule(self, start):
        with pytest.raises(RuleError):
            step(start("x > 0"), "magic")

    def test_unexpected_argument(self, start):
        with pytest.raises(RuleError, match="unexpected"):
            step(start("x > 0 -> x > 0"), "implR", foo="1")

    def test_closed_goals_take_no_rules(self, start):
        state = step(step(start("x > 0 -> x > 0"), "implR"), "Id")
        with pytest.raises(RuleError, match="not open"):
            step(state, "Id", goal=1)

    def test_trace_law_aliases(self):
        assert lookup("valAccessBase").name == "TA"
        assert lookup("closeTrue").name == "trueR"
        assert "lenConcat" in rule_names()


class TestAxioms:
    def test_assignment(self, f, start):
        state = step(start("[x := y + 1] x > y"), "assign")
        assert open_sequents(state) == [sequent(f, [], ["y + 1 > y"])]

    def test_assignment_backwards_needs_the_left_side(self, f, start):
        with pytest.raises(RuleError, match="lhs"):
            step(start("y + 1 > y"), "assign", "R0", dir="rl")
        state = step(start("y + 1 > y"), "assign", "R0", dir="rl", lhs="[x := y + 1] x > y")
        assert open_sequents(state) == [sequent(f, [], ["[x := y + 1] x > y"])]

    def test_capturing_assignment_is_refused(self, start):
        with pytest.raises(RuleError):
            step(start("[x := y][y := 1] x > y"), "assign", "R0")

    def test_search_descends_to_an_applicable_box(self, f, start):
        state = step(start("[x := y][y := 1] x > y"), "assign")
        assert open_sequents(state) == [sequent(f, [], ["[x := y] x > 1"])]

    def test_assignment_as_equation(self, f, start):
        state = step(start("[x := y][y := 1] x > y"), "assignEq", "R0")
        assert open_sequents(state) == [sequent(f, [], ["forall x:R (x = y -> [y := 1] x > y)"])]

    def test_nondeterministic_assignment(self, f, start):
        state = step(start("[x := *] x*x >= 0"), "nondetAssign")
        assert open_sequents(state) == [sequent(f, [], ["forall x:R x*x >= 0"])]

    def test_test(self, f, start):
        state = step(start("[?(x > 0)] x >= 0"), "test")
        assert open_sequents(state) == [sequent(f, [], ["x > 0 -> x >= 0"])]

    def test_boxes_dual(self, f, start):
        state = step(start("[x := 1] x > 0"), "boxesDual")
        assert open_sequents(state) == [sequent(f, [], ["[x := 1]{true, true} x > 0"])]

    def test_composition_records_its_expansion(self, f, start):
        state = step(start("[x := 1; y := x] y > 0"), "composition")
        assert open_sequents(state) == [sequent(f, [], ["[x := 1][y := x] y > 0"])]
        assert "acComposition" in state.goal(0).expansion

    def test_choice(self, f, start):
        state = step(start("[x := 1 ++ x := 2] x > 0"), "choice")
        assert open_sequents(state) == [sequent(f, [], ["[x := 1] x > 0 & [x := 2] x > 0"])]

    def test_contract_base(self, f, start):
        state = step(start("[skip]{true, len(h) >= 0} x > 0"), "acBase")
        assert open_sequents(state) == [sequent(f, [], ["len(h) >= 0 & (true -> x > 0)"])]

    def test_send_introduces_a_fresh_history(self, f, start):
        state = step(start("[c(h)!x] len(h) > 0"), "send")
        assert open_sequents(state) == [sequent(f, [], ["forall h0:T (h0 = h + <c, x, mu> -> len(h0) > 0)"])]
        assert state.goal(0).introduced == ("h0",)

    def test_requested_names_must_be_fresh(self, start):
        with pytest.raises(RuleError, match="not fresh"):
            step(start("[c(h)!x] len(h) > 0"), "send", "R0", fresh="x")

    def test_receive_is_a_send_of_any_value(self, f, start):
        state = step(start("[c(h)?y]{true, true} y > 0"), "comDual")
        assert open_sequents(state) == [sequent(f, [], ["[y := *][c(h)!y]{true, true} y > 0"])]

    def test_contracts_of_silent_programs(self, f, start):
        state = step(start("[x := 1]{true, len(h) >= 0} x > 0"), "acNoCom")
        assert open_sequents(state) == [sequent(f, [], ["len(h) >= 0 & (true -> [x := 1] x > 0)"])]
        with pytest.raises(RuleError, match="not empty"):
            step(start("[c(h)!x]{true, true} x > 0"), "acNoCom", "R0")

    def test_solution_of_a_constant_rate_ode(self, f, start):
        state = step(start("[{x' = 1}] x >= 0"), "solution")
        t = Var("t", Sort.REAL)
        (goal,) = open_sequents(state)
        expected = Forall(
            t,
            Implies(
                Cmp(">=", t, ZERO),
                Box(Assign(MU, Add(MU, t)), Box(Assign(X, Add(X, t)), f("x >= 0"))),
            ),
        )
        assert goal.succedent == (expected,)
        assert "gtime" in state.goal(0).expansion

    def test_solutions_are_checked(self, start):
        with pytest.raises(RuleError, match="not constant-rate"):
            step(start("[{x' = x}] x >= 0"), "solution")
        with pytest.raises(RuleError, match="derivative"):
            step(start("[{x' = y}] x >= 0"), "solution", x="x + 2*t")
        assert step(start("[{x' = y}] x >= 0"), "solution", x="x + t*y").open_goals() == [1]


class TestContractRules:
    def test_monotonicity_premises(self, f, start):
        state = step(start("[c(h)!x]{true, true} len(h) >= 0"), "acMono", psi1="len(h) > 0")
        assert open_sequents(state) == [
            sequent(f, [], ["[c(h)!x]{true, true} len(h) > 0"]),
            sequent(f, ["true"], ["true"]),
            sequent(f, ["true"], ["true"]),
            sequent(f, ["len(h) > 0"], ["len(h) >= 0"]),
        ]

    def test_generalization(self, f, start):
        state = step(start("[c(h)!x]{true, len(h) >= 0} true"), "acG")
        assert open_sequents(state) == [sequent(f, [], ["len(h) >= 0 & true"])]

    def test_dropping_a_silent_component(self, f, start):
        state = step(start("[c(h)!x || d(h)?y]{true, true} x >= 0"), "acDropComp", keep="left")
        assert open_sequents(state) == [sequent(f, [], ["[c(h)!x]{true, true} x >= 0"])]

    def test_interfering_component_stays(self, start):
        with pytest.raises(RuleError, match="interferes"):
            step(start("[c(h)!x || d(h)?y]{true, true} y >= 0"), "acDropComp", keep="left")

    def test_communication_ghost(self, f, start):
        state = step(start("[c(h)!x] x >= 0"), "CG", chan="c", value="0", fresh="h1")
        h1 = Var("h1", Sort.TRACE)
        ghost = Cmp("=", h1, Concat(H, Item("c", real(0), MU)))
        assert open_sequents(state) == [Sequent((ghost,), (Box(Send("c", h1, X), f("x >= 0")),))]
        assert state.goal(0).introduced == ("h1",)

    def test_ghost_needs_a_history_free_postcondition(self, start):
        with pytest.raises(RuleError, match="postcondition"):
            step(start("[c(h)!x] len(h) > 0"), "CG", chan="c", value="0")


class TestDerived:
    def test_conditional(self, f, start):
        state = step(start("[if (x > 0) {y := x}] y >= 0"), "if")
        assert open_sequents(state) == [
            sequent(f, ["x > 0"], ["[y := x] y >= 0"]),
            sequent(f, ["!(x > 0)"], ["y >= 0"]),
        ]

    def test_generalization(self, f, start):
        state = step(start("[x := 1] y >= 0"), "G")
        assert open_sequents(state) == [sequent(f, [], ["y >= 0"])]

    def test_monotonicity(self, f, start):
        state = step(start("[x := 1] x >= 0"), "mono", psi1="x > 0")
        assert open_sequents(state) == [sequent(f, [], ["[x := 1] x > 0"]), sequent(f, ["x > 0"], ["x >= 0"])]

    def test_loop_invariant_premises(self, f, start):
        state = step(start("x >= 0 -> [{x := x + 1}*]{true, true} x >= -1"), "implR")
        state = step(state, "acLoop", inv="x >= 0")
        assert open_sequents(state) == [
            sequent(f, ["x >= 0"], ["x >= 0"]),
            sequent(f, ["x >= 0"], ["[x := x + 1]{true, true} x >= 0"]),
            sequent(f, ["x >= 0"], ["x >= -1"]),
        ]
        assert len(state.goal(1).expansion) > 10

    def test_loop_needs_an_invariant(self, start):
        state = step(start("x >= 0 -> [{x := x + 1}*]{true, true} x >= 0"), "implR")
        with pytest.raises(RuleError, match="inv"):
            step(state, "acLoop")

    def test_unfold_closes_straight_line_goals(self, start):
        state = step(start("x > 0 -> [y := x; c(h)!y] y > 0"), "implR")
        state = step(state, "unfold")
        assert state.is_closed
        assert state.goal(1).closed_by == "unfold"

    def test_unfold_stops_at_loops(self, f, start):
        state = step(start("[x := 1; {x := x + 1}*] x > 0"), "unfold")
        assert open_sequents(state) == [sequent(f, ["x = 1"], ["[{x := x + 1}*] x > 0"])]
        assert any(s.startswith("assignEq") for s in state.goal(0).expansion)


class TestOracle:
    def test_undecided_goal_is_annotated(self, start):
        state = close_oracle(start("x*x >= 0"), 0, "real")
        assert state.goal(0).status == "open"
        assert state.goal(0).note.startswith("oracle real:")

    def test_closed_by_the_deciding_method(self, start):
        state = close_oracle(step(start("x > 0 -> x >= 0"), "implR"), 1, "auto")
        assert state.goal(1).closed_by == "real"


class TestScripts:
    def test_rendering_round_trip(self):
        text = "\n".join([
            "implR",
            "branch",
            "{",
            "  oracle real @3",
            "}",
            "{",
            '  cut(formula="x > 0")',
            "}",
            "oracle auto *",
            "qed",
        ])
        items = parse_script(text)
        assert [type(i) for i in items] == [Step, Branch, Oracle, Qed]
        assert items[2].every
        assert render_script(items) == text

    def test_positional_arguments(self):
        (inst, at) = parse_script('forallL("y")\nassign(R0.1)')
        assert inst.to_app() == RuleApp("forallL", None, (("term", "y"),))
        assert at.to_app().position == R(0, 1)

    @pytest.mark.parametrize("text", ["implR(", "oracle magic", "Id @x"])
    def test_malformed_scripts(self, text):
        with pytest.raises(ParseError):
            parse_script(text)

    def test_successful_replay(self, f, decls):
        report = check_script(f("x > 0 -> x >= 0"), "implR\noracle real\nqed", decls=decls)
        assert report.success
        assert report.steps == 2
        assert dict(report.rules_used) == {"implR": 1, "oracle": 1}
        assert report.leaves() == {"real": 1}
        data = report.to_dict()
        assert data["success"] is True
        assert data["open_goals"] == []

    def test_failure_names_the_line(self, f, decls):
        report = check_script(f("x > 0 -> x >= 0"), "implR\n\nandR", decls=decls)
        assert not report.success
        assert (report.failure.line, report.failure.step) == (3, "andR")
        assert report.failure.goal == 1

    def test_open_goals_fail(self, f, decls):
        report = check_script(f("x > 0 -> x >= 0"), "implR", decls=decls)
        assert report.failure.message == "1 goal(s) left open"

    def test_failed_oracle_fails_the_script(self, f, decls):
        report = check_script(f("x > 0 -> y > 0"), "implR\noracle real", decls=decls)
        assert not report.success
        assert report.failure.step == "oracle real"

    def test_oracle_needs_an_open_goal(self, f, decls):
        report = check_script(f("x > 0 -> x > 0"), "implR\nId\noracle auto *", decls=decls)
        assert report.failure.message == "no open goal"

    def test_branch_blocks_match_open_goals(self, f, decls):
        report = check_script(f("x >= x & 1 > 0"), "andR\nbranch { oracle real }", decls=decls)
        assert report.failure.message == "branch has 1 block(s) but there are 2 open goal(s)"

    def test_loop_proof(self, f, decls):
        script = """
        implR
        acLoop(inv="x >= 0")
        branch
        { Id }
        {
          unfold
          oracle real *   # x >= 0 |- x + 1 >= 0
        }
        { oracle real }
        qed
        """
        report = check_script(f("x >= 0 -> [{x := x + 1}*]{true, true} x >= -1"), script, decls=decls)
        assert report.success, report.failure
        assert report.oracle_closed == 2
        assert report.audit == []
