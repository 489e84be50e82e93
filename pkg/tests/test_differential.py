from __future__ import annotations

from fractions import Fraction

import pytest

from chp.oracle.differential import (
    EQUIVALENCE,
    INFERENCE,
    MUTANTS,
    RULES,
    Rejected,
    check_rule,
    entails,
    equivalent,
    rewrite_instance,
    rule_instance,
    run_suite,
    suite_report,
)
from chp.oracle.state import State
from chp.shared.checkpoint import Checkpoint, run_key
from chp.syntax.ast import Sort, Var

X, Y = Var("x", Sort.REAL), Var("y", Sort.REAL)


def at(**values) -> State:
    return State({Var(k, Sort.REAL): Fraction(v) for k, v in values.items()})


class TestComparison:
    def test_equivalent_formulas_agree(self, f):
        report = equivalent(f("[x := 1] x > 0"), f("true"), [at(x=0), at(x=-1)])
        assert report.ok
        assert (report.samples, report.agreed) == (2, 2)

    def test_discrepancy_is_reported(self, f):
        report = equivalent(f("[x := y] x > 0"), f("x > 0"), [at(y=1)], rule="assign")
        (found,) = report.discrepancies
        assert (found.rule, found.left, found.right) == ("assign", "true", "false")

    def test_failed_premises_are_vacuous(self, f):
        report = entails([f("x > 1")], f("x > 0"), [at(x=0), at(x=2)])
        assert (report.vacuous, report.agreed) == (1, 1)
        assert report.ok

    def test_unsound_inference_is_caught(self, f):
        report = entails([f("x > 0")], f("x > 1"), [at(x=Fraction(1, 2))])
        assert not report.ok

    def test_report_serializes(self, f):
        data = equivalent(f("x > 0"), f("x >= 0"), [at(x=0)]).to_dict()
        assert data["samples"] == 1
        assert len(data["discrepancies"]) == 1


class TestInstances:
    def test_rewrite_instance(self, f):
        instance = rewrite_instance("assign", f("[x := y + 1] x > y"))
        assert instance.kind == EQUIVALENCE
        assert instance.right == f("y + 1 > y")

    def test_inapplicable_rewrite_is_rejected(self, f):
        with pytest.raises(Rejected):
            rewrite_instance("acNoCom", f("[c(h)!x]{true, true} x > 0"))

    def test_rule_instance_keeps_the_local_premises(self, f):
        from chp.kernel import Sequent

        goal = Sequent((), (f("[c(h)!x]{true, true} len(h) >= 0"),))
        instance = rule_instance("acMono", goal, local=(0,), psi1="len(h) > 0")
        assert instance.kind == INFERENCE
        assert instance.premises == (f("true -> [c(h)!x]{true, true} len(h) > 0"),)


class TestRules:
    @pytest.mark.parametrize("name", ["assign", "test", "acCom", "send", "acNoCom"])
    def test_axioms_agree_with_the_oracle(self, name):
        report = check_rule(name, samples=5, seed=1)
        assert report.ok, report.discrepancies[:1]

    @pytest.mark.slow
    @pytest.mark.parametrize("name", RULES)
    def test_every_rule(self, name):
        report = check_rule(name, samples=20, seed=0)
        assert report.ok, report.discrepancies[:1]

    @pytest.mark.slow
    @pytest.mark.parametrize("name", sorted(MUTANTS))
    def test_mutants_are_detected(self, name):
        report = check_rule(name, samples=200, seed=0, mutant=True, stop_on_discrepancy=True)
        assert report.discrepancies


class TestSuite:
    def test_results_are_sorted(self):
        results = run_suite(["test", "assign"], samples=2, workers=2, progress=False)
        assert [r["key"] for r in results] == ["assign", "test"]
        report = suite_report(results, samples=2, seed=0)
        assert report["success"]
        assert report["schema"] == 1

    def test_unknown_rule_is_a_failed_result(self):
        (result,) = run_suite(["noSuchRule"], samples=1, progress=False)
        assert not result["success"]
        assert result["error"].startswith("KeyError")

    def test_resume_from_checkpoint(self, tmp_path):
        key = run_key(seed=0, samples=2)
        checkpoint = Checkpoint("oracle-test", key, tmp_path / f"oracle-test_{key}_checkpoint.json")
        run_suite(["assign"], samples=2, checkpoint=checkpoint, progress=False)
        assert checkpoint.completed_items == {"assign"}

        resumed = Checkpoint.load("oracle-test", key, directory=tmp_path)
        assert resumed.completed_items == {"assign"}
        (result,) = run_suite(["assign"], samples=2, checkpoint=resumed, progress=False)
        assert result["success"]
        assert resumed.skipped_count == 1
