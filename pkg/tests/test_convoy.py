"""End-to-end proof checks of the convoy corpus. These need z3 and take a while."""

from __future__ import annotations

import pytest

from chp.kernel import check_script
from chp.syntax import parse_problem

pytestmark = [pytest.mark.smt, pytest.mark.slow]


def replay(corpus, stem: str, smt, script: str = None):
    problem = parse_problem((corpus / f"{stem}.dlchp").read_text())
    if script is None:
        script = (corpus / f"{stem}.proof").read_text()
    return check_script(problem, script, smt)


@pytest.mark.parametrize("stem", ["lemmas/follower", "lemmas/leader"])
def test_component_contracts(corpus, smt, stem):
    report = replay(corpus, stem, smt)
    assert report.success, str(report.failure)
    assert report.audit == []


def test_convoy_safety(corpus, smt):
    report = replay(corpus, "convoy", smt)
    assert report.success, str(report.failure)
    assert report.rules_used["CG"] == 2
    assert report.rules_used["acParCompRight"] == 1
    assert report.oracle_closed >= 5
    assert not report.state.open_goals()


def test_weaker_invariant_does_not_prove_the_follower(corpus, smt):
    script = (corpus / "lemmas" / "follower.proof").read_text()
    weakened = script.replace("vf*epsilon <= d & ", "")
    assert weakened != script
    report = replay(corpus, "lemmas/follower", smt, weakened)
    assert not report.success
    assert report.failure.step.startswith("oracle")
