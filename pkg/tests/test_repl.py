from __future__ import annotations

import pytest

from chp.kernel import check_script, parse_script
from chp.repl import Session, replay_into, run_repl
from chp.shared.errors import ChpError
from chp.syntax import parse_problem


@pytest.fixture
def session():
    return Session(parse_problem("var x:R, y:R;\n\nx > 0 & y > 0 -> x + y > 0 & y >= 0"))


def scripted(*lines):
    pending = list(lines)

    def read(prompt: str) -> str:
        if not pending:
            raise EOFError
        return pending.pop(0)

    return read


class TestSession:
    def test_commands_are_pinned_to_goals(self, session):
        session.execute("implR")
        session.execute("andR")
        assert session.state.open_goals() == [2, 3]
        assert session.script() == "implR @0\nandR @1\n"

    def test_rejected_commands_change_nothing(self, session):
        with pytest.raises(ChpError):
            session.execute("andL")
        with pytest.raises(ChpError):
            session.execute("branch { implR }")
        assert session.items == []

    def test_undo(self, session):
        session.execute("implR")
        assert session.undo()
        assert session.state.open_goals() == [0]
        assert not session.undo()

    def test_oracle_on_every_goal(self, session):
        for line in ("implR", "andR", "oracle real *"):
            session.execute(line)
        assert session.state.is_closed
        assert session.script().endswith("oracle real @2\noracle real @3\nqed\n")

    def test_saved_script_replays(self, session, tmp_path):
        for line in ("implR", "andR", "oracle real @3", "oracle auto"):
            session.execute(line)
        path = tmp_path / "session.proof"
        session.save(path)
        report = check_script(session.problem, path.read_text())
        assert report.success, report.failure

    def test_loading_a_script(self, session):
        items = parse_script("implR\nandR\nbranch { oracle real } { oracle real }")
        assert replay_into(session, items) is None
        assert session.state.is_closed

    def test_loading_stops_at_the_first_error(self, session):
        error = replay_into(session, parse_script("implR\norL\noracle real"))
        assert error and "orL" in error
        assert len(session.items) == 1


class TestLoop:
    def test_closed_session(self, session):
        output = []
        status = run_repl(session, scripted("implR", "andR", "oracle auto *", "show", "quit"), output.append)
        assert status == 0
        assert output[-1] == "No open goals. Proof complete."

    def test_errors_are_reported(self, session):
        output = []
        status = run_repl(session, scripted("nope", "goal 7", "undo"), output.append)
        assert status == 1
        assert output[:2] == ["1 open goal(s):", f"  @0: {session.state.goal(0).sequent}"]
        assert output[2].startswith("error:")
        assert output[3].startswith("error:")
        assert output[4] == "nothing to undo"

    def test_save_needs_a_path(self, session):
        output = []
        run_repl(session, scripted("save"), output.append)
        assert output[-1] == "usage: save PATH"
