from __future__ import annotations

import json

import pytest

from chp.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main

SIMPLE = "var x:R;\n\nx > 0 -> x >= 0\n"


@pytest.fixture
def problem(tmp_path):
    path = tmp_path / "simple.dlchp"
    path.write_text(SIMPLE)
    return path


class TestParseAndCheck:
    def test_parse_prints_the_problem(self, corpus, capsys):
        assert main(["parse", str(corpus / "example1.dlchp")]) == EXIT_OK
        out = capsys.readouterr().out
        assert "recorder h;" in out
        assert "len(h|{c}) > 0 -> val(h|{c}) > 0" in out

    def test_check_convoy(self, corpus, capsys):
        assert main(["check", str(corpus / "convoy.dlchp"), "--json"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["wellformed"] is True
        assert len(data["programs"]) == 1
        assert "xf" in data["programs"][0]["BV"]

    def test_check_reports_ill_formed_programs(self, tmp_path, capsys):
        path = tmp_path / "shared.dlchp"
        path.write_text("var x:R, y:R;\n[x := 1 || y := x] true\n")
        assert main(["check", str(path)]) == EXIT_FAILED
        assert "ILL-FORMED" in capsys.readouterr().out

    def test_missing_file_is_a_usage_error(self, tmp_path, capsys):
        assert main(["parse", str(tmp_path / "missing.dlchp")]) == EXIT_USAGE
        assert "cannot read" in capsys.readouterr().err

    def test_invalid_budget_is_a_usage_error(self, problem):
        assert main(["check", str(problem), "--budget-durations", "-1"]) == EXIT_USAGE


class TestProve:
    def test_proved(self, problem, tmp_path, capsys):
        script = tmp_path / "simple.proof"
        script.write_text("implR\noracle real\nqed\n")
        report = tmp_path / "report.json"
        assert main(["prove", str(problem), str(script), "--json-report", str(report)]) == EXIT_OK
        assert "PROVED" in capsys.readouterr().out
        data = json.loads(report.read_text())
        assert data["success"] is True
        assert data["leaves"] == {"real": 1}

    def test_not_proved(self, problem, tmp_path, capsys):
        script = tmp_path / "short.proof"
        script.write_text("implR\n")
        assert main(["prove", str(problem), str(script), "--json"]) == EXIT_FAILED
        data = json.loads(capsys.readouterr().out)
        assert data["failure"]["message"] == "1 goal(s) left open"


class TestOracleTest:
    def test_dump_runs(self, corpus, capsys):
        assert main(["oracle-test", "--dump-runs", str(corpus / "prog.chp")]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["truncated"] is False
        finished = [c for c in data["computations"] if c["final"] is not None]
        assert len(finished) == 1
        assert [e["value"] for e in finished[0]["trace"]] == ["1"]

    def test_unknown_rule(self, capsys):
        assert main(["oracle-test", "--rules", "noSuchRule"]) == EXIT_USAGE
        assert "unknown rule" in capsys.readouterr().err


class TestFmt:
    def test_normalize_traces_rewrites_the_file(self, tmp_path, capsys):
        path = tmp_path / "traces.dlchp"
        path.write_text("var x:R;\nchan c;\nrecorder h;\n\nlen((eps + h)|{c}) >= 0\n")
        assert main(["fmt", str(path), "--normalize-traces"]) == EXIT_OK
        assert path.read_text().strip().endswith("len(h|{c}) >= 0")
        assert capsys.readouterr().out == ""

    def test_normalize_traces_to_stdout(self, tmp_path, capsys):
        original = "var x:R;\nchan c;\nrecorder h;\n\nlen((eps + h)|{c}) >= 0\n"
        path = tmp_path / "traces.dlchp"
        path.write_text(original)
        assert main(["fmt", str(path), "--normalize-traces", "--stdout"]) == EXIT_OK
        assert capsys.readouterr().out.strip().endswith("len(h|{c}) >= 0")
        assert path.read_text() == original

    def test_in_place(self, problem):
        assert main(["fmt", str(problem), "--in-place"]) == EXIT_OK
        assert problem.read_text() == SIMPLE
