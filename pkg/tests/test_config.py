from __future__ import annotations

import pytest

from chp.cli import EXIT_OK, EXIT_USAGE, main
from chp.shared.config import load_config
from chp.shared.errors import ChpError


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in ("CHP_SMT_PATH", "CHP_SMT_TIMEOUT_MS", "CHP_SEED"):
        monkeypatch.delenv(name, raising=False)
    return tmp_path


class TestEnvironment:
    def test_integers_are_read(self, workdir, monkeypatch):
        monkeypatch.setenv("CHP_SEED", "7")
        monkeypatch.setenv("CHP_SMT_TIMEOUT_MS", "250")
        config = load_config()
        assert config.seed == 7
        assert config.smt.timeout_ms == 250

    @pytest.mark.parametrize("name", ["CHP_SEED", "CHP_SMT_TIMEOUT_MS"])
    def test_malformed_integer_names_the_variable(self, workdir, monkeypatch, name):
        monkeypatch.setenv(name, "5s")
        with pytest.raises(ChpError, match=name):
            load_config()

    def test_malformed_integer_is_a_usage_error(self, workdir, monkeypatch, capsys):
        (workdir / "simple.dlchp").write_text("var x:R;\n\nx > 0\n")
        monkeypatch.setenv("CHP_SEED", "seven")
        assert main(["parse", str(workdir / "simple.dlchp")]) == EXIT_USAGE
        assert "CHP_SEED" in capsys.readouterr().err


class TestOutput:
    def test_color_from_the_config_file(self, workdir):
        (workdir / "chp.toml").write_text("[output]\ncolor = true\n")
        assert load_config().output.color is True

    def test_colored_verdict(self, workdir, capsys):
        (workdir / "simple.dlchp").write_text("var x:R;\n\nx > 0 -> x >= 0\n")
        (workdir / "simple.proof").write_text("implR\noracle real\nqed\n")
        assert main(["prove", "simple.dlchp", "simple.proof", "--color"]) == EXIT_OK
        assert "\033[32mPROVED\033[0m" in capsys.readouterr().out

    def test_plain_by_default(self, workdir, capsys):
        (workdir / "simple.dlchp").write_text("var x:R;\n\nx > 0 -> x >= 0\n")
        (workdir / "simple.proof").write_text("implR\n")
        main(["prove", "simple.dlchp", "simple.proof"])
        out = capsys.readouterr().out
        assert "Result: NOT PROVED" in out
        assert "\033[" not in out
