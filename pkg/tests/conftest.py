"""Shared fixtures: declarations, corpus paths and the SMT bridge."""

from __future__ import annotations

from pathlib import Path

import pytest

from chp.arith import SmtBridge
from chp.syntax import declarations, parse_formula, parse_program, parse_term

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture
def decls():
    return declarations("var x:R, y:R, z:R, n:Z, g:T; chan c, d; recorder h;")


@pytest.fixture
def f(decls):
    return lambda text: parse_formula(text, decls)


@pytest.fixture
def p(decls):
    return lambda text: parse_program(text, decls)


@pytest.fixture
def t(decls):
    return lambda text: parse_term(text, decls)


@pytest.fixture
def corpus() -> Path:
    return CORPUS


@pytest.fixture
def smt():
    bridge = SmtBridge()
    if not bridge.available:
        pytest.skip("no SMT solver available")
    return bridge
