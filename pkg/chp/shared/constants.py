"""Toolkit constants and paths."""

from fractions import Fraction
from pathlib import Path

# Project root (chp-verify/)
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent

# Key directories
ARTIFACTS = PROJECT_ROOT / "artifacts"
CORPUS_ROOT = PROJECT_ROOT / "corpus"
ORACLE_ARTIFACTS = ARTIFACTS / "oracle"

CONFIG_FILENAME = "chp.toml"

# Oracle budget defaults
DEFAULT_VALUES = (Fraction(-2), Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2))
DEFAULT_DURATIONS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2))
DEFAULT_LOOP_DEPTH = 3
DEFAULT_TRACE_LENGTH = 2

# SMT bridge defaults
DEFAULT_SMT_TIMEOUT_MS = 5000

# JSON report schema version
REPORT_SCHEMA = 1

# Differential suite
DEFAULT_SAMPLES = 200
DEFAULT_SEED = 0
