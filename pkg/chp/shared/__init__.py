"""Shared utilities for the dLCHP toolkit."""

from .checkpoint import Checkpoint, run_key
from .config import Config, load_config, parse_rational
from .constants import ARTIFACTS, CORPUS_ROOT, PROJECT_ROOT
from .errors import (
    BudgetError,
    ChpError,
    DeclarationError,
    IllFormedError,
    ParseError,
    RuleError,
    SolverError,
    SortError,
    SubstitutionError,
    UnsupportedError,
)

__all__ = [
    "Checkpoint",
    "run_key",
    "Config",
    "load_config",
    "parse_rational",
    "ARTIFACTS",
    "CORPUS_ROOT",
    "PROJECT_ROOT",
    "BudgetError",
    "ChpError",
    "DeclarationError",
    "IllFormedError",
    "ParseError",
    "RuleError",
    "SolverError",
    "SortError",
    "SubstitutionError",
    "UnsupportedError",
]
