"""
Configuration loading.

Sources, highest precedence first: CLI flags (applied by the caller via
`Config.with_overrides`), environment (`CHP_SMT_PATH`, `CHP_SMT_TIMEOUT_MS`,
`CHP_SEED`), `chp.toml`, built-in defaults. Defaults run fully offline.

Example chp.toml:
    [smt]
    path = "/usr/local/bin/z3"
    timeout_ms = 5000

    [budget]
    values = ["-2", "-1", "0", "1/2", "1", "2"]
    durations = ["0", "1/2", "1", "2"]
    loop_depth = 3

    [output]
    format = "text"
    color = false
"""

from __future__ import annotations

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .constants import (
    CONFIG_FILENAME,
    DEFAULT_DURATIONS,
    DEFAULT_LOOP_DEPTH,
    DEFAULT_SEED,
    DEFAULT_SMT_TIMEOUT_MS,
    DEFAULT_TRACE_LENGTH,
    DEFAULT_VALUES,
    PROJECT_ROOT,
)
from .errors import ChpError

logger = logging.getLogger(__name__)


def parse_rational(text: str) -> Fraction:
    """Parse `p/q`, integers and finite decimals into an exact rational."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ChpError(f"not a rational number: {text!r}") from e


class SmtConfig(BaseModel):
    path: Optional[str] = None
    timeout_ms: int = Field(default=DEFAULT_SMT_TIMEOUT_MS, gt=0)


class BudgetConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: List[Fraction] = Field(default_factory=lambda: list(DEFAULT_VALUES))
    durations: List[Fraction] = Field(default_factory=lambda: list(DEFAULT_DURATIONS))
    loop_depth: int = Field(default=DEFAULT_LOOP_DEPTH, ge=0)
    trace_length: int = Field(default=DEFAULT_TRACE_LENGTH, ge=0)

    @field_validator("values", "durations", mode="before")
    @classmethod
    def _rationals(cls, raw: Any) -> List[Fraction]:
        return [parse_rational(item) for item in raw]

    @field_validator("durations")
    @classmethod
    def _nonnegative(cls, durations: List[Fraction]) -> List[Fraction]:
        if any(d < 0 for d in durations):
            raise ValueError("ODE durations must be nonnegative")
        return durations


class OutputConfig(BaseModel):
    format: Literal["text", "json"] = "text"
    color: bool = False


class Config(BaseModel):
    smt: SmtConfig = Field(default_factory=SmtConfig)
    budget: BudgetConfig = Field(default_factory=BudgetConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = DEFAULT_SEED

    def with_overrides(self, **overrides: Any) -> "Config":
        """Return a copy with CLI-level overrides applied (None values are ignored)."""
        data = self.model_dump()
        for dotted, value in overrides.items():
            if value is None:
                continue
            section, _, key = dotted.partition("__")
            if key:
                data[section][key] = value
            else:
                data[section] = value
        try:
            return Config.model_validate(data)
        except ValidationError as e:
            raise ChpError(f"invalid option: {e}") from e


def find_config_file(start: Optional[Path] = None) -> Optional[Path]:
    """Locate chp.toml in the working directory, then in the project root."""
    for directory in (start or Path.cwd(), PROJECT_ROOT):
        candidate = directory / CONFIG_FILENAME
        if candidate.exists():
            return candidate
    return None


def _env_int(name: str) -> int:
    raw = os.getenv(name, "")
    try:
        return int(raw)
    except ValueError:
        raise ChpError(f"{name} must be an integer, got {raw!r}") from None


def load_config(path: Optional[Path] = None) -> Config:
    """Load configuration from chp.toml and the environment."""
    load_dotenv()

    data: Dict[str, Any] = {}
    config_path = path or find_config_file()
    if config_path is not None:
        try:
            with open(config_path, "rb") as f:
                data = tomllib.load(f)
            logger.debug(f"Loaded configuration from {config_path}")
        except (OSError, tomllib.TOMLDecodeError) as e:
            raise ChpError(f"cannot read {config_path}: {e}") from e

    smt = data.setdefault("smt", {})
    if os.getenv("CHP_SMT_PATH"):
        smt["path"] = os.getenv("CHP_SMT_PATH")
    if os.getenv("CHP_SMT_TIMEOUT_MS"):
        smt["timeout_ms"] = _env_int("CHP_SMT_TIMEOUT_MS")
    if os.getenv("CHP_SEED"):
        data["seed"] = _env_int("CHP_SEED")

    try:
        return Config.model_validate(data)
    except ValidationError as e:
        raise ChpError(f"invalid configuration: {e}") from e
