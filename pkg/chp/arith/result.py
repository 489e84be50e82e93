"""Outcome of an arithmetic decision."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Union

VALID = "valid"
INVALID = "invalid"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class ArithResult:
    status: str
    witness: Dict[str, Union[int, Fraction]] = field(default_factory=dict)
    method: str = ""
    reason: str = ""

    @property
    def valid(self) -> bool:
        return self.status == VALID

    @property
    def invalid(self) -> bool:
        return self.status == INVALID

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "witness": {k: str(v) for k, v in sorted(self.witness.items())},
            "method": self.method,
            "reason": self.reason,
        }

    def __str__(self) -> str:
        if self.status == INVALID and self.witness:
            shown = ", ".join(f"{k}={v}" for k, v in sorted(self.witness.items()))
            return f"invalid ({shown})"
        return self.status + (f" ({self.reason})" if self.reason else "")
