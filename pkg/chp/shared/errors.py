"""Exception hierarchy shared by all toolkit modules."""

from __future__ import annotations

from typing import Optional


class ChpError(Exception):
    """Base class for every error raised by the toolkit."""


class ParseError(ChpError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class DeclarationError(ChpError):
    """Undeclared or doubly declared identifier."""


class SortError(ChpError):
    pass


class IllFormedError(ChpError):
    pass


class SubstitutionError(ChpError):
    """Inadmissible substitution; names the capturing binder or program."""

    def __init__(self, message: str, culprit: object = None):
        self.culprit = culprit
        super().__init__(message)


class RuleError(ChpError):
    """A kernel rule was not applicable or a side condition failed."""

    def __init__(self, rule: str, message: str):
        self.rule = rule
        super().__init__(f"{rule}: {message}")


class UnsupportedError(ChpError):
    pass


class BudgetError(ChpError):
    pass


class SolverError(ChpError):
    pass
