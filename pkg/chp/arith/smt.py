"""
SMT-LIB2 bridge.

A validity query is printed as SMT-LIB2 text (declarations, one
`(assert (not φ))`, `(check-sat)`, `(get-model)`) and handed to an
external solver over stdin/stdout, one process per query. When no binary
is configured or found on PATH, the same text is given to the in-process
z3 API through `Solver.from_string`.
"""

from __future__ import annotations

import logging
import os
import re
import shutil
import subprocess
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from ..shared.config import SmtConfig
from ..shared.constants import DEFAULT_SMT_TIMEOUT_MS
from ..shared.errors import SolverError, UnsupportedError
from ..static import free_vars
from ..syntax.ast import (
    Add,
    And,
    Cmp,
    Const,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Mul,
    Not,
    Or,
    Sort,
    Sub,
    Term,
    Truth,
    Var,
    formula_terms,
    subterms,
)
from .result import INVALID, UNKNOWN, VALID, ArithResult

logger = logging.getLogger(__name__)

_SORT_NAMES = {Sort.REAL: "Real", Sort.INT: "Int"}


def _name(var: Var) -> str:
    return f"|{var.name}|"


def _number(value: Fraction, sort: Sort) -> str:
    if sort == Sort.INT:
        text = str(abs(value.numerator))
    elif value.denominator == 1:
        text = f"{abs(value.numerator)}.0"
    else:
        text = f"(/ {abs(value.numerator)}.0 {value.denominator}.0)"
    return f"(- {text})" if value < 0 else text


def term_to_smt(term: Term) -> str:
    match term:
        case Var() if term.sort in _SORT_NAMES:
            return _name(term)
        case Const(value, sort):
            return _number(value, sort)
        case Add(l, r):
            return f"(+ {term_to_smt(l)} {term_to_smt(r)})"
        case Sub(l, r):
            return f"(- {term_to_smt(l)} {term_to_smt(r)})"
        case Mul(l, r):
            return f"(* {term_to_smt(l)} {term_to_smt(r)})"
    raise UnsupportedError(f"{term} has no SMT-LIB2 counterpart")


def formula_to_smt(formula: Formula) -> str:
    match formula:
        case Truth(value):
            return "true" if value else "false"
        case Cmp("!=", l, r):
            return f"(not (= {term_to_smt(l)} {term_to_smt(r)}))"
        case Cmp(op, l, r):
            return f"({op} {term_to_smt(l)} {term_to_smt(r)})"
        case Not(a):
            return f"(not {formula_to_smt(a)})"
        case And(l, r):
            return f"(and {formula_to_smt(l)} {formula_to_smt(r)})"
        case Or(l, r):
            return f"(or {formula_to_smt(l)} {formula_to_smt(r)})"
        case Implies(l, r):
            return f"(=> {formula_to_smt(l)} {formula_to_smt(r)})"
        case Iff(l, r):
            return f"(= {formula_to_smt(l)} {formula_to_smt(r)})"
        case Forall(var, body) | Exists(var, body) if var.sort in _SORT_NAMES:
            quantifier = "forall" if isinstance(formula, Forall) else "exists"
            return f"({quantifier} (({_name(var)} {_SORT_NAMES[var.sort]})) {formula_to_smt(body)})"
    raise UnsupportedError(f"{formula} has no SMT-LIB2 counterpart")


def _mentions_int(formula: Formula) -> bool:
    match formula:
        case Forall(var, body) | Exists(var, body):
            return var.sort == Sort.INT or _mentions_int(body)
        case Not(a):
            return _mentions_int(a)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return _mentions_int(l) or _mentions_int(r)
    return any(t.sort == Sort.INT for term in formula_terms(formula) for t in subterms(term))


def validity_query(formula: Formula) -> Tuple[str, List[Var]]:
    """SMT-LIB2 text asking for a counterexample to the universal closure of `formula`."""
    free = free_vars(formula)
    if free.all_traces:
        raise UnsupportedError("trace variables cannot be sent to the SMT solver")
    declared = list(free)
    lines = [f"(set-logic {'ALL' if _mentions_int(formula) else 'NRA'})"]
    for var in declared:
        if var.sort not in _SORT_NAMES:
            raise UnsupportedError(f"variable {var.name} of sort {var.sort} cannot be sent to the SMT solver")
        lines.append(f"(declare-fun {_name(var)} () {_SORT_NAMES[var.sort]})")
    lines.append(f"(assert (not {formula_to_smt(formula)}))")
    return "\n".join(lines) + "\n", declared


# ---------------------------------------------------------------------------
# Model parsing
# ---------------------------------------------------------------------------

SExpr = Union[str, List["SExpr"]]
_TOKEN = re.compile(r"\(|\)|\|[^|]*\||[^\s()]+")


def parse_sexprs(text: str) -> List[SExpr]:
    stack: List[List[SExpr]] = [[]]
    for token in _TOKEN.findall(text):
        if token == "(":
            stack.append([])
        elif token == ")":
            if len(stack) == 1:
                raise SolverError(f"unbalanced solver output: {text[:200]}")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(token)
    return stack[0]


def _value(expr: SExpr) -> Fraction:
    if isinstance(expr, str):
        return Fraction(expr)
    head, *args = expr
    if head == "-" and len(args) == 1:
        return -_value(args[0])
    if head == "/" and len(args) == 2:
        return _value(args[0]) / _value(args[1])
    raise SolverError(f"cannot read model value {expr}")


def parse_model(text: str) -> Dict[str, Fraction]:
    model: Dict[str, Fraction] = {}
    for expr in parse_sexprs(text):
        if not isinstance(expr, list):
            continue
        entries = expr[1:] if expr and expr[0] == "model" else expr
        for entry in entries:
            if isinstance(entry, list) and len(entry) == 5 and entry[0] == "define-fun" and entry[2] == []:
                try:
                    model[entry[1].strip("|")] = _value(entry[4])
                except SolverError:
                    logger.debug(f"Skipping model entry {entry}")
    return model


def _typed(model: Dict[str, Fraction], declared: List[Var]) -> Dict[str, Union[int, Fraction]]:
    result: Dict[str, Union[int, Fraction]] = {}
    for var in declared:
        if var.name in model:
            value = model[var.name]
            result[var.name] = int(value) if var.sort == Sort.INT else value
    return result


# ---------------------------------------------------------------------------
# Solver bridge
# ---------------------------------------------------------------------------


def _solver_arguments(path: str, timeout_ms: int) -> List[str]:
    name = os.path.basename(path).lower()
    if "z3" in name:
        return [path, "-in", "-smt2", f"-t:{timeout_ms}"]
    if "cvc" in name:
        return [path, "--lang=smt2", f"--tlimit={timeout_ms}", "--produce-models"]
    return [path]


class SmtBridge:
    """One-shot validity checks through an SMT-LIB2 solver."""

    def __init__(self, path: Optional[str] = None, timeout_ms: int = DEFAULT_SMT_TIMEOUT_MS):
        self.path = path
        self.timeout_ms = timeout_ms

    @classmethod
    def from_config(cls, config: SmtConfig) -> "SmtBridge":
        return cls(config.path or shutil.which("z3"), config.timeout_ms)

    @staticmethod
    def in_process_available() -> bool:
        try:
            import z3  # noqa: F401
        except ImportError:
            return False
        return True

    @property
    def available(self) -> bool:
        return bool(self.path) or self.in_process_available()

    def check_valid(self, formula: Formula) -> ArithResult:
        query, declared = validity_query(formula)
        if self.path:
            status, model = self._run_process(query)
            method = f"smt:{os.path.basename(self.path)}"
        elif self.in_process_available():
            status, model = self._run_in_process(query)
            method = "smt:z3-api"
        else:
            return ArithResult(UNKNOWN, method="smt", reason="no SMT solver available")

        logger.debug(f"SMT answered {status} for {formula}")
        if status == "unsat":
            return ArithResult(VALID, method=method)
        if status == "sat":
            return ArithResult(INVALID, witness=_typed(model, declared), method=method)
        return ArithResult(UNKNOWN, method=method, reason=f"solver answered {status}")

    def _run_process(self, query: str) -> Tuple[str, Dict[str, Fraction]]:
        script = query + "(check-sat)\n(get-model)\n(exit)\n"
        try:
            completed = subprocess.run(
                _solver_arguments(self.path, self.timeout_ms),
                input=script,
                capture_output=True,
                text=True,
                timeout=self.timeout_ms / 1000 + 1,
            )
        except subprocess.TimeoutExpired:
            logger.warning(f"SMT solver timed out after {self.timeout_ms} ms")
            return "timeout", {}
        except OSError as e:
            raise SolverError(f"cannot run SMT solver {self.path}: {e}") from e

        lines = completed.stdout.strip().splitlines()
        if not lines:
            raise SolverError(f"SMT solver produced no output: {completed.stderr.strip()[:200]}")
        status = lines[0].strip()
        model = parse_model("\n".join(lines[1:])) if status == "sat" else {}
        return status, model

    def _run_in_process(self, query: str) -> Tuple[str, Dict[str, Fraction]]:
        import z3

        solver = z3.Solver()
        solver.set("timeout", self.timeout_ms)
        try:
            solver.from_string(query)
        except z3.Z3Exception as e:
            raise SolverError(f"z3 rejected the query: {e}") from e
        answer = solver.check()
        if answer == z3.unsat:
            return "unsat", {}
        if answer != z3.sat:
            return "unknown", {}
        model: Dict[str, Fraction] = {}
        found = solver.model()
        for decl in found.decls():
            value = found[decl]
            if z3.is_rational_value(value):
                model[decl.name()] = Fraction(value.as_fraction())
            elif z3.is_int_value(value):
                model[decl.name()] = Fraction(value.as_long())
        return "sat", model
