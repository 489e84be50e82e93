"""Exact polynomial views of arithmetic terms, backed by sympy."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

import sympy

from ..shared.errors import UnsupportedError
from ..syntax.ast import Add, Const, Mul, Sort, Sub, Term, Var


def symbol(var: Var) -> sympy.Symbol:
    return sympy.Symbol(var.name)


def to_sympy(term: Term) -> sympy.Expr:
    """Polynomial of a real or integer term; Int subtraction is read as plain subtraction."""
    match term:
        case Var():
            return symbol(term)
        case Const(value, _):
            return sympy.Rational(value.numerator, value.denominator)
        case Add(l, r):
            return to_sympy(l) + to_sympy(r)
        case Sub(l, r):
            return to_sympy(l) - to_sympy(r)
        case Mul(l, r):
            return to_sympy(l) * to_sympy(r)
    raise UnsupportedError(f"{term} is not a polynomial term")


def to_fraction(value) -> Fraction:
    rational = sympy.Rational(value)
    return Fraction(int(rational.p), int(rational.q))


def from_sympy(expr: sympy.Expr, sorts: Mapping[str, Sort], sort: Sort = Sort.REAL) -> Term:
    """Term for a sympy polynomial over the named variables."""
    expr = sympy.expand(expr)
    if expr.is_Number:
        return Const(to_fraction(expr), sort)
    if expr.is_Symbol:
        return Var(expr.name, sorts.get(expr.name, sort))
    if expr.is_Add:
        parts = [from_sympy(a, sorts, sort) for a in sympy.Add.make_args(expr)]
        result = parts[0]
        for part in parts[1:]:
            result = Add(result, part)
        return result
    if expr.is_Mul:
        parts = [from_sympy(a, sorts, sort) for a in sympy.Mul.make_args(expr)]
        result = parts[0]
        for part in parts[1:]:
            result = Mul(result, part)
        return result
    if expr.is_Pow and expr.exp.is_Integer and expr.exp > 0:
        base = from_sympy(expr.base, sorts, sort)
        result = base
        for _ in range(int(expr.exp) - 1):
            result = Mul(result, base)
        return result
    raise UnsupportedError(f"cannot convert {expr} back into a term")


def degree(term: Term, variables=None) -> int:
    expr = sympy.expand(to_sympy(term))
    gens = [symbol(v) for v in variables] if variables is not None else sorted(expr.free_symbols, key=str)
    if not gens:
        return 0
    if expr == 0:
        return 0
    return sympy.Poly(expr, *gens).total_degree()


def linear_form(expr: sympy.Expr) -> Optional[Tuple[Dict[str, Fraction], Fraction]]:
    """Coefficients and constant of a linear polynomial, or None when it is nonlinear."""
    expr = sympy.expand(expr)
    gens = sorted(expr.free_symbols, key=str)
    if not gens:
        return {}, to_fraction(expr)
    poly = sympy.Poly(expr, *gens)
    if poly.total_degree() > 1:
        return None
    coefficients: Dict[str, Fraction] = {}
    for gen in gens:
        c = poly.coeff_monomial(gen)
        if c != 0:
            coefficients[gen.name] = to_fraction(c)
    return coefficients, to_fraction(poly.coeff_monomial(1))


def derivative(term: Term, var: Var) -> sympy.Expr:
    return sympy.diff(to_sympy(term), symbol(var))


def equal_polynomials(a: sympy.Expr, b: sympy.Expr) -> bool:
    return sympy.expand(a - b) == 0


def substitute_polynomial(term: Term, mapping: Mapping[Var, Term]) -> sympy.Expr:
    return to_sympy(term).subs({symbol(v): to_sympy(t) for v, t in mapping.items()}, simultaneous=True)
