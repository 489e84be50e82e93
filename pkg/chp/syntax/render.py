"""Precedence-aware rendering of AST nodes back into the concrete syntax."""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .ast import (
    AcBox,
    Add,
    And,
    Assign,
    Box,
    ChanAt,
    ChanName,
    Choice,
    Cmp,
    Declarations,
    Concat,
    Const,
    Empty,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Item,
    Len,
    Loop,
    Mul,
    Not,
    Ode,
    Or,
    Par,
    Prefix,
    Problem,
    Program,
    Proj,
    RandomAssign,
    Receive,
    Send,
    Seq,
    Sub,
    Term,
    Test,
    Time,
    Truth,
    Val,
    Var,
    last_index,
    match_if,
)

# Formula levels: iff < implies < or < and < unary < atom.
_F_IFF, _F_IMPLIES, _F_OR, _F_AND, _F_UNARY, _F_ATOM = range(1, 7)
# Term levels: sum < product < unary < postfix < primary.
_T_SUM, _T_PRODUCT, _T_UNARY, _T_POSTFIX, _T_PRIMARY = range(1, 6)
# Program levels: par < choice < seq < atom.
_P_PAR, _P_CHOICE, _P_SEQ, _P_ATOM = range(1, 5)


def render(node: Union[Term, Program, Formula]) -> str:
    if isinstance(node, Term):
        return render_term(node)
    if isinstance(node, Program):
        return render_program(node)
    if isinstance(node, Formula):
        return render_formula(node)
    raise TypeError(f"cannot render {type(node).__name__}")


def _number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"({value.numerator}/{value.denominator})"


def _term_level(term: Term) -> int:
    match term:
        case Add() | Sub() | Concat():
            return _T_SUM
        case Mul():
            return _T_PRODUCT
        case Const(value, _) if value < 0:
            return _T_UNARY
        case Proj():
            return _T_POSTFIX
    return _T_PRIMARY


def _t(term: Term, level: int) -> str:
    text = render_term(term)
    return f"({text})" if _term_level(term) < level else text


def _accessor(name: str, trace: Term, index: Term) -> str:
    if index == last_index(trace):
        return f"{name}({render_term(trace)})"
    return f"{name}({render_term(trace)}[{render_term(index)}])"


def render_term(term: Term) -> str:
    match term:
        case Var(name, _):
            return name
        case Const(value, _):
            if value < 0:
                return f"-{_number(-value)}"
            return _number(value)
        case Add(l, r) | Concat(l, r):
            return f"{_t(l, _T_SUM)} + {_t(r, _T_PRODUCT)}"
        case Sub(l, r):
            return f"{_t(l, _T_SUM)} - {_t(r, _T_PRODUCT)}"
        case Mul(l, r):
            return f"{_t(l, _T_PRODUCT)}*{_t(r, _T_UNARY)}"
        case Val(t, i):
            return _accessor("val", t, i)
        case Time(t, i):
            return _accessor("time", t, i)
        case ChanAt(t, i):
            return _accessor("chan", t, i)
        case Len(t):
            return f"len({render_term(t)})"
        case ChanName(name):
            return name
        case Empty():
            return "eps"
        case Item(chan, value, stamp):
            return f"<{chan}, {render_term(value)}, {render_term(stamp)}>"
        case Proj(t, chans):
            return f"{_t(t, _T_POSTFIX)}|{{{', '.join(sorted(chans))}}}"
    raise TypeError(f"cannot render term {term!r}")


def _formula_level(formula: Formula) -> int:
    match formula:
        case Iff():
            return _F_IFF
        case Implies():
            return _F_IMPLIES
        case Or():
            return _F_OR
        case And():
            return _F_AND
        case Not() | Forall() | Exists() | Box() | AcBox():
            return _F_UNARY
    return _F_ATOM


def _f(formula: Formula, level: int) -> str:
    text = render_formula(formula)
    return f"({text})" if _formula_level(formula) < level else text


def render_formula(formula: Formula) -> str:
    match formula:
        case Truth(value):
            return "true" if value else "false"
        case Cmp(op, l, r):
            return f"{render_term(l)} {op} {render_term(r)}"
        case Prefix(l, r):
            return f"{render_term(l)} prefixof {render_term(r)}"
        case Not(a):
            return f"!{_f(a, _F_UNARY)}"
        case And(l, r):
            return f"{_f(l, _F_AND)} & {_f(r, _F_UNARY)}"
        case Or(l, r):
            return f"{_f(l, _F_OR)} | {_f(r, _F_AND)}"
        case Implies(l, r):
            return f"{_f(l, _F_OR)} -> {_f(r, _F_IMPLIES)}"
        case Iff(l, r):
            return f"{_f(l, _F_IMPLIES)} <-> {_f(r, _F_IMPLIES)}"
        case Forall(v, b):
            return f"forall {v.name}:{v.sort} {_f(b, _F_UNARY)}"
        case Exists(v, b):
            return f"exists {v.name}:{v.sort} {_f(b, _F_UNARY)}"
        case Box(p, post):
            return f"[{render_program(p)}] {_f(post, _F_UNARY)}"
        case AcBox(p, a, c, post):
            return f"[{render_program(p)}]{{{render_formula(a)}, {render_formula(c)}}} {_f(post, _F_UNARY)}"
    raise TypeError(f"cannot render formula {formula!r}")


def _program_level(program: Program) -> int:
    if match_if(program) is not None:
        return _P_ATOM
    match program:
        case Par():
            return _P_PAR
        case Choice():
            return _P_CHOICE
        case Seq():
            return _P_SEQ
    return _P_ATOM


def _p(program: Program, level: int) -> str:
    text = render_program(program)
    return f"{{{text}}}" if _program_level(program) < level else text


def render_program(program: Program) -> str:
    sugar = match_if(program)
    if sugar is not None:
        cond, body = sugar
        return f"if ({render_formula(cond)}) {{{render_program(body)}}}"
    match program:
        case Assign(x, e):
            return f"{x.name} := {render_term(e)}"
        case RandomAssign(x):
            return f"{x.name} := *"
        case Test(Truth(True)):
            return "skip"
        case Test(cond):
            return f"?{_f(cond, _F_UNARY)}"
        case Ode(bindings, constraint):
            eqs = ", ".join(f"{x.name}' = {render_term(e)}" for x, e in bindings)
            if constraint == Truth(True):
                return f"{{{eqs}}}"
            return f"{{{eqs} & {render_formula(constraint)}}}"
        case Seq(l, r):
            return f"{_p(l, _P_SEQ)}; {_p(r, _P_ATOM)}"
        case Choice(l, r):
            return f"{_p(l, _P_CHOICE)} ++ {_p(r, _P_SEQ)}"
        case Par(l, r):
            return f"{_p(l, _P_PAR)} || {_p(r, _P_CHOICE)}"
        case Loop(body):
            return f"{{{render_program(body)}}}*"
        case Send(chan, h, e):
            return f"{chan}({h.name})!{render_term(e)}"
        case Receive(chan, h, x):
            return f"{chan}({h.name})?{x.name}"
    raise TypeError(f"cannot render program {program!r}")


def render_declarations(decls: Declarations) -> str:
    """Declarations preamble, one declaration per line, in declaration order."""
    lines = []
    recorder = decls.recorder
    variables = [f"{name}:{sort}" for name, sort in decls.variables.items() if name != recorder]
    if variables:
        lines.append("var " + ", ".join(variables) + ";")
    if decls.channels:
        lines.append("chan " + ", ".join(decls.channels) + ";")
    if recorder is not None:
        lines.append(f"recorder {recorder};")
    for name, definition in decls.programs.items():
        head = f"{name}({definition.param.name})" if definition.param is not None else name
        lines.append(f"program {head} = {render_program(definition.body)};")
    for name, formula in decls.formulas.items():
        lines.append(f"formula {name} = {render_formula(formula)};")
    return "\n".join(lines)


def render_problem(problem: Problem) -> str:
    preamble = render_declarations(problem.decls)
    body = render_formula(problem.formula)
    return f"{preamble}\n\n{body}\n" if preamble else f"{body}\n"
