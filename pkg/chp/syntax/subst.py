"""
Capture-avoiding substitution, variable renaming and fresh names.

`substitute` replaces free occurrences of variables by terms. Quantifier
binders are renamed apart when they would capture; a modality whose
program binds a substituted variable, or a variable of a replacement term,
is a clash and raises SubstitutionError naming the culprit.

`rename_free` is uniform renaming to a fresh variable: every occurrence of
the old variable is renamed, recorder and assignment positions in programs
included, except below quantifiers that rebind it.
"""

from __future__ import annotations

import itertools
from typing import Dict, Iterable, Mapping, Set, Union

from ..shared.errors import SubstitutionError
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
    Program,
    Proj,
    RandomAssign,
    Receive,
    Send,
    Seq,
    Sort,
    Sub,
    Term,
    Test,
    Time,
    Truth,
    Val,
    Var,
    subterms,
)

Node = Union[Term, Program, Formula]


def term_vars(term: Term) -> Set[Var]:
    return {t for t in subterms(term) if isinstance(t, Var)}


def is_program_term(term: Term) -> bool:
    return all(
        t.sort == Sort.REAL and not isinstance(t, (Val, Time))
        for t in subterms(term)
    )


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def substitute(node: Node, mapping: Mapping[Var, Term], allow_mu: bool = False) -> Node:
    """Replace free occurrences of the mapped variables.

    `allow_mu` admits substituting global time, as needed for mu := mu + t.
    """
    for var, term in mapping.items():
        if var.sort != term.sort:
            raise SubstitutionError(f"cannot substitute {term} ({term.sort}) for {var.name} ({var.sort})", var.name)
        if var.is_global_time and not allow_mu:
            raise SubstitutionError("global time mu cannot be substituted", var.name)
    mapping = {var: term for var, term in mapping.items() if var != term}
    if not mapping:
        return node
    if isinstance(node, Term):
        return _subst_term(node, dict(mapping))
    if isinstance(node, Formula):
        _check_not_rebound(node, mapping)
        return _subst_formula(node, dict(mapping))
    return _subst_program(node, dict(mapping))


def _subst_term(term: Term, mapping: Dict[Var, Term]) -> Term:
    match term:
        case Var():
            return mapping.get(term, term)
        case Const() | ChanName() | Empty():
            return term
        case Add(l, r):
            return Add(_subst_term(l, mapping), _subst_term(r, mapping))
        case Sub(l, r):
            return Sub(_subst_term(l, mapping), _subst_term(r, mapping))
        case Mul(l, r):
            return Mul(_subst_term(l, mapping), _subst_term(r, mapping))
        case Concat(l, r):
            return Concat(_subst_term(l, mapping), _subst_term(r, mapping))
        case Val(t, i):
            return Val(_subst_term(t, mapping), _subst_term(i, mapping))
        case Time(t, i):
            return Time(_subst_term(t, mapping), _subst_term(i, mapping))
        case ChanAt(t, i):
            return ChanAt(_subst_term(t, mapping), _subst_term(i, mapping))
        case Len(t):
            return Len(_subst_term(t, mapping))
        case Item(c, v, s):
            return Item(c, _subst_term(v, mapping), _subst_term(s, mapping))
        case Proj(t, chans):
            return Proj(_subst_term(t, mapping), chans)
    raise TypeError(f"unknown term {term!r}")


def _relevant(node: Node, mapping: Dict[Var, Term]) -> Dict[Var, Term]:
    from ..static import free_vars

    free = free_vars(node)
    return {x: t for x, t in mapping.items() if free.contains(x)}


def _subst_formula(formula: Formula, mapping: Dict[Var, Term]) -> Formula:
    match formula:
        case Truth():
            return formula
        case Cmp(op, l, r):
            return Cmp(op, _subst_term(l, mapping), _subst_term(r, mapping))
        case Prefix(l, r):
            return Prefix(_subst_term(l, mapping), _subst_term(r, mapping))
        case Not(a):
            return Not(_subst_formula(a, mapping))
        case And(l, r):
            return And(_subst_formula(l, mapping), _subst_formula(r, mapping))
        case Or(l, r):
            return Or(_subst_formula(l, mapping), _subst_formula(r, mapping))
        case Implies(l, r):
            return Implies(_subst_formula(l, mapping), _subst_formula(r, mapping))
        case Iff(l, r):
            return Iff(_subst_formula(l, mapping), _subst_formula(r, mapping))
        case Forall(v, b) | Exists(v, b):
            inner = {x: t for x, t in mapping.items() if x != v}
            inner = _relevant(b, inner)
            if not inner:
                return formula
            build = type(formula)
            captured = set().union(*(term_vars(t) for t in inner.values()))
            if v in captured:
                fresh = Var(fresh_name(v.name, names_in(b, *inner.values(), *inner)), v.sort)
                b = rename_free(b, v, fresh)
                v = fresh
            return build(v, _subst_formula(b, inner))
        case Box(p, post):
            relevant = _relevant(formula, mapping)
            if not relevant:
                return formula
            _check_admissible(p, relevant)
            return Box(_subst_program(p, relevant), _subst_formula(post, relevant))
        case AcBox(p, a, c, post):
            relevant = _relevant(formula, mapping)
            if not relevant:
                return formula
            _check_admissible(p, relevant)
            return AcBox(
                _subst_program(p, relevant),
                _subst_formula(a, relevant),
                _subst_formula(c, relevant),
                _subst_formula(post, relevant),
            )
    raise TypeError(f"unknown formula {formula!r}")


def _check_not_rebound(formula: Formula, mapping: Dict[Var, Term]) -> None:
    """A mapped variable must not occur after a program that binds it, even where it is not free."""
    match formula:
        case Not(a):
            _check_not_rebound(a, mapping)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            _check_not_rebound(l, mapping)
            _check_not_rebound(r, mapping)
        case Forall(v, b) | Exists(v, b):
            _check_not_rebound(b, {x: t for x, t in mapping.items() if x != v})
        case Box(p, post):
            _check_after(p, mapping, post)
        case AcBox(p, a, c, post):
            _check_after(p, mapping, a, c, post)


def _check_after(program: Program, mapping: Dict[Var, Term], *parts: Formula) -> None:
    from ..static import bound_vars, free_vars

    bound = bound_vars(program)
    for var in mapping:
        if bound.contains(var) and any(free_vars(part).contains(var) for part in parts):
            raise SubstitutionError(f"{var.name} is bound by the program {program}", var.name)
    for part in parts:
        _check_not_rebound(part, mapping)


def _check_admissible(program: Program, mapping: Dict[Var, Term]) -> None:
    from ..static import bound_vars

    bound = bound_vars(program)
    for var, term in mapping.items():
        if bound.contains(var):
            raise SubstitutionError(f"{var.name} is bound by the program {program}", var.name)
        for clash in term_vars(term):
            if bound.contains(clash):
                raise SubstitutionError(
                    f"substituting {term} for {var.name} would capture {clash.name}", clash.name
                )


def _program_term(term: Term, mapping: Dict[Var, Term]) -> Term:
    result = _subst_term(term, mapping)
    if result != term and not is_program_term(result):
        raise SubstitutionError(f"{result} is not a polynomial over real variables", str(term))
    return result


def _program_condition(cond: Formula, mapping: Dict[Var, Term]) -> Formula:
    from .parser import is_real_arithmetic

    result = _subst_formula(cond, _relevant(cond, mapping))
    if result != cond and not is_real_arithmetic(result):
        raise SubstitutionError(f"{result} is not real arithmetic", str(cond))
    return result


def _subst_program(program: Program, mapping: Dict[Var, Term]) -> Program:
    match program:
        case Assign(x, e):
            return Assign(x, _program_term(e, mapping))
        case RandomAssign():
            return program
        case Test(cond):
            return Test(_program_condition(cond, mapping))
        case Ode(bindings, constraint):
            return Ode(
                tuple((x, _program_term(e, mapping)) for x, e in bindings),
                _program_condition(constraint, mapping),
            )
        case Seq(l, r):
            return Seq(_subst_program(l, mapping), _subst_program(r, mapping))
        case Choice(l, r):
            return Choice(_subst_program(l, mapping), _subst_program(r, mapping))
        case Par(l, r):
            return Par(_subst_program(l, mapping), _subst_program(r, mapping))
        case Loop(body):
            return Loop(_subst_program(body, mapping))
        case Send(chan, h, e):
            return Send(chan, h, _program_term(e, mapping))
        case Receive():
            return program
    raise TypeError(f"unknown program {program!r}")


# ---------------------------------------------------------------------------
# Renaming
# ---------------------------------------------------------------------------


def rename_free(node: Node, old: Var, new: Var) -> Node:
    """Uniformly rename `old` to the fresh variable `new`."""
    if old.sort != new.sort:
        raise SubstitutionError(f"cannot rename {old.name}:{old.sort} to {new.name}:{new.sort}", old.name)
    if old == new:
        return node
    if isinstance(node, Term):
        return _subst_term(node, {old: new})
    if isinstance(node, Formula):
        return _rename_formula(node, old, new)
    return _rename_program(node, old, new)


def rename_recorder(program: Program, old: Var, new: Var) -> Program:
    """Instantiate a program abbreviation's recorder parameter."""
    return _rename_program(program, old, new)


def _rename_var(x: Var, old: Var, new: Var) -> Var:
    return new if x == old else x


def _rename_formula(formula: Formula, old: Var, new: Var) -> Formula:
    r = lambda f: _rename_formula(f, old, new)  # noqa: E731
    t = lambda e: _subst_term(e, {old: new})  # noqa: E731
    match formula:
        case Truth():
            return formula
        case Cmp(op, a, b):
            return Cmp(op, t(a), t(b))
        case Prefix(a, b):
            return Prefix(t(a), t(b))
        case Not(a):
            return Not(r(a))
        case And(a, b):
            return And(r(a), r(b))
        case Or(a, b):
            return Or(r(a), r(b))
        case Implies(a, b):
            return Implies(r(a), r(b))
        case Iff(a, b):
            return Iff(r(a), r(b))
        case Forall(v, b) | Exists(v, b):
            if v == old:
                return formula
            return type(formula)(v, r(b))
        case Box(p, post):
            return Box(_rename_program(p, old, new), r(post))
        case AcBox(p, a, c, post):
            return AcBox(_rename_program(p, old, new), r(a), r(c), r(post))
    raise TypeError(f"unknown formula {formula!r}")


def _rename_program(program: Program, old: Var, new: Var) -> Program:
    t = lambda e: _subst_term(e, {old: new})  # noqa: E731
    v = lambda x: _rename_var(x, old, new)  # noqa: E731
    match program:
        case Assign(x, e):
            return Assign(v(x), t(e))
        case RandomAssign(x):
            return RandomAssign(v(x))
        case Test(cond):
            return Test(_rename_formula(cond, old, new))
        case Ode(bindings, constraint):
            return Ode(tuple((v(x), t(e)) for x, e in bindings), _rename_formula(constraint, old, new))
        case Seq(a, b):
            return Seq(_rename_program(a, old, new), _rename_program(b, old, new))
        case Choice(a, b):
            return Choice(_rename_program(a, old, new), _rename_program(b, old, new))
        case Par(a, b):
            return Par(_rename_program(a, old, new), _rename_program(b, old, new))
        case Loop(body):
            return Loop(_rename_program(body, old, new))
        case Send(chan, h, e):
            return Send(chan, v(h), t(e))
        case Receive(chan, h, x):
            return Receive(chan, v(h), v(x))
    raise TypeError(f"unknown program {program!r}")


# ---------------------------------------------------------------------------
# Names
# ---------------------------------------------------------------------------


def names_in(*nodes: Union[Node, Var]) -> Set[str]:
    """Every variable name occurring in the nodes, bound occurrences included."""
    names: Set[str] = set()
    for node in nodes:
        _collect_names(node, names)
    return names


def _collect_names(node, names: Set[str]) -> None:
    if isinstance(node, Term):
        names.update(v.name for v in term_vars(node))
        return
    match node:
        case Cmp(_, a, b) | Prefix(a, b):
            _collect_names(a, names)
            _collect_names(b, names)
        case Not(a):
            _collect_names(a, names)
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b):
            _collect_names(a, names)
            _collect_names(b, names)
        case Forall(v, b) | Exists(v, b):
            names.add(v.name)
            _collect_names(b, names)
        case Box(p, post):
            _collect_names(p, names)
            _collect_names(post, names)
        case AcBox(p, a, c, post):
            for part in (p, a, c, post):
                _collect_names(part, names)
        case Assign(x, e):
            names.add(x.name)
            _collect_names(e, names)
        case RandomAssign(x):
            names.add(x.name)
        case Test(cond):
            _collect_names(cond, names)
        case Ode(bindings, constraint):
            for x, e in bindings:
                names.add(x.name)
                _collect_names(e, names)
            _collect_names(constraint, names)
        case Seq(a, b) | Choice(a, b) | Par(a, b):
            _collect_names(a, names)
            _collect_names(b, names)
        case Loop(body):
            _collect_names(body, names)
        case Send(_, h, e):
            names.add(h.name)
            _collect_names(e, names)
        case Receive(_, h, x):
            names.update((h.name, x.name))


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """`base` itself if free, else the first of base_1, base_2, ... not in `avoid`."""
    taken = set(avoid)
    if base not in taken:
        return base
    for i in itertools.count(1):
        candidate = f"{base}_{i}"
        if candidate not in taken:
            return candidate
    raise AssertionError("unreachable")


def fresh_var(base: Var, *context: Union[Node, Var], avoid: Iterable[str] = ()) -> Var:
    return Var(fresh_name(base.name, names_in(*context) | set(avoid)), base.sort)
