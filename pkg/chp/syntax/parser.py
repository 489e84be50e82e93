"""
Concrete syntax of dLCHP problems, programs and formulas.

Parsing is two-phase: lark produces a parse tree for the ASCII grammar
(documented in docs/grammar.md), then `_Elaborator` resolves identifiers
against the declarations, checks sorts and builds the immutable AST.

Usage:
    problem = parse_problem(Path("corpus/convoy.dlchp").read_text())
    decls, program = parse_program_file(text)
    phi = parse_formula("[x := 1] x >= 1", decls)
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import lark as L

from ..shared.errors import DeclarationError, IllFormedError, ParseError, SortError
from .ast import (
    EPS,
    FALSE,
    MU,
    MU_NAME,
    SKIP,
    TRUE,
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
    Declarations,
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
    ProgramDef,
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
    Val,
    Var,
    if_then,
    is_first_order,
    subterms,
    formula_terms,
    last_index,
)

logger = logging.getLogger(__name__)

GRAMMAR = r"""
problem: decl* formula
program_file: decl* program
formula_only: decl* formula
program_only: decl* program
term_only: term

decl: "var" var_decl ("," var_decl)* ";"                     -> var_decls
    | "chan" IDENT ("," IDENT)* ";"                           -> chan_decls
    | "recorder" IDENT ";"                                    -> recorder_decl
    | "program" IDENT "=" program ";"                         -> program_def
    | "program" IDENT "(" IDENT ")" "=" program ";"           -> program_def_param
    | "formula" IDENT "=" formula ";"                         -> formula_def

var_decl: IDENT ":" IDENT

?formula: implication
        | implication "<->" implication                       -> iff
?implication: disjunction
        | disjunction "->" implication                        -> implies
?disjunction: conjunction
        | disjunction "|" conjunction                         -> or_
?conjunction: unary
        | conjunction "&" unary                               -> and_
?unary: "!" unary                                             -> not_
      | "forall" IDENT ":" IDENT unary                        -> forall
      | "exists" IDENT ":" IDENT unary                        -> exists
      | "[" program "]" unary                                 -> box
      | "[" program "]" "{" formula "," formula "}" unary     -> acbox
      | fatom
?fatom: "true"                                                -> true
      | "false"                                               -> false
      | IDENT                                                 -> formula_ref
      | term cmp_op term                                      -> cmp
      | term "prefixof" term                                  -> prefix
      | "(" formula ")"
!cmp_op: "<=" | ">=" | "!=" | "<" | ">" | "="

?program: choice
        | program "||" choice                                 -> par
?choice: sequence
        | choice "++" sequence                                -> choice
?sequence: patom
        | sequence ";" patom                                  -> seq
?patom: IDENT ":=" term                                       -> assign
      | IDENT ":=" "*"                                        -> random_assign
      | "?" unary                                             -> test
      | "{" ode_eqs "}"                                       -> ode
      | "{" ode_eqs "&" formula "}"                           -> ode_constrained
      | "{" program "}"
      | "{" program "}" "*"                                   -> loop
      | IDENT "(" IDENT ")" "!" term                          -> send
      | IDENT "(" IDENT ")" "?" IDENT                         -> receive
      | IDENT "!" term                                        -> send_default
      | IDENT "?" IDENT                                       -> receive_default
      | IDENT                                                 -> program_ref
      | IDENT "(" IDENT ")"                                   -> program_ref
      | "skip"                                                -> skip
      | "if" "(" formula ")" "{" program "}"                  -> if_
ode_eqs: ode_eq ("," ode_eq)*
ode_eq: IDENT "'" "=" term

?term: sum
?sum: product
    | sum "+" product                                         -> add
    | sum "-" product                                         -> sub
?product: tunary
    | product "*" tunary                                      -> mul
    | product "/" tunary                                      -> div
?tunary: "-" tunary                                           -> neg
    | postfix
?postfix: primary
    | postfix _PROJ_OPEN chan_list "}"                        -> proj
    | postfix _PROJ_OPEN "}"                                  -> proj
chan_list: IDENT ("," IDENT)*
?primary: NUMBER                                              -> number
    | IDENT                                                   -> name
    | "eps"                                                   -> eps
    | "<" IDENT "," term "," term ">"                         -> item
    | "len" "(" term ")"                                      -> len
    | "val" "(" term ")"                                      -> val_last
    | "val" "(" term "[" term "]" ")"                         -> val
    | "time" "(" term ")"                                     -> time_last
    | "time" "(" term "[" term "]" ")"                        -> time
    | "chan" "(" term ")"                                     -> chan_last
    | "chan" "(" term "[" term "]" ")"                        -> chan_at
    | "(" term ")"

_PROJ_OPEN: /\|[ \t]*\{/
IDENT: /[A-Za-z_][A-Za-z_0-9]*/
NUMBER: /\d+(\.\d+)?/
COMMENT: /#[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_START_SYMBOLS = ["problem", "program_file", "formula_only", "program_only", "term_only"]

_PARSER = L.Lark(
    GRAMMAR,
    parser="earley",
    lexer="basic",
    start=_START_SYMBOLS,
    propagate_positions=True,
    maybe_placeholders=False,
)

SORT_NAMES = {"R": Sort.REAL, "Z": Sort.INT, "T": Sort.TRACE}


def _position(node) -> Tuple[Optional[int], Optional[int]]:
    if isinstance(node, L.Token):
        return node.line, node.column
    meta = getattr(node, "meta", None)
    if meta is not None and not getattr(meta, "empty", True):
        return meta.line, meta.column
    return None, None


def _is_literal(term: Term) -> bool:
    match term:
        case Const():
            return True
        case Add(l, r) | Sub(l, r) | Mul(l, r):
            return _is_literal(l) and _is_literal(r)
    return False


def retype_literal(term: Term, sort: Sort) -> Term:
    """Give a literal-only arithmetic term the requested numeric sort."""
    match term:
        case Const(value, _):
            if sort == Sort.INT and value.denominator != 1:
                raise SortError(f"non-integer literal {value} used as Int")
            return Const(value, sort)
        case Add(l, r):
            return Add(retype_literal(l, sort), retype_literal(r, sort))
        case Sub(l, r):
            return Sub(retype_literal(l, sort), retype_literal(r, sort))
        case Mul(l, r):
            return Mul(retype_literal(l, sort), retype_literal(r, sort))
    raise SortError(f"cannot retype {term} to {sort}")


def expect_sort(term: Term, sort: Sort, what: str = "term") -> Term:
    """Check (or coerce a literal to) the expected sort."""
    if term.sort == sort:
        return term
    if _is_literal(term) and sort in (Sort.REAL, Sort.INT):
        return retype_literal(term, sort)
    raise SortError(f"{what} {term} has sort {term.sort}, expected {sort}")


def _unify_numeric(left: Term, right: Term) -> Tuple[Term, Term]:
    if left.sort == right.sort:
        return left, right
    if _is_literal(left):
        return retype_literal(left, right.sort), right
    if _is_literal(right):
        return left, retype_literal(right, left.sort)
    raise SortError(f"sort mismatch between {left} ({left.sort}) and {right} ({right.sort})")


def _mentions_traces(term: Term) -> bool:
    for sub in subterms(term):
        if isinstance(sub, (Val, Time, Len, ChanAt, ChanName)) or sub.sort in (Sort.TRACE, Sort.INT):
            return True
    return False


def is_real_arithmetic(formula: Formula) -> bool:
    if not is_first_order(formula):
        return False
    return not any(_mentions_traces(t) for t in formula_terms(formula))


class _Elaborator:
    """Walks a lark parse tree and builds sorted AST nodes."""

    def __init__(self, decls: Declarations):
        self.decls = decls
        self.scopes: List[Dict[str, Var]] = []

    # -- helpers -----------------------------------------------------------

    def fail(self, node, message: str, error=ParseError):
        line, column = _position(node)
        if error is ParseError:
            raise ParseError(message, line, column)
        where = f" at line {line}, column {column}" if line is not None else ""
        raise error(f"{message}{where}")

    def lookup_var(self, token) -> Var:
        name = str(token)
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if name == MU_NAME:
            return MU
        if name in self.decls.variables:
            return Var(name, self.decls.variables[name])
        self.fail(token, f"undeclared variable '{name}'", DeclarationError)

    def channel(self, token) -> str:
        name = str(token)
        if name not in self.decls.channels:
            self.fail(token, f"undeclared channel '{name}'", DeclarationError)
        return name

    def sort_of(self, token) -> Sort:
        name = str(token)
        if name not in SORT_NAMES:
            self.fail(token, f"unknown sort '{name}' (expected R, Z or T)", SortError)
        return SORT_NAMES[name]

    def checked(self, node, thunk):
        """Run `thunk`, attaching the node position to sort errors."""
        try:
            return thunk()
        except SortError as e:
            line, column = _position(node)
            where = f" at line {line}, column {column}" if line is not None else ""
            raise SortError(f"{e}{where}") from None

    # -- declarations --------------------------------------------------------

    def declarations(self, decl_nodes) -> None:
        for node in decl_nodes:
            getattr(self, f"decl_{node.data}")(node)

    def declare(self, token, sort: Sort) -> None:
        name = str(token)
        if name == MU_NAME:
            self.fail(token, "'mu' is reserved for global time", DeclarationError)
        if name in self.decls.names():
            self.fail(token, f"'{name}' is already declared", DeclarationError)
        self.decls.variables[name] = sort

    def decl_var_decls(self, node) -> None:
        for var_decl in node.children:
            name, sort = var_decl.children
            self.declare(name, self.sort_of(sort))

    def decl_chan_decls(self, node) -> None:
        for token in node.children:
            name = str(token)
            if name in self.decls.names():
                self.fail(token, f"'{name}' is already declared", DeclarationError)
            self.decls.channels.append(name)

    def decl_recorder_decl(self, node) -> None:
        token = node.children[0]
        name = str(token)
        if name not in self.decls.variables:
            self.declare(token, Sort.TRACE)
        elif self.decls.variables[name] != Sort.TRACE:
            self.fail(token, f"recorder '{name}' must have sort T", SortError)
        self.decls.recorder = name

    def decl_program_def(self, node) -> None:
        name, body = node.children
        self._define_name(name)
        self.decls.programs[str(name)] = ProgramDef(None, self.program(body))

    def decl_program_def_param(self, node) -> None:
        name, param, body = node.children
        self._define_name(name)
        param_var = Var(str(param), Sort.TRACE)
        self.scopes.append({str(param): param_var})
        try:
            program = self.program(body)
        finally:
            self.scopes.pop()
        self.decls.programs[str(name)] = ProgramDef(param_var, program)

    def decl_formula_def(self, node) -> None:
        name, body = node.children
        self._define_name(name)
        self.decls.formulas[str(name)] = self.formula(body)

    def _define_name(self, token) -> None:
        name = str(token)
        if name in self.decls.names():
            self.fail(token, f"'{name}' is already declared", DeclarationError)

    # -- terms -------------------------------------------------------------

    def term(self, node) -> Term:
        if isinstance(node, L.Token):
            self.fail(node, f"unexpected token {node!r}")
        handler = getattr(self, f"term_{node.data}", None)
        if handler is None:
            self.fail(node, f"expected a term, found {node.data}")
        return handler(node)

    def term_number(self, node) -> Term:
        return Const(Fraction(str(node.children[0])))

    def term_name(self, node) -> Term:
        token = node.children[0]
        name = str(token)
        in_scope = any(name in scope for scope in self.scopes)
        if not in_scope and name in self.decls.channels:
            return ChanName(name)
        return self.lookup_var(token)

    def term_eps(self, node) -> Term:
        return EPS

    def _arith(self, node, build) -> Term:
        left, right = (self.term(child) for child in node.children)

        def make():
            l, r = _unify_numeric(left, right) if left.sort != right.sort else (left, right)
            if l.sort not in (Sort.REAL, Sort.INT):
                raise SortError(f"arithmetic on sort {l.sort}")
            return build(l, r)

        return self.checked(node, make)

    def term_add(self, node) -> Term:
        left, right = (self.term(child) for child in node.children)
        if left.sort == Sort.TRACE or right.sort == Sort.TRACE:
            if left.sort != right.sort:
                self.fail(node, f"cannot concatenate {left} and {right}", SortError)
            return Concat(left, right)
        return self._arith(node, Add)

    def term_sub(self, node) -> Term:
        return self._arith(node, Sub)

    def term_mul(self, node) -> Term:
        return self._arith(node, Mul)

    def term_div(self, node) -> Term:
        left, right = (self.term(child) for child in node.children)
        if not (isinstance(left, Const) and isinstance(right, Const)):
            self.fail(node, "division is only allowed between numeric literals (p/q)", SortError)
        if right.value == 0:
            self.fail(node, "division by zero")
        return Const(left.value / right.value)

    def term_neg(self, node) -> Term:
        arg = self.term(node.children[0])
        if isinstance(arg, Const):
            return Const(-arg.value, arg.sort)
        if arg.sort != Sort.REAL:
            self.fail(node, f"negation of {arg} (sort {arg.sort}); Int terms are natural", SortError)
        return Mul(Const(Fraction(-1)), arg)

    def term_proj(self, node) -> Term:
        trace = self.trace(node.children[0])
        chans = frozenset(self.channel(t) for t in (node.children[1].children if len(node.children) > 1 else []))
        return Proj(trace, chans)

    def trace(self, node) -> Term:
        term = self.term(node)
        if term.sort != Sort.TRACE:
            self.fail(node, f"{term} has sort {term.sort}, expected a trace", SortError)
        return term

    def index(self, node) -> Term:
        term = self.term(node)
        return self.checked(node, lambda: expect_sort(term, Sort.INT, "index"))

    def real_term(self, node) -> Term:
        term = self.term(node)
        return self.checked(node, lambda: expect_sort(term, Sort.REAL))

    def term_item(self, node) -> Term:
        chan, value, stamp = node.children
        return Item(self.channel(chan), self.real_term(value), self.real_term(stamp))

    def term_len(self, node) -> Term:
        return Len(self.trace(node.children[0]))

    def term_val(self, node) -> Term:
        return Val(self.trace(node.children[0]), self.index(node.children[1]))

    def term_val_last(self, node) -> Term:
        trace = self.trace(node.children[0])
        return Val(trace, last_index(trace))

    def term_time(self, node) -> Term:
        return Time(self.trace(node.children[0]), self.index(node.children[1]))

    def term_time_last(self, node) -> Term:
        trace = self.trace(node.children[0])
        return Time(trace, last_index(trace))

    def term_chan_at(self, node) -> Term:
        return ChanAt(self.trace(node.children[0]), self.index(node.children[1]))

    def term_chan_last(self, node) -> Term:
        trace = self.trace(node.children[0])
        return ChanAt(trace, last_index(trace))

    # -- formulas ------------------------------------------------------------

    def formula(self, node) -> Formula:
        if isinstance(node, L.Token):
            self.fail(node, f"unexpected token {node!r}")
        handler = getattr(self, f"formula_{node.data}", None)
        if handler is None:
            self.fail(node, f"expected a formula, found {node.data}")
        return handler(node)

    def formula_true(self, node) -> Formula:
        return TRUE

    def formula_false(self, node) -> Formula:
        return FALSE

    def formula_formula_ref(self, node) -> Formula:
        token = node.children[0]
        name = str(token)
        if name not in self.decls.formulas:
            self.fail(token, f"'{name}' is not a declared formula", DeclarationError)
        return self.decls.formulas[name]

    def formula_cmp(self, node) -> Formula:
        left_node, op_node, right_node = node.children
        op = str(op_node.children[0])
        left, right = self.term(left_node), self.term(right_node)

        def make():
            l, r = (left, right) if left.sort == right.sort else _unify_numeric(left, right)
            if op not in ("=", "!=") and l.sort not in (Sort.REAL, Sort.INT):
                raise SortError(f"ordering comparison on sort {l.sort}")
            return Cmp(op, l, r)

        return self.checked(node, make)

    def formula_prefix(self, node) -> Formula:
        left, right = node.children
        return Prefix(self.trace(left), self.trace(right))

    def formula_not_(self, node) -> Formula:
        return Not(self.formula(node.children[0]))

    def _binary(self, node, build) -> Formula:
        left, right = node.children
        return build(self.formula(left), self.formula(right))

    def formula_and_(self, node) -> Formula:
        return self._binary(node, And)

    def formula_or_(self, node) -> Formula:
        return self._binary(node, Or)

    def formula_implies(self, node) -> Formula:
        return self._binary(node, Implies)

    def formula_iff(self, node) -> Formula:
        return self._binary(node, Iff)

    def _quantifier(self, node, build) -> Formula:
        name, sort_token, body = node.children
        if str(name) == MU_NAME:
            self.fail(name, "'mu' cannot be quantified", DeclarationError)
        if str(name) in self.decls.channels or str(name) in self.decls.programs or str(name) in self.decls.formulas:
            self.fail(name, f"'{name}' is not a variable", DeclarationError)
        sort = self.sort_of(sort_token)
        var = Var(str(name), sort)
        self.scopes.append({str(name): var})
        try:
            return build(var, self.formula(body))
        finally:
            self.scopes.pop()

    def formula_forall(self, node) -> Formula:
        return self._quantifier(node, Forall)

    def formula_exists(self, node) -> Formula:
        return self._quantifier(node, Exists)

    def formula_box(self, node) -> Formula:
        program, post = node.children
        return Box(self.program(program), self.formula(post))

    def formula_acbox(self, node) -> Formula:
        program, assumption, commitment, post = node.children
        return AcBox(
            self.program(program),
            self.formula(assumption),
            self.formula(commitment),
            self.formula(post),
        )

    # -- programs ------------------------------------------------------------

    def program(self, node) -> Program:
        if isinstance(node, L.Token):
            self.fail(node, f"unexpected token {node!r}")
        handler = getattr(self, f"program_{node.data}", None)
        if handler is None:
            self.fail(node, f"expected a program, found {node.data}")
        return handler(node)

    def real_var(self, token) -> Var:
        var = self.lookup_var(token)
        if var.sort != Sort.REAL:
            self.fail(token, f"'{var.name}' has sort {var.sort}, programs only write real variables", SortError)
        return var

    def recorder(self, token) -> Var:
        var = self.lookup_var(token)
        if var.sort != Sort.TRACE:
            self.fail(token, f"recorder '{var.name}' must have sort T", SortError)
        return var

    def polynomial(self, node) -> Term:
        term = self.real_term(node)
        if _mentions_traces(term):
            self.fail(node, f"program term {term} must be a polynomial over real variables", SortError)
        return term

    def real_condition(self, node) -> Formula:
        formula = self.formula(node)
        if not is_real_arithmetic(formula):
            self.fail(node, "tests and domain constraints must be first-order real arithmetic", SortError)
        return formula

    def program_assign(self, node) -> Program:
        name, term = node.children
        return Assign(self.real_var(name), self.polynomial(term))

    def program_random_assign(self, node) -> Program:
        return RandomAssign(self.real_var(node.children[0]))

    def program_test(self, node) -> Program:
        return Test(self.real_condition(node.children[0]))

    def _ode(self, node, eqs, constraint: Formula) -> Program:
        bindings = []
        seen = set()
        for eq in eqs.children:
            name, rhs_node = eq.children
            var = self.real_var(name)
            if var in seen:
                self.fail(name, f"duplicate evolution of '{var.name}'", IllFormedError)
            seen.add(var)
            rhs = self.polynomial(rhs_node)
            if var == MU and rhs != Const(Fraction(1)):
                self.fail(name, "ill-formed ODE: global time must evolve with mu' = 1", IllFormedError)
            bindings.append((var, rhs))
        return Ode(tuple(bindings), constraint)

    def program_ode(self, node) -> Program:
        return self._ode(node, node.children[0], TRUE)

    def program_ode_constrained(self, node) -> Program:
        eqs, constraint = node.children
        return self._ode(node, eqs, self.real_condition(constraint))

    def program_loop(self, node) -> Program:
        return Loop(self.program(node.children[0]))

    def program_seq(self, node) -> Program:
        left, right = node.children
        return Seq(self.program(left), self.program(right))

    def program_choice(self, node) -> Program:
        left, right = node.children
        return Choice(self.program(left), self.program(right))

    def program_par(self, node) -> Program:
        left, right = node.children
        return Par(self.program(left), self.program(right))

    def program_send(self, node) -> Program:
        chan, recorder, term = node.children
        return Send(self.channel(chan), self.recorder(recorder), self.polynomial(term))

    def program_receive(self, node) -> Program:
        chan, recorder, var = node.children
        return Receive(self.channel(chan), self.recorder(recorder), self.real_var(var))

    def default_recorder(self, node) -> Var:
        if self.decls.recorder is None:
            self.fail(node, "communication without recorder needs a 'recorder h;' declaration")
        return Var(self.decls.recorder, Sort.TRACE)

    def program_send_default(self, node) -> Program:
        chan, term = node.children
        return Send(self.channel(chan), self.default_recorder(node), self.polynomial(term))

    def program_receive_default(self, node) -> Program:
        chan, var = node.children
        return Receive(self.channel(chan), self.default_recorder(node), self.real_var(var))

    def program_program_ref(self, node) -> Program:
        from .subst import rename_recorder

        token = node.children[0]
        name = str(token)
        if name not in self.decls.programs:
            self.fail(token, f"'{name}' is not a declared program", DeclarationError)
        definition = self.decls.programs[name]
        if len(node.children) == 1:
            return definition.body
        if definition.param is None:
            self.fail(token, f"program '{name}' takes no recorder argument")
        return rename_recorder(definition.body, definition.param, self.recorder(node.children[1]))

    def program_skip(self, node) -> Program:
        return SKIP

    def program_if_(self, node) -> Program:
        cond, body = node.children
        return if_then(self.real_condition(cond), self.program(body))


def _parse_tree(text: str, start: str):
    try:
        return _PARSER.parse(text, start=start)
    except L.exceptions.UnexpectedInput as e:
        message = str(e).strip().splitlines()[0] if str(e).strip() else "syntax error"
        raise ParseError(message, getattr(e, "line", None), getattr(e, "column", None)) from None


def _elaborate(text: str, start: str, decls: Optional[Declarations]):
    tree = _parse_tree(text, start)
    elaborator = _Elaborator(decls.copy() if decls is not None else Declarations())
    *decl_nodes, body = tree.children
    elaborator.declarations(decl_nodes)
    return elaborator, body


def parse_problem(text: str) -> Problem:
    """Parse a `.dlchp` problem: declarations preamble followed by one formula."""
    elaborator, body = _elaborate(text, "problem", None)
    formula = elaborator.formula(body)
    logger.debug(f"Parsed problem with {len(elaborator.decls.variables)} variables")
    return Problem(elaborator.decls, formula)


def parse_program_file(text: str) -> Tuple[Declarations, Program]:
    """Parse a `.chp` file: declarations preamble followed by one program."""
    elaborator, body = _elaborate(text, "program_file", None)
    return elaborator.decls, elaborator.program(body)


def parse_formula(text: str, decls: Optional[Declarations] = None) -> Formula:
    elaborator, body = _elaborate(text, "formula_only", decls)
    return elaborator.formula(body)


def parse_program(text: str, decls: Optional[Declarations] = None) -> Program:
    elaborator, body = _elaborate(text, "program_only", decls)
    return elaborator.program(body)


def parse_term(text: str, decls: Optional[Declarations] = None) -> Term:
    tree = _parse_tree(text, "term_only")
    elaborator = _Elaborator(decls.copy() if decls is not None else Declarations())
    return elaborator.term(tree.children[0])


def declarations(text: str) -> Declarations:
    """Parse a bare declarations preamble (e.g. `var x:R; chan c;`) followed by `true`."""
    elaborator, _ = _elaborate(f"{text}\ntrue", "formula_only", None)
    return elaborator.decls
