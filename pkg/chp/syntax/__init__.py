"""dLCHP syntax: AST, parser, renderer and substitution."""

from .ast import *  # noqa: F401,F403
from .parser import (
    declarations,
    parse_formula,
    parse_problem,
    parse_program,
    parse_program_file,
    parse_term,
)
from .render import render, render_declarations, render_problem
from .subst import fresh_name, fresh_var, names_in, rename_free, rename_recorder, substitute

__all__ = [
    "declarations",
    "parse_formula",
    "parse_problem",
    "parse_program",
    "parse_program_file",
    "parse_term",
    "render",
    "render_declarations",
    "render_problem",
    "fresh_name",
    "fresh_var",
    "names_in",
    "rename_free",
    "rename_recorder",
    "substitute",
]
