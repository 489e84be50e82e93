"""Sequent-calculus proof kernel: goals, rules and proof scripts."""

from .rules import apply, close_oracle, lookup, rule_names
from .script import ScriptReport, check_script, parse_script, render_script
from .sequent import Goal, Position, ProofState, RuleApp, Sequent, audit_freshness, init

__all__ = [
    "Goal",
    "Position",
    "ProofState",
    "RuleApp",
    "ScriptReport",
    "Sequent",
    "apply",
    "audit_freshness",
    "check_script",
    "close_oracle",
    "init",
    "lookup",
    "parse_script",
    "render_script",
    "rule_names",
]
