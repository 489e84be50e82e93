"""
Proof scripts: parsing and replay.

A script is a sequence of items, one per line:

    acParCompRight(a1="...", a2="...")   # a rule, applied to the first open goal
    assign @4(R0.1)                       # explicit goal and position
    branch { ... } { ... }                # one block per open goal, in order
    oracle real                           # close by arithmetic (PA, real, TA or auto)
    oracle auto *                         # ... every open goal in the focused subtree
    qed                                   # assert the focused subtree is closed

Positional arguments that look like positions (R0, L1.0.1) address the
formula; other positional arguments fill the rule's positional keys.
Values are bare words or double-quoted strings.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import lark as L

from ..arith.dispatch import METHODS
from ..shared.constants import REPORT_SCHEMA
from ..shared.errors import ChpError, ParseError, RuleError
from ..syntax.ast import Declarations, Formula, Problem
from .rules import apply, close_oracle, lookup
from .sequent import Position, ProofState, RuleApp, audit_freshness, init

logger = logging.getLogger(__name__)

SCRIPT_GRAMMAR = r"""
start: item*

?item: step
     | branch
     | oracle
     | qed

step: WORD goal_ref? args?
goal_ref: "@" WORD
args: "(" [arg ("," arg)*] ")"
arg: WORD "=" value                 -> keyword
   | value                          -> positional
?value: WORD | STRING

branch: "branch" block+
block: "{" item* "}"
oracle: "oracle" WORD (goal_ref | EVERY)?
qed: "qed"

WORD: /-?[A-Za-z_0-9.]+/
EVERY: "*"
STRING: /"(\\.|[^"\\])*"/
COMMENT: /#[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_PARSER = L.Lark(SCRIPT_GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=False)


# ---------------------------------------------------------------------------
# Script items
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    name: str
    goal: Optional[int] = None
    positional: Tuple[str, ...] = ()
    keywords: Tuple[Tuple[str, str], ...] = ()
    line: Optional[int] = None

    def to_app(self) -> RuleApp:
        """Resolve positional arguments against the rule's signature."""
        spec = lookup(self.name)
        position: Optional[Position] = None
        args: Dict[str, Any] = dict(self.keywords)
        rest: List[str] = []
        for value in self.positional:
            if position is None and Position.looks_like(value):
                position = Position.parse(value)
            else:
                rest.append(value)
        if len(rest) > len(spec.positional):
            raise RuleError(spec.name, f"too many positional arguments ({len(rest)})")
        for key, value in zip(spec.positional, rest):
            if key in args:
                raise RuleError(spec.name, f"argument '{key}' given twice")
            args[key] = value
        return RuleApp.of(self.name, position, self.goal, **args)

    def __str__(self) -> str:
        text = self.name + (f" @{self.goal}" if self.goal is not None else "")
        parts = [_quote(v) for v in self.positional] + [f"{k}={_quote(v)}" for k, v in self.keywords]
        return text + (f"({', '.join(parts)})" if parts else "")


@dataclass(frozen=True)
class Branch:
    blocks: Tuple[Tuple["Item", ...], ...]
    line: Optional[int] = None


@dataclass(frozen=True)
class Oracle:
    which: str = "auto"
    goal: Optional[int] = None
    line: Optional[int] = None
    every: bool = False

    def __str__(self) -> str:
        if self.every:
            return f"oracle {self.which} *"
        return f"oracle {self.which}" + (f" @{self.goal}" if self.goal is not None else "")


@dataclass(frozen=True)
class Qed:
    line: Optional[int] = None


Item = Union[Step, Branch, Oracle, Qed]


def _quote(value: str) -> str:
    if Position.looks_like(value) or value.replace("_", "").replace(".", "").replace("-", "").isalnum():
        return value
    return '"' + value.replace('"', '\\"') + '"'


def _unquote(token: L.Token) -> str:
    text = str(token)
    if token.type == "STRING":
        return text[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    return text


def _goal_id(node) -> int:
    token = node.children[0]
    if not token.isdigit():
        raise ParseError(f"goal reference @{token} is not a number", token.line, token.column)
    return int(token)


def _items(nodes) -> Tuple[Item, ...]:
    return tuple(_item(n) for n in nodes)


def _item(node) -> Item:
    line = node.meta.line if not node.meta.empty else None
    if node.data == "step":
        name, *rest = node.children
        goal, positional, keywords = None, [], []
        for child in rest:
            if child.data == "goal_ref":
                goal = _goal_id(child)
                continue
            for arg in child.children:
                if arg.data == "keyword":
                    keywords.append((str(arg.children[0]), _unquote(arg.children[1])))
                else:
                    positional.append(_unquote(arg.children[0]))
        return Step(str(name), goal, tuple(positional), tuple(keywords), line)
    if node.data == "branch":
        return Branch(tuple(_items(block.children) for block in node.children), line)
    if node.data == "oracle":
        which, goal, every = "auto", None, False
        for child in node.children:
            if isinstance(child, L.Token) and child.type == "EVERY":
                every = True
            elif isinstance(child, L.Token):
                which = str(child)
            else:
                goal = _goal_id(child)
        if which not in METHODS:
            raise ParseError(f"unknown oracle '{which}' (expected {', '.join(METHODS)})", line)
        return Oracle(which, goal, line, every)
    return Qed(line)


def parse_script(text: str) -> Tuple[Item, ...]:
    try:
        tree = _PARSER.parse(text)
    except L.exceptions.UnexpectedInput as e:
        message = str(e).strip().splitlines()[0] if str(e).strip() else "syntax error"
        raise ParseError(message, getattr(e, "line", None), getattr(e, "column", None)) from None
    return _items(tree.children)


def render_script(items: Sequence[Item], indent: int = 0) -> str:
    pad = "  " * indent
    lines: List[str] = []
    for item in items:
        if isinstance(item, Branch):
            lines.append(f"{pad}branch")
            for block in item.blocks:
                lines.append(f"{pad}{{")
                body = render_script(block, indent + 1)
                if body:
                    lines.append(body)
                lines.append(f"{pad}}}")
        elif isinstance(item, Qed):
            lines.append(f"{pad}qed")
        else:
            lines.append(f"{pad}{item}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass
class Failure:
    message: str
    line: Optional[int] = None
    step: str = ""
    goal: Optional[int] = None
    sequent: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"message": self.message, "line": self.line, "step": self.step, "goal": self.goal, "sequent": self.sequent}

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        text = f"{where}{self.step + ': ' if self.step else ''}{self.message}"
        if self.goal is not None:
            text += f"\n  at @{self.goal}: {self.sequent}"
        return text


@dataclass
class ScriptReport:
    success: bool
    state: Optional[ProofState] = None
    steps: int = 0
    rules_used: Counter = field(default_factory=Counter)
    oracle_closed: int = 0
    failure: Optional[Failure] = None
    audit: List[str] = field(default_factory=list)

    def leaves(self) -> Dict[str, int]:
        """Closed leaves by closing rule."""
        counts: Counter = Counter()
        if self.state is not None:
            for g in self.state.nodes():
                if g.closed_by is not None:
                    counts[g.closed_by] += 1
        return dict(sorted(counts.items()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "success": self.success,
            "steps": self.steps,
            "rules_used": dict(sorted(self.rules_used.items())),
            "oracle_closed": self.oracle_closed,
            "leaves": self.leaves(),
            "open_goals": self.state.open_goals() if self.state is not None else [],
            "failure": self.failure.to_dict() if self.failure else None,
            "freshness_audit": self.audit,
            "goals": [g.to_dict() for g in self.state.nodes()] if self.state is not None else [],
        }


class StepFailed(Exception):
    def __init__(self, failure: Failure):
        self.failure = failure


class ScriptRunner:
    """Replays script items against a proof state, tracking the focused subtree."""

    def __init__(self, state: ProofState, smt=None):
        self.state = state
        self.smt = smt
        self.steps = 0
        self.rules_used: Counter = Counter()
        self.oracle_closed = 0

    def _fail(self, message: str, item, goal_id: Optional[int], step: str = "") -> StepFailed:
        sequent = str(self.state.goal(goal_id).sequent) if goal_id is not None and goal_id in self.state.goals else ""
        return StepFailed(Failure(message, getattr(item, "line", None), step, goal_id, sequent))

    def run(self, items: Sequence[Item], focus: Optional[int] = None) -> None:
        for item in items:
            if isinstance(item, Step):
                self.step(item, focus)
            elif isinstance(item, Oracle):
                self.oracle(item, focus)
            elif isinstance(item, Branch):
                self.branch(item, focus)
            else:
                pending = self.state.open_goals(focus)
                if pending:
                    raise self._fail(f"qed with {len(pending)} open goal(s)", item, pending[0], "qed")

    def step(self, item: Step, focus: Optional[int]) -> None:
        goal_id = item.goal if item.goal is not None else self.state.first_open(focus)
        if goal_id is None:
            raise self._fail("no open goal", item, None, str(item))
        try:
            app = item.to_app()
            if app.goal is None:
                app = RuleApp(app.name, app.position, app.args, goal_id)
            self.state = apply(self.state, app)
        except ChpError as e:
            raise self._fail(str(e), item, goal_id, str(item)) from None
        self.steps += 1
        self.rules_used[lookup(item.name).name] += 1

    def oracle(self, item: Oracle, focus: Optional[int]) -> None:
        if item.every:
            pending = self.state.open_goals(focus)
            if not pending:
                raise self._fail("no open goal", item, None, str(item))
            for goal_id in pending:
                self._close(item, goal_id)
            return
        goal_id = item.goal if item.goal is not None else self.state.first_open(focus)
        if goal_id is None:
            raise self._fail("no open goal", item, None, str(item))
        self._close(item, goal_id)

    def _close(self, item: Oracle, goal_id: int) -> None:
        self.state = close_oracle(self.state, goal_id, item.which, self.smt)
        goal = self.state.goal(goal_id)
        if goal.closed_by is None:
            raise self._fail(goal.note or "oracle did not close the goal", item, goal_id, str(item))
        self.steps += 1
        self.oracle_closed += 1
        self.rules_used["oracle"] += 1

    def branch(self, item: Branch, focus: Optional[int]) -> None:
        pending = self.state.open_goals(focus)
        if len(pending) != len(item.blocks):
            raise self._fail(
                f"branch has {len(item.blocks)} block(s) but there are {len(pending)} open goal(s)",
                item, pending[0] if pending else None, "branch",
            )
        for goal_id, block in zip(pending, item.blocks):
            self.run(block, goal_id)


def _start(problem: Union[Problem, Formula], decls: Optional[Declarations]) -> ProofState:
    if isinstance(problem, Problem):
        return init(problem.formula, problem.decls)
    return init(problem, decls)


def check_script(
    problem: Union[Problem, Formula],
    script: Union[str, Sequence[Item]],
    smt=None,
    decls: Optional[Declarations] = None,
) -> ScriptReport:
    """Replay a script; never raises for problems in the proof itself."""
    try:
        items = parse_script(script) if isinstance(script, str) else tuple(script)
        runner = ScriptRunner(_start(problem, decls), smt)
    except ChpError as e:
        return ScriptReport(False, failure=Failure(str(e), getattr(e, "line", None)))

    failure: Optional[Failure] = None
    try:
        runner.run(items)
    except StepFailed as e:
        failure = e.failure
        logger.debug(f"Script failed: {failure}")

    state = runner.state
    if failure is None and not state.is_closed:
        first = state.first_open()
        failure = Failure(
            f"{len(state.open_goals())} goal(s) left open",
            goal=first,
            sequent=str(state.goal(first).sequent),
        )
    audit = audit_freshness(state)
    if failure is None and audit:
        failure = Failure("freshness audit failed: " + "; ".join(audit))
    return ScriptReport(
        success=failure is None,
        state=state,
        steps=runner.steps,
        rules_used=runner.rules_used,
        oracle_closed=runner.oracle_closed,
        failure=failure,
        audit=audit,
    )
