"""
Terminal proof session.

Every accepted command is recorded with its explicit goal id, so `save`
writes a script that `check_script` replays to the same proof state.

Commands:
    show                 open goals of the current state
    goal N               print goal @N
    rules                list rule names
    <rule> [@N](args)    apply a rule (same syntax as proof scripts)
    oracle PA|real|TA|auto [@N | *]
    undo                 drop the last accepted command
    save PATH            write the session as a proof script
    help, quit
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from .kernel import ProofState, init, parse_script, render_script, rule_names
from .kernel.script import Branch, Item, Oracle, ScriptRunner, Step, StepFailed
from .shared.errors import ChpError
from .syntax.ast import Problem

logger = logging.getLogger(__name__)

PROMPT = "chp> "


class Session:
    """A proof state plus the pinned script items that produced it."""

    def __init__(self, problem: Problem, smt=None):
        self.problem = problem
        self.smt = smt
        self.history: List[ProofState] = [init(problem.formula, problem.decls)]
        self.items: List[Item] = []

    @property
    def state(self) -> ProofState:
        return self.history[-1]

    def _pin(self, item: Item, focus: Optional[int] = None) -> Item:
        if item.goal is not None:
            return item
        goal_id = self.state.first_open(focus)
        if goal_id is None:
            raise ChpError("no open goal")
        if isinstance(item, Step):
            return Step(item.name, goal_id, item.positional, item.keywords, item.line)
        return Oracle(item.which, goal_id, item.line)

    def execute(self, line: str) -> ProofState:
        """Apply one rule or oracle command; raises ChpError if it is rejected."""
        items = parse_script(line)
        if len(items) != 1 or not isinstance(items[0], (Step, Oracle)):
            raise ChpError("enter exactly one rule application or oracle call")
        return self.perform(items[0])

    def perform(self, item: Item, focus: Optional[int] = None) -> ProofState:
        if isinstance(item, Oracle) and item.every:
            pending = self.state.open_goals(focus)
            if not pending:
                raise ChpError("no open goal")
            for goal_id in pending:
                self.perform(Oracle(item.which, goal_id, item.line))
            return self.state
        item = self._pin(item, focus)
        runner = ScriptRunner(self.state, self.smt)
        try:
            runner.run([item])
        except StepFailed as e:
            raise ChpError(str(e.failure)) from None
        self.history.append(runner.state)
        self.items.append(item)
        return runner.state

    def undo(self) -> bool:
        if not self.items:
            return False
        self.items.pop()
        self.history.pop()
        return True

    def script(self) -> str:
        return render_script(self.items) + ("\nqed\n" if self.state.is_closed else "\n")

    def save(self, path: Path) -> None:
        path.write_text(self.script())
        logger.info(f"Saved {len(self.items)} step(s) to {path}")


def _show(state: ProofState, write: Callable[[str], None]) -> None:
    pending = state.open_goals()
    if not pending:
        write("No open goals. Proof complete.")
        return
    write(f"{len(pending)} open goal(s):")
    for goal_id in pending:
        goal = state.goal(goal_id)
        write(f"  @{goal_id}: {goal.sequent}")
        if goal.note:
            write(f"        ({goal.note})")


def run_repl(
    session: Session,
    read: Callable[[str], str] = input,
    write: Callable[[str], None] = print,
) -> int:
    """Read-eval-print loop; returns 0 if the proof is closed on exit."""
    _show(session.state, write)
    while True:
        try:
            line = read(PROMPT).strip()
        except EOFError:
            break
        if not line or line.startswith("#"):
            continue
        command, _, rest = line.partition(" ")
        rest = rest.strip()
        if command in ("quit", "exit"):
            break
        if command == "help":
            write(__doc__.split("Commands:", 1)[1].rstrip())
        elif command == "show":
            _show(session.state, write)
        elif command == "rules":
            write(", ".join(rule_names()))
        elif command == "goal":
            try:
                write(str(session.state.goal(int(rest.lstrip("@"))).sequent))
            except (ValueError, ChpError) as e:
                write(f"error: {e}")
        elif command == "undo":
            write("undone" if session.undo() else "nothing to undo")
        elif command == "save":
            if not rest:
                write("usage: save PATH")
                continue
            try:
                session.save(Path(rest))
                write(f"saved to {rest}")
            except OSError as e:
                write(f"error: {e}")
        else:
            try:
                session.execute(line)
            except ChpError as e:
                write(f"error: {e}")
                continue
            _show(session.state, write)
    return 0 if session.state.is_closed else 1


def replay_into(session: Session, items: Sequence[Item], focus: Optional[int] = None) -> Optional[str]:
    """Feed an existing script into a session; returns the first error, if any."""
    for item in items:
        if isinstance(item, Branch):
            pending = session.state.open_goals(focus)
            if len(pending) != len(item.blocks):
                return f"branch has {len(item.blocks)} block(s) but there are {len(pending)} open goal(s)"
            for goal_id, block in zip(pending, item.blocks):
                error = replay_into(session, block, goal_id)
                if error:
                    return error
        elif isinstance(item, (Step, Oracle)):
            try:
                session.perform(item, focus)
            except ChpError as e:
                return str(e)
    return None
