"""
Sequents, formula positions and proof trees.

A ProofState is an immutable tree of goals keyed by id. Applying a rule
never mutates a state; `expand` and `close` return a new state sharing the
untouched goals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Any, Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from ..shared.constants import REPORT_SCHEMA
from ..shared.errors import IllFormedError, RuleError
from ..static import VarSet, check_wellformed, free_vars
from ..syntax.ast import (
    AcBox,
    And,
    Box,
    Declarations,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Sort,
    Term,
    Var,
    conj,
    disj,
)
from ..syntax.render import render
from ..syntax.subst import names_in

ANTECEDENT = "L"
SUCCEDENT = "R"
SIDES = (ANTECEDENT, SUCCEDENT)

OPEN = "open"
CLOSED = "closed"
EXPANDED = "expanded"


# ---------------------------------------------------------------------------
# Sequents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sequent:
    """Γ ⊢ Δ, read as the conjunction of Γ implying the disjunction of Δ."""

    antecedent: Tuple[Formula, ...] = ()
    succedent: Tuple[Formula, ...] = ()

    def side(self, side: str) -> Tuple[Formula, ...]:
        return self.antecedent if side == ANTECEDENT else self.succedent

    def at(self, side: str, index: int) -> Formula:
        formulas = self.side(side)
        if not 0 <= index < len(formulas):
            raise RuleError("position", f"no formula at {side}{index} in {self}")
        return formulas[index]

    def _with_side(self, side: str, formulas: Sequence[Formula]) -> "Sequent":
        if side == ANTECEDENT:
            return Sequent(tuple(formulas), self.succedent)
        return Sequent(self.antecedent, tuple(formulas))

    def replace(self, side: str, index: int, *formulas: Formula) -> "Sequent":
        """Replace the formula at side/index by zero or more formulas in its place."""
        current = list(self.side(side))
        self.at(side, index)
        current[index : index + 1] = formulas
        return self._with_side(side, current)

    def remove(self, side: str, index: int) -> "Sequent":
        return self.replace(side, index)

    def add(self, side: str, formula: Formula) -> "Sequent":
        """New antecedent formulas go last, new succedent formulas go first."""
        if side == ANTECEDENT:
            return Sequent(self.antecedent + (formula,), self.succedent)
        return Sequent(self.antecedent, (formula,) + self.succedent)

    def formulas(self) -> Iterator[Formula]:
        yield from self.antecedent
        yield from self.succedent

    def as_formula(self) -> Formula:
        return Implies(conj(*self.antecedent), disj(*self.succedent))

    def names(self) -> Set[str]:
        return names_in(*self.formulas())

    def free_vars(self, skip: Optional[Tuple[str, int]] = None) -> VarSet:
        """Free variables of every formula, optionally skipping one position."""
        result = VarSet()
        for side in SIDES:
            for i, f in enumerate(self.side(side)):
                if skip != (side, i):
                    result = result | free_vars(f)
        return result

    def variables(self) -> Dict[str, Sort]:
        """Sorts of every variable name visible in the sequent, bound ones included."""
        sorts: Dict[str, Sort] = {}
        for f in self.formulas():
            _collect_sorts(f, sorts)
        return sorts

    def __str__(self) -> str:
        left = ", ".join(render(f) for f in self.antecedent)
        right = ", ".join(render(f) for f in self.succedent)
        return f"{left} |- {right}".strip()


def _collect_sorts(node, sorts: Dict[str, Sort]) -> None:
    if isinstance(node, Var):
        sorts.setdefault(node.name, node.sort)
        return
    if isinstance(node, tuple):
        for item in node:
            _collect_sorts(item, sorts)
        return
    if is_dataclass(node):
        for f in fields(node):
            _collect_sorts(getattr(node, f.name), sorts)


# ---------------------------------------------------------------------------
# Positions
# ---------------------------------------------------------------------------

_POSITION_RE = re.compile(r"^([LR])(\d*)((?:\.\d+)*)$")


@dataclass(frozen=True)
class Position:
    """A top-level formula (side, index) plus a path into its subformulas.

    Path steps: 0/1 select the operands of binary connectives, 0 selects the
    body of a negation or quantifier and the postcondition of a (ac-)box.
    """

    side: str
    index: int = 0
    path: Tuple[int, ...] = ()

    @staticmethod
    def looks_like(text: str) -> bool:
        return bool(_POSITION_RE.match(text))

    @classmethod
    def parse(cls, text: str) -> "Position":
        match = _POSITION_RE.match(text.strip())
        if not match:
            raise RuleError("position", f"malformed position '{text}' (expected e.g. R0, L1.0.1)")
        side, index, path = match.groups()
        steps = tuple(int(p) for p in path.split(".")[1:]) if path else ()
        return cls(side, int(index) if index else 0, steps)

    @property
    def top(self) -> "Position":
        return Position(self.side, self.index)

    def child(self, *steps: int) -> "Position":
        return Position(self.side, self.index, self.path + steps)

    def __str__(self) -> str:
        return f"{self.side}{self.index}" + "".join(f".{step}" for step in self.path)


def R(index: int = 0, *path: int) -> Position:
    return Position(SUCCEDENT, index, tuple(path))


def L(index: int = 0, *path: int) -> Position:
    return Position(ANTECEDENT, index, tuple(path))


# Steps through which an equivalence rewrite may descend.
_REWRITE_STEPS = {
    And: (0, 1),
    Or: (0, 1),
    Implies: (1,),
    Forall: (0,),
    Exists: (0,),
    Box: (0,),
    AcBox: (0,),
}


def children(formula: Formula) -> Tuple[Formula, ...]:
    match formula:
        case Not(a):
            return (a,)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return (l, r)
        case Forall(_, b) | Exists(_, b):
            return (b,)
        case Box(_, post) | AcBox(_, _, _, post):
            return (post,)
    return ()


def subformula(formula: Formula, path: Sequence[int]) -> Formula:
    for step in path:
        parts = children(formula)
        if not 0 <= step < len(parts):
            raise RuleError("position", f"path step {step} does not exist in {formula}")
        formula = parts[step]
    return formula


def check_polarity(formula: Formula, path: Sequence[int]) -> None:
    """Reject paths that pass through a negation, an equivalence or the left of an implication."""
    for step in path:
        allowed = _REWRITE_STEPS.get(type(formula), ())
        if step not in allowed:
            raise RuleError(
                "position",
                f"cannot rewrite below step {step} of {type(formula).__name__}: not a positive context",
            )
        formula = children(formula)[step]


def replace_at(formula: Formula, path: Sequence[int], new: Formula) -> Formula:
    if not path:
        return new
    step, rest = path[0], path[1:]
    match formula:
        case Not(a):
            return Not(replace_at(a, rest, new))
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            if step == 0:
                return type(formula)(replace_at(l, rest, new), r)
            return type(formula)(l, replace_at(r, rest, new))
        case Forall(v, b) | Exists(v, b):
            return type(formula)(v, replace_at(b, rest, new))
        case Box(p, post):
            return Box(p, replace_at(post, rest, new))
        case AcBox(p, a, c, post):
            return AcBox(p, a, c, replace_at(post, rest, new))
    raise RuleError("position", f"path step {step} does not exist in {formula}")


def rewrite_paths(formula: Formula, prefix: Tuple[int, ...] = ()) -> Iterator[Tuple[int, ...]]:
    """Every path a rewrite may target, outermost first."""
    yield prefix
    allowed = _REWRITE_STEPS.get(type(formula), ())
    parts = children(formula)
    for step in allowed:
        yield from rewrite_paths(parts[step], prefix + (step,))


# ---------------------------------------------------------------------------
# Rule applications and goals
# ---------------------------------------------------------------------------

_BARE_VALUE = re.compile(r"^-?[A-Za-z_0-9.]+$")


def _render_value(value: Any) -> str:
    if isinstance(value, (Formula, Term)):
        return f'"{render(value)}"'
    if isinstance(value, Position):
        return str(value)
    text = str(value)
    return text if _BARE_VALUE.match(text) else f'"{text}"'


@dataclass(frozen=True)
class RuleApp:
    name: str
    position: Optional[Position] = None
    args: Tuple[Tuple[str, Any], ...] = ()
    goal: Optional[int] = None

    @classmethod
    def of(cls, name: str, position=None, goal: Optional[int] = None, **args: Any) -> "RuleApp":
        if isinstance(position, str):
            position = Position.parse(position)
        return cls(name, position, tuple((k, v) for k, v in args.items() if v is not None), goal)

    def arg(self, key: str, default: Any = None) -> Any:
        for k, v in self.args:
            if k == key:
                return v
        return default

    def keys(self) -> List[str]:
        return [k for k, _ in self.args]

    def __str__(self) -> str:
        text = self.name
        if self.goal is not None:
            text += f" @{self.goal}"
        parts = [str(self.position)] if self.position is not None else []
        parts += [f"{k}={_render_value(v)}" for k, v in self.args]
        if parts:
            text += "(" + ", ".join(parts) + ")"
        return text


@dataclass(frozen=True)
class Goal:
    id: int
    sequent: Sequent
    parent: Optional[int] = None
    rule: Optional[RuleApp] = None
    children: Tuple[int, ...] = ()
    closed_by: Optional[str] = None
    introduced: Tuple[str, ...] = ()
    expansion: Tuple[str, ...] = ()
    note: str = ""

    @property
    def status(self) -> str:
        if self.closed_by is not None:
            return CLOSED
        return OPEN if self.rule is None else EXPANDED

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "id": self.id,
            "sequent": str(self.sequent),
            "status": self.status,
        }
        if self.rule is not None:
            data["rule"] = str(self.rule)
            data["children"] = list(self.children)
        if self.closed_by is not None:
            data["closed_by"] = self.closed_by
        if self.introduced:
            data["introduced"] = list(self.introduced)
        if self.expansion:
            data["expansion"] = list(self.expansion)
        if self.note:
            data["note"] = self.note
        return data


@dataclass(frozen=True)
class ProofState:
    goals: Mapping[int, Goal]
    decls: Declarations = field(default_factory=Declarations)
    root: int = 0
    reserved: FrozenSet[str] = frozenset()

    def goal(self, goal_id: int) -> Goal:
        if goal_id not in self.goals:
            raise RuleError("goal", f"no goal @{goal_id}")
        return self.goals[goal_id]

    def open_goals(self, under: Optional[int] = None) -> List[int]:
        """Open leaves in depth-first premise order."""
        result: List[int] = []
        stack = [self.root if under is None else under]
        while stack:
            g = self.goals[stack.pop()]
            if g.status == OPEN:
                result.append(g.id)
            elif g.status == EXPANDED:
                stack.extend(reversed(g.children))
        return result

    def first_open(self, under: Optional[int] = None) -> Optional[int]:
        pending = self.open_goals(under)
        return pending[0] if pending else None

    @property
    def is_closed(self) -> bool:
        return not self.open_goals()

    def used_names(self) -> Set[str]:
        names = set(self.reserved) | self.decls.names()
        for g in self.goals.values():
            names |= g.sequent.names()
            names.update(g.introduced)
        return names

    def _next_id(self) -> int:
        return max(self.goals) + 1

    def expand(
        self,
        goal_id: int,
        app: RuleApp,
        premises: Sequence[Sequent],
        introduced: Tuple[str, ...] = (),
        expansion: Tuple[str, ...] = (),
    ) -> Tuple["ProofState", List[int]]:
        goal = self.goal(goal_id)
        goals = dict(self.goals)
        first = self._next_id()
        ids = list(range(first, first + len(premises)))
        for child_id, sequent in zip(ids, premises):
            goals[child_id] = Goal(child_id, sequent, parent=goal_id)
        goals[goal_id] = replace(
            goal, rule=app, children=tuple(ids), introduced=introduced, expansion=expansion, note=""
        )
        return replace(self, goals=goals), ids

    def close(self, goal_id: int, app: RuleApp, by: str, expansion: Tuple[str, ...] = ()) -> "ProofState":
        goals = dict(self.goals)
        goals[goal_id] = replace(self.goal(goal_id), rule=app, closed_by=by, expansion=expansion, note="")
        return replace(self, goals=goals)

    def annotate(self, goal_id: int, note: str) -> "ProofState":
        goals = dict(self.goals)
        goals[goal_id] = replace(self.goal(goal_id), note=note)
        return replace(self, goals=goals)

    def nodes(self) -> List[Goal]:
        return [self.goals[k] for k in sorted(self.goals)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "closed": self.is_closed,
            "open": self.open_goals(),
            "goals": [g.to_dict() for g in self.nodes()],
        }


def init_sequent(
    sequent: Sequent, decls: Optional[Declarations] = None, reserved: Set[str] = frozenset()
) -> ProofState:
    return ProofState({0: Goal(0, sequent)}, decls if decls is not None else Declarations(), 0, frozenset(reserved))


def init(goal: Formula, decls: Optional[Declarations] = None) -> ProofState:
    """A proof state with the single open goal ⊢ goal."""
    report = check_wellformed(goal)
    if not report.ok:
        raise IllFormedError("; ".join(str(v) for v in report.violations))
    return init_sequent(Sequent((), (goal,)), decls)


def audit_freshness(state: ProofState) -> List[str]:
    """Names introduced by rules that clash with their conclusion or with each other."""
    problems: List[str] = []
    seen: Dict[str, int] = {}
    for g in state.nodes():
        clash = set(g.introduced) & g.sequent.names()
        if clash:
            problems.append(f"@{g.id}: {', '.join(sorted(clash))} already occur in the conclusion")
        for name in g.introduced:
            if name in seen:
                problems.append(f"@{g.id}: {name} was already introduced at @{seen[name]}")
            seen.setdefault(name, g.id)
    return problems
