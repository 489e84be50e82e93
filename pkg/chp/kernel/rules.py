"""
Rule registry and the two kernel entry points, `apply` and `close_oracle`.

Rules come in two kinds:

* rewrites (axioms stated as ↔) map the formula at a position to an
  equivalent one. They may target a subformula reached through a positive
  context and run in either direction.
* goal transformers replace the goal by premises. They act only on
  top-level formulas.

Derived rules are goal transformers whose premises are computed by running
kernel primitives on a scratch proof state; the recorded expansion is the
list of primitive steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from ..arith.dispatch import dispatch
from ..shared.errors import ChpError, RuleError, SubstitutionError
from ..static import check_wellformed
from ..syntax.ast import Declarations, Formula, Sort, Term
from ..syntax.parser import parse_formula, parse_term
from ..syntax.subst import fresh_name
from .sequent import (
    ANTECEDENT,
    SUCCEDENT,
    Goal,
    Position,
    ProofState,
    RuleApp,
    Sequent,
    check_polarity,
    init_sequent,
    replace_at,
    rewrite_paths,
    subformula,
)

logger = logging.getLogger(__name__)

REWRITE = "rewrite"
RULE = "rule"

# Keys every rule accepts.
COMMON_KEYS = frozenset({"at"})
REWRITE_KEYS = frozenset({"at", "dir", "lhs"})

_MISSING = object()


@dataclass(frozen=True)
class RuleSpec:
    """How a rule is looked up, where it applies by default and which arguments it takes.

    `inverse` says how a rewrite runs right to left: "structural" when the
    rewrite function handles `dir=rl` itself, "lhs" when the caller supplies
    the left-hand side, None when only left to right is supported.
    """

    name: str
    kind: str
    fn: Callable
    side: Optional[str] = SUCCEDENT
    shape: Optional[Callable[[Formula], bool]] = None
    keys: FrozenSet[str] = frozenset()
    positional: Tuple[str, ...] = ()
    inverse: Optional[str] = "structural"
    derived: bool = False
    open_keys: bool = False
    summary: str = ""

    @property
    def accepted(self) -> FrozenSet[str]:
        return self.keys | (REWRITE_KEYS if self.kind == REWRITE else COMMON_KEYS)


@dataclass
class RuleResult:
    premises: List[Sequent] = field(default_factory=list)
    introduced: Tuple[str, ...] = ()
    expansion: Tuple[str, ...] = ()
    closed_by: Optional[str] = None


def rewrite(name: str, fn=None, **options):
    """Build a rewrite RuleSpec (decorator-free so modules keep plain functions)."""
    return RuleSpec(name, REWRITE, fn, side=None, **options)


def rule(name: str, fn, **options) -> RuleSpec:
    return RuleSpec(name, RULE, fn, **options)


# ---------------------------------------------------------------------------
# Rule context
# ---------------------------------------------------------------------------


class RuleContext:
    """Everything a rule function may consult: the goal, its position and its arguments."""

    def __init__(self, state: ProofState, goal: Goal, app: RuleApp, spec: RuleSpec, position: Optional[Position]):
        self.state = state
        self.goal = goal
        self.app = app
        self.spec = spec
        self.position = position
        self.introduced: List[str] = []
        self.steps: List[str] = []
        self._taken: Set[str] = set()

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def sequent(self) -> Sequent:
        return self.goal.sequent

    @property
    def formula(self) -> Formula:
        """The top-level formula at the rule's position."""
        if self.position is None:
            raise RuleError(self.name, "needs a position")
        return self.sequent.at(self.position.side, self.position.index)

    def fail(self, message: str) -> RuleError:
        return RuleError(self.name, message)

    # -- arguments -----------------------------------------------------------

    def arg(self, key: str, default: Any = _MISSING) -> Any:
        value = self.app.arg(key, _MISSING)
        if value is _MISSING:
            if default is _MISSING:
                raise self.fail(f"missing argument '{key}'")
            return default
        return value

    def has(self, key: str) -> bool:
        return self.app.arg(key, _MISSING) is not _MISSING

    def declarations(self, extra: Optional[Dict[str, Sort]] = None) -> Declarations:
        """Problem declarations extended by the sorts of the goal's variables."""
        decls = self.state.decls.copy()
        for name, sort in self.sequent.variables().items():
            if name not in decls.channels and name not in decls.programs and name not in decls.formulas:
                decls.variables.setdefault(name, sort)
        for name, sort in (extra or {}).items():
            decls.variables[name] = sort
        return decls

    def formula_arg(self, key: str, default: Any = _MISSING, extra: Optional[Dict[str, Sort]] = None) -> Formula:
        value = self.arg(key, default)
        if value is None or isinstance(value, Formula):
            return value
        try:
            return parse_formula(str(value), self.declarations(extra))
        except ChpError as e:
            raise self.fail(f"argument {key}: {e}") from None

    def term_arg(self, key: str, default: Any = _MISSING, extra: Optional[Dict[str, Sort]] = None) -> Term:
        value = self.arg(key, default)
        if value is None or isinstance(value, Term):
            return value
        try:
            return parse_term(str(value), self.declarations(extra))
        except ChpError as e:
            raise self.fail(f"argument {key}: {e}") from None

    def name_arg(self, key: str, default: Any = _MISSING) -> Optional[str]:
        value = self.arg(key, default)
        return None if value is None else str(value)

    def position_arg(self, key: str, default: Any = _MISSING) -> Optional[Position]:
        value = self.arg(key, default)
        if value is None or isinstance(value, Position):
            return value
        return Position.parse(str(value))

    # -- names ---------------------------------------------------------------

    def used_names(self) -> Set[str]:
        return self.state.used_names() | self._taken

    def fresh(self, base: str, requested: Optional[str] = None) -> str:
        """A name new to the whole proof state; `requested` must itself be new."""
        used = self.used_names()
        if requested is not None:
            if requested in used:
                raise self.fail(f"'{requested}' is not fresh")
            name = requested
        else:
            name = fresh_name(base, used)
        self._taken.add(name)
        self.introduced.append(name)
        return name

    # -- nested kernel steps -------------------------------------------------

    def scratch(self) -> "Scratch":
        return Scratch(self)

    def result(self, *premises: Sequent) -> RuleResult:
        return RuleResult(list(premises), tuple(self.introduced), tuple(self.steps))


class Scratch:
    """A private proof state rooted at the current goal, used to expand derived rules."""

    def __init__(self, ctx: RuleContext):
        self.ctx = ctx
        self.state = init_sequent(ctx.sequent, ctx.state.decls, ctx.used_names())
        self.steps: List[str] = []

    @property
    def root(self) -> int:
        return self.state.root

    def sequent(self, goal_id: int) -> Sequent:
        return self.state.goal(goal_id).sequent

    def run(self, goal_id: int, name: str, position=None, **args: Any) -> List[int]:
        app = RuleApp.of(name, position, goal_id, **args)
        try:
            self.state = apply(self.state, app)
        except RuleError as e:
            raise RuleError(self.ctx.name, f"expansion step {app} failed: {e}") from None
        self.steps.append(str(app))
        return list(self.state.goal(goal_id).children)

    def only(self, goal_id: int, name: str, position=None, **args: Any) -> int:
        children = self.run(goal_id, name, position, **args)
        if len(children) != 1:
            raise RuleError(self.ctx.name, f"expansion step {name} produced {len(children)} premises")
        return children[0]

    def drop(self, goal_id: int, predicate: Callable[[Formula], bool]) -> int:
        """Weaken away antecedent formulas matching `predicate`."""
        while True:
            ante = self.sequent(goal_id).antecedent
            hits = [i for i, f in enumerate(ante) if predicate(f)]
            if not hits:
                return goal_id
            goal_id = self.only(goal_id, "WL", Position(ANTECEDENT, hits[0]))

    def keep_only(self, goal_id: int, *keep: Position) -> int:
        """Weaken away everything except the formulas at `keep`."""
        kept = {(p.side, p.index) for p in keep}
        sequent = self.sequent(goal_id)
        for i in reversed(range(len(sequent.succedent))):
            if (SUCCEDENT, i) not in kept:
                goal_id = self.only(goal_id, "WR", Position(SUCCEDENT, i))
        for i in reversed(range(len(sequent.antecedent))):
            if (ANTECEDENT, i) not in kept:
                goal_id = self.only(goal_id, "WL", Position(ANTECEDENT, i))
        return goal_id

    def index(self, goal_id: int, side: str, formula: Formula) -> int:
        formulas = self.sequent(goal_id).side(side)
        if formula not in formulas:
            raise RuleError(self.ctx.name, f"{formula} is not in the goal")
        return formulas.index(formula)

    def result(self, order: Optional[Sequence[int]] = None) -> RuleResult:
        pending = self.state.open_goals()
        if order is None:
            order = pending
        elif sorted(order) != sorted(pending):
            raise RuleError(self.ctx.name, "expansion left unexpected open goals")
        premises: List[Sequent] = []
        for goal_id in order:
            sequent = self.sequent(goal_id)
            if sequent not in premises:
                premises.append(sequent)
        introduced = list(self.ctx.introduced)
        for g in self.state.nodes():
            introduced.extend(n for n in g.introduced if n not in introduced)
        return RuleResult(premises, tuple(introduced), tuple(self.ctx.steps + self.steps))


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

_REGISTRY: Dict[str, RuleSpec] = {}
_ALIASES: Dict[str, str] = {}


def register(specs: Iterable[RuleSpec], aliases: Optional[Dict[str, str]] = None) -> None:
    for spec in specs:
        _REGISTRY[spec.name] = spec
    _ALIASES.update(aliases or {})


def lookup(name: str) -> RuleSpec:
    _load()
    name = _ALIASES.get(name, name)
    if name not in _REGISTRY:
        raise RuleError(name, "unknown rule")
    return _REGISTRY[name]


def rule_names() -> List[str]:
    _load()
    return sorted(_REGISTRY) + sorted(_ALIASES)


def _load() -> None:
    if _REGISTRY:
        return
    from . import axioms, derived, structural

    register(axioms.RULES)
    register(structural.RULES, structural.ALIASES)
    register(derived.RULES)


# ---------------------------------------------------------------------------
# Applying rules
# ---------------------------------------------------------------------------


def _target_goal(state: ProofState, app: RuleApp) -> Goal:
    goal_id = app.goal if app.goal is not None else state.first_open()
    if goal_id is None:
        raise RuleError(app.name, "no open goal")
    goal = state.goal(goal_id)
    if goal.rule is not None or goal.closed_by is not None:
        raise RuleError(app.name, f"goal @{goal_id} is not open")
    return goal


def _check_created(name: str, premises: Sequence[Sequent], conclusion: Sequent) -> None:
    before = set(conclusion.formulas())
    for sequent in premises:
        for f in sequent.formulas():
            if f in before:
                continue
            report = check_wellformed(f, allow_mu_write=True)
            if not report.ok:
                raise RuleError(name, f"creates an ill-formed formula: {report.violations[0]}")


def apply(state: ProofState, app: RuleApp) -> ProofState:
    """Apply one rule to the addressed (or first open) goal."""
    spec = lookup(app.name)
    unknown = set(app.keys()) - spec.accepted
    if unknown and not spec.open_keys:
        raise RuleError(spec.name, f"unexpected argument(s) {', '.join(sorted(unknown))}")
    goal = _target_goal(state, app)
    position = app.position
    if position is None and app.arg("at") is not None:
        at = app.arg("at")
        position = at if isinstance(at, Position) else Position.parse(str(at))
    resolved = RuleApp(spec.name, position, tuple((k, v) for k, v in app.args if k != "at"), goal.id)

    try:
        if spec.kind == REWRITE:
            ctx, premises = _apply_rewrite(state, goal, resolved, spec)
            result = RuleResult([premises], tuple(ctx.introduced), tuple(ctx.steps))
            resolved = RuleApp(spec.name, ctx.position, resolved.args, goal.id)
        else:
            position = _resolve_position(goal.sequent, spec, position)
            ctx = RuleContext(state, goal, resolved, spec, position)
            resolved = RuleApp(spec.name, position, resolved.args, goal.id)
            result = spec.fn(ctx)
    except SubstitutionError as e:
        raise RuleError(spec.name, str(e)) from None

    _check_created(spec.name, result.premises, goal.sequent)
    logger.debug(f"{resolved} on @{goal.id}: {len(result.premises)} premise(s)")
    if not result.premises:
        return state.close(goal.id, resolved, result.closed_by or spec.name, result.expansion)
    new_state, _ = state.expand(goal.id, resolved, result.premises, result.introduced, result.expansion)
    return new_state


def _resolve_position(sequent: Sequent, spec: RuleSpec, position: Optional[Position]) -> Optional[Position]:
    if position is not None:
        if position.path:
            raise RuleError(spec.name, "acts only on top-level formulas")
        if spec.side is not None and position.side != spec.side:
            raise RuleError(spec.name, f"applies to the {'succedent' if spec.side == SUCCEDENT else 'antecedent'} only")
        formula = sequent.at(position.side, position.index)
        if spec.shape is not None and not spec.shape(formula):
            raise RuleError(spec.name, f"not applicable to {formula}")
        return position
    if spec.side is None:
        return None
    for i, f in enumerate(sequent.side(spec.side)):
        if spec.shape is None or spec.shape(f):
            return Position(spec.side, i)
    if spec.shape is None:
        return None
    raise RuleError(spec.name, f"no matching formula in {sequent}")


def _rewrite_once(ctx: RuleContext, formula: Formula, direction: str) -> Formula:
    spec = ctx.spec
    if direction == "lr" or spec.inverse == "structural":
        return spec.fn(formula, direction, ctx)
    if spec.inverse == "lhs":
        lhs = ctx.formula_arg("lhs", None)
        if lhs is None:
            raise ctx.fail("right-to-left use needs the left-hand side as lhs=")
        if spec.fn(lhs, "lr", ctx) != formula:
            raise ctx.fail(f"{lhs} does not rewrite to {formula}")
        return lhs
    raise ctx.fail("rewrites only left to right")


def _apply_rewrite(state: ProofState, goal: Goal, app: RuleApp, spec: RuleSpec) -> Tuple[RuleContext, Sequent]:
    direction = str(app.arg("dir", "lr"))
    if direction not in ("lr", "rl"):
        raise RuleError(spec.name, f"dir must be lr or rl, not {direction}")
    sequent = goal.sequent

    if app.position is not None:
        top = sequent.at(app.position.side, app.position.index)
        check_polarity(top, app.position.path)
        ctx = RuleContext(state, goal, app, spec, app.position)
        new = _rewrite_once(ctx, subformula(top, app.position.path), direction)
        return ctx, sequent.replace(app.position.side, app.position.index, replace_at(top, app.position.path, new))

    last_error: Optional[RuleError] = None
    for side in (SUCCEDENT, ANTECEDENT):
        for index, top in enumerate(sequent.side(side)):
            for path in rewrite_paths(top):
                position = Position(side, index, path)
                ctx = RuleContext(state, goal, app, spec, position)
                try:
                    new = _rewrite_once(ctx, subformula(top, path), direction)
                except (RuleError, SubstitutionError) as e:
                    last_error = e if isinstance(e, RuleError) else RuleError(spec.name, str(e))
                    continue
                return ctx, sequent.replace(side, index, replace_at(top, path, new))
    detail = f" ({last_error})" if last_error is not None and "not applicable" not in str(last_error) else ""
    raise RuleError(spec.name, f"not applicable anywhere in {sequent}{detail}")


# ---------------------------------------------------------------------------
# Oracle leaves
# ---------------------------------------------------------------------------


def close_oracle(state: ProofState, goal_id: Optional[int] = None, which: str = "auto", smt=None) -> ProofState:
    """Close a first-order goal by arithmetic; an undecided goal stays open with a note."""
    if goal_id is None:
        goal_id = state.first_open()
    if goal_id is None or goal_id not in state.goals:
        return state
    goal = state.goal(goal_id)
    if goal.rule is not None or goal.closed_by is not None:
        return state
    result = dispatch(goal.sequent, which, smt)
    if result.closed:
        app = RuleApp("oracle", args=(("which", which),), goal=goal_id)
        return state.close(goal_id, app, result.by or which)
    logger.debug(f"Oracle {which} left @{goal_id} open: {result.reason}")
    return state.annotate(goal_id, f"oracle {which}: {result.reason}")
