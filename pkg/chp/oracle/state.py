"""
Semantic domain of the bounded oracle: events, states, computations,
run sets and the enumeration budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from ..shared.config import BudgetConfig
from ..shared.constants import (
    DEFAULT_DURATIONS,
    DEFAULT_LOOP_DEPTH,
    DEFAULT_TRACE_LENGTH,
    DEFAULT_VALUES,
)
from ..syntax.ast import Sort, Var

# Out-of-range chan(te[i]) yields this channel; it is not a valid identifier,
# so it never coincides with a declared channel.
DEFAULT_CHANNEL = "#"


@dataclass(frozen=True, order=True)
class Event:
    """Raw communication event <chan, value, stamp>."""

    chan: str
    value: Fraction
    stamp: Fraction

    def __str__(self) -> str:
        return f"<{self.chan}, {self.value}, {self.stamp}>"


@dataclass(frozen=True, order=True)
class RecEvent:
    """Recorded communication event <recorder, chan, value, stamp>."""

    recorder: str
    chan: str
    value: Fraction
    stamp: Fraction

    @property
    def raw(self) -> Event:
        return Event(self.chan, self.value, self.stamp)

    def to_dict(self) -> dict:
        return {"recorder": self.recorder, "chan": self.chan, "value": str(self.value), "time": str(self.stamp)}


RawTrace = Tuple[Event, ...]
RecordedTrace = Tuple[RecEvent, ...]
Value = Union[Fraction, int, str, RawTrace]


def default_value(sort: Sort) -> Value:
    if sort == Sort.REAL:
        return Fraction(0)
    if sort == Sort.INT:
        return 0
    if sort == Sort.TRACE:
        return ()
    return DEFAULT_CHANNEL


def project(trace: RecordedTrace, chans: Iterable[str]) -> RecordedTrace:
    keep = set(chans)
    return tuple(e for e in trace if e.chan in keep)


def is_chronological(trace: Iterable[Union[Event, RecEvent]]) -> bool:
    last = None
    for e in trace:
        if last is not None and e.stamp < last:
            return False
        last = e.stamp
    return True


class State:
    """
    Total assignment of values to sorted variables.

    Unmentioned variables take their sort's default (0, 0, the empty trace).
    Default-valued entries are never stored, so equal states compare and
    hash equal.
    """

    __slots__ = ("_values", "_hash")

    def __init__(self, values: Optional[Mapping[Var, Value]] = None):
        cleaned: Dict[Var, Value] = {}
        for var, value in (values or {}).items():
            value = _coerce(var.sort, value)
            if value != default_value(var.sort):
                cleaned[var] = value
        self._values = cleaned
        self._hash = hash(frozenset(cleaned.items()))

    def get(self, var: Var) -> Value:
        return self._values.get(var, default_value(var.sort))

    __getitem__ = get

    def set(self, var: Var, value: Value) -> "State":
        values = dict(self._values)
        values[var] = value
        return State(values)

    def concat(self, trace: RecordedTrace) -> "State":
        """State-trace concatenation v·τ: append recorded events to their recorders."""
        if not trace:
            return self
        values = dict(self._values)
        for e in trace:
            recorder = Var(e.recorder, Sort.TRACE)
            values[recorder] = tuple(values.get(recorder, ())) + (e.raw,)
        return State(values)

    def items(self):
        return sorted(self._values.items(), key=lambda kv: kv[0].name)

    def agrees(self, other: "State", variables: Iterable[Var]) -> bool:
        return all(self.get(v) == other.get(v) for v in variables)

    def __eq__(self, other) -> bool:
        return isinstance(other, State) and self._values == other._values

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "State(" + ", ".join(f"{v.name}={_show(val)}" for v, val in self.items()) + ")"

    def to_dict(self) -> dict:
        return {v.name: _show(val) for v, val in self.items()}


def _coerce(sort: Sort, value: Value) -> Value:
    if sort == Sort.REAL:
        return Fraction(value)
    if sort == Sort.INT:
        return int(value)
    if sort == Sort.TRACE:
        return tuple(value)
    return value


def _show(value: Value) -> str:
    if isinstance(value, tuple):
        return "".join(str(e) for e in value) or "eps"
    return str(value)


@dataclass(frozen=True)
class Computation:
    """(v, τ, w) with w = None for the unfinished marker ⊥."""

    start: State
    trace: RecordedTrace
    final: Optional[State]

    def to_dict(self) -> dict:
        return {
            "trace": [e.to_dict() for e in self.trace],
            "final": None if self.final is None else self.final.to_dict(),
        }


@dataclass(frozen=True)
class RunSet:
    """Budgeted run set from one start state; `truncated` marks loop-depth cutoff."""

    computations: FrozenSet[Computation]
    truncated: bool = False

    def __iter__(self):
        return iter(self.computations)

    def __len__(self) -> int:
        return len(self.computations)

    def finished(self):
        return [c for c in self.computations if c.final is not None]

    def behaviours(self) -> FrozenSet[Tuple[RecordedTrace, Optional[State]]]:
        return frozenset((c.trace, c.final) for c in self.computations)


class Verdict(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @staticmethod
    def of(value: bool) -> "Verdict":
        return Verdict.TRUE if value else Verdict.FALSE

    def __invert__(self) -> "Verdict":
        if self is Verdict.UNKNOWN:
            return self
        return Verdict.FALSE if self is Verdict.TRUE else Verdict.TRUE

    def __and__(self, other: "Verdict") -> "Verdict":
        if Verdict.FALSE in (self, other):
            return Verdict.FALSE
        if Verdict.UNKNOWN in (self, other):
            return Verdict.UNKNOWN
        return Verdict.TRUE

    def __or__(self, other: "Verdict") -> "Verdict":
        if Verdict.TRUE in (self, other):
            return Verdict.TRUE
        if Verdict.UNKNOWN in (self, other):
            return Verdict.UNKNOWN
        return Verdict.FALSE

    def implies(self, other: "Verdict") -> "Verdict":
        return ~self | other

    @property
    def definite(self) -> bool:
        return self is not Verdict.UNKNOWN


@dataclass(frozen=True)
class Budget:
    """
    Finite candidate sets that make the semantics enumerable.

    Random assignments, receives and real quantifiers range over `values`;
    Int quantifiers over `naturals`; ODEs evolve for each of `durations`;
    loops unroll up to `loop_depth`; trace quantifiers range over traces of
    length <= `trace_length` built from `channels` x `trace_values` x
    `trace_stamps`, plus the ground trace subterms of their body.
    """

    values: Tuple[Fraction, ...] = tuple(DEFAULT_VALUES)
    durations: Tuple[Fraction, ...] = tuple(DEFAULT_DURATIONS)
    loop_depth: int = DEFAULT_LOOP_DEPTH
    trace_length: int = DEFAULT_TRACE_LENGTH
    naturals: Tuple[int, ...] = (0, 1, 2)
    channels: Tuple[str, ...] = ()
    trace_values: Tuple[Fraction, ...] = tuple(DEFAULT_VALUES)
    trace_stamps: Tuple[Fraction, ...] = tuple(DEFAULT_DURATIONS)

    @staticmethod
    def from_config(config: BudgetConfig, channels: Iterable[str] = ()) -> "Budget":
        return Budget(
            values=tuple(config.values),
            durations=tuple(config.durations),
            loop_depth=config.loop_depth,
            trace_length=config.trace_length,
            channels=tuple(sorted(channels)),
            trace_values=tuple(config.values),
            trace_stamps=tuple(config.durations),
        )

    def with_channels(self, channels: Iterable[str]) -> "Budget":
        return Budget(
            self.values,
            self.durations,
            self.loop_depth,
            self.trace_length,
            self.naturals,
            tuple(sorted(set(channels))),
            self.trace_values,
            self.trace_stamps,
        )

    def trace_candidates(self) -> Tuple[RawTrace, ...]:
        events = [Event(c, a, s) for c in self.channels for a in self.trace_values for s in self.trace_stamps]
        layer: list = [()]
        result: list = [()]
        for _ in range(self.trace_length):
            layer = [t + (e,) for t in layer for e in events if not t or t[-1].stamp <= e.stamp]
            result.extend(layer)
        return tuple(result)
