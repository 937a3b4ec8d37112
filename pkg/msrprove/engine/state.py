from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterator, Optional, Tuple

from msrprove.deduction import EMPTY_KNOWLEDGE, KnowledgeBase
from msrprove.frontend.facts import Fact
from msrprove.terms import EMPTY, Substitution, Term


class EventKind(str, Enum):
    RULE = "rule-instance"
    FRESH = "fresh"
    ADV_RECEIVE = "adv-receive"
    ADV_SEND = "adv-send"
    ADV_CONSTRUCT = "adv-construct"


# Labels of the implicit adversary events.
FRESH_LABEL = "Fresh"
SEND_LABEL = "isend"
RECEIVE_LABEL = "irecv"
COERCE_LABEL = "coerce"
CONSTRUCT_LABEL = "!KU"


@dataclass(frozen=True)
class Event:
    """One timepoint of a trace.

    ``actions`` are the facts a rule declares between its arrows; ``observations`` are
    the facts every trace records implicitly (``In``/``Out`` on rule instances, ``K``
    on adversary events). Lemmas see both.
    """

    timepoint: int
    kind: EventKind
    label: str
    rule: Optional[str] = None
    substitution: Substitution = EMPTY
    term: Optional[Term] = None
    premises: Tuple[Fact, ...] = ()
    actions: Tuple[Fact, ...] = ()
    observations: Tuple[Fact, ...] = ()
    conclusions: Tuple[Fact, ...] = ()

    @property
    def recorded(self) -> Tuple[Fact, ...]:
        return self.actions + self.observations

    @property
    def is_rule(self) -> bool:
        return self.kind is EventKind.RULE

    def __str__(self) -> str:
        if self.kind is EventKind.RULE:
            acts = ", ".join(str(f) for f in self.recorded)
            return f"#{self.timepoint} {self.label}[{acts}]"
        return f"#{self.timepoint} {self.label} {self.term}"


@dataclass(frozen=True, eq=False)
class State:
    """Global state: a sorted multiset of linear facts, a set of persistent facts and the
    adversary's knowledge. ``clock`` is the next timepoint."""

    linear: Tuple[Fact, ...] = ()
    persistent: FrozenSet[Fact] = frozenset()
    knowledge: KnowledgeBase = EMPTY_KNOWLEDGE
    fresh_counter: int = 0
    clock: int = 0
    rule_events: int = 0

    def sorted_persistent(self) -> Tuple[Fact, ...]:
        return tuple(sorted(self.persistent, key=Fact.sort_key))

    def facts(self) -> Iterator[Fact]:
        yield from self.linear
        yield from self.sorted_persistent()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return (
            self.linear == other.linear
            and self.persistent == other.persistent
            and self.knowledge.terms == other.knowledge.terms
            and (self.fresh_counter, self.clock, self.rule_events) == (other.fresh_counter, other.clock, other.rule_events)
        )

    def __hash__(self) -> int:
        return hash((self.linear, self.persistent, self.fresh_counter, self.clock, self.rule_events))


@dataclass(frozen=True)
class Choice:
    """A rule together with a substitution that fires it."""

    rule: str
    substitution: Substitution = EMPTY

    def sort_key(self) -> tuple:
        return (self.rule, self.substitution.sort_key())

    def __str__(self) -> str:
        return f"{self.rule} {self.substitution}"


@dataclass(frozen=True)
class StepResult:
    state: State
    events: Tuple[Event, ...]


@dataclass(frozen=True)
class Trace:
    initial: State
    events: Tuple[Event, ...] = ()
    final: State = field(default_factory=State)

    @property
    def rule_events(self) -> Tuple[Event, ...]:
        return tuple(e for e in self.events if e.is_rule)

    @property
    def choices(self) -> Tuple[Choice, ...]:
        return tuple(Choice(e.rule or e.label, e.substitution) for e in self.rule_events)

    def __len__(self) -> int:
        return len(self.events)

    def describe(self) -> str:
        return " ; ".join(e.label for e in self.rule_events) or "(empty)"
