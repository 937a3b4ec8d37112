"""Multiset rewriting semantics with the network adversary, and bounded trace exploration."""

from msrprove.engine.bounds import Bounds
from msrprove.engine.canonical import Projection, canonical_key
from msrprove.engine.explore import ExploreStats, explore, root_branches
from msrprove.engine.semantics import Engine
from msrprove.engine.state import Choice, Event, EventKind, State, StepResult, Trace

__all__ = [
    "Bounds",
    "Choice",
    "Engine",
    "Event",
    "EventKind",
    "ExploreStats",
    "Projection",
    "State",
    "StepResult",
    "Trace",
    "canonical_key",
    "explore",
    "root_branches",
]
