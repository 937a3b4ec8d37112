from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, Iterator, List, Optional, Tuple

from msrprove.engine.bounds import Bounds
from msrprove.engine.canonical import Projection, canonical_key
from msrprove.engine.semantics import Engine
from msrprove.engine.state import Choice, Event, State, Trace
from msrprove.frontend.theory import Theory
from msrprove.log import get_logger

logger = get_logger(__name__)


@dataclass
class ExploreStats:
    explored: int = 0
    pruned: int = 0
    deepest: int = 0


def root_branches(theory: Theory, bounds: Optional[Bounds] = None) -> List[Choice]:
    """The choices enabled in the initial state; ``explore(branch=i)`` follows the i-th."""
    engine = Engine(theory, bounds)
    return engine.enabled(engine.initial_state())


def explore(
    theory: Theory,
    bounds: Optional[Bounds] = None,
    *,
    branch: Optional[int] = None,
    stats: Optional[ExploreStats] = None,
    projection: Optional[Projection] = None,
) -> Iterator[Trace]:
    """Lazily enumerate reachable traces, breadth first by number of rule instances.

    Siblings come in canonical choice order. A successor is pruned when a trace with the
    same state and history (up to renaming fresh names) was already queued with at most
    as many rule instances; a ``projection`` narrows the history to what one lemma sees.
    With ``branch`` set, only the subtree below that root choice is enumerated and the
    empty trace is skipped.
    """
    engine = Engine(theory, bounds)
    stats = stats if stats is not None else ExploreStats()
    initial = engine.initial_state()
    queue: Deque[Tuple[State, Tuple[Event, ...]]] = deque()
    if branch is None:
        queue.append((initial, ()))
    else:
        choices = engine.enabled(initial)
        if not 0 <= branch < len(choices):
            raise ValueError(f"branch {branch} out of range: {len(choices)} root choice(s)")
        result = engine.step(initial, choices[branch])
        queue.append((result.state, result.events))
    seen: Dict[str, int] = {canonical_key(*queue[0], projection): queue[0][0].rule_events}
    logger.debug("exploring %s (%s, branch=%s)", theory.name, engine.bounds, branch)

    while queue:
        state, events = queue.popleft()
        stats.explored += 1
        stats.deepest = max(stats.deepest, state.rule_events)
        yield Trace(initial, events, state)
        for _, result in engine.successors(state):
            history = events + result.events
            key = canonical_key(result.state, history, projection)
            previous = seen.get(key)
            if previous is not None and previous <= result.state.rule_events:
                stats.pruned += 1
                continue
            seen[key] = result.state.rule_events
            queue.append((result.state, history))

    logger.debug("explored %d trace(s) of %s, pruned %d", stats.explored, theory.name, stats.pruned)
