from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Deque, Dict, Iterable, List, Optional, Tuple

import networkx as nx

from msrprove.engine.state import CONSTRUCT_LABEL, Event, EventKind, Trace
from msrprove.errors import ContractError
from msrprove.frontend.facts import Fact
from msrprove.terms import PublicName, StringConstant


class NodeKind(str, Enum):
    RULE = "rule"
    ADVERSARY_GREY = "adversary-grey"
    ADVERSARY_BLACK = "adversary-black"


class EdgeType(str, Enum):
    FACT_FLOW = "fact-flow"
    PERSISTENT = "persistent-or-knowledge"
    OUT_TO_ADVERSARY = "out-to-adversary"
    TEMPORAL = "temporal"


@dataclass(frozen=True)
class GraphNode:
    """One event. Rule boxes carry their three rows; ellipses carry the term instead."""

    id: str
    kind: NodeKind
    timepoint: int
    label: str
    rule: Optional[str] = None
    term: Optional[str] = None
    premises: Tuple[str, ...] = ()
    actions: Tuple[str, ...] = ()
    conclusions: Tuple[str, ...] = ()
    highlighted: bool = False

    @property
    def is_rule(self) -> bool:
        return self.kind is NodeKind.RULE


@dataclass(frozen=True)
class GraphEdge:
    """``source_slot``/``target_slot`` index the conclusion and premise rows of rule boxes."""

    source: str
    target: str
    type: EdgeType
    fact: Optional[str] = None
    source_slot: Optional[int] = None
    target_slot: Optional[int] = None


class DepGraph:
    """Dependency graph of a trace over a ``networkx.MultiDiGraph``; nodes are keyed by id."""

    def __init__(self) -> None:
        self.graph = nx.MultiDiGraph()

    def add_node(self, node: GraphNode) -> None:
        if node.id in self.graph:
            raise ValueError(f"duplicate node id {node.id}")
        self.graph.add_node(node.id, node=node)

    def add_edge(self, edge: GraphEdge) -> None:
        for end in (edge.source, edge.target):
            if end not in self.graph:
                raise KeyError(f"edge refers to unknown node {end}")
        self.graph.add_edge(edge.source, edge.target, edge=edge)

    def nodes(self) -> List[GraphNode]:
        return sorted((data["node"] for _, data in self.graph.nodes(data=True)), key=lambda n: n.timepoint)

    def edges(self) -> List[GraphEdge]:
        return [data["edge"] for _, _, data in self.graph.edges(data=True)]

    def node(self, node_id: str) -> GraphNode:
        return self.graph.nodes[node_id]["node"]

    def count(self, kind: NodeKind, label: Optional[str] = None) -> int:
        return sum(1 for n in self.nodes() if n.kind is kind and (label is None or n.label.endswith(f": {label}")))

    def edges_of(self, edge_type: EdgeType) -> List[GraphEdge]:
        return [e for e in self.edges() if e.type is edge_type]

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.graph)

    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DepGraph):
            return NotImplemented
        return self.nodes() == other.nodes() and self.edges() == other.edges()


def node_id(timepoint: int) -> str:
    return f"n{timepoint}"


def build_graph(trace: Trace, highlight: Iterable[int] = ()) -> DepGraph:
    """Dependency graph of ``trace``.

    Every premise gets one incoming edge from the event that produced it, unless the
    trace's initial state or public knowledge already supplies it. ``highlight`` lists the
    lemma-relevant timepoints; consecutive ones are joined by temporal edges.
    """
    marked = sorted(set(highlight))
    graph = DepGraph()
    producers = _Producers(trace)
    expected = trace.initial.clock
    for event in trace.events:
        if event.timepoint != expected:
            raise ContractError(f"trace is not replayable: expected timepoint {expected}, got {event.timepoint}")
        expected += 1
        graph.add_node(_node(event, event.timepoint in marked))
        for slot, fact in enumerate(event.premises):
            found = producers.consume(fact, event.timepoint)
            if found is not None:
                source, source_slot = found
                graph.add_edge(
                    GraphEdge(
                        node_id(source.timepoint),
                        node_id(event.timepoint),
                        _edge_type(fact),
                        str(fact),
                        source_slot if _boxed(source) else None,
                        slot if _boxed(event) else None,
                    )
                )
        producers.produce(event)
    for earlier, later in zip(marked, marked[1:]):
        if node_id(earlier) in graph.graph and node_id(later) in graph.graph:
            graph.add_edge(GraphEdge(node_id(earlier), node_id(later), EdgeType.TEMPORAL))
    return graph


# ---- Helpers


def _node(event: Event, highlighted: bool) -> GraphNode:
    label = f"#{event.timepoint} : {event.label}"
    if _boxed(event):
        return GraphNode(
            node_id(event.timepoint),
            NodeKind.RULE,
            event.timepoint,
            label,
            rule=event.rule or event.label,
            premises=tuple(str(f) for f in event.premises),
            actions=tuple(str(f) for f in event.actions),
            conclusions=tuple(str(f) for f in event.conclusions),
            highlighted=highlighted,
        )
    kind = NodeKind.ADVERSARY_GREY if event.label == CONSTRUCT_LABEL else NodeKind.ADVERSARY_BLACK
    return GraphNode(
        node_id(event.timepoint),
        kind,
        event.timepoint,
        label,
        term=str(event.term),
        premises=tuple(str(f) for f in event.premises),
        conclusions=tuple(str(f) for f in event.conclusions),
        highlighted=highlighted,
    )


def _boxed(event: Event) -> bool:
    return event.is_rule or event.kind is EventKind.FRESH


def _edge_type(fact: Fact) -> EdgeType:
    if fact.name == "Out":
        return EdgeType.OUT_TO_ADVERSARY
    if fact.persistent:
        return EdgeType.PERSISTENT
    return EdgeType.FACT_FLOW


class _Producers:
    """Where each fact available so far came from. Linear facts are used up oldest first."""

    def __init__(self, trace: Trace) -> None:
        self.initial = trace.initial
        self.linear: Dict[Fact, Deque[Tuple[Event, int]]] = {}
        self.persistent: Dict[Fact, Tuple[Event, int]] = {}
        self.spare: List[Fact] = list(trace.initial.linear)

    def produce(self, event: Event) -> None:
        for slot, fact in enumerate(event.conclusions):
            if fact.persistent:
                self.persistent.setdefault(fact, (event, slot))
            else:
                self.linear.setdefault(fact, deque()).append((event, slot))

    def consume(self, fact: Fact, timepoint: int) -> Optional[Tuple[Event, int]]:
        if fact.persistent:
            found = self.persistent.get(fact)
            if found is None and not self._given(fact):
                raise ContractError(f"trace is not replayable: {fact} at #{timepoint} has no producer")
            return found
        queue = self.linear.get(fact)
        if queue:
            return queue.popleft()
        if fact in self.spare:
            self.spare.remove(fact)
            return None
        raise ContractError(f"trace is not replayable: {fact} at #{timepoint} has no producer")

    def _given(self, fact: Fact) -> bool:
        if fact in self.initial.persistent:
            return True
        if fact.name in ("K", "KU") and fact.arity == 1:
            term = fact.args[0]
            return isinstance(term, (PublicName, StringConstant)) or term in self.initial.knowledge
        return False
