from __future__ import annotations

import json
from dataclasses import asdict
from typing import Any, Dict

from msrprove.graph.depgraph import DepGraph, EdgeType, GraphEdge, GraphNode, NodeKind


def emit_json(g: DepGraph) -> str:
    """Compact JSON with ``nodes`` in timepoint order and ``edges`` in insertion order."""
    data = {"nodes": [_plain(asdict(n)) for n in g.nodes()], "edges": [_plain(asdict(e)) for e in g.edges()]}
    return json.dumps(data, separators=(",", ":"))


def read_json(text: str) -> DepGraph:
    """Inverse of ``emit_json``; raises ``ValueError`` on malformed input."""
    try:
        data = json.loads(text)
        graph = DepGraph()
        for raw in data["nodes"]:
            graph.add_node(_node(raw))
        for raw in data["edges"]:
            graph.add_edge(_edge(raw))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"not a dependency graph: {exc}") from exc
    return graph


# ---- Helpers


def _plain(record: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v.value if isinstance(v, (NodeKind, EdgeType)) else list(v) if isinstance(v, tuple) else v for k, v in record.items()}


def _node(raw: Dict[str, Any]) -> GraphNode:
    return GraphNode(
        id=raw["id"],
        kind=NodeKind(raw["kind"]),
        timepoint=int(raw["timepoint"]),
        label=raw["label"],
        rule=raw.get("rule"),
        term=raw.get("term"),
        premises=tuple(raw.get("premises", ())),
        actions=tuple(raw.get("actions", ())),
        conclusions=tuple(raw.get("conclusions", ())),
        highlighted=bool(raw.get("highlighted", False)),
    )


def _edge(raw: Dict[str, Any]) -> GraphEdge:
    return GraphEdge(
        source=raw["source"],
        target=raw["target"],
        type=EdgeType(raw["type"]),
        fact=raw.get("fact"),
        source_slot=raw.get("source_slot"),
        target_slot=raw.get("target_slot"),
    )
