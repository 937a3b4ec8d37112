"""Dependency graphs of traces, rendered as Graphviz DOT or JSON."""

from msrprove.graph.depgraph import DepGraph, EdgeType, GraphEdge, GraphNode, NodeKind, build_graph, node_id
from msrprove.graph.dot import GREENS, emit_dot, rule_colour
from msrprove.graph.json_io import emit_json, read_json

__all__ = [
    "DepGraph",
    "EdgeType",
    "GREENS",
    "GraphEdge",
    "GraphNode",
    "NodeKind",
    "build_graph",
    "emit_dot",
    "emit_json",
    "node_id",
    "read_json",
    "rule_colour",
]
