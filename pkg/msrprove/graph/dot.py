from __future__ import annotations

import hashlib
from typing import Iterator, List, Optional, Sequence

from msrprove.graph.depgraph import DepGraph, EdgeType, GraphNode, NodeKind

GREENS = ("#e5f5e0", "#c7e9c0", "#a1d99b", "#d9f0a3", "#b8e186", "#ccebc5")

EDGE_STYLE = {
    EdgeType.FACT_FLOW: "color=black",
    EdgeType.PERSISTENT: "color=gray50",
    EdgeType.OUT_TO_ADVERSARY: "color=red",
    EdgeType.TEMPORAL: "style=dashed color=black constraint=false",
}

_RECORD_SPECIAL = '{}|<>"\\'


def emit_dot(g: DepGraph, name: str = "trace") -> str:
    """Graphviz text for ``g``; same graph, same bytes."""
    return "".join(_lines(g, name))


def rule_colour(rule: str) -> str:
    digest = hashlib.blake2b(rule.encode("utf-8"), digest_size=1).digest()
    return GREENS[digest[0] % len(GREENS)]


# ---- Helpers


def _lines(g: DepGraph, name: str) -> Iterator[str]:
    yield f"digraph {_quote(name)} {{\n"
    yield "  nodesep=0.3;\n  ranksep=0.3;\n"
    yield '  node [fontname="Helvetica" fontsize=9];\n'
    yield '  edge [fontname="Helvetica" fontsize=8];\n'
    for node in g.nodes():
        yield f"  {node.id} [{_node_attributes(node)}];\n"
    for edge in g.edges():
        yield f"  {_end(edge.source, 'c', edge.source_slot)} -> {_end(edge.target, 'p', edge.target_slot)} [{EDGE_STYLE[edge.type]}];\n"
    yield "}\n"


def _node_attributes(node: GraphNode) -> str:
    width = " penwidth=2" if node.highlighted else ""
    if node.kind is NodeKind.RULE:
        colour = rule_colour(node.rule or node.label)
        return f'shape=record style=filled fillcolor="{colour}"{width} label="{_record(node)}"'
    colour = "gray50" if node.kind is NodeKind.ADVERSARY_GREY else "black"
    label = f"{node.label}\n{node.term}" if node.term is not None else node.label
    return f"shape=ellipse color={colour} fontcolor={colour}{width} label={_quote(label)}"


def _record(node: GraphNode) -> str:
    """Three rows: premises, ``#t : Rule[actions]``, conclusions."""
    heading = _escape(f"{node.label}[{', '.join(node.actions)}]")
    return "{" + "|".join((_row("p", node.premises), heading, _row("c", node.conclusions))) + "}"


def _row(port: str, facts: Sequence[str]) -> str:
    if not facts:
        return ""
    cells: List[str] = [f"<{port}{i}> {_escape(fact)}" for i, fact in enumerate(facts)]
    return "{" + "|".join(cells) + "}"


def _escape(text: str) -> str:
    return "".join("\\" + ch if ch in _RECORD_SPECIAL else ch for ch in text)


def _quote(text: str) -> str:
    return '"{}"'.format(text.replace('"', '\\"').replace("\n", "\\n"))


def _end(node: str, port: str, slot: Optional[int]) -> str:
    return node if slot is None else f"{node}:{port}{slot}"
