from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import pytest

from msrprove.engine import Bounds, explore
from msrprove.errors import ContractError
from msrprove.graph import GREENS, DepGraph, EdgeType, NodeKind, build_graph, emit_dot, emit_json, read_json, rule_colour
from msrprove.properties.checker import check_lemma

GOLDEN = Path(__file__).parent / "golden"


def trace_of(theory, description, bounds):
    return next(t for t in explore(theory, bounds) if t.describe() == description)


@pytest.fixture(scope="module")
def client_trace(replay_attack):
    return trace_of(replay_attack, "Register_Key ; Client_Sends_Message", Bounds(max_events=2))


@pytest.fixture(scope="module")
def witness(replay_attack):
    return check_lemma(replay_attack, replay_attack.lemma("Replay_Possible"), Bounds(max_events=4))


def test_register_then_client_edges(client_trace):
    g = build_graph(client_trace)
    assert [e.type for e in g.edges()] == [EdgeType.FACT_FLOW, EdgeType.PERSISTENT, EdgeType.OUT_TO_ADVERSARY]
    dot = emit_dot(g)
    assert "  n0:c0 -> n1:p0 [color=black];\n" in dot
    assert "  n1:c0 -> n2:p0 [color=gray50];\n" in dot
    assert "  n2:c0 -> n3 [color=red];\n" in dot
    assert dot.count("color=red];") == 1


def test_rule_nodes_are_three_row_records(client_trace):
    g = build_graph(client_trace)
    register = g.node("n1")
    assert register.kind is NodeKind.RULE
    assert register.premises == ("Fr(k#0)",)
    assert register.conclusions == ("!MacKey($A, k#0)",)
    assert 'label="{{<p0> Fr(k#0)}|#1 : Register_Key[]|{<c0> !MacKey($A, k#0)}}"' in emit_dot(g)
    assert g.node("n3").kind is NodeKind.ADVERSARY_BLACK


def test_empty_trace_gives_an_empty_graph(replay_attack):
    empty = next(explore(replay_attack, Bounds(max_events=1)))
    g = build_graph(empty)
    assert len(g) == 0
    assert emit_json(g) == '{"nodes":[],"edges":[]}'
    assert emit_dot(g, name="empty").startswith('digraph "empty" {\n')
    assert emit_dot(g).endswith("}\n")


def test_witness_graph_shows_the_replay(witness):
    g = build_graph(witness.trace, witness.highlight())
    assert g.count(NodeKind.ADVERSARY_BLACK, "irecv") == 1
    assert g.count(NodeKind.ADVERSARY_BLACK, "isend") == 2
    assert g.count(NodeKind.ADVERSARY_BLACK, "coerce") == 2
    assert g.count(NodeKind.ADVERSARY_GREY) == 0
    assert g.count(NodeKind.RULE, "Server_Receives_Message") == 2
    assert g.is_acyclic()


def test_red_edges_leave_out_facts(witness):
    g = build_graph(witness.trace)
    red = g.edges_of(EdgeType.OUT_TO_ADVERSARY)
    assert red
    for edge in red:
        source = g.node(edge.source)
        assert source.conclusions[edge.source_slot].startswith("Out(")
        assert g.node(edge.target).label.endswith(": irecv")


def test_highlighted_timepoints_are_joined_and_emphasized(witness):
    marked = witness.highlight()
    g = build_graph(witness.trace, marked)
    (temporal,) = g.edges_of(EdgeType.TEMPORAL)
    assert (temporal.source, temporal.target) == tuple(f"n{t}" for t in marked)
    dot = emit_dot(g)
    assert dot.count("penwidth=2") == len(marked)
    assert f"  n{marked[0]} -> n{marked[1]} [style=dashed color=black constraint=false];\n" in dot


def test_dot_output_is_deterministic(witness):
    first = emit_dot(build_graph(witness.trace, witness.highlight()), name="ReplayAttack_Replay_Possible")
    second = emit_dot(build_graph(witness.trace, witness.highlight()), name="ReplayAttack_Replay_Possible")
    assert first == second


def test_rule_colours_come_from_the_palette(replay_attack):
    for rule in replay_attack.rules:
        assert rule_colour(rule.name) in GREENS
        assert rule_colour(rule.name) == rule_colour(rule.name)


def test_json_round_trip(witness):
    g = build_graph(witness.trace, witness.highlight())
    assert read_json(emit_json(g)) == g


@pytest.mark.parametrize("text", ['{"nodes": []}', '{"nodes": [{"id": "n0"}], "edges": []}', "[]"])
def test_read_json_rejects_malformed_graphs(text):
    with pytest.raises(ValueError):
        read_json(text)


def test_graph_rejects_duplicate_nodes_and_dangling_edges(client_trace):
    g = build_graph(client_trace)
    with pytest.raises(ValueError):
        g.add_node(g.node("n0"))
    other = DepGraph()
    with pytest.raises(KeyError):
        other.add_edge(g.edges()[0])


def test_every_explored_trace_has_an_acyclic_graph(prevent_replay):
    for trace in explore(prevent_replay, Bounds(max_events=4, max_fresh=2)):
        g = build_graph(trace)
        assert len(g) == len(trace.events)
        assert g.is_acyclic()


def test_non_contiguous_trace_is_rejected(client_trace):
    with pytest.raises(ContractError):
        build_graph(replace(client_trace, events=client_trace.events[1:]))


def test_witness_graph_matches_golden_file(witness):
    dot = emit_dot(build_graph(witness.trace, witness.highlight()), name="ReplayAttack_Replay_Possible")
    golden = GOLDEN / "replay_witness.dot"
    assert golden.is_file(), f"missing golden file {golden}"
    assert dot == golden.read_text(encoding="utf-8")
    assert f'fillcolor="{rule_colour("Server_Receives_Message")}" penwidth=2' in dot
