from __future__ import annotations

import pytest

from msrprove.engine import Bounds, Choice, Engine, EventKind, ExploreStats, Projection, canonical_key, explore, root_branches
from msrprove.engine.shapes import ShapeIndex
from msrprove.errors import ContractError
from msrprove.frontend import Fact
from msrprove.terms import Application, FreshName, PublicName, StringConstant, Variable

MAC = Application("mac", (StringConstant("message"), FreshName("k", 0)))


def fire(engine: Engine, *rules: str):
    """Fire the first enabled choice of each named rule in turn."""
    state = engine.initial_state()
    events = ()
    for rule in rules:
        choice = next(c for c in engine.enabled(state) if c.rule == rule)
        result = engine.step(state, choice)
        state, events = result.state, events + result.events
    return state, events


def test_initially_only_key_registration_is_enabled(replay_attack):
    engine = Engine(replay_attack)
    assert [c.rule for c in engine.enabled(engine.initial_state())] == ["Register_Key"]


def test_registration_enables_the_client(replay_attack):
    engine = Engine(replay_attack)
    state, _ = fire(engine, "Register_Key")
    assert "Client_Sends_Message" in {c.rule for c in engine.enabled(state)}
    assert Fact("MacKey", (PublicName("A"), FreshName("k", 0)), persistent=True) in state.persistent
    assert state.fresh_counter == 1


def test_client_output_reaches_the_adversary(replay_attack):
    engine = Engine(replay_attack)
    state, events = fire(engine, "Register_Key", "Client_Sends_Message")
    assert MAC in state.knowledge
    irecv = events[-1]
    assert irecv.kind is EventKind.ADV_RECEIVE
    assert irecv.term == MAC
    assert Fact("K", (MAC,), persistent=True) in irecv.observations
    client = events[-2]
    assert client.is_rule
    assert Fact("Out", (MAC,)) in client.observations


def test_events_come_fresh_first_then_rule_then_receive(replay_attack):
    engine = Engine(replay_attack)
    _, events = fire(engine, "Register_Key", "Client_Sends_Message", "Server_Receives_Message")
    assert [e.label for e in events] == [
        "Fresh",
        "Register_Key",
        "Client_Sends_Message",
        "irecv",
        "coerce",
        "isend",
        "Server_Receives_Message",
    ]
    assert [e.timepoint for e in events] == list(range(len(events)))
    server = events[-1]
    assert Fact("In", (MAC,)) in server.observations


def test_rule_without_conclusions_shrinks_the_state(theory_of):
    theory = theory_of("rule Start: [ ] --> [ Token('a') ]\nrule Drop: [ Token('a') ] --> [ ]")
    engine = Engine(theory)
    started, _ = fire(engine, "Start")
    dropped, _ = fire(engine, "Start", "Drop")
    assert len(started.linear) == 1
    assert dropped.linear == ()


def test_known_nonce_blocks_the_server(prevent_replay):
    engine = Engine(prevent_replay, Bounds(max_events=8, max_fresh=2))
    state, _ = fire(engine, "Register_Key", "Client_Sends_Message")
    nonce = FreshName("n", 1)
    assert Fact("Nonce", (nonce,), persistent=True) in state.persistent
    server = [c for c in engine.enabled(state) if c.rule == "Server_Receives_Message"]
    assert server
    assert all(c.substitution[Variable("n")] != nonce for c in server)


def test_step_rejects_choices_that_are_not_enabled(replay_attack):
    engine = Engine(replay_attack)
    initial = engine.initial_state()
    with pytest.raises(ContractError):
        engine.step(initial, Choice("Client_Sends_Message"))
    with pytest.raises(ContractError):
        engine.step(initial, Choice("No_Such_Rule"))


def test_fresh_bound_limits_fresh_premises(replay_attack):
    engine = Engine(replay_attack, Bounds(max_events=4, max_fresh=1))
    state, _ = fire(engine, "Register_Key")
    assert "Register_Key" not in {c.rule for c in engine.enabled(state)}


def test_bounds_must_be_positive():
    with pytest.raises(ValueError):
        Bounds(max_events=0)
    assert str(Bounds()) == "max-events=10, max-fresh=6, adv-depth=4"


def test_two_event_exploration_of_replay_attack(replay_attack):
    traces = list(explore(replay_attack, Bounds(max_events=2)))
    assert [t.describe() for t in traces] == [
        "(empty)",
        "Register_Key",
        "Register_Key ; Client_Sends_Message",
        "Register_Key ; Register_Key",
    ]


def test_empty_theory_has_exactly_the_empty_trace(theory_of):
    traces = list(explore(theory_of("theory Empty\nbegin\nend\n")))
    assert len(traces) == 1
    assert traces[0].events == ()


def test_replaying_a_trace_reproduces_its_final_state(replay_attack):
    bounds = Bounds(max_events=4)
    engine = Engine(replay_attack, bounds)
    for trace in explore(replay_attack, bounds):
        assert engine.replay(trace) == trace.final


def test_exploration_finds_a_replayed_mac(replay_attack):
    def inputs(trace):
        return [e.timepoint for e in trace.rule_events for f in e.observations if f == Fact("In", (MAC,))]

    assert any(len(inputs(t)) == 2 for t in explore(replay_attack, Bounds(max_events=4)))


def test_every_input_is_sent_by_the_adversary_first(prevent_replay):
    for trace in explore(prevent_replay, Bounds(max_events=5, max_fresh=2)):
        for event in trace.rule_events:
            for fact in event.observations:
                if fact.name == "In":
                    sends = [e for e in trace.events if e.kind is EventKind.ADV_SEND and e.term == fact.args[0]]
                    assert sends and sends[-1].timepoint < event.timepoint


def test_knowledge_grows_along_every_trace(prevent_replay):
    bounds = Bounds(max_events=5, max_fresh=2)
    engine = Engine(prevent_replay, bounds)
    for trace in explore(prevent_replay, bounds):
        state = trace.initial
        for choice in trace.choices:
            successor = engine.step(state, choice).state
            assert state.knowledge.terms <= successor.knowledge.terms
            state = successor


def test_exploration_is_deterministic(prevent_replay):
    bounds = Bounds(max_events=5, max_fresh=2)
    first = [t.events for t in explore(prevent_replay, bounds)]
    second = [t.events for t in explore(prevent_replay, bounds)]
    assert first == second


def test_exploration_is_breadth_first(prevent_replay):
    sizes = [len(t.rule_events) for t in explore(prevent_replay, Bounds(max_events=5, max_fresh=2))]
    assert sizes == sorted(sizes)
    assert max(sizes) <= 5


def test_branches_partition_the_non_empty_traces(theory_of):
    theory = theory_of(
        "rule Left: [ Fr(~a) ] --> [ Out(~a) ]\nrule Right: [ Fr(~b) ] --> [ Out(~b) ]\nrule Echo: [ In(x) ] --[ Echoed(x) ]-> [ ]"
    )
    bounds = Bounds(max_events=3, max_fresh=2)
    assert [c.rule for c in root_branches(theory, bounds)] == ["Left", "Right"]
    stats = ExploreStats()
    whole = list(explore(theory, bounds, stats=stats))
    assert stats.explored == len(whole)
    parts = [t for b in range(2) for t in explore(theory, bounds, branch=b)]
    assert all(t.rule_events[0].label in ("Left", "Right") for t in parts)
    with pytest.raises(ValueError):
        next(explore(theory, bounds, branch=2))


def test_canonical_key_ignores_fresh_name_numbering(theory_of):
    theory = theory_of("rule Left: [ Fr(~a) ] --> [ Out(~a) ]\nrule Right: [ Fr(~a) ] --> [ Out(~a) ]")
    engine = Engine(theory, Bounds(max_events=2, max_fresh=2))
    left_right, lr_events = fire(engine, "Left", "Right")
    right_left, rl_events = fire(engine, "Right", "Left")
    assert canonical_key(left_right) == canonical_key(right_left)
    assert canonical_key(left_right, lr_events) != canonical_key(right_left, rl_events)


def test_projected_keys_forget_what_the_lemma_cannot_see(theory_of):
    theory = theory_of(
        "rule Left: [ Fr(~a) ] --[ Started(~a) ]-> [ Out(~a) ]\nrule Right: [ Fr(~a) ] --[ Stopped(~a) ]-> [ Out(~a) ]"
    )
    engine = Engine(theory, Bounds(max_events=2, max_fresh=2))
    left_right, lr_events = fire(engine, "Left", "Right")
    right_left, rl_events = fire(engine, "Right", "Left")
    both = frozenset({"Started", "Stopped"})
    unordered = Projection(both, ordered=False)
    assert canonical_key(left_right, lr_events, unordered) == canonical_key(right_left, rl_events, unordered)
    assert canonical_key(left_right, lr_events, Projection(both)) != canonical_key(right_left, rl_events, Projection(both))
    started = Projection(frozenset({"Started"}))
    assert canonical_key(left_right, lr_events, started) == canonical_key(right_left, rl_events, started)


def test_projected_exploration_visits_fewer_states(theory_of):
    theory = theory_of(
        "rule Left: [ Fr(~a) ] --[ Started(~a) ]-> [ Out(~a) ]\nrule Right: [ Fr(~a) ] --[ Stopped(~a) ]-> [ Out(~a) ]"
    )
    bounds = Bounds(max_events=3, max_fresh=3)
    full, projected = ExploreStats(), ExploreStats()
    list(explore(theory, bounds, stats=full))
    list(explore(theory, bounds, stats=projected, projection=Projection(frozenset({"Started", "Stopped"}), ordered=False)))
    assert projected.explored < full.explored


def test_shape_index_follows_values_into_later_premises(theory_of):
    theory = theory_of(
        "rule Start: [ Fr(~n) ] --> [ Out(~n) ]\n"
        "rule Recv: [ In(x) ] --> [ Stored(x) ]\n"
        'rule Open: [ Stored(<y, z>) ] --[ Opened(y) ]-> [ ]\nlemma Opens: exists-trace "Ex y #i. Opened(y) @ #i"'
    )
    rules = [r.expanded() for r in theory.rules]
    index = ShapeIndex(rules, theory.lemmas)
    pattern = Application("pair", (Variable("y"), Variable("z")))
    assert index.demands(("Stored", 1), (0,)) == (pattern,)
    (shape,) = index.for_rule(rules[1])[Variable("x")]
    assert shape.pattern == pattern
    traces = [t for t in explore(theory, Bounds(max_events=3, max_fresh=1)) if t.rule_events]
    assert any(e.label == "Open" for t in traces for e in t.rule_events)
