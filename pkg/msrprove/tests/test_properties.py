from __future__ import annotations

from dataclasses import replace

import pytest

from msrprove.corpus import load_case, mutated_theory
from msrprove.engine import Bounds, Engine, explore
from msrprove.frontend import Lemma, TraceMode
from msrprove.properties import Quantified, Quantifier, TimeVar, free_variables, negate, unguarded_variables
from msrprove.properties.checker import VerdictKind, check_lemma, check_theory, lemma_projection
from msrprove.properties.evaluate import holds
from msrprove.terms import Application, FreshName, PublicName, StringConstant, Variable

REPLAY_WITNESS = ["Register_Key", "Client_Sends_Message", "Server_Receives_Message", "Server_Receives_Message"]
PREVENT_BOUNDS = Bounds()
VOUCHER_LEMMAS = [
    "Authentication",
    "Voucher_Authenticity",
    "Voucher_Integrity",
    "No_Replay_Nonce",
    "Visitor_Pass_Authenticity",
    "Data_Items_Confidentiality",
    "Mutual_Authentication",
]


def rules_of(trace):
    return [e.label for e in trace.rule_events]


def flipped(lemma: Lemma) -> Lemma:
    mode = TraceMode.ALL_TRACES if lemma.mode is TraceMode.EXISTS_TRACE else TraceMode.EXISTS_TRACE
    return replace(lemma, name=f"Not_{lemma.name}", formula=negate(lemma.formula), mode=mode)


# ---- holds


def test_single_input_satisfies_no_replay(prevent_replay):
    lemma = prevent_replay.lemma("No_Replay_Attack")
    traces = [t for t in explore(prevent_replay, Bounds(max_events=3, max_fresh=2)) if len(t.rule_events) == 3]
    accepted = [t for t in traces if rules_of(t)[-1] == "Server_Receives_Message"]
    assert accepted
    for trace in accepted:
        assert holds(lemma.formula, trace, prevent_replay.rewriter).value


def test_double_input_witnesses_replay(replay_attack):
    lemma = replay_attack.lemma("Replay_Possible")
    trace = next(t for t in explore(replay_attack, Bounds(max_events=4)) if rules_of(t) == REPLAY_WITNESS)
    result = holds(lemma.formula, trace, replay_attack.rewriter)
    assert result.value
    found = dict(result.assignment)
    assert found[Variable("m")] == Application("mac", (StringConstant("message"), FreshName("k", 0)))
    servers = [e.timepoint for e in trace.rule_events if e.label == "Server_Receives_Message"]
    assert (found[TimeVar("i")], found[TimeVar("j")]) == tuple(servers)
    assert result.timepoints() == tuple(servers)


def test_universal_formulas_hold_on_the_empty_trace(prevent_replay, replay_attack):
    empty = next(explore(prevent_replay, PREVENT_BOUNDS))
    assert holds(prevent_replay.lemma("No_Replay_Attack").formula, empty, prevent_replay.rewriter).value
    assert not holds(replay_attack.lemma("Replay_Possible").formula, empty, replay_attack.rewriter).value


def test_negation_flips_the_truth_value(replay_attack):
    formula = replay_attack.lemma("Replay_Possible").formula
    negated = negate(formula)
    assert isinstance(negated, Quantified) and negated.quantifier is Quantifier.ALL
    for trace in explore(replay_attack, Bounds(max_events=4)):
        rewriter = replay_attack.rewriter
        assert holds(formula, trace, rewriter).value != holds(negated, trace, rewriter).value



def test_corpus_formulas_are_closed_and_guarded(replay_attack, prevent_replay, permission_voucher):
    for theory in (replay_attack, prevent_replay, permission_voucher):
        for lemma in theory.lemmas:
            for formula in (lemma.formula, negate(lemma.formula)):
                assert free_variables(formula) == set()
                assert unguarded_variables(formula) == []


def test_quantifier_body_variables_are_free_until_bound(replay_attack):
    formula = replay_attack.lemma("Replay_Possible").formula
    assert free_variables(formula.body) == {Variable("m"), TimeVar("i"), TimeVar("j")}

# ---- verdicts


def test_replay_attack_has_a_witness(replay_attack):
    verdict = check_lemma(replay_attack, replay_attack.lemma("Replay_Possible"), Bounds(max_events=4))
    assert verdict.kind is VerdictKind.WITNESS
    assert verdict.expected
    assert rules_of(verdict.trace) == REPLAY_WITNESS
    assert verdict.summary().startswith("witness found (4 rule instance(s)")


def test_replay_attack_has_no_witness_below_four_events(replay_attack):
    verdict = check_lemma(replay_attack, replay_attack.lemma("Replay_Possible"), Bounds(max_events=3))
    assert verdict.kind is VerdictKind.NO_WITNESS
    assert verdict.trace is None
    assert "up to bound" in verdict.summary()


def test_nonce_check_prevents_replay(prevent_replay):
    verdict = check_lemma(prevent_replay, prevent_replay.lemma("No_Replay_Attack"), PREVENT_BOUNDS)
    assert verdict.kind is VerdictKind.VERIFIED
    # interleavings the lemma cannot tell apart are explored once
    assert verdict.traces < 10_000
    assert verdict.summary().startswith("verified up to bound (")
    assert verdict.trace is None


def test_dropping_the_nonce_check_is_falsified_at_every_larger_bound():
    case = load_case("prevent_replay")
    theory = mutated_theory(case, "drop-nonce-guard")
    lemma = theory.lemma("No_Replay_Attack")
    for max_events in (4, 6, 8):
        verdict = check_lemma(theory, lemma, Bounds(max_events=max_events, max_fresh=2))
        assert verdict.kind is VerdictKind.FALSIFIED
        assert not verdict.expected
    assert rules_of(verdict.trace) == REPLAY_WITNESS


@pytest.mark.parametrize("name", VOUCHER_LEMMAS)
def test_permission_voucher_lemmas_are_verified(permission_voucher, name):
    verdict = check_lemma(permission_voucher, permission_voucher.lemma(name))
    assert verdict.kind is VerdictKind.VERIFIED, verdict.summary()


def test_voucher_pin_and_card_never_reach_the_adversary(permission_voucher):
    traces = list(explore(permission_voucher, Bounds(max_events=5)))
    assert any("App_Issues_Voucher" in rules_of(t) for t in traces)
    for trace in traces:
        leaked = [t for t in trace.final.knowledge.terms if isinstance(t, FreshName) and t.label in ("pin", "card")]
        assert not leaked, trace.describe()


def test_leaked_app_key_breaks_voucher_authenticity(voucher_case):
    theory = mutated_theory(voucher_case, "leak-app-key")
    verdict = check_lemma(theory, theory.lemma("Voucher_Authenticity"))
    assert verdict.kind is VerdictKind.FALSIFIED
    key = dict(verdict.assignment)[Variable("private_key")]
    assert any(f.name == "K" and f.args == (key,) for e in verdict.trace.events for f in e.recorded)


def test_voucher_without_nonce_guard_is_replayable(voucher_case):
    theory = mutated_theory(voucher_case, "drop-nonce-guard")
    verdict = check_lemma(theory, theory.lemma("No_Replay_Nonce"))
    assert verdict.kind is VerdictKind.FALSIFIED
    assert rules_of(verdict.trace).count("Service_Accepts_Nonce") == 2


def test_check_theory_covers_every_lemma(replay_attack):
    verdicts = check_theory(replay_attack, Bounds(max_events=4))
    assert [v.lemma.name for v in verdicts] == ["Replay_Possible"]


# ---- adversary-chosen inputs


def test_nested_input_variables_take_composed_values(theory_of):
    theory = theory_of(
        """
        rule Start: [ ] --> [ Out('a') ]
        rule Recv: [ In(hash(x)) ] --[ Got(x) ]-> [ ]
        lemma Got_Pair: exists-trace "Ex x y #i. Got(<x, y>) @ #i"
        """
    )
    verdict = check_lemma(theory, theory.lemma("Got_Pair"), Bounds(max_events=3, max_fresh=1))
    assert verdict.kind is VerdictKind.WITNESS
    got = next(f for e in verdict.trace.rule_events for f in e.recorded if f.name == "Got")
    assert isinstance(got.args[0], Application) and got.args[0].symbol == "pair"


def test_public_input_variables_range_over_known_names(theory_of):
    theory = theory_of(
        """
        rule Reg: [ ] --> [ !Peer($B) ]
        rule Recv: [ In($A), !Peer($B) ] --[ Talk($A, $B) ]-> [ ]
        lemma Self_Talk: exists-trace "Ex a #i. Talk(a, a) @ #i"
        """
    )
    verdict = check_lemma(theory, theory.lemma("Self_Talk"), Bounds(max_events=3, max_fresh=1))
    assert verdict.kind is VerdictKind.WITNESS
    assert rules_of(verdict.trace) == ["Reg", "Recv"]
    assert dict(verdict.assignment)[Variable("a")] == PublicName("B")


# ---- verdicts against evidence


def test_evidence_replays_and_agrees_with_the_verdict(replay_attack):
    bounds = Bounds(max_events=4)
    lemma = replay_attack.lemma("Replay_Possible")
    for candidate in (lemma, flipped(lemma)):
        verdict = check_lemma(replay_attack, candidate, bounds)
        assert verdict.trace is not None
        Engine(replay_attack, bounds).replay(verdict.trace)
        value = holds(candidate.formula, verdict.trace, replay_attack.rewriter).value
        assert value is (verdict.kind is VerdictKind.WITNESS)


def test_all_and_exists_forms_are_dual(replay_attack, prevent_replay):
    for theory, lemma, bounds in (
        (replay_attack, replay_attack.lemma("Replay_Possible"), Bounds(max_events=4)),
        (prevent_replay, prevent_replay.lemma("No_Replay_Attack"), Bounds(max_events=5, max_fresh=2)),
    ):
        verdict = check_lemma(theory, lemma, bounds)
        dual = check_lemma(theory, flipped(lemma), bounds)
        assert verdict.expected != dual.expected
        if verdict.trace is not None:
            assert rules_of(verdict.trace) == rules_of(dual.trace)


@pytest.mark.parametrize(
    "theory_name, lemma_name, bounds",
    [
        ("replay_attack", "Replay_Possible", Bounds(max_events=4)),
        ("prevent_replay", "No_Replay_Attack", Bounds(max_events=5, max_fresh=2)),
    ],
)
def test_checker_agrees_with_evaluating_every_trace(request, theory_name, lemma_name, bounds):
    theory = request.getfixturevalue(theory_name)
    lemma = theory.lemma(lemma_name)
    traces = explore(theory, bounds, projection=lemma_projection(lemma))
    values = [holds(lemma.formula, t, theory.rewriter).value for t in traces]
    verdict = check_lemma(theory, lemma, bounds, workers=1)
    if lemma.mode is TraceMode.EXISTS_TRACE:
        assert (verdict.kind is VerdictKind.WITNESS) == any(values)
    else:
        assert (verdict.kind is VerdictKind.VERIFIED) == all(values)
        if verdict.kind is VerdictKind.VERIFIED:
            assert verdict.traces == len(values)


def test_parallel_search_finds_the_same_first_trace(theory_of):
    theory = theory_of(
        """
        rule Left: [ Fr(~a) ] --[ Started(~a) ]-> [ Out(~a) ]
        rule Right: [ Fr(~b) ] --[ Started(~b) ]-> [ Out(~b) ]
        rule Echo: [ In(x) ] --[ Echoed(x) ]-> [ ]
        lemma Echo_Happens: exists-trace "Ex x #i. Echoed(x) @ #i"
        lemma Nothing_Echoed: "All x #i. Echoed(x) @ #i ==> #i < #i"
        """
    )
    bounds = Bounds(max_events=3, max_fresh=2)
    for lemma in theory.lemmas:
        sequential = check_lemma(theory, lemma, bounds, workers=1)
        parallel = check_lemma(theory, lemma, bounds, workers=2)
        assert parallel.kind is sequential.kind
        assert rules_of(parallel.trace) == rules_of(sequential.trace) == ["Left", "Echo"]
