from __future__ import annotations

import pytest

from msrprove.errors import TheoryError
from msrprove.frontend import DiagnosticCode, Fact, TraceMode, load_theory, parse_theory, pretty_print, validate
from msrprove.terms import Application, FunctionSignature, PublicName, Sort, StringConstant, Variable

REPLAY_RULES = {"Register_Key", "Client_Sends_Message", "Server_Receives_Message"}


def codes(text: str):
    return [d.code for d in parse_theory(text).diagnostics]


def test_replay_attack_parses_cleanly(replay_attack):
    assert replay_attack.name == "ReplayAttack"
    assert {r.name for r in replay_attack.rules} == REPLAY_RULES
    assert [lm.name for lm in replay_attack.lemmas] == ["Replay_Possible"]
    assert replay_attack.lemmas[0].mode is TraceMode.EXISTS_TRACE
    assert replay_attack.functions == (FunctionSignature("mac", 2),)


def test_prevent_replay_parses_cleanly(prevent_replay):
    assert prevent_replay.name == "PreventReplayAttack"
    assert {r.name for r in prevent_replay.rules} == REPLAY_RULES
    assert [lm.name for lm in prevent_replay.lemmas] == ["No_Replay_Attack"]
    assert prevent_replay.fact_schemas["Nonce"].kind.value == "persistent"


@pytest.mark.parametrize("name", ["replay_attack.spthy", "prevent_replay.spthy", "permission_voucher.spthy"])
def test_corpus_files_have_no_diagnostics(name):
    from msrprove.config import CORPUS_DIR

    result = parse_theory((CORPUS_DIR / name).read_text(encoding="utf-8"))
    assert result.ok
    assert result.diagnostics == ()


def test_loaded_theories_validate_cleanly(replay_attack, prevent_replay, permission_voucher):
    for theory in (replay_attack, prevent_replay, permission_voucher):
        assert validate(theory) == []


def test_split_premise_lists_merge_around_the_let_block(prevent_replay):
    rule = prevent_replay.rule("Client_Sends_Message")
    assert [f.name for f in rule.premises] == ["Fr", "MacKey"]
    assert [b.var for b in rule.lets] == [Variable("m")]
    expanded = rule.expanded()
    out = next(f for f in expanded.conclusions if f.name == "Out")
    mac = Application("mac", (StringConstant("message"), Variable("k", Sort.FRESH)))
    assert out.args == (Application("pair", (Variable("n", Sort.FRESH), mac)),)


def test_let_before_and_after_premises_give_the_same_rule(theory_of):
    before = theory_of("functions: mac/2\nrule R: let m = mac('a', ~k) in [ Fr(~k) ] --> [ Out(m) ]")
    after = theory_of("functions: mac/2\nrule R: [ Fr(~k) ] let m = mac('a', ~k) in --> [ Out(m) ]")
    assert before.rule("R") == after.rule("R")


def test_function_declarations_alone():
    result = parse_theory("functions: enc/2, dec/2, hash/1")
    assert result.ok
    assert len(result.theory.functions) == 3
    assert result.theory.rules == ()


def test_out_in_premises_is_rejected():
    result = parse_theory("rule R: [ Out(x) ] --> [ ]")
    assert result.theory is None
    assert DiagnosticCode.RESERVED_FACT_MISUSE in [d.code for d in result.errors]


def test_client_rule_with_bound_key_has_no_diagnostics(theory_of):
    text = """
    functions: mac/2
    rule Register_Key: [ Fr(~k) ] --> [ !MacKey($A, ~k) ]
    rule Client_Sends_Message:
      let m = mac('message', ~k)
      in
      [ !MacKey($A, ~k) ] --> [ Out(m) ]
    """
    assert parse_theory(text).diagnostics == ()


@pytest.mark.parametrize(
    "text, code",
    [
        ("rule R: [ Fr(~x) ] --> [ Fr(~x) ]", DiagnosticCode.FR_IN_CONCLUSION),
        ("rule R: [ In(f(x)) ] --> [ ]", DiagnosticCode.UNDECLARED_FUNCTION),
        ("rule R: [ In(enc(x)) ] --> [ ]", DiagnosticCode.ARITY_MISMATCH),
        ("functions: hash/2", DiagnosticCode.ARITY_MISMATCH),
        ("functions: In/1", DiagnosticCode.RESERVED_NAME),
        ("functions: g/1, g/2", DiagnosticCode.DUPLICATE_FUNCTION),
        ("rule R: [ ] --> [ Out(x) ]", DiagnosticCode.UNBOUND_VARIABLE),
        ("rule R: [ ] --> [ ]\nrule R: [ ] --> [ ]", DiagnosticCode.DUPLICATE_RULE),
        ("rule A: [ ] --> [ S('a') ]\nrule B: [ !S('a') ] --> [ ]", DiagnosticCode.FACT_KIND_MISMATCH),
        ("rule A: [ ] --> [ S('a') ]\nrule B: [ not(S('a')) ] --> [ ]", DiagnosticCode.NEGATION_NOT_PERSISTENT),
        ("rule R: [ ] --[ K('a') ]-> [ ]", DiagnosticCode.RESERVED_FACT_MISUSE),
        ("rule R: [ Fr('a') ] --> [ ]", DiagnosticCode.RESERVED_FACT_MISUSE),
        ("rule R [ ] --> [ ]", DiagnosticCode.SYNTAX_ERROR),
        ("rule R: [ A(%) ] --> [ ]", DiagnosticCode.LEXICAL_ERROR),
        ("builtins: hashing", DiagnosticCode.UNSUPPORTED_DECLARATION),
        ("equations: hash(x) = hash(hash(x))", DiagnosticCode.BAD_EQUATION),
        ('rule R: [ ] --[ Done() ]-> [ ]\nlemma L: "Ex #i. Done(x) @ #i"', DiagnosticCode.UNBOUND_FORMULA_VARIABLE),
        ('rule R: [ ] --[ Done() ]-> [ ]\nlemma L: "All x #i. Done() @ #i ==> x = x"', DiagnosticCode.UNGUARDED_FORMULA),
        ('lemma L: "All #i. Done() @ #i ==> #i = #i"\nlemma L: "All #i. Done() @ #i ==> #i = #i"', DiagnosticCode.DUPLICATE_LEMMA),
    ],
)
def test_malformed_input_is_reported(text, code):
    result = parse_theory(text)
    assert result.theory is None
    assert code in [d.code for d in result.errors]


def test_unused_action_is_only_a_warning():
    result = parse_theory('rule R: [ ] --[ Done() ]-> [ ]\nlemma L: exists-trace "Ex #i. Missing() @ #i"')
    assert result.ok
    assert [d.code for d in result.warnings] == [DiagnosticCode.UNUSED_ACTION]
    assert codes("rule R: [ ] --[ Done() ]-> [ ]") == []


def test_diagnostics_point_at_the_offending_token():
    text = "functions: mac/2\n\nrule R:\n  [ Out(x) ] --> [ ]\n"
    (diagnostic,) = parse_theory(text).errors
    line = text.splitlines()[diagnostic.line - 1]
    assert line[diagnostic.column - 1 :].startswith("Out")


def test_diagnostics_inside_lemma_formulas_point_into_the_formula():
    text = 'rule R: [ ] --[ Done() ]-> [ ]\nlemma L:\n  "Ex #i. Done() @ #i &"'
    (diagnostic,) = parse_theory(text).errors
    assert diagnostic.code is DiagnosticCode.SYNTAX_ERROR
    assert diagnostic.line == 3


def test_nullary_functions_are_constants_not_variables(theory_of):
    theory = theory_of("functions: ok/0\nrule R: [ ] --> [ Out(ok) ]")
    (out,) = theory.rule("R").conclusions
    assert out.args == (Application("ok"),)


def test_public_constants_are_collected(replay_attack):
    constants = replay_attack.public_constants()
    assert StringConstant("message") in constants
    assert StringConstant("message_verified") in constants
    assert PublicName("A") not in constants


def test_fact_display():
    assert str(Fact("MacKey", (PublicName("A"),), persistent=True)) == "!MacKey($A)"
    assert str(Fact("Nonce", (StringConstant("a"),), persistent=True, negated=True)) == "not(Nonce('a'))"
    assert str(Fact("K", (StringConstant("a"),), persistent=True)) == "K('a')"


@pytest.mark.parametrize("fixture", ["replay_attack", "prevent_replay", "permission_voucher"])
def test_pretty_print_round_trips(fixture, request):
    theory = request.getfixturevalue(fixture)
    printed = pretty_print(theory)
    reparsed = parse_theory(printed)
    assert reparsed.diagnostics == ()
    assert reparsed.theory == theory
    assert pretty_print(reparsed.theory) == printed


def test_load_theory_raises_with_diagnostics(tmp_path):
    path = tmp_path / "broken.spthy"
    path.write_text("theory Broken\nbegin\nrule R: [ Out(x) ] --> [ ]\nend\n", encoding="utf-8")
    with pytest.raises(TheoryError) as caught:
        load_theory(path)
    assert caught.value.diagnostics[0].code is DiagnosticCode.RESERVED_FACT_MISUSE


def test_theory_header_problems():
    assert DiagnosticCode.SYNTAX_ERROR in codes("theory T begin\nrule R: [ ] --> [ ]\n")
    assert DiagnosticCode.SYNTAX_ERROR in codes("theory T begin\nend\nrule R: [ ] --> [ ]")
    assert parse_theory("theory Empty\nbegin\nend\n").theory.name == "Empty"
