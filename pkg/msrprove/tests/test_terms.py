from __future__ import annotations

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from msrprove.errors import ContractError, StructuralError
from msrprove.terms import (
    BUILTIN_REWRITER,
    EMPTY,
    Application,
    FreshName,
    PublicName,
    RewriteEquation,
    Sort,
    StringConstant,
    Substitution,
    Variable,
    apply,
    depth,
    match,
    normalize,
    pair,
    sort_of,
    term_key,
    tuple_items,
    unify,
    variables,
)
from msrprove.tests.strategies import ground_substitutions, ground_terms, open_terms


def f(symbol, *args):
    return Application(symbol, tuple(args))


m, k, x, y, v = (Variable(name) for name in ("m", "k", "x", "y", "v"))
a, b = StringConstant("a"), StringConstant("b")
k0, n5 = FreshName("k", 0), FreshName("n", 5)


def test_builtin_equations_normalize():
    assert normalize(f("dec", f("enc", m, k), k)) == m
    assert normalize(f("adec", f("aenc", m, f("pk", k)), k)) == m
    assert normalize(f("hash", x)) == f("hash", x)
    assert normalize(f("fst", f("pair", a, b))) == a
    assert normalize(f("snd", f("pair", a, b))) == b
    assert normalize(f("getmsg", f("sign", m, k))) == m
    assert normalize(f("verify", f("sign", m, k), m, f("pk", k))) == f("true")


def test_decryption_with_the_wrong_key_is_stuck():
    term = f("dec", f("enc", m, k), x)
    assert normalize(term) == term
    assert BUILTIN_REWRITER.redexes(term) == []


def test_normalize_rejects_undeclared_symbols_and_wrong_arity():
    with pytest.raises(StructuralError) as undeclared:
        normalize(f("frobnicate", x))
    assert undeclared.value.symbol == "frobnicate"
    with pytest.raises(StructuralError):
        normalize(f("enc", x))


def test_match_examples():
    assert match(f("enc", m, k), f("enc", StringConstant("message"), n5)) == Substitution({m: StringConstant("message"), k: n5})
    assert match(v, f("hash", a)) == Substitution({v: f("hash", a)})
    assert match(f("pair", x, x), f("pair", a, b)) is None


def test_match_requires_a_ground_target():
    with pytest.raises(ContractError):
        match(x, f("hash", y))


def test_unify_examples():
    assert unify(x, x) == EMPTY
    assert unify(x, f("hash", x)) is None
    assert unify(f("enc", m, k), f("enc", Variable("k2"), StringConstant("c"))) == Substitution(
        {m: Variable("k2"), k: StringConstant("c")}
    )


def test_unify_respects_sorts():
    fresh = Variable("r", Sort.FRESH)
    assert unify(fresh, a) is None
    assert unify(fresh, k0) == Substitution({fresh: k0})
    assert unify(x, fresh) == Substitution({x: fresh})


def test_apply_examples():
    assert apply(Substitution({m: a}), f("enc", m, k)) == f("enc", a, k)
    assert apply(EMPTY, f("enc", m, k)) == f("enc", m, k)
    assert apply(Substitution({k: k0}), f("dec", f("enc", m, k), k)) == m


def test_substitution_rejects_sort_violations():
    with pytest.raises(ValueError):
        Substitution({Variable("r", Sort.FRESH): a})
    with pytest.raises(ValueError):
        Substitution({Variable("p", Sort.PUB): k0})
    assert Substitution({Variable("p", Sort.PUB): PublicName("A")})


def test_substitution_instantiates_through_chains_and_restricts():
    subst = Substitution({x: y, y: a})
    assert subst.instantiate(f("hash", x)) == f("hash", a)
    assert subst.resolved() == Substitution({x: a, y: a})
    assert subst.restrict([y]) == Substitution({y: a})


def test_pairs_nest_to_the_right():
    c = StringConstant("c")
    assert pair(a, b, c) == f("pair", a, f("pair", b, c))
    assert tuple_items(pair(a, b, c)) == (a, b, c)
    assert str(pair(a, b, c)) == "<'a', 'b', 'c'>"
    with pytest.raises(ValueError):
        pair(a)


def test_sorts_and_display():
    assert sort_of(a) is Sort.PUB
    assert sort_of(PublicName("A")) is Sort.PUB
    assert sort_of(k0) is Sort.FRESH
    assert sort_of(f("hash", a)) is Sort.MSG
    assert Sort.MSG.admits(Sort.FRESH) and not Sort.FRESH.admits(Sort.PUB)
    assert str(k0) == "k#0"
    assert str(PublicName("A")) == "$A"
    assert str(Variable("s", Sort.FRESH)) == "~s"


def test_equation_shapes():
    assert RewriteEquation(f("dec", f("enc", m, k), k), m).shape_problem() is None
    assert RewriteEquation(f("verify", f("sign", m, k), m, f("pk", k)), f("true")).shape_problem() is None
    assert RewriteEquation(m, m).shape_problem() is not None
    assert RewriteEquation(f("hash", m), k).shape_problem() is not None
    assert RewriteEquation(f("hash", m), f("hash", f("hash", m))).shape_problem() is not None


def test_term_key_orders_atoms_before_applications():
    ordered = sorted([f("hash", a), a, k0, PublicName("A"), x], key=term_key)
    assert ordered == [x, k0, PublicName("A"), a, f("hash", a)]


# ---- properties

REWRITE_EXAMPLES = settings().max_examples * 10


@settings(max_examples=REWRITE_EXAMPLES)
@given(ground_terms(max_leaves=24))
def test_normalize_is_idempotent_and_reaches_a_normal_form(term):
    normal = normalize(term)
    assert BUILTIN_REWRITER.is_normal(normal)
    assert normalize(normal) == normal
    assert depth(normal) <= depth(term)


@settings(max_examples=REWRITE_EXAMPLES)
@given(ground_terms(max_leaves=16), st.randoms(use_true_random=False))
def test_any_redex_order_reaches_the_same_normal_form(term, rnd):
    current = term
    while True:
        found = BUILTIN_REWRITER.redexes(current)
        if not found:
            break
        current = BUILTIN_REWRITER.rewrite_at(current, rnd.choice(found))
    assert current == normalize(term)


@given(ground_terms(max_leaves=6), ground_terms(max_leaves=6))
def test_destructors_undo_constructors(message, key):
    expected = normalize(message)
    assert normalize(f("dec", f("enc", message, key), key)) == expected
    assert normalize(f("adec", f("aenc", message, f("pk", key)), key)) == expected
    assert normalize(f("getmsg", f("sign", message, key))) == expected
    assert normalize(f("fst", f("pair", message, key))) == expected
    assert normalize(f("snd", f("pair", key, message))) == expected


@given(open_terms(), open_terms())
def test_unifiers_make_both_sides_equal(left, right):
    subst = unify(left, right)
    if subst is not None:
        assert apply(subst, left) == apply(subst, right)


@given(open_terms(), ground_substitutions())
def test_match_recovers_the_instantiating_substitution(pattern, values):
    subst = Substitution(values)
    ground = subst.instantiate(pattern)
    assume(BUILTIN_REWRITER.is_normal(ground))
    used = set(variables(pattern))
    found = match(pattern, ground)
    assert found == subst.restrict(used)
    assert unify(pattern, ground).restrict(used) == found


def test_thorough_profile_reaches_full_strength():
    assert settings.get_profile("thorough").max_examples == 10_000
    assert REWRITE_EXAMPLES == 10 * settings().max_examples
