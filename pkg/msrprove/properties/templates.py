"""Ready-made lemmas for the usual property families.

Each builder returns the lemma the parser produces for the formula in its docstring, with
the caller's action fact names filled in, so a theory only has to raise the right actions.
"""

from __future__ import annotations

from typing import Callable, Dict

from msrprove.frontend.facts import Fact
from msrprove.frontend.theory import Lemma, TraceMode
from msrprove.properties.formula import ActionAtom, And, EqTime, Implies, Less, Not, Quantified, Quantifier, TimeVar
from msrprove.terms import Sort, Variable

_M = Variable("m", Sort.MSG)
_S = Variable("s", Sort.MSG)
_I = TimeVar("i")
_J = TimeVar("j")


# ---- API


def secrecy(name: str, claim: str) -> Lemma:
    """``All s #i. Claim(s) @ #i ==> not(Ex #j. K(s) @ #j)``"""
    claimed = ActionAtom(Fact(claim, (_S,)), _I)
    known = Quantified(Quantifier.EX, (_J,), ActionAtom(Fact("K", (_S,)), _J))
    return Lemma(name, Quantified(Quantifier.ALL, (_S, _I), Implies(claimed, Not(known))))


def agreement(name: str, commit: str, running: str) -> Lemma:
    """``All m #i. Commit(m) @ #i ==> Ex #j. Running(m) @ #j & #j < #i``"""
    committed = ActionAtom(Fact(commit, (_M,)), _I)
    earlier = Quantified(Quantifier.EX, (_J,), And((ActionAtom(Fact(running, (_M,)), _J), Less(_J, _I))))
    return Lemma(name, Quantified(Quantifier.ALL, (_M, _I), Implies(committed, earlier)))


def uniqueness(name: str, action: str) -> Lemma:
    """``All m #i #j. Action(m) @ #i & Action(m) @ #j ==> #i = #j``; fails on a replay."""
    twice = And((ActionAtom(Fact(action, (_M,)), _I), ActionAtom(Fact(action, (_M,)), _J)))
    return Lemma(name, Quantified(Quantifier.ALL, (_M, _I, _J), Implies(twice, EqTime(_I, _J))))


def executable(name: str, action: str) -> Lemma:
    """exists-trace ``Ex m #i. Action(m) @ #i``"""
    return Lemma(name, Quantified(Quantifier.EX, (_M, _I), ActionAtom(Fact(action, (_M,)), _I)), TraceMode.EXISTS_TRACE)


TEMPLATES: Dict[str, Callable[..., Lemma]] = {
    "secrecy": secrecy,
    "agreement": agreement,
    "uniqueness": uniqueness,
    "executable": executable,
}
