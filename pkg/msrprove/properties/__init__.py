"""Trace formulas and lemma checking.

The formula syntax is re-exported here; evaluation lives in ``msrprove.properties.evaluate``
and verdicts in ``msrprove.properties.checker``.
"""

from msrprove.properties.formula import (
    ActionAtom,
    And,
    EqTerm,
    EqTime,
    Formula,
    Implies,
    Less,
    Not,
    Or,
    Quantified,
    Quantifier,
    TimeVar,
    Truth,
    action_atoms,
    atoms,
    free_variables,
    guards,
    negate,
    unguarded_variables,
)

__all__ = [
    "ActionAtom",
    "And",
    "EqTerm",
    "EqTime",
    "Formula",
    "Implies",
    "Less",
    "Not",
    "Or",
    "Quantified",
    "Quantifier",
    "TimeVar",
    "Truth",
    "action_atoms",
    "atoms",
    "free_variables",
    "guards",
    "negate",
    "unguarded_variables",
]
