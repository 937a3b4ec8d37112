"""Sorted terms, substitutions, matching, unification and normalization."""

from msrprove.terms.operations import apply, match, normalize, unify
from msrprove.terms.rewriting import (
    BUILTIN_EQUATIONS,
    BUILTIN_REWRITER,
    BUILTIN_SIGNATURES,
    RESERVED_NAMES,
    FunctionSignature,
    RewriteEquation,
    Rewriter,
    Signature,
)
from msrprove.terms.substitution import EMPTY, Substitution, match_syntactic, unify_syntactic
from msrprove.terms.term import (
    Application,
    FreshName,
    PublicName,
    Sort,
    StringConstant,
    Term,
    Variable,
    depth,
    fresh_names,
    is_atom,
    is_ground,
    pair,
    sort_of,
    subterms,
    term_key,
    tuple_items,
    variables,
)

__all__ = [
    "Application",
    "BUILTIN_EQUATIONS",
    "BUILTIN_REWRITER",
    "BUILTIN_SIGNATURES",
    "EMPTY",
    "FreshName",
    "FunctionSignature",
    "PublicName",
    "RESERVED_NAMES",
    "RewriteEquation",
    "Rewriter",
    "Signature",
    "Sort",
    "StringConstant",
    "Substitution",
    "Term",
    "Variable",
    "apply",
    "depth",
    "fresh_names",
    "is_atom",
    "is_ground",
    "match",
    "match_syntactic",
    "normalize",
    "pair",
    "sort_of",
    "subterms",
    "term_key",
    "tuple_items",
    "unify",
    "unify_syntactic",
    "variables",
]
