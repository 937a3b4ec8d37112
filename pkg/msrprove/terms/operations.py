from __future__ import annotations

from typing import Optional

from msrprove.errors import ContractError
from msrprove.terms.rewriting import BUILTIN_REWRITER, Rewriter
from msrprove.terms.substitution import Substitution, match_syntactic, unify_syntactic
from msrprove.terms.term import Term, is_ground


def normalize(term: Term, rewriter: Optional[Rewriter] = None) -> Term:
    return (rewriter or BUILTIN_REWRITER).normalize(term)


def match(pattern: Term, ground: Term, rewriter: Optional[Rewriter] = None) -> Optional[Substitution]:
    """Least ``σ`` with ``σ(pattern) = ground`` on normal forms, or None."""
    if not is_ground(ground):
        raise ContractError(f"match target {ground} is not ground")
    rw = rewriter or BUILTIN_REWRITER
    return match_syntactic(rw.normalize(pattern), rw.normalize(ground))


def unify(left: Term, right: Term, rewriter: Optional[Rewriter] = None) -> Optional[Substitution]:
    rw = rewriter or BUILTIN_REWRITER
    return unify_syntactic(rw.normalize(left), rw.normalize(right))


def apply(subst: Substitution, term: Term, rewriter: Optional[Rewriter] = None) -> Term:
    return (rewriter or BUILTIN_REWRITER).normalize(subst.instantiate(term))
