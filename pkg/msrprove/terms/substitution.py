from __future__ import annotations

from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

from msrprove.terms.term import Application, Term, Variable, sort_of, term_key, variables


class Substitution(Mapping[Variable, Term]):
    """Immutable, sort-respecting map from variables to terms."""

    __slots__ = ("_bindings", "_hash")

    def __init__(self, bindings: Union[Mapping[Variable, Term], Iterable[Tuple[Variable, Term]]] = ()) -> None:
        items = dict(bindings.items() if isinstance(bindings, Mapping) else bindings)
        for var, value in items.items():
            if not var.sort.admits(sort_of(value)):
                raise ValueError(f"cannot bind {var} of sort {var.sort.value} to {value}")
        self._bindings: Dict[Variable, Term] = items
        self._hash: Optional[int] = None

    # ---- Mapping API
    def __getitem__(self, var: Variable) -> Term:
        return self._bindings[var]

    def __iter__(self) -> Iterator[Variable]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._bindings.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Substitution):
            return self._bindings == other._bindings
        return NotImplemented

    def __repr__(self) -> str:
        return f"Substitution({self})"

    def __str__(self) -> str:
        body = ", ".join(f"{var} ↦ {value}" for var, value in self.sorted_items())
        return "{" + body + "}"

    # ---- API
    def bind(self, var: Variable, value: Term) -> "Substitution":
        merged = dict(self._bindings)
        merged[var] = value
        return Substitution(merged)

    def instantiate(self, term: Term) -> Term:
        """Homomorphic replacement, following binding chains; no normalization."""
        if isinstance(term, Variable):
            value = self._bindings.get(term)
            if value is None:
                return term
            return self.instantiate(value) if value != term else value
        if isinstance(term, Application):
            args = tuple(self.instantiate(a) for a in term.args)
            if args == term.args:
                return term
            return Application(term.symbol, args)
        return term

    def resolved(self) -> "Substitution":
        """Idempotent form: every binding fully instantiated."""
        return Substitution({var: self.instantiate(value) for var, value in self._bindings.items()})

    def restrict(self, keep: Iterable[Variable]) -> "Substitution":
        wanted = set(keep)
        return Substitution({var: value for var, value in self._bindings.items() if var in wanted})

    def sorted_items(self) -> Tuple[Tuple[Variable, Term], ...]:
        return tuple(sorted(self._bindings.items(), key=lambda item: (item[0].name, item[0].sort.value)))

    def sort_key(self) -> tuple:
        return tuple((var.name, var.sort.value, term_key(value)) for var, value in self.sorted_items())


EMPTY = Substitution()


def match_syntactic(pattern: Term, term: Term, subst: Substitution = EMPTY) -> Optional[Substitution]:
    """One-way syntactic matching; ``term`` variables are treated as constants."""
    bindings = dict(subst.items())
    if _match_into(pattern, term, bindings):
        return Substitution(bindings)
    return None


def _match_into(pattern: Term, term: Term, bindings: Dict[Variable, Term]) -> bool:
    if isinstance(pattern, Variable):
        bound = bindings.get(pattern)
        if bound is not None:
            return bound == term
        if not pattern.sort.admits(sort_of(term)):
            return False
        bindings[pattern] = term
        return True
    if isinstance(pattern, Application):
        if not isinstance(term, Application) or term.symbol != pattern.symbol or len(term.args) != len(pattern.args):
            return False
        return all(_match_into(p, t, bindings) for p, t in zip(pattern.args, term.args))
    return pattern == term


def unify_syntactic(left: Term, right: Term, subst: Substitution = EMPTY) -> Optional[Substitution]:
    """Most general syntactic unifier with occurs check, returned in idempotent form."""
    bindings = dict(subst.items())
    if not _unify_into(left, right, bindings):
        return None
    return Substitution(bindings).resolved()


def _walk(term: Term, bindings: Dict[Variable, Term]) -> Term:
    while isinstance(term, Variable) and term in bindings:
        term = bindings[term]
    return term


def _occurs(var: Variable, term: Term, bindings: Dict[Variable, Term]) -> bool:
    term = _walk(term, bindings)
    if term == var:
        return True
    if isinstance(term, Application):
        return any(_occurs(var, arg, bindings) for arg in term.args)
    return False


def _unify_into(left: Term, right: Term, bindings: Dict[Variable, Term]) -> bool:
    left = _walk(left, bindings)
    right = _walk(right, bindings)
    if left == right:
        return True
    if isinstance(left, Variable) and isinstance(right, Variable):
        if left.sort.admits(right.sort):
            bindings[left] = right
            return True
        if right.sort.admits(left.sort):
            bindings[right] = left
            return True
        return False
    if isinstance(left, Variable) or isinstance(right, Variable):
        var, other = (left, right) if isinstance(left, Variable) else (right, left)
        assert isinstance(var, Variable)
        if not var.sort.admits(sort_of(other)) or _occurs(var, other, bindings):
            return False
        bindings[var] = other
        return True
    if isinstance(left, Application) and isinstance(right, Application):
        if left.symbol != right.symbol or len(left.args) != len(right.args):
            return False
        return all(_unify_into(a, b, bindings) for a, b in zip(left.args, right.args))
    return False


def pattern_variables(*terms: Term) -> Tuple[Variable, ...]:
    seen: Dict[Variable, None] = {}
    for term in terms:
        for var in variables(term):
            seen.setdefault(var, None)
    return tuple(seen)
