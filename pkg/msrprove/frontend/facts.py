from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional, Tuple

from msrprove.frontend.diagnostics import SourcePosition
from msrprove.terms import Substitution, Term, Variable, term_key, variables

RESERVED_ARITY = {"Fr": 1, "In": 1, "Out": 1, "K": 1}

VarSite = Tuple[Variable, SourcePosition]
AppSite = Tuple[str, int, SourcePosition]


class FactKind(str, Enum):
    LINEAR = "linear"
    PERSISTENT = "persistent"


@dataclass(frozen=True)
class FactSchema:
    name: str
    arity: int
    kind: FactKind
    reserved: bool = False


@dataclass(frozen=True)
class Fact:
    """A named tuple of terms; ``negated`` marks a ``not(...)`` premise."""

    name: str
    args: Tuple[Term, ...] = ()
    persistent: bool = False
    negated: bool = False
    position: Optional[SourcePosition] = field(default=None, compare=False, repr=False)
    var_sites: Tuple[VarSite, ...] = field(default=(), compare=False, repr=False)
    app_sites: Tuple[AppSite, ...] = field(default=(), compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def reserved(self) -> bool:
        return self.name in RESERVED_ARITY

    @property
    def kind(self) -> FactKind:
        return FactKind.PERSISTENT if self.persistent else FactKind.LINEAR

    def variables(self) -> Iterator[Variable]:
        for arg in self.args:
            yield from variables(arg)

    def substituted(self, subst: Substitution) -> "Fact":
        return replace(self, args=tuple(subst.instantiate(a) for a in self.args))

    def sort_key(self) -> tuple:
        return (self.name, self.persistent, self.negated, tuple(term_key(a) for a in self.args))

    def __str__(self) -> str:
        body = f"{self.name}(" + ", ".join(str(a) for a in self.args) + ")"
        if self.negated:
            return f"not({body})"
        if self.persistent and not self.reserved:
            return f"!{body}"
        return body


def knowledge_fact(term: Term) -> Fact:
    return Fact("K", (term,), persistent=True)


def construction_fact(term: Term) -> Fact:
    return Fact("KU", (term,), persistent=True)
