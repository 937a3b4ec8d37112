from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, Iterator, Optional, Tuple

from msrprove.frontend.diagnostics import SourcePosition
from msrprove.frontend.facts import AppSite, Fact, FactKind, FactSchema, VarSite
from msrprove.properties.formula import Formula
from msrprove.terms import (
    BUILTIN_EQUATIONS,
    EMPTY,
    FunctionSignature,
    PublicName,
    RewriteEquation,
    Rewriter,
    Signature,
    StringConstant,
    Substitution,
    Term,
    Variable,
    subterms,
)


@dataclass(frozen=True)
class LetBinding:
    var: Variable
    term: Term
    position: Optional[SourcePosition] = field(default=None, compare=False, repr=False)
    var_sites: Tuple[VarSite, ...] = field(default=(), compare=False, repr=False)
    app_sites: Tuple[AppSite, ...] = field(default=(), compare=False, repr=False)


@dataclass(frozen=True)
class ProtocolRule:
    name: str
    premises: Tuple[Fact, ...] = ()
    actions: Tuple[Fact, ...] = ()
    conclusions: Tuple[Fact, ...] = ()
    lets: Tuple[LetBinding, ...] = ()
    position: Optional[SourcePosition] = field(default=None, compare=False, repr=False)

    def let_substitution(self) -> Substitution:
        subst = EMPTY
        for binding in self.lets:
            subst = subst.bind(binding.var, subst.instantiate(binding.term))
        return subst

    def expanded(self) -> "ProtocolRule":
        """The rule with its let-bindings substituted as macros."""
        if not self.lets:
            return self
        subst = self.let_substitution()
        return replace(
            self,
            premises=tuple(f.substituted(subst) for f in self.premises),
            actions=tuple(f.substituted(subst) for f in self.actions),
            conclusions=tuple(f.substituted(subst) for f in self.conclusions),
            lets=(),
        )

    def facts(self) -> Iterator[Fact]:
        yield from self.premises
        yield from self.actions
        yield from self.conclusions


class TraceMode(str, Enum):
    ALL_TRACES = "all-traces"
    EXISTS_TRACE = "exists-trace"


@dataclass(frozen=True)
class Lemma:
    name: str
    formula: Formula
    mode: TraceMode = TraceMode.ALL_TRACES
    position: Optional[SourcePosition] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class EquationSite:
    position: Optional[SourcePosition] = None
    app_sites: Tuple[AppSite, ...] = ()


@dataclass(frozen=True)
class Theory:
    name: str
    functions: Tuple[FunctionSignature, ...] = ()
    equations: Tuple[RewriteEquation, ...] = ()
    rules: Tuple[ProtocolRule, ...] = ()
    lemmas: Tuple[Lemma, ...] = ()
    equation_sites: Tuple[EquationSite, ...] = field(default=(), compare=False, repr=False)

    @cached_property
    def signature(self) -> Signature:
        return Signature(self.functions, self.equations)

    @cached_property
    def rewriter(self) -> Rewriter:
        return Rewriter((*BUILTIN_EQUATIONS, *self.equations), self.signature)

    @cached_property
    def fact_schemas(self) -> Dict[str, FactSchema]:
        schemas: Dict[str, FactSchema] = {}
        for rule in self.rules:
            for fact in (*rule.premises, *rule.conclusions):
                if fact.negated or fact.name in schemas:
                    continue
                kind = FactKind.PERSISTENT if fact.persistent or fact.name == "K" else FactKind.LINEAR
                schemas[fact.name] = FactSchema(fact.name, fact.arity, kind, fact.reserved)
        return schemas

    @cached_property
    def action_names(self) -> frozenset:
        return frozenset(f.name for rule in self.rules for f in rule.actions)

    def public_constants(self) -> Tuple[Term, ...]:
        """String constants and public names written literally in rule bodies."""
        found: Dict[Term, None] = {}
        for rule in self.rules:
            for binding in rule.lets:
                self._collect_public(binding.term, found)
            for fact in rule.facts():
                for arg in fact.args:
                    self._collect_public(arg, found)
        return tuple(found)

    def rule(self, name: str) -> ProtocolRule:
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(f"Unknown rule: {name}")

    def lemma(self, name: str) -> Lemma:
        for lemma in self.lemmas:
            if lemma.name == name:
                return lemma
        raise KeyError(f"Unknown lemma: {name}")

    @staticmethod
    def _collect_public(term: Term, found: Dict[Term, None]) -> None:
        for sub in subterms(term):
            if isinstance(sub, (StringConstant, PublicName)):
                found.setdefault(sub, None)
