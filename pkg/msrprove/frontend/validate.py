from __future__ import annotations

from typing import Dict, Iterable, List, Set, Tuple

from msrprove.frontend.diagnostics import Diagnostic, DiagnosticCode, SourcePosition
from msrprove.frontend.facts import RESERVED_ARITY, AppSite, Fact
from msrprove.frontend.theory import Lemma, ProtocolRule, Theory
from msrprove.properties.formula import action_atoms, free_variables, unguarded_variables
from msrprove.terms import Signature, Sort, Variable

# Actions every trace records without a rule declaring them.
IMPLICIT_ACTIONS = frozenset({"In", "Out", "K"})


def validate(theory: Theory) -> List[Diagnostic]:
    """Static checks on a parsed theory; errors make it unusable, warnings do not."""
    found: List[Diagnostic] = []
    signature = theory.signature
    for equation, site in zip(theory.equations, theory.equation_sites):
        problem = equation.shape_problem()
        if problem is not None:
            found.append(Diagnostic.error(DiagnosticCode.BAD_EQUATION, f"equation {equation}: {problem}", site.position))
        found.extend(_check_applications(site.app_sites, signature))
    for rule in theory.rules:
        found.extend(_check_rule(rule, signature))
    found.extend(_check_fact_usage(theory.rules))
    for lemma in theory.lemmas:
        found.extend(_check_lemma(lemma, theory, signature))
    return found


# ---- Helpers


def _check_applications(sites: Iterable[AppSite], signature: Signature) -> Iterable[Diagnostic]:
    for name, arity, at in sites:
        expected = signature.arity(name)
        if expected is None:
            yield Diagnostic.error(
                DiagnosticCode.UNDECLARED_FUNCTION,
                f"function '{name}' is not declared",
                at,
                hint=f"add '{name}/{arity}' to a functions: declaration",
            )
        elif expected != arity:
            yield Diagnostic.error(
                DiagnosticCode.ARITY_MISMATCH, f"function '{name}' expects {expected} argument(s), got {arity}", at
            )


def _check_rule(rule: ProtocolRule, signature: Signature) -> Iterable[Diagnostic]:
    for binding in rule.lets:
        yield from _check_applications(binding.app_sites, signature)
    for fact in rule.facts():
        yield from _check_applications(fact.app_sites, signature)
    for fact in rule.premises:
        yield from _check_reserved(fact, "premise")
    for fact in rule.actions:
        yield from _check_reserved(fact, "action")
    for fact in rule.conclusions:
        yield from _check_reserved(fact, "conclusion")
    yield from _check_bindings(rule, signature)


def _check_reserved(fact: Fact, place: str) -> Iterable[Diagnostic]:
    if fact.negated and fact.reserved:
        yield Diagnostic.error(DiagnosticCode.RESERVED_FACT_MISUSE, f"reserved fact {fact.name} cannot be negated", fact.position)
        return
    if not fact.reserved:
        return
    if fact.name == "Fr" and place == "conclusion":
        yield Diagnostic.error(
            DiagnosticCode.FR_IN_CONCLUSION,
            "Fr may only appear in premises",
            fact.position,
            hint="fresh names are created by Fr premises",
        )
        return
    misuse = (
        fact.name == "K"
        or (place == "action" and fact.name != "K")
        or (fact.name == "Out" and place == "premise")
        or (fact.name == "In" and place == "conclusion")
    )
    if misuse:
        yield Diagnostic.error(DiagnosticCode.RESERVED_FACT_MISUSE, f"{fact.name} cannot be used as a rule {place}", fact.position)
        return
    if fact.persistent:
        yield Diagnostic.error(DiagnosticCode.RESERVED_FACT_MISUSE, f"reserved fact {fact.name} cannot be persistent", fact.position)
    if fact.arity != RESERVED_ARITY[fact.name]:
        yield Diagnostic.error(
            DiagnosticCode.ARITY_MISMATCH, f"{fact.name} takes {RESERVED_ARITY[fact.name]} argument(s), got {fact.arity}", fact.position
        )
    elif fact.name == "Fr" and not (isinstance(fact.args[0], Variable) and fact.args[0].sort is Sort.FRESH):
        yield Diagnostic.error(
            DiagnosticCode.RESERVED_FACT_MISUSE, f"Fr expects a fresh variable, got {fact.args[0]}", fact.position, hint="write Fr(~x)"
        )


def _check_bindings(rule: ProtocolRule, signature: Signature) -> Iterable[Diagnostic]:
    """Every variable must be bound by a positive premise or a let, or be public."""
    expanded = rule.expanded()
    bound: Set[Variable] = {v for fact in expanded.premises if not fact.negated for v in fact.variables()}
    let_vars = {binding.var for binding in rule.lets}
    reported: Set[Variable] = set()

    def unbound(sites: Iterable[Tuple[Variable, SourcePosition]], place: str) -> Iterable[Diagnostic]:
        for var, at in sites:
            if var in bound or var in let_vars or var.sort is Sort.PUB or var in reported:
                continue
            if var.sort is Sort.MSG and signature.arity(var.name) == 0:
                continue
            reported.add(var)
            yield Diagnostic.error(
                DiagnosticCode.UNBOUND_VARIABLE,
                f"variable {var} in {place} of rule '{rule.name}' is not bound by any premise",
                at,
            )

    for binding in rule.lets:
        yield from unbound(binding.var_sites, "a let binding")
    for fact in rule.premises:
        if fact.negated:
            yield from unbound(fact.var_sites, "a negated premise")
    for fact in rule.actions:
        yield from unbound(fact.var_sites, "the actions")
    for fact in rule.conclusions:
        yield from unbound(fact.var_sites, "the conclusions")


def _check_fact_usage(rules: Iterable[ProtocolRule]) -> Iterable[Diagnostic]:
    first: Dict[str, Fact] = {}
    negated: List[Fact] = []
    for rule in rules:
        for fact in (*rule.premises, *rule.conclusions):
            if fact.reserved:
                continue
            if fact.negated:
                negated.append(fact)
                continue
            seen = first.setdefault(fact.name, fact)
            if seen.persistent != fact.persistent:
                yield Diagnostic.error(
                    DiagnosticCode.FACT_KIND_MISMATCH,
                    f"fact {fact.name} is used both as linear and as persistent",
                    fact.position,
                    hint=f"first used as {seen.kind.value} at {seen.position}",
                )
            elif seen.arity != fact.arity:
                yield Diagnostic.error(
                    DiagnosticCode.ARITY_MISMATCH, f"fact {fact.name} has arity {seen.arity} elsewhere, got {fact.arity}", fact.position
                )
    for fact in negated:
        seen = first.get(fact.name)
        if seen is not None and not seen.persistent:
            yield Diagnostic.error(
                DiagnosticCode.NEGATION_NOT_PERSISTENT,
                f"not({fact.name}(..)) needs {fact.name} to be persistent",
                fact.position,
                hint=f"write !{fact.name} where it is produced",
            )


def _check_lemma(lemma: Lemma, theory: Theory, signature: Signature) -> Iterable[Diagnostic]:
    for atom in action_atoms(lemma.formula):
        yield from _check_applications(atom.fact.app_sites, signature)
    for var in sorted(free_variables(lemma.formula), key=str):
        yield Diagnostic.error(
            DiagnosticCode.UNBOUND_FORMULA_VARIABLE,
            f"lemma '{lemma.name}' uses {var} without quantifying it",
            lemma.position,
        )
    for var in unguarded_variables(lemma.formula):
        yield Diagnostic.error(
            DiagnosticCode.UNGUARDED_FORMULA,
            f"quantified variable {var} of lemma '{lemma.name}' occurs in no action atom",
            lemma.position,
        )
    reported: Set[str] = set()
    for atom in action_atoms(lemma.formula):
        name = atom.fact.name
        if name in IMPLICIT_ACTIONS or name in theory.action_names or name in reported:
            continue
        reported.add(name)
        yield Diagnostic.warning(
            DiagnosticCode.UNUSED_ACTION,
            f"no rule emits action {name}",
            atom.fact.position or lemma.position,
            hint=f"lemma '{lemma.name}' can only hold vacuously on {name}",
        )
