from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterator, List, Optional, Set, Tuple, Union

from msrprove.terms import Substitution, Term, Variable, variables

if TYPE_CHECKING:
    from msrprove.frontend.diagnostics import SourcePosition
    from msrprove.frontend.facts import Fact


class Quantifier(str, Enum):
    ALL = "All"
    EX = "Ex"


@dataclass(frozen=True)
class TimeVar:
    name: str

    def __str__(self) -> str:
        return f"#{self.name}"


@dataclass(frozen=True)
class ActionAtom:
    fact: Fact
    time: TimeVar

    def __str__(self) -> str:
        return f"{self.fact} @ {self.time}"


@dataclass(frozen=True)
class Less:
    left: TimeVar
    right: TimeVar

    def __str__(self) -> str:
        return f"{self.left} < {self.right}"


@dataclass(frozen=True)
class EqTime:
    left: TimeVar
    right: TimeVar

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class EqTerm:
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Truth:
    value: bool

    def __str__(self) -> str:
        return "T" if self.value else "F"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        return f"not({self.body})"


@dataclass(frozen=True)
class And:
    parts: Tuple["Formula", ...]

    def __str__(self) -> str:
        return "(" + " & ".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class Or:
    parts: Tuple["Formula", ...]

    def __str__(self) -> str:
        return "(" + " | ".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"

    def __str__(self) -> str:
        return f"({self.antecedent} ==> {self.consequent})"


BoundVar = Union[Variable, TimeVar]


@dataclass(frozen=True)
class Quantified:
    quantifier: Quantifier
    variables: Tuple[BoundVar, ...]
    body: "Formula"
    position: Optional[SourcePosition] = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        names = " ".join(str(v) for v in self.variables)
        return f"{self.quantifier.value} {names}. {self.body}"


Formula = Union[Quantified, And, Or, Not, Implies, ActionAtom, Less, EqTime, EqTerm, Truth]


def atoms(formula: Formula) -> Iterator[Formula]:
    """Leaves of the formula tree: action atoms, timepoint and term comparisons, truth constants."""
    if isinstance(formula, (And, Or)):
        for part in formula.parts:
            yield from atoms(part)
    elif isinstance(formula, (Not, Quantified)):
        yield from atoms(formula.body)
    elif isinstance(formula, Implies):
        yield from atoms(formula.antecedent)
        yield from atoms(formula.consequent)
    else:
        yield formula


def action_atoms(formula: Formula) -> Iterator[ActionAtom]:
    for atom in atoms(formula):
        if isinstance(atom, ActionAtom):
            yield atom


def free_variables(formula: Formula) -> Set[BoundVar]:
    """Message and time variables not bound by any enclosing quantifier."""
    if isinstance(formula, ActionAtom):
        return set(formula.fact.variables()) | {formula.time}
    if isinstance(formula, (Less, EqTime)):
        return {formula.left, formula.right}
    if isinstance(formula, EqTerm):
        return set(variables(formula.left)) | set(variables(formula.right))
    if isinstance(formula, Truth):
        return set()
    if isinstance(formula, Not):
        return free_variables(formula.body)
    if isinstance(formula, (And, Or)):
        result: Set[BoundVar] = set()
        for part in formula.parts:
            result |= free_variables(part)
        return result
    if isinstance(formula, Implies):
        return free_variables(formula.antecedent) | free_variables(formula.consequent)
    return free_variables(formula.body) - set(formula.variables)


def unguarded_variables(formula: Formula) -> List[BoundVar]:
    """Quantified variables that no action atom inside their scope mentions."""
    problems: List[BoundVar] = []
    _collect_unguarded(formula, problems)
    return problems


def _collect_unguarded(formula: Formula, problems: List[BoundVar]) -> None:
    if isinstance(formula, Quantified):
        anchored: Set[BoundVar] = set()
        for atom in action_atoms(formula.body):
            anchored |= set(atom.fact.variables())
            anchored.add(atom.time)
        problems.extend(v for v in formula.variables if v not in anchored)
        _collect_unguarded(formula.body, problems)
    elif isinstance(formula, (And, Or)):
        for part in formula.parts:
            _collect_unguarded(part, problems)
    elif isinstance(formula, Not):
        _collect_unguarded(formula.body, problems)
    elif isinstance(formula, Implies):
        _collect_unguarded(formula.antecedent, problems)
        _collect_unguarded(formula.consequent, problems)


def guards(formula: Quantified) -> Tuple[ActionAtom, ...]:
    """Action atoms that bound the quantifier's domain: the antecedent conjuncts of an
    ``All .. ==>`` body or the conjuncts of an ``Ex .. &`` body."""
    body = formula.body
    if formula.quantifier is Quantifier.ALL:
        if not isinstance(body, Implies):
            return ()
        body = body.antecedent
    parts = body.parts if isinstance(body, And) else (body,)
    return tuple(p for p in parts if isinstance(p, ActionAtom))


def negate(formula: Formula) -> Formula:
    """Negation that keeps guarded shapes guarded (the counterexample form)."""
    if isinstance(formula, Quantified):
        if formula.quantifier is Quantifier.ALL and isinstance(formula.body, Implies):
            antecedent = formula.body.antecedent
            parts = antecedent.parts if isinstance(antecedent, And) else (antecedent,)
            body: Formula = And((*parts, negate(formula.body.consequent)))
            return Quantified(Quantifier.EX, formula.variables, body)
        if formula.quantifier is Quantifier.EX:
            atoms = guards(formula)
            parts = formula.body.parts if isinstance(formula.body, And) else (formula.body,)
            rest = tuple(p for p in parts if p not in atoms)
            if atoms and rest:
                guard: Formula = atoms[0] if len(atoms) == 1 else And(atoms)
                conclusion = rest[0] if len(rest) == 1 else And(rest)
                return Quantified(Quantifier.ALL, formula.variables, Implies(guard, negate(conclusion)))
        flipped = Quantifier.EX if formula.quantifier is Quantifier.ALL else Quantifier.ALL
        return Quantified(flipped, formula.variables, negate(formula.body))
    if isinstance(formula, Not):
        return formula.body
    if isinstance(formula, Truth):
        return Truth(not formula.value)
    if isinstance(formula, And):
        return Or(tuple(negate(p) for p in formula.parts))
    if isinstance(formula, Or):
        return And(tuple(negate(p) for p in formula.parts))
    if isinstance(formula, Implies):
        return And((formula.antecedent, negate(formula.consequent)))
    return Not(formula)


def substitute(formula: Formula, subst: Substitution) -> Formula:
    """Instantiate every message term of the formula; no normalization."""
    if isinstance(formula, ActionAtom):
        return ActionAtom(formula.fact.substituted(subst), formula.time)
    if isinstance(formula, EqTerm):
        return EqTerm(subst.instantiate(formula.left), subst.instantiate(formula.right))
    if isinstance(formula, Not):
        return Not(substitute(formula.body, subst))
    if isinstance(formula, And):
        return And(tuple(substitute(p, subst) for p in formula.parts))
    if isinstance(formula, Or):
        return Or(tuple(substitute(p, subst) for p in formula.parts))
    if isinstance(formula, Implies):
        return Implies(substitute(formula.antecedent, subst), substitute(formula.consequent, subst))
    if isinstance(formula, Quantified):
        return replace(formula, body=substitute(formula.body, subst))
    return formula
