from __future__ import annotations

from typing import Dict, Iterator, List, Sequence, Tuple

from msrprove.deduction import Shape
from msrprove.frontend.facts import Fact
from msrprove.frontend.theory import Lemma, ProtocolRule
from msrprove.log import get_logger
from msrprove.properties.formula import EqTerm, action_atoms, atoms
from msrprove.terms import Application, Term, Variable, variables

logger = get_logger(__name__)

# Fact name and arity; a path is an argument index followed by a position inside that argument.
Slot = Tuple[str, int]
Path = Tuple[int, ...]

MAX_PATH = 8


class ShapeIndex:
    """Structured patterns each fact argument is compared against somewhere in a theory.

    Rule premises and lemma atoms compare directly. A rule that copies a premise variable
    into another fact hands the demands on that fact back to the premise, so a value is
    shaped for every place it can travel to.
    """

    def __init__(self, rules: Sequence[ProtocolRule], lemmas: Sequence[Lemma] = (), max_path: int = MAX_PATH) -> None:
        self.max_path = max_path
        self._demands: Dict[Slot, Dict[Path, Dict[Term, None]]] = {}
        for rule in rules:
            for fact in rule.premises:
                if fact.name not in ("Fr", "In"):
                    self._consume(fact)
        for lemma in lemmas:
            self._consume_lemma(lemma)
        self._propagate(rules)
        logger.debug("shape demands on %d fact slot(s)", len(self._demands))

    # ---- API
    def demands(self, slot: Slot, path: Path) -> Tuple[Term, ...]:
        return tuple(self._demands.get(slot, {}).get(path, ()))

    def for_rule(self, rule: ProtocolRule) -> Dict[Variable, Tuple[Shape, ...]]:
        """Shapes for each variable of the rule's ``In`` premises."""
        produced = _produced(rule)
        inputs = [f.args[0] for f in rule.premises if f.name == "In" and not f.negated]
        result: Dict[Variable, Tuple[Shape, ...]] = {}
        for var in dict.fromkeys(v for term in inputs for v in variables(term)):
            shapes: List[Shape] = []
            for fact in produced:
                slot = (fact.name, fact.arity)
                for path, sub in _occurrences(fact.args):
                    if sub == var:
                        shapes.extend(self._shape(slot, path, p, self.max_path) for p in self.demands(slot, path))
            if shapes:
                result[var] = tuple(shapes)
        return result

    # ---- Helpers
    def _add(self, slot: Slot, path: Path, pattern: Term) -> bool:
        bucket = self._demands.setdefault(slot, {}).setdefault(path, {})
        if pattern in bucket:
            return False
        bucket[pattern] = None
        return True

    def _consume(self, fact: Fact) -> None:
        for path, sub in _occurrences(fact.args):
            if isinstance(sub, Application):
                self._add((fact.name, fact.arity), path, sub)

    def _consume_lemma(self, lemma: Lemma) -> None:
        found = list(action_atoms(lemma.formula))
        for atom in found:
            self._consume(atom.fact)
        # x = f(...) shapes x wherever an atom binds it
        for leaf in atoms(lemma.formula):
            if not isinstance(leaf, EqTerm):
                continue
            for var, pattern in ((leaf.left, leaf.right), (leaf.right, leaf.left)):
                if not (isinstance(var, Variable) and isinstance(pattern, Application)):
                    continue
                for atom in found:
                    for path, sub in _occurrences(atom.fact.args):
                        if sub == var:
                            self._add((atom.fact.name, atom.fact.arity), path, pattern)

    def _propagate(self, rules: Sequence[ProtocolRule]) -> None:
        changed = True
        while changed:
            changed = False
            for rule in rules:
                produced = _produced(rule)
                for premise in rule.premises:
                    if premise.negated or premise.name in ("Fr", "In"):
                        continue
                    target = (premise.name, premise.arity)
                    for start, var in _occurrences(premise.args):
                        if not isinstance(var, Variable):
                            continue
                        for fact in produced:
                            slot = (fact.name, fact.arity)
                            for at, sub in _occurrences(fact.args):
                                if sub != var:
                                    continue
                                for path, patterns in list(self._demands.get(slot, {}).items()):
                                    if path[: len(at)] != at:
                                        continue
                                    moved = start + path[len(at) :]
                                    if len(moved) > self.max_path:
                                        continue
                                    for pattern in list(patterns):
                                        changed |= self._add(target, moved, pattern)

    def _shape(self, slot: Slot, path: Path, pattern: Term, budget: int) -> Shape:
        inner: Dict[Variable, List[Shape]] = {}
        if budget > 0:
            for position, sub in _walk(pattern, ()):
                if isinstance(sub, Variable) and position:
                    for deeper in self.demands(slot, path + position):
                        inner.setdefault(sub, []).append(self._shape(slot, path + position, deeper, budget - 1))
        return Shape(pattern, {var: tuple(shapes) for var, shapes in inner.items()})


def _produced(rule: ProtocolRule) -> List[Fact]:
    """Facts the rule puts where a premise or a lemma can look: actions, conclusions, and the observed messages."""
    found = list(rule.actions) + list(rule.conclusions)
    for fact in rule.premises:
        if fact.name == "In" and not fact.negated:
            found.append(Fact("In", fact.args))
            found.append(Fact("K", fact.args))
    for fact in rule.conclusions:
        if fact.name == "Out":
            found.append(Fact("K", fact.args))
    return found


def _occurrences(args: Sequence[Term]) -> Iterator[Tuple[Path, Term]]:
    for index, arg in enumerate(args):
        yield from _walk(arg, (index,))


def _walk(term: Term, path: Path) -> Iterator[Tuple[Path, Term]]:
    yield path, term
    if isinstance(term, Application):
        for index, arg in enumerate(term.args):
            yield from _walk(arg, path + (index,))
