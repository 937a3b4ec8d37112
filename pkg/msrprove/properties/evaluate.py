from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from msrprove.engine.state import Event, Trace
from msrprove.errors import ContractError
from msrprove.frontend.facts import Fact
from msrprove.properties.formula import (
    ActionAtom,
    And,
    BoundVar,
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
    free_variables,
    guards,
    unguarded_variables,
)
from msrprove.terms import BUILTIN_REWRITER, Rewriter, Substitution, Term, Variable, is_ground, match_syntactic, subterms, term_key

Value = Union[Term, int]
Env = Dict[BoundVar, Value]


@dataclass(frozen=True)
class HoldsResult:
    """Truth value of a formula on a trace. ``assignment`` binds the outermost quantified
    variables to the witness (true ``Ex``) or the counterexample (false ``All``)."""

    value: bool
    assignment: Tuple[Tuple[BoundVar, Value], ...] = ()

    def timepoints(self) -> Tuple[int, ...]:
        return tuple(sorted({v for k, v in self.assignment if isinstance(k, TimeVar) and isinstance(v, int)}))

    def as_dict(self) -> Dict[str, str]:
        return {str(var): f"#{value}" if isinstance(var, TimeVar) else str(value) for var, value in self.assignment}

    def __bool__(self) -> bool:
        return self.value


def holds(formula: Formula, trace: Trace, rewriter: Optional[Rewriter] = None) -> HoldsResult:
    """Evaluate a closed, guarded formula on ``trace``.

    Message variables range over the terms in the trace's action facts, time variables
    over its timepoints; quantifiers with action-atom guards enumerate matches only.
    """
    free = free_variables(formula)
    if free:
        raise ContractError("formula has free variables: " + ", ".join(sorted(str(v) for v in free)))
    unguarded = unguarded_variables(formula)
    if unguarded:
        raise ContractError("formula is not guarded: " + ", ".join(str(v) for v in unguarded))
    evaluator = _Evaluator(trace.events, rewriter or BUILTIN_REWRITER)
    if isinstance(formula, Quantified):
        value, env = evaluator.quantified(formula, {})
        assignment = tuple((v, env[v]) for v in formula.variables if env is not None and v in env)
        return HoldsResult(value, assignment)
    return HoldsResult(evaluator.evaluate(formula, {}))


class _Evaluator:
    def __init__(self, events: Sequence[Event], rewriter: Rewriter) -> None:
        self.events = tuple(events)
        self.rewriter = rewriter
        self._at = {e.timepoint: e for e in self.events}
        self._domain: Optional[Tuple[Term, ...]] = None

    # ---- API
    def evaluate(self, formula: Formula, env: Env) -> bool:
        if isinstance(formula, Quantified):
            return self.quantified(formula, env)[0]
        if isinstance(formula, ActionAtom):
            return self._action(formula, env)
        if isinstance(formula, Less):
            return self._time(formula.left, env) < self._time(formula.right, env)
        if isinstance(formula, EqTime):
            return self._time(formula.left, env) == self._time(formula.right, env)
        if isinstance(formula, EqTerm):
            return self._term(formula.left, env) == self._term(formula.right, env)
        if isinstance(formula, Truth):
            return formula.value
        if isinstance(formula, Not):
            return not self.evaluate(formula.body, env)
        if isinstance(formula, And):
            return all(self.evaluate(p, env) for p in formula.parts)
        if isinstance(formula, Or):
            return any(self.evaluate(p, env) for p in formula.parts)
        if isinstance(formula, Implies):
            return not self.evaluate(formula.antecedent, env) or self.evaluate(formula.consequent, env)
        raise TypeError(f"not a formula: {formula!r}")

    def quantified(self, formula: Quantified, env: Env) -> Tuple[bool, Optional[Env]]:
        """Truth value plus the decisive assignment: a witness for Ex, a counterexample for All."""
        outer = {k: v for k, v in env.items() if k not in formula.variables}
        universal = formula.quantifier is Quantifier.ALL
        for candidate in self._assignments(formula, outer):
            value = self.evaluate(formula.body, candidate)
            if universal and not value:
                return False, candidate
            if not universal and value:
                return True, candidate
        return universal, None

    # ---- Helpers
    def _assignments(self, formula: Quantified, env: Env) -> Iterator[Env]:
        seen: List[Env] = []
        for partial in self._guarded(guards(formula), 0, env):
            for full in self._complete(formula.variables, partial):
                if full not in seen:
                    seen.append(full)
                    yield full

    def _guarded(self, atoms: Sequence[ActionAtom], index: int, env: Env) -> Iterator[Env]:
        if index == len(atoms):
            yield env
            return
        atom = atoms[index]
        bound_time = env.get(atom.time)
        events: Sequence[Event] = self.events
        if bound_time is not None:
            event = self._at.get(bound_time)  # type: ignore[arg-type]
            if event is None:
                return
            events = (event,)
        subst = self._substitution(env)
        pattern = tuple(self.rewriter.normalize(subst.instantiate(a)) for a in atom.fact.args)
        for event in events:
            for fact in event.recorded:
                found = self._match(atom.fact, pattern, fact)
                if found is None:
                    continue
                extended = dict(env)
                extended.update(found)
                extended[atom.time] = event.timepoint
                yield from self._guarded(atoms, index + 1, extended)

    @staticmethod
    def _match(pattern_fact: Fact, pattern: Tuple[Term, ...], fact: Fact) -> Optional[Dict[Variable, Term]]:
        if fact.name != pattern_fact.name or fact.arity != len(pattern):
            return None
        subst: Optional[Substitution] = Substitution()
        for arg_pattern, arg in zip(pattern, fact.args):
            subst = match_syntactic(arg_pattern, arg, subst)  # type: ignore[arg-type]
            if subst is None:
                return None
        return dict(subst)  # type: ignore[arg-type]

    def _complete(self, variables: Sequence[BoundVar], env: Env) -> Iterator[Env]:
        missing = [v for v in variables if v not in env]
        if not missing:
            yield env
            return
        pools = [self._pool(v) for v in missing]
        for values in product(*pools):
            full = dict(env)
            full.update(zip(missing, values))
            yield full

    def _pool(self, var: BoundVar) -> Sequence[Value]:
        if isinstance(var, TimeVar):
            return [e.timepoint for e in self.events]
        return [t for t in self._terms() if match_syntactic(var, t) is not None]

    def _terms(self) -> Tuple[Term, ...]:
        if self._domain is None:
            found: Dict[Term, None] = {}
            for event in self.events:
                for fact in event.recorded:
                    for arg in fact.args:
                        for sub in subterms(arg):
                            found.setdefault(sub, None)
            self._domain = tuple(sorted(found, key=term_key))
        return self._domain

    def _substitution(self, env: Env) -> Substitution:
        return Substitution({k: v for k, v in env.items() if isinstance(k, Variable)})  # type: ignore[misc]

    def _term(self, term: Term, env: Env) -> Term:
        value = self.rewriter.normalize(self._substitution(env).instantiate(term))
        if not is_ground(value):
            raise ContractError(f"term {term} has unbound variables")
        return value

    def _time(self, var: TimeVar, env: Env) -> int:
        value = env.get(var)
        if not isinstance(value, int):
            raise ContractError(f"timepoint {var} is unbound")
        return value

    def _action(self, atom: ActionAtom, env: Env) -> bool:
        event = self._at.get(self._time(atom.time, env))
        if event is None:
            return False
        args = tuple(self._term(a, env) for a in atom.fact.args)
        return any(f.name == atom.fact.name and f.args == args for f in event.recorded)
