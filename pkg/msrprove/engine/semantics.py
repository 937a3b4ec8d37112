from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from msrprove.deduction import EMPTY_KNOWLEDGE, Deducer, Derivation, Shape, saturate
from msrprove.engine.bounds import Bounds
from msrprove.engine.shapes import ShapeIndex
from msrprove.engine.state import (
    COERCE_LABEL,
    CONSTRUCT_LABEL,
    FRESH_LABEL,
    RECEIVE_LABEL,
    SEND_LABEL,
    Choice,
    Event,
    EventKind,
    State,
    StepResult,
    Trace,
)
from msrprove.errors import ContractError
from msrprove.frontend.facts import Fact, construction_fact, knowledge_fact
from msrprove.frontend.theory import ProtocolRule, Theory
from msrprove.log import get_logger
from msrprove.terms import FreshName, PublicName, Sort, Substitution, Term, Variable, is_ground, match_syntactic

logger = get_logger(__name__)


@dataclass(frozen=True)
class _CompiledRule:
    """A let-expanded rule with its premises split by how they are satisfied."""

    rule: ProtocolRule
    fresh: Tuple[Variable, ...]
    state: Tuple[Fact, ...]
    inputs: Tuple[Term, ...]
    negated: Tuple[Fact, ...]
    public: Tuple[Variable, ...]
    shapes: Mapping[Variable, Tuple[Shape, ...]]

    @classmethod
    def of(cls, rule: ProtocolRule, index: ShapeIndex) -> "_CompiledRule":
        fresh: List[Variable] = []
        state: List[Fact] = []
        inputs: List[Term] = []
        negated: List[Fact] = []
        for fact in rule.premises:
            if fact.negated:
                negated.append(fact)
            elif fact.name == "Fr":
                fresh.append(fact.args[0])  # type: ignore[arg-type]
            elif fact.name == "In":
                inputs.append(fact.args[0])
            else:
                state.append(fact)
        public: Dict[Variable, None] = {}
        for fact in rule.facts():
            for var in fact.variables():
                if var.sort is Sort.PUB:
                    public.setdefault(var, None)
        return cls(rule, tuple(fresh), tuple(state), tuple(inputs), tuple(negated), tuple(public), index.for_rule(rule))

    @property
    def name(self) -> str:
        return self.rule.name


class Engine:
    """Labeled multiset rewriting over a theory, with the network adversary built in."""

    def __init__(self, theory: Theory, bounds: Optional[Bounds] = None) -> None:
        self.theory = theory
        self.bounds = bounds or Bounds()
        self.rewriter = theory.rewriter
        self.deducer = Deducer(self.rewriter, self.bounds.adv_depth)
        rules = [r.expanded() for r in sorted(theory.rules, key=lambda r: r.name)]
        index = ShapeIndex(rules, theory.lemmas)
        self._rules = {r.name: _CompiledRule.of(r, index) for r in rules}

    # ---- API
    def initial_state(self) -> State:
        knowledge = saturate(EMPTY_KNOWLEDGE, 0, rewriter=self.rewriter, constants=self.theory.public_constants())
        return State(knowledge=knowledge)

    def enabled(self, state: State) -> List[Choice]:
        """Every (rule, substitution) that can fire in ``state``, in canonical order."""
        choices: List[Choice] = []
        for compiled in self._rules.values():
            seen: Dict[Substitution, None] = {}
            for subst in self._matches(compiled, state):
                seen.setdefault(subst, None)
            choices.extend(Choice(compiled.name, s) for s in seen)
        choices.sort(key=Choice.sort_key)
        return choices

    def step(self, state: State, choice: Choice) -> StepResult:
        """Fire ``choice``; raises ``ContractError`` when it is not enabled in ``state``."""
        compiled = self._rules.get(choice.rule)
        if compiled is None:
            raise ContractError(f"unknown rule '{choice.rule}'")
        subst = choice.substitution
        events: List[Event] = []
        clock = state.clock

        def emit(**kwargs) -> None:
            nonlocal clock
            events.append(Event(timepoint=clock, **kwargs))
            clock += 1

        if state.rule_events >= self.bounds.max_events:
            raise ContractError(f"{choice.rule}: event bound {self.bounds.max_events} reached")
        missing = sorted({str(v) for f in compiled.rule.facts() for v in f.variables() if v not in subst})
        if missing:
            raise ContractError(f"{choice.rule}: no binding for " + ", ".join(missing))
        fresh_names = self._fresh_names(compiled, state)
        if fresh_names is None:
            raise ContractError(f"{choice.rule}: fresh-name bound {self.bounds.max_fresh} reached")
        for var, name in zip(compiled.fresh, fresh_names):
            if subst.get(var) != name:
                raise ContractError(f"{choice.rule}: {var} must be bound to the next fresh name {name}")
            emit(kind=EventKind.FRESH, label=FRESH_LABEL, term=name, conclusions=(Fact("Fr", (name,)),))

        remaining = list(state.linear)
        for pattern in compiled.state:
            fact = self._ground(pattern, subst)
            if pattern.persistent:
                if fact not in state.persistent:
                    raise ContractError(f"{choice.rule}: premise {fact} is not in the state")
            else:
                if fact not in remaining:
                    raise ContractError(f"{choice.rule}: premise {fact} is not in the state")
                remaining.remove(fact)
        for pattern in compiled.negated:
            fact = self._ground(pattern, subst)
            if self._present(fact, state):
                raise ContractError(f"{choice.rule}: {fact} is present but negated")

        inputs: List[Term] = []
        for pattern in compiled.inputs:
            term = self.rewriter.normalize(subst.instantiate(pattern))
            derivation = self.deducer.derive(state.knowledge, term) if is_ground(term) else None
            if derivation is None:
                raise ContractError(f"{choice.rule}: the adversary cannot derive In({term})")
            for event in self._send_events(derivation, term):
                emit(**event)
            inputs.append(term)

        rule = compiled.rule
        premises = tuple(self._ground(f, subst) for f in rule.premises if not f.negated)
        actions = tuple(self._ground(f, subst) for f in rule.actions)
        conclusions = tuple(self._ground(f, subst) for f in rule.conclusions)
        outputs = tuple(f.args[0] for f in conclusions if f.name == "Out")
        observations = tuple(Fact("In", (t,)) for t in inputs) + tuple(Fact("Out", (t,)) for t in outputs)
        emit(
            kind=EventKind.RULE,
            label=rule.name,
            rule=rule.name,
            substitution=subst,
            premises=premises,
            actions=actions,
            observations=observations,
            conclusions=conclusions,
        )

        persistent = set(state.persistent)
        for fact in conclusions:
            if fact.name == "Out":
                continue
            if fact.persistent:
                persistent.add(fact)
            else:
                remaining.append(fact)

        knowledge = state.knowledge
        for term in outputs:
            if term in knowledge:
                continue
            knowledge, learned = self.deducer.learn(knowledge, term)
            facts = tuple(knowledge_fact(u) for u in learned)
            emit(
                kind=EventKind.ADV_RECEIVE,
                label=RECEIVE_LABEL,
                term=term,
                premises=(Fact("Out", (term,)),),
                observations=facts,
                conclusions=facts,
            )
        public = [v for v in compiled.public if isinstance(subst.get(v), PublicName) and subst[v] not in knowledge]
        if public:
            knowledge, _ = self.deducer.learn(knowledge, *(subst[v] for v in public))

        successor = State(
            linear=tuple(sorted(remaining, key=Fact.sort_key)),
            persistent=frozenset(persistent),
            knowledge=knowledge,
            fresh_counter=state.fresh_counter + len(compiled.fresh),
            clock=clock,
            rule_events=state.rule_events + 1,
        )
        return StepResult(successor, tuple(events))

    def replay(self, trace: Trace) -> State:
        """Re-run the trace's rule instances from its initial state and check every event."""
        state = trace.initial
        index = 0
        for choice in trace.choices:
            result = self.step(state, choice)
            expected = trace.events[index : index + len(result.events)]
            if tuple(expected) != result.events:
                raise ContractError(f"replay diverges at timepoint {index} ({choice.rule})")
            index += len(result.events)
            state = result.state
        if index != len(trace.events) or state != trace.final:
            raise ContractError("replay does not reproduce the recorded final state")
        return state

    def successors(self, state: State) -> Iterator[Tuple[Choice, StepResult]]:
        if state.rule_events >= self.bounds.max_events:
            return
        for choice in self.enabled(state):
            yield choice, self.step(state, choice)

    # ---- Helpers
    def _fresh_names(self, compiled: _CompiledRule, state: State) -> Optional[Tuple[FreshName, ...]]:
        if state.fresh_counter + len(compiled.fresh) > self.bounds.max_fresh:
            return None
        return tuple(FreshName(var.name, state.fresh_counter + i) for i, var in enumerate(compiled.fresh))

    def _ground(self, fact: Fact, subst: Substitution) -> Fact:
        return Fact(fact.name, tuple(self.rewriter.normalize(subst.instantiate(a)) for a in fact.args), persistent=fact.persistent)

    @staticmethod
    def _present(fact: Fact, state: State) -> bool:
        return fact in state.persistent

    def _matches(self, compiled: _CompiledRule, state: State) -> Iterator[Substitution]:
        if state.rule_events >= self.bounds.max_events:
            return
        names = self._fresh_names(compiled, state)
        if names is None:
            return
        subst = Substitution(dict(zip(compiled.fresh, names)))
        for matched in self._match_state(compiled.state, 0, subst, state, frozenset()):
            for supplied in self._match_inputs(compiled, 0, matched, state):
                bound = self._bind_public(compiled, supplied)
                if not any(self._present(self._ground(f, bound), state) for f in compiled.negated):
                    yield bound.restrict(v for f in compiled.rule.facts() for v in f.variables())

    def _match_state(
        self, patterns: Sequence[Fact], index: int, subst: Substitution, state: State, used: frozenset
    ) -> Iterator[Substitution]:
        if index == len(patterns):
            yield subst
            return
        pattern = patterns[index]
        if pattern.persistent:
            pool = [(None, f) for f in state.sorted_persistent()]
        else:
            pool = [(i, f) for i, f in enumerate(state.linear) if i not in used]
        for position, fact in pool:
            if fact.name != pattern.name or fact.arity != pattern.arity:
                continue
            found: Optional[Substitution] = subst
            for arg_pattern, arg in zip(pattern.args, fact.args):
                found = match_syntactic(arg_pattern, arg, found)
                if found is None:
                    break
            if found is not None:
                taken = used if position is None else used | {position}
                yield from self._match_state(patterns, index + 1, found, state, taken)

    @staticmethod
    def _bind_public(compiled: _CompiledRule, subst: Substitution) -> Substitution:
        """Public variables that neither the state nor an input binds denote the public name they spell."""
        for var in compiled.public:
            if var not in subst:
                subst = subst.bind(var, PublicName(var.name))
        return subst

    def _match_inputs(self, compiled: _CompiledRule, index: int, subst: Substitution, state: State) -> Iterator[Substitution]:
        if index == len(compiled.inputs):
            yield subst
            return
        for instance in self.deducer.instances(state.knowledge, compiled.inputs[index], subst, compiled.shapes):
            yield from self._match_inputs(compiled, index + 1, instance.substitution, state)

    def _send_events(self, derivation: Derivation, term: Term) -> Iterator[dict]:
        for leaf in derivation.leaves():
            yield dict(
                kind=EventKind.ADV_CONSTRUCT,
                label=COERCE_LABEL,
                term=leaf,
                premises=(knowledge_fact(leaf),),
                conclusions=(construction_fact(leaf),),
            )
        for node in derivation.constructions():
            yield dict(
                kind=EventKind.ADV_CONSTRUCT,
                label=CONSTRUCT_LABEL,
                term=node.term,
                premises=tuple(construction_fact(child.term) for child in node.children),
                conclusions=(construction_fact(node.term),),
            )
        yield dict(
            kind=EventKind.ADV_SEND,
            label=SEND_LABEL,
            term=term,
            premises=(construction_fact(term),),
            observations=(knowledge_fact(term),),
            conclusions=(Fact("In", (term,)),),
        )
