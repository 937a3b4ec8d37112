from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from msrprove.engine.state import Event, State
from msrprove.frontend.facts import Fact
from msrprove.terms import Application, FreshName, Term, Variable, fresh_names

Position = Tuple[int, ...]
Item = Tuple[str, Tuple[Term, ...]]


@dataclass(frozen=True)
class Projection:
    """The recorded facts a lemma can see, and whether it compares timepoints by order.

    Two traces that agree on the state and on the projected history satisfy the same
    lemmas in every extension, so a search only needs one of them.
    """

    names: FrozenSet[str]
    ordered: bool = True

    def groups(self, events: Sequence[Event]) -> List[Tuple[Fact, ...]]:
        """Per event, the recorded facts with a visible name; events with none drop out."""
        found: List[Tuple[Fact, ...]] = []
        for event in events:
            facts = tuple(f for f in event.recorded if f.name in self.names)
            if facts:
                found.append(facts)
        return found


def canonical_key(state: State, events: Sequence[Event] = (), projection: Optional[Projection] = None) -> str:
    """Hash of the state and the trace history, invariant under renaming fresh names.

    Without a projection the history is every event in order. Names are ranked by first
    occurrence in an ordered history; other names are ranked by colour refinement over
    the facts they occur in.
    """
    items = _state_items(state)
    if projection is None:
        ranks = _first_seen(t for e in events for t in _event_terms(e))
        ranks.update(_refined_ranks(items, ranks))
        history: tuple = tuple(
            (e.kind.value, e.label, _code(e.term, ranks) if e.term is not None else None, tuple(_fact_code(f, ranks) for f in e.recorded))
            for e in events
        )
    else:
        groups = projection.groups(events)
        if projection.ordered:
            ranks = _first_seen(a for g in groups for f in sorted(g, key=Fact.sort_key) for a in f.args)
            ranks.update(_refined_ranks(items, ranks))
            history = tuple(tuple(sorted(_fact_code(f, ranks) for f in g)) for g in groups)
        else:
            seen = [(f"@{f.name}", f.args) for g in groups for f in g]
            ranks = _refined_ranks(items + seen, {})
            history = tuple(sorted(tuple(sorted(_fact_code(f, ranks) for f in g)) for g in groups))
    payload = (
        history,
        tuple(sorted(_fact_code(f, ranks) for f in state.linear)),
        tuple(sorted(_fact_code(f, ranks) for f in state.persistent)),
        tuple(sorted(_code(t, ranks) for t in state.knowledge.terms)),
        state.fresh_counter,
    )
    return _digest(repr(payload))


# ---- Helpers


def _digest(text: str) -> str:
    return hashlib.blake2b(text.encode("utf-8"), digest_size=16).hexdigest()


def _code(term: Term, ranks: Mapping[FreshName, object]) -> tuple:
    if isinstance(term, FreshName):
        return ("~", term.label, ranks.get(term, str(term.index)))
    if isinstance(term, Application):
        return ("f", term.symbol, tuple(_code(a, ranks) for a in term.args))
    if isinstance(term, Variable):
        return ("v", term.sort.value, term.name)
    return (type(term).__name__, getattr(term, "label", ""))


def _fact_code(fact: Fact, ranks: Mapping[FreshName, object]) -> tuple:
    return (fact.name, fact.persistent, tuple(_code(a, ranks) for a in fact.args))


def _event_terms(event: Event) -> Iterator[Term]:
    if event.term is not None:
        yield event.term
    for fact in event.recorded:
        yield from fact.args


def _state_items(state: State) -> List[Item]:
    items: List[Item] = [(f.name, f.args) for f in state.facts()]
    items.extend(("K", (t,)) for t in state.knowledge.terms)
    return items


def _first_seen(terms: Iterable[Term]) -> Dict[FreshName, object]:
    ranks: Dict[FreshName, object] = {}
    for term in terms:
        for name in fresh_names(term):
            ranks.setdefault(name, f"r{len(ranks)}")
    return ranks


def _positions(term: Term, name: FreshName, path: Position = ()) -> Iterator[Position]:
    if term == name:
        yield path
    elif isinstance(term, Application):
        for index, arg in enumerate(term.args):
            yield from _positions(arg, name, path + (index,))


def _refined_ranks(items: Sequence[Item], ranks: Mapping[FreshName, object]) -> Dict[FreshName, object]:
    names = sorted(
        {n for _, args in items for a in args for n in fresh_names(a) if n not in ranks},
        key=lambda n: (n.label, n.index),
    )
    if not names:
        return {}
    colours: Dict[FreshName, str] = {n: n.label for n in names}
    for _ in range(len(names)):
        labels = {**ranks, **{n: f"c{colours[n]}" for n in names}}
        contexts: Dict[FreshName, List[tuple]] = {n: [] for n in names}
        for fact_name, args in items:
            code = (fact_name, tuple(_code(a, labels) for a in args))
            for index, arg in enumerate(args):
                for name in set(fresh_names(arg)):
                    if name in contexts:
                        contexts[name].extend((code, (index, *p)) for p in _positions(arg, name))
        refined = {n: _digest(repr((colours[n], sorted(contexts[n])))) for n in names}
        stable = len(set(refined.values())) == len(set(colours.values()))
        colours = refined
        if stable:
            break
    ordered = sorted(names, key=lambda n: (str(colours[n]), n.index))
    return {n: f"r{len(ranks) + i}" for i, n in enumerate(ordered)}
