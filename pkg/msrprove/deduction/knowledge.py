from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum
from itertools import product
from typing import Deque, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from msrprove.config import DEFAULT_ADV_DEPTH
from msrprove.log import get_logger
from msrprove.terms import (
    BUILTIN_REWRITER,
    EMPTY,
    Application,
    FunctionSignature,
    PublicName,
    RewriteEquation,
    Rewriter,
    Sort,
    StringConstant,
    Substitution,
    Term,
    Variable,
    is_atom,
    is_ground,
    match_syntactic,
    term_key,
)

logger = get_logger(__name__)


class DerivationStep(str, Enum):
    KNOWN = "known"
    PUBLIC = "public"
    CONSTRUCT = "construct"
    DECONSTRUCT = "deconstruct"


@dataclass(frozen=True)
class Derivation:
    """Proof tree for one adversary-derivable term."""

    term: Term
    step: DerivationStep
    children: Tuple["Derivation", ...] = ()
    symbol: Optional[str] = None

    @property
    def height(self) -> int:
        """Number of stacked construction steps; analysis and leaves cost nothing."""
        below = max((child.height for child in self.children), default=0)
        return below + 1 if self.step is DerivationStep.CONSTRUCT else below

    def replay(self, rewriter: Optional[Rewriter] = None) -> Term:
        """Rebuild the root term from the leaves."""
        if self.step in (DerivationStep.KNOWN, DerivationStep.PUBLIC):
            return self.term
        rw = rewriter or BUILTIN_REWRITER
        args = tuple(child.replay(rw) for child in self.children)
        return rw.normalize(Application(self.symbol or "", args))

    def leaves(self) -> Tuple[Term, ...]:
        """Known terms the derivation starts from, in first-use order."""
        found: Dict[Term, None] = {}
        for node in self._postorder():
            if node.step is DerivationStep.KNOWN:
                found.setdefault(node.term, None)
        return tuple(found)

    def constructions(self) -> Tuple["Derivation", ...]:
        """Construction steps, children before parents, each term once."""
        found: Dict[Term, Derivation] = {}
        for node in self._postorder():
            if node.step is DerivationStep.CONSTRUCT:
                found.setdefault(node.term, node)
        return tuple(found.values())

    def _postorder(self) -> Iterator["Derivation"]:
        for child in self.children:
            yield from child._postorder()
        yield self

    def __str__(self) -> str:
        if not self.children:
            return f"{self.step.value}({self.term})"
        inner = ", ".join(str(c) for c in self.children)
        return f"{self.step.value}[{self.symbol}]({inner})"


@dataclass(frozen=True, eq=False)
class KnowledgeBase:
    """Adversary knowledge: terms known so far with how each was obtained.

    ``pending`` keeps analysis steps whose side arguments (keys) are not derivable yet;
    they are retried every time something new is learned.
    """

    origins: Mapping[Term, Derivation] = field(default_factory=dict)
    pending: Tuple[Tuple[Term, RewriteEquation], ...] = ()

    @classmethod
    def of(cls, terms: Iterable[Term]) -> "KnowledgeBase":
        """Raw knowledge; not analysis-closed until passed through a ``Deducer``."""
        return cls({t: Derivation(t, DerivationStep.KNOWN) for t in terms})

    @property
    def terms(self) -> frozenset:
        return frozenset(self.origins)

    def sorted_terms(self) -> Tuple[Term, ...]:
        return self._sorted

    def atoms(self) -> Tuple[Term, ...]:
        """Known names and constants, the candidates for variables nested in patterns."""
        return self._atoms

    @cached_property
    def _sorted(self) -> Tuple[Term, ...]:
        return tuple(sorted(self.origins, key=term_key))

    @cached_property
    def _atoms(self) -> Tuple[Term, ...]:
        return tuple(t for t in self._sorted if is_atom(t) or (isinstance(t, Application) and not t.args))

    def __contains__(self, term: object) -> bool:
        return term in self.origins

    def __len__(self) -> int:
        return len(self.origins)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.sorted_terms())


EMPTY_KNOWLEDGE = KnowledgeBase()


@dataclass(frozen=True)
class Instance:
    """One way the adversary can supply an ``In`` pattern."""

    substitution: Substitution
    term: Term
    derivation: Derivation


@dataclass(frozen=True, eq=False)
class Shape:
    """A pattern that a rule premise or lemma atom compares some adversary-chosen value against.

    ``inner`` carries the shapes for the pattern's own variables.
    """

    pattern: Term
    inner: Mapping[Variable, Tuple["Shape", ...]] = field(default_factory=dict)


ShapeMap = Mapping[Variable, Sequence[Shape]]


class Deducer:
    """Dolev-Yao deduction over a rewrite system, with constructions bounded by ``depth``.

    Any public function may be applied, destructors included, as long as the result is in normal form.
    """

    def __init__(self, rewriter: Optional[Rewriter] = None, depth: int = DEFAULT_ADV_DEPTH) -> None:
        if depth < 0:
            raise ValueError(f"depth must be non-negative, got {depth}")
        self.rewriter = rewriter or BUILTIN_REWRITER
        self.signature = self.rewriter.signature
        self.depth = depth
        self._analysis: List[Tuple[RewriteEquation, Term, Tuple[Term, ...]]] = []
        for eq in self.rewriter.equations:
            principal, *side = eq.lhs.args  # type: ignore[union-attr]
            if isinstance(principal, Application):
                self._analysis.append((eq, principal, tuple(side)))

    # ---- API
    def learn(self, kb: KnowledgeBase, *terms: Term) -> Tuple[KnowledgeBase, Tuple[Term, ...]]:
        """Add terms and close under analysis; also returns every term that became known."""
        origins = dict(kb.origins)
        fresh: List[Term] = []
        for term in terms:
            normal = self.rewriter.normalize(term)
            if normal not in origins:
                origins[normal] = Derivation(normal, DerivationStep.KNOWN)
                fresh.append(normal)
        closed, derived = self._close(origins, list(kb.pending), fresh)
        return closed, tuple(fresh) + derived

    def close(self, kb: KnowledgeBase) -> KnowledgeBase:
        closed, _ = self._closed(kb)
        return closed

    def derive(self, kb: KnowledgeBase, target: Term) -> Optional[Derivation]:
        """A derivation of ``target`` from analysis-closed ``kb``, or None."""
        return self._derive(kb.origins, self.rewriter.normalize(target), self.depth, {})

    def instances(
        self, kb: KnowledgeBase, pattern: Term, subst: Substitution = EMPTY, shapes: Optional[ShapeMap] = None
    ) -> List[Instance]:
        """Every instantiation of ``pattern`` the adversary can derive, extending ``subst``.

        A bare variable ranges over all known terms; variables inside a structured pattern
        range over known atoms, and subpatterns may also be matched against known terms.
        Either kind also takes its own public name (for ``$`` variables) and every derivable
        instance of the ``shapes`` listed for it.
        """
        target = subst.instantiate(pattern)
        demands = shapes or {}
        candidates: Dict[Substitution, None] = {}
        if isinstance(target, Variable):
            found_all = self._values(target, subst, kb, self.depth, demands, kb.sorted_terms())
        else:
            found_all = self._shapes(target, subst, kb, self.depth, demands)
        for found in found_all:
            candidates.setdefault(found, None)
        result: List[Instance] = []
        for candidate in candidates:
            term = self.rewriter.normalize(candidate.instantiate(pattern))
            if not is_ground(term):
                continue
            derivation = self.derive(kb, term)
            if derivation is not None:
                result.append(Instance(candidate, term, derivation))
        result.sort(key=lambda inst: (inst.substitution.sort_key(), term_key(inst.term)))
        return result

    # ---- Helpers
    def _closed(self, kb: KnowledgeBase) -> Tuple[KnowledgeBase, Tuple[Term, ...]]:
        origins = dict(kb.origins)
        return self._close(origins, list(kb.pending), list(origins))

    def _close(
        self, origins: Dict[Term, Derivation], pending: List[Tuple[Term, RewriteEquation]], worklist: List[Term]
    ) -> Tuple[KnowledgeBase, Tuple[Term, ...]]:
        queue: Deque[Term] = deque(worklist)
        added: List[Term] = []
        while queue:
            term = queue.popleft()
            for eq, principal, side in self._analysis:
                subst = match_syntactic(principal, term)
                if subst is not None and all(is_ground(subst.instantiate(s)) for s in side) and (term, eq) not in pending:
                    pending.append((term, eq))
            waiting: List[Tuple[Term, RewriteEquation]] = []
            for known, eq in pending:
                outcome = self._analyze(origins, known, eq)
                if outcome is None:
                    waiting.append((known, eq))
                else:
                    derived = outcome.term
                    if derived not in origins:
                        origins[derived] = outcome
                        added.append(derived)
                        queue.append(derived)
            pending = waiting
        return KnowledgeBase(origins, tuple(pending)), tuple(added)

    def _analyze(self, origins: Mapping[Term, Derivation], term: Term, eq: RewriteEquation) -> Optional[Derivation]:
        """Apply analysis step ``eq`` to known ``term``; None while its keys are not derivable."""
        principal, side = next((p, s) for e, p, s in self._analysis if e == eq)
        subst = match_syntactic(principal, term)
        if subst is None:
            return None
        side_terms = tuple(self.rewriter.normalize(subst.instantiate(s)) for s in side)
        children = [origins[term]]
        memo: Dict[Tuple[Term, int], Optional[Derivation]] = {}
        for s in side_terms:
            derivation = self._derive(origins, s, self.depth, memo)
            if derivation is None:
                return None
            children.append(derivation)
        result = self.rewriter.normalize(Application(eq.head, (term, *side_terms)))
        return Derivation(result, DerivationStep.DECONSTRUCT, tuple(children), eq.head)

    def _derive(
        self,
        origins: Mapping[Term, Derivation],
        target: Term,
        depth: int,
        memo: Dict[Tuple[Term, int], Optional[Derivation]],
    ) -> Optional[Derivation]:
        if target in origins:
            return Derivation(target, DerivationStep.KNOWN)
        if isinstance(target, (PublicName, StringConstant)):
            return Derivation(target, DerivationStep.PUBLIC)
        # targets arrive normalized, so a destructor here cannot reduce
        if depth <= 0 or not isinstance(target, Application) or target.symbol not in self.signature:
            return None
        key = (target, depth)
        if key in memo:
            return memo[key]
        children: List[Derivation] = []
        result: Optional[Derivation] = None
        for arg in target.args:
            child = self._derive(origins, arg, depth - 1, memo)
            if child is None:
                break
            children.append(child)
        else:
            result = Derivation(target, DerivationStep.CONSTRUCT, tuple(children), target.symbol)
        memo[key] = result
        return result

    def _shapes(
        self, target: Term, subst: Substitution, kb: KnowledgeBase, depth: int, shapes: ShapeMap
    ) -> Iterator[Substitution]:
        current = subst.instantiate(target)
        if is_ground(current):
            yield subst
            return
        if isinstance(current, Variable):
            yield from self._values(current, subst, kb, depth, shapes, kb.atoms())
            return
        assert isinstance(current, Application)
        for term in kb.sorted_terms():
            found = match_syntactic(current, term, subst)
            if found is not None:
                yield found
        if depth > 0 and current.symbol in self.signature:
            yield from self._arguments(current.args, 0, subst, kb, depth - 1, shapes)

    def _arguments(
        self, args: Tuple[Term, ...], index: int, subst: Substitution, kb: KnowledgeBase, depth: int, shapes: ShapeMap
    ) -> Iterator[Substitution]:
        if index == len(args):
            yield subst
            return
        for found in self._shapes(args[index], subst, kb, depth, shapes):
            yield from self._arguments(args, index + 1, found, kb, depth, shapes)

    def _values(
        self, var: Variable, subst: Substitution, kb: KnowledgeBase, depth: int, shapes: ShapeMap, pool: Iterable[Term]
    ) -> Iterator[Substitution]:
        values: List[Term] = list(pool)
        if var.sort is Sort.PUB:
            values.append(PublicName(var.name))
        # shapes are applications, which only msg variables admit
        for shape in shapes.get(var, ()) if var.sort is Sort.MSG else ():
            for found in self._shapes(shape.pattern, EMPTY, kb, depth, shape.inner):
                values.append(self.rewriter.normalize(found.instantiate(shape.pattern)))
        for value in values:
            if is_ground(value):
                bound = match_syntactic(var, value, subst)
                if bound is not None:
                    yield bound


def derivable(
    kb: KnowledgeBase, target: Term, depth_bound: int = DEFAULT_ADV_DEPTH, rewriter: Optional[Rewriter] = None
) -> Optional[Derivation]:
    """Close ``kb`` under analysis, then look for a derivation of ``target`` within ``depth_bound``."""
    deducer = Deducer(rewriter, depth_bound)
    return deducer.derive(deducer.close(kb), target)


def saturate(
    kb: KnowledgeBase,
    depth_bound: int,
    constructors: Optional[Iterable[FunctionSignature]] = None,
    rewriter: Optional[Rewriter] = None,
    constants: Iterable[Term] = (),
) -> KnowledgeBase:
    """The analysis closure of ``kb`` and the public ``constants``, plus every term buildable from it
    by at most ``depth_bound`` layers of ``constructors`` (every public function by default).

    Applications that reduce add their normal form, so a layer never holds a reducible term.
    """
    rw = rewriter or BUILTIN_REWRITER
    symbols = tuple(constructors) if constructors is not None else rw.signature.functions
    deducer = Deducer(rw, depth_bound)
    closed, _ = deducer.learn(deducer.close(kb), *constants)
    origins: Dict[Term, Derivation] = dict(closed.origins)
    for level in range(depth_bound):
        layer = tuple(origins)
        for sig in symbols:
            for args in product(layer, repeat=sig.arity):
                term = rw.normalize(Application(sig.name, args))
                if term not in origins:
                    children = tuple(origins[a] for a in args)
                    origins[term] = Derivation(term, DerivationStep.CONSTRUCT, children, sig.name)
        logger.debug("saturation level %d: %d terms", level + 1, len(origins))
    return KnowledgeBase(origins, closed.pending)
