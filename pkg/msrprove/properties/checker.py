from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from msrprove.config import worker_cap
from msrprove.engine import Bounds, ExploreStats, Projection, Trace, explore, root_branches
from msrprove.frontend.theory import Lemma, Theory, TraceMode
from msrprove.log import get_logger
from msrprove.properties.evaluate import HoldsResult, Value, holds
from msrprove.properties.formula import BoundVar, Formula, Less, action_atoms, atoms, negate

logger = get_logger(__name__)


class VerdictKind(str, Enum):
    VERIFIED = "verified"
    FALSIFIED = "falsified"
    WITNESS = "witness"
    NO_WITNESS = "no-witness"


@dataclass(frozen=True)
class Verdict:
    """Outcome of checking one lemma within ``bounds``; ``trace`` is the evidence, if any."""

    kind: VerdictKind
    lemma: Lemma
    bounds: Bounds
    traces: int
    trace: Optional[Trace] = None
    assignment: Tuple[Tuple[BoundVar, Value], ...] = ()

    @property
    def expected(self) -> bool:
        """Whether the lemma came out the way its trace mode asks for."""
        return self.kind in (VerdictKind.VERIFIED, VerdictKind.WITNESS)

    @property
    def counterexample_formula(self) -> Formula:
        """The guarded formula every counterexample of the lemma satisfies."""
        return negate(self.lemma.formula)

    def highlight(self) -> Tuple[int, ...]:
        return HoldsResult(True, self.assignment).timepoints()

    def summary(self) -> str:
        if self.kind is VerdictKind.VERIFIED:
            return f"verified up to bound ({self.traces} traces)"
        if self.kind is VerdictKind.NO_WITNESS:
            return f"no witness up to bound ({self.traces} traces)"
        steps = len(self.trace.rule_events) if self.trace is not None else 0
        found = "falsified - found trace" if self.kind is VerdictKind.FALSIFIED else "witness found"
        return f"{found} ({steps} rule instance(s), {self.traces} traces)"


# (depth, trace, assignment) of the first decisive trace in a search, and the number of traces examined.
_Found = Tuple[int, Trace, Tuple[Tuple[BoundVar, Value], ...]]


def check_lemma(theory: Theory, lemma: Lemma, bounds: Optional[Bounds] = None, workers: Optional[int] = None) -> Verdict:
    """Search the bounded trace space for a counterexample (all-traces) or a witness (exists-trace)."""
    bounds = bounds or Bounds()
    workers = worker_cap() if workers is None else max(1, workers)
    branches = len(root_branches(theory, bounds)) if workers > 1 else 0
    if branches > 1:
        found, examined = _search_parallel(theory, lemma, bounds, workers, branches)
    else:
        found, examined = _search(theory, lemma, bounds, None)
    verdict = _verdict(lemma, bounds, found, examined)
    logger.info("lemma %s: %s", lemma.name, verdict.summary())
    return verdict


def check_theory(theory: Theory, bounds: Optional[Bounds] = None, workers: Optional[int] = None) -> List[Verdict]:
    return [check_lemma(theory, lemma, bounds, workers) for lemma in theory.lemmas]


def lemma_projection(lemma: Lemma) -> Projection:
    """The part of a trace the lemma reads: facts named by its atoms, in order only if it uses ``<``."""
    names = frozenset(atom.fact.name for atom in action_atoms(lemma.formula))
    return Projection(names, ordered=any(isinstance(leaf, Less) for leaf in atoms(lemma.formula)))


# ---- Helpers


def _decisive(lemma: Lemma, result: HoldsResult) -> bool:
    return result.value if lemma.mode is TraceMode.EXISTS_TRACE else not result.value


def _search(theory: Theory, lemma: Lemma, bounds: Bounds, branch: Optional[int]) -> Tuple[Optional[_Found], int]:
    stats = ExploreStats()
    for trace in explore(theory, bounds, branch=branch, stats=stats, projection=lemma_projection(lemma)):
        result = holds(lemma.formula, trace, theory.rewriter)
        if _decisive(lemma, result):
            return (len(trace.rule_events), trace, result.assignment), stats.explored
    return None, stats.explored


def _search_branch(args: Tuple[Theory, Lemma, Bounds, int]) -> Tuple[Optional[_Found], int]:
    theory, lemma, bounds, branch = args
    return _search(theory, lemma, bounds, branch)


def _search_parallel(
    theory: Theory, lemma: Lemma, bounds: Bounds, workers: int, branches: int
) -> Tuple[Optional[_Found], int]:
    """Fan out over root choices; the first decisive trace is the one a sequential
    breadth-first run meets first: least depth, then least branch index."""
    empty = next(explore(theory, Bounds(1, bounds.max_fresh, bounds.adv_depth)))
    result = holds(lemma.formula, empty, theory.rewriter)
    if _decisive(lemma, result):
        return (0, empty, result.assignment), 1
    jobs = [(theory, lemma, bounds, b) for b in range(branches)]
    with ProcessPoolExecutor(max_workers=min(workers, branches)) as pool:
        outcomes = list(pool.map(_search_branch, jobs))
    examined = 1 + sum(count for _, count in outcomes)
    hits = [(found[0], index, found) for index, (found, _) in enumerate(outcomes) if found is not None]
    if not hits:
        return None, examined
    return min(hits, key=lambda hit: (hit[0], hit[1]))[2], examined


def _verdict(lemma: Lemma, bounds: Bounds, found: Optional[_Found], examined: int) -> Verdict:
    exists = lemma.mode is TraceMode.EXISTS_TRACE
    if found is None:
        kind = VerdictKind.NO_WITNESS if exists else VerdictKind.VERIFIED
        return Verdict(kind, lemma, bounds, examined)
    _, trace, assignment = found
    kind = VerdictKind.WITNESS if exists else VerdictKind.FALSIFIED
    return Verdict(kind, lemma, bounds, examined, trace, assignment)
