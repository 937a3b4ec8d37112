"""Checked-in theories with the verdicts they are expected to produce.

``corpus/manifest.toml`` lists one ``[[case]]`` per theory file with optional bounds, the
expected verdict of each lemma, and mutations: source edits that must flip one lemma.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from msrprove.config import CORPUS_DIR, MANIFEST_NAME
from msrprove.engine import Bounds
from msrprove.errors import TheoryError
from msrprove.frontend import Theory, load_theory, parse_theory
from msrprove.log import get_logger
from msrprove.properties.checker import Verdict, VerdictKind, check_lemma

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 fallback, same API
    import tomli as tomllib

logger = get_logger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Mutation:
    name: str
    find: str
    replace: str
    lemma: str
    expect: VerdictKind


@dataclass(frozen=True)
class CorpusCase:
    name: str
    path: Path
    bounds: Bounds = field(default_factory=Bounds)
    expect: Tuple[Tuple[str, VerdictKind], ...] = ()
    mutations: Tuple[Mutation, ...] = ()

    def source(self) -> str:
        return self.path.read_text(encoding="utf-8")

    def theory(self) -> Theory:
        return load_theory(self.path)

    def mutation(self, name: str) -> Mutation:
        for mutation in self.mutations:
            if mutation.name == name:
                return mutation
        raise KeyError(f"Unknown mutation: {name}")


@dataclass(frozen=True)
class CaseOutcome:
    """One expected verdict compared with the one the checker produced."""

    case: str
    lemma: str
    expected: VerdictKind
    verdict: Verdict
    mutation: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.verdict.kind is self.expected

    def describe(self) -> str:
        where = f"{self.case}[{self.mutation}]" if self.mutation else self.case
        status = "ok" if self.ok else f"MISMATCH (expected {self.expected.value})"
        return f"{where} {self.lemma}: {self.verdict.summary()} {status}"


# ---- API


def load_manifest(directory: Optional[PathLike] = None) -> List[CorpusCase]:
    root = Path(directory) if directory is not None else CORPUS_DIR
    with open(root / MANIFEST_NAME, "rb") as handle:
        data = tomllib.load(handle)
    cases = [_case(root, raw) for raw in data.get("case", [])]
    names = [c.name for c in cases]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ValueError(f"duplicate corpus case(s): {', '.join(duplicates)}")
    return cases


def load_case(name: str, directory: Optional[PathLike] = None) -> CorpusCase:
    for case in load_manifest(directory):
        if case.name == name:
            return case
    raise KeyError(f"Unknown corpus case: {name}")


def permission_voucher_model() -> Theory:
    return load_case("permission_voucher").theory()


def replay_pair() -> Tuple[Theory, Theory]:
    """The replayable theory and its nonce-protected counterpart."""
    return load_case("replay_attack").theory(), load_case("prevent_replay").theory()


def mutated_source(case: CorpusCase, mutation: Union[Mutation, str]) -> str:
    """The case's source with the mutation's find text replaced; it must occur exactly once."""
    if isinstance(mutation, str):
        mutation = case.mutation(mutation)
    source = case.source()
    hits = source.count(mutation.find)
    if hits != 1:
        raise ValueError(f"{case.name}/{mutation.name}: find text occurs {hits} times, expected once")
    return source.replace(mutation.find, mutation.replace)


def mutated_theory(case: CorpusCase, mutation: Union[Mutation, str]) -> Theory:
    label = mutation if isinstance(mutation, str) else mutation.name
    result = parse_theory(mutated_source(case, mutation))
    if result.theory is None:
        raise TheoryError(f"{case.path} [{label}]", result.errors)
    return result.theory


def run_case(case: CorpusCase, workers: Optional[int] = None, mutations: bool = True) -> List[CaseOutcome]:
    """Check every expectation of ``case``, then each mutation's flipped lemma."""
    theory = case.theory()
    outcomes = [
        CaseOutcome(case.name, lemma, expected, check_lemma(theory, theory.lemma(lemma), case.bounds, workers))
        for lemma, expected in case.expect
    ]
    if mutations:
        for mutation in case.mutations:
            mutant = mutated_theory(case, mutation)
            verdict = check_lemma(mutant, mutant.lemma(mutation.lemma), case.bounds, workers)
            outcomes.append(CaseOutcome(case.name, mutation.lemma, mutation.expect, verdict, mutation.name))
    failed = sum(1 for o in outcomes if not o.ok)
    logger.info("corpus case %s: %d check(s), %d mismatch(es)", case.name, len(outcomes), failed)
    return outcomes


# ---- Helpers


def _kind(value: str, where: str) -> VerdictKind:
    try:
        return VerdictKind(value)
    except ValueError:
        choices = ", ".join(k.value for k in VerdictKind)
        raise ValueError(f"{where}: unknown verdict '{value}' (expected one of: {choices})") from None


def _case(root: Path, raw: Dict) -> CorpusCase:
    try:
        name = raw["name"]
        path = root / raw["file"]
        bounds = Bounds(**raw.get("bounds", {}))
        expect = tuple((lemma, _kind(kind, f"{name}.{lemma}")) for lemma, kind in raw.get("expect", {}).items())
        mutations = tuple(
            Mutation(m["name"], m["find"], m["replace"], m["lemma"], _kind(m["expect"], f"{name}/{m['name']}"))
            for m in raw.get("mutation", [])
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed corpus case {raw.get('name', '?')}: {exc}") from exc
    return CorpusCase(name, path, bounds, expect, mutations)
