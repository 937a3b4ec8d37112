from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from rich.console import Console
from rich.table import Table
from rich.text import Text

from msrprove.config import REPORT_SCHEMA
from msrprove.engine import Bounds
from msrprove.frontend import Diagnostic, Lemma, format_formula
from msrprove.properties.checker import Verdict, VerdictKind

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

NOT_ANALYZED = "not analyzed"


@dataclass(frozen=True)
class LemmaResult:
    lemma: Lemma
    verdict: Optional[Verdict] = None
    elapsed: float = 0.0
    graph_path: Optional[Path] = None

    @property
    def status(self) -> str:
        return self.verdict.summary() if self.verdict is not None else NOT_ANALYZED

    def to_dict(self) -> dict:
        data: Dict[str, object] = {
            "lemma": self.lemma.name,
            "mode": self.lemma.mode.value,
            "verdict": self.verdict.kind.value if self.verdict is not None else None,
            "status": self.status,
            "elapsed": round(self.elapsed, 4),
        }
        verdict = self.verdict
        if verdict is not None:
            data["traces"] = verdict.traces
            if verdict.trace is not None:
                data["trace"] = [str(e) for e in verdict.trace.events]
                data["rules"] = [e.label for e in verdict.trace.rule_events]
                data["assignment"] = {str(var): _value(value) for var, value in verdict.assignment}
                data["counterexample_formula"] = format_formula(verdict.counterexample_formula)
        if self.graph_path is not None:
            data["graph"] = str(self.graph_path)
        return data


@dataclass(frozen=True)
class RunReport:
    """Everything one ``prove`` run found, in the order the theory declares its lemmas."""

    input_path: str
    diagnostics: Tuple[Diagnostic, ...] = ()
    results: Tuple[LemmaResult, ...] = ()
    bounds: Bounds = field(default_factory=Bounds)
    elapsed: float = 0.0
    theory: Optional[str] = None

    @property
    def errors(self) -> Tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.is_error)

    @property
    def exit_code(self) -> int:
        if self.errors:
            return EXIT_USAGE
        if any(r.verdict is not None and not r.verdict.expected for r in self.results):
            return EXIT_FAILED
        return EXIT_OK

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "input": self.input_path,
            "theory": self.theory,
            "bounds": self.bounds.to_dict(),
            "elapsed": round(self.elapsed, 4),
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "lemmas": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def render(self, console: Console) -> None:
        summary = Table.grid(padding=(0, 2))
        summary.add_column(style="bold")
        summary.add_column()
        summary.add_row("Analyzed:", self.input_path)
        summary.add_row("Processing time:", f"{self.elapsed:.2f}s")
        summary.add_row("Bounds:", str(self.bounds))
        console.print(summary)
        for diagnostic in self.diagnostics:
            console.print(Text(str(diagnostic), style="red" if diagnostic.is_error else "yellow"))
        if not self.results:
            return
        console.rule()
        width = max(len(_heading(r.lemma)) for r in self.results)
        for result in self.results:
            line = Text(_heading(result.lemma).ljust(width) + " ")
            line.append(result.status, style=_style(result.verdict))
            console.print(line)
        for result in self.results:
            if result.verdict is not None and result.verdict.trace is not None:
                _render_trace(console, result)


# ---- Helpers


def _heading(lemma: Lemma) -> str:
    return f"{lemma.name} ({lemma.mode.value}):"


def _style(verdict: Optional[Verdict]) -> str:
    if verdict is None:
        return "dim"
    return "green" if verdict.expected else "red"


def _value(value: object) -> str:
    return f"#{value}" if isinstance(value, int) else str(value)


def _render_trace(console: Console, result: LemmaResult) -> None:
    verdict = result.verdict
    assert verdict is not None and verdict.trace is not None
    title = "counterexample" if verdict.kind is VerdictKind.FALSIFIED else "witness"
    console.print()
    console.print(Text(f"{result.lemma.name}: {title} trace", style="bold"))
    marked = set(verdict.highlight())
    for event in verdict.trace.events:
        console.print(Text(f"  {event}", style="bold" if event.timepoint in marked else ""))
    if verdict.assignment:
        binding = ", ".join(f"{var} = {_value(value)}" for var, value in verdict.assignment)
        console.print(f"  with {binding}", markup=False)
    console.print("  Guarded formula characterizing all counterexamples:")
    console.print(f"    {format_formula(verdict.counterexample_formula)}", markup=False)
    if result.graph_path is not None:
        console.print(f"  graph: {result.graph_path}", markup=False)
