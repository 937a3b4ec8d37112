from __future__ import annotations

import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import click
from rich.console import Console
from rich.text import Text

from msrprove import __version__
from msrprove.cli.report import EXIT_FAILED, EXIT_OK, LemmaResult, RunReport
from msrprove.config import DEFAULT_ADV_DEPTH, DEFAULT_MAX_EVENTS, DEFAULT_MAX_FRESH
from msrprove.corpus import load_manifest, run_case
from msrprove.engine import Bounds
from msrprove.frontend import Theory, format_lemma, parse_theory
from msrprove.graph import build_graph, emit_dot
from msrprove.log import configure_logging, get_logger
from msrprove.properties.checker import check_lemma
from msrprove.properties.templates import TEMPLATES

logger = get_logger(__name__)

FORMATS = ("text", "json")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="msrprove")
def cli() -> None:
    """Bounded symbolic verification of .spthy protocol theories."""


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--prove", "prove_all", is_flag=True, help="Check every lemma.")
@click.option("--lemma", "lemma_names", multiple=True, metavar="NAME", help="Check only these lemmas (repeatable).")
@click.option("--max-events", type=int, default=DEFAULT_MAX_EVENTS, show_default=True, help="Rule instances per trace.")
@click.option("--max-fresh", type=int, default=DEFAULT_MAX_FRESH, show_default=True, help="Fresh names per trace.")
@click.option("--adv-depth", type=int, default=DEFAULT_ADV_DEPTH, show_default=True, help="Adversary construction depth.")
@click.option("--format", "output_format", type=click.Choice(FORMATS), default="text", show_default=True)
@click.option("--graph-dir", type=click.Path(file_okay=False, path_type=Path), help="Write a DOT graph per found trace.")
@click.option("--workers", type=int, default=None, help="Exploration processes (default: MSRPROVE_WORKERS or 1).")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for exploration details.")
@click.pass_context
def prove(
    ctx: click.Context,
    file: Path,
    prove_all: bool,
    lemma_names: Tuple[str, ...],
    max_events: int,
    max_fresh: int,
    adv_depth: int,
    output_format: str,
    graph_dir: Optional[Path],
    workers: Optional[int],
    verbose: int,
) -> None:
    """Load FILE, validate it and check its lemmas within the given bounds."""
    configure_logging(verbose)
    bounds = _bounds(max_events, max_fresh, adv_depth)
    started = time.perf_counter()
    result = parse_theory(_read(file))
    if result.theory is None:
        report = RunReport(str(file), result.diagnostics, bounds=bounds, elapsed=time.perf_counter() - started)
        ctx.exit(_emit(report, output_format))
    theory = result.theory
    unknown = sorted(set(lemma_names) - {lemma.name for lemma in theory.lemmas})
    if unknown:
        raise click.BadParameter(f"unknown lemma(s): {', '.join(unknown)}", param_hint="--lemma")
    analyze = prove_all or bool(lemma_names) or graph_dir is not None
    selected = set(lemma_names) if lemma_names else {lemma.name for lemma in theory.lemmas}
    results: List[LemmaResult] = []
    for lemma in theory.lemmas:
        if analyze and lemma.name in selected:
            results.append(_check(theory, lemma.name, bounds, workers, graph_dir))
        else:
            results.append(LemmaResult(lemma))
    report = RunReport(str(file), result.diagnostics, tuple(results), bounds, time.perf_counter() - started, theory.name)
    ctx.exit(_emit(report, output_format))


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "output_format", type=click.Choice(FORMATS), default="text", show_default=True)
@click.pass_context
def check(ctx: click.Context, file: Path, output_format: str) -> None:
    """Parse and validate FILE without exploring it."""
    started = time.perf_counter()
    result = parse_theory(_read(file))
    results: Tuple[LemmaResult, ...] = ()
    name = None
    if result.theory is not None:
        results = tuple(LemmaResult(lemma) for lemma in result.theory.lemmas)
        name = result.theory.name
    report = RunReport(str(file), result.diagnostics, results, elapsed=time.perf_counter() - started, theory=name)
    ctx.exit(_emit(report, output_format))


@cli.command()
@click.option("--case", "case_names", multiple=True, metavar="NAME", help="Run only these cases (repeatable).")
@click.option("--directory", type=click.Path(exists=True, file_okay=False, path_type=Path), help="Corpus directory.")
@click.option("--no-mutations", is_flag=True, help="Skip the mutation checks.")
@click.option("--workers", type=int, default=None, help="Exploration processes (default: MSRPROVE_WORKERS or 1).")
@click.option("-v", "--verbose", count=True)
@click.pass_context
def corpus(
    ctx: click.Context,
    case_names: Tuple[str, ...],
    directory: Optional[Path],
    no_mutations: bool,
    workers: Optional[int],
    verbose: int,
) -> None:
    """Check every corpus case against the verdicts its manifest expects."""
    configure_logging(verbose)
    try:
        cases = load_manifest(directory)
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    unknown = sorted(set(case_names) - {case.name for case in cases})
    if unknown:
        raise click.BadParameter(f"unknown case(s): {', '.join(unknown)}", param_hint="--case")
    console = Console(soft_wrap=True)
    failed = 0
    for case in cases:
        if case_names and case.name not in case_names:
            continue
        for outcome in run_case(case, workers, mutations=not no_mutations):
            failed += 0 if outcome.ok else 1
            console.print(Text(outcome.describe(), style="green" if outcome.ok else "red"))
    ctx.exit(EXIT_FAILED if failed else EXIT_OK)


@cli.command()
@click.argument("family", type=click.Choice(sorted(TEMPLATES)))
@click.argument("name")
@click.argument("actions", nargs=-1, required=True)
def template(family: str, name: str, actions: Tuple[str, ...]) -> None:
    """Print a FAMILY lemma called NAME over the given action fact names.

    secrecy takes the claim action, agreement the commit and running actions,
    uniqueness and executable a single action.
    """
    try:
        lemma = TEMPLATES[family](name, *actions)
    except TypeError as exc:
        raise click.UsageError(f"wrong number of action names for {family}") from exc
    click.echo(format_lemma(lemma))


def main(args: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        code = cli.main(args=list(args) if args is not None else None, prog_name="msrprove", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        return EXIT_FAILED
    return code if isinstance(code, int) else EXIT_OK


def run() -> None:
    sys.exit(main())


# ---- Helpers


def _bounds(max_events: int, max_fresh: int, adv_depth: int) -> Bounds:
    try:
        return Bounds(max_events, max_fresh, adv_depth)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


def _read(file: Path) -> str:
    try:
        return file.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise click.FileError(str(file), hint=str(exc)) from exc


def _check(theory: Theory, name: str, bounds: Bounds, workers: Optional[int], graph_dir: Optional[Path]) -> LemmaResult:
    lemma = theory.lemma(name)
    started = time.perf_counter()
    verdict = check_lemma(theory, lemma, bounds, workers)
    elapsed = time.perf_counter() - started
    graph_path = None
    if graph_dir is not None and verdict.trace is not None:
        graph_dir.mkdir(parents=True, exist_ok=True)
        graph_path = graph_dir / f"{lemma.name}.dot"
        graph = build_graph(verdict.trace, verdict.highlight())
        graph_path.write_text(emit_dot(graph, name=f"{theory.name}_{lemma.name}"), encoding="utf-8")
        logger.info("wrote %s", graph_path)
    return LemmaResult(lemma, verdict, elapsed, graph_path)


def _emit(report: RunReport, output_format: str) -> int:
    if output_format == "json":
        click.echo(report.to_json())
    else:
        report.render(Console(soft_wrap=True))
    return report.exit_code
