"""Command-line driver: ``msrprove prove|check|corpus``."""

from msrprove.cli.main import cli, main, run
from msrprove.cli.report import EXIT_FAILED, EXIT_OK, EXIT_USAGE, LemmaResult, RunReport

__all__ = ["EXIT_FAILED", "EXIT_OK", "EXIT_USAGE", "LemmaResult", "RunReport", "cli", "main", "run"]
