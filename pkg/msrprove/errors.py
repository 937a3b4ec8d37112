from __future__ import annotations

from typing import Sequence, TYPE_CHECKING

if TYPE_CHECKING:
    from msrprove.frontend.diagnostics import Diagnostic


class MsrProveError(Exception):
    """Base class for every error raised by msrprove."""


class StructuralError(MsrProveError, ValueError):
    """A term uses an undeclared function symbol or the wrong arity."""

    def __init__(self, message: str, symbol: str) -> None:
        super().__init__(message)
        self.symbol = symbol


class ContractError(MsrProveError, RuntimeError):
    """A caller broke an operation's precondition."""


class TheoryError(MsrProveError):
    """A theory could not be loaded; ``diagnostics`` holds the reasons."""

    def __init__(self, source: str, diagnostics: Sequence["Diagnostic"]) -> None:
        self.source = source
        self.diagnostics = tuple(diagnostics)
        lines = "\n".join(f"  {d}" for d in self.diagnostics)
        super().__init__(f"{source}: theory has {len(self.diagnostics)} problem(s)\n{lines}")
