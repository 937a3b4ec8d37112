from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class DiagnosticCode(str, Enum):
    LEXICAL_ERROR = "LEXICAL_ERROR"
    SYNTAX_ERROR = "SYNTAX_ERROR"
    UNSUPPORTED_DECLARATION = "UNSUPPORTED_DECLARATION"
    ARITY_MISMATCH = "ARITY_MISMATCH"
    UNDECLARED_FUNCTION = "UNDECLARED_FUNCTION"
    DUPLICATE_FUNCTION = "DUPLICATE_FUNCTION"
    RESERVED_NAME = "RESERVED_NAME"
    BAD_EQUATION = "BAD_EQUATION"
    DUPLICATE_RULE = "DUPLICATE_RULE"
    DUPLICATE_LEMMA = "DUPLICATE_LEMMA"
    FR_IN_CONCLUSION = "FR_IN_CONCLUSION"
    RESERVED_FACT_MISUSE = "RESERVED_FACT_MISUSE"
    FACT_KIND_MISMATCH = "FACT_KIND_MISMATCH"
    NEGATION_NOT_PERSISTENT = "NEGATION_NOT_PERSISTENT"
    UNBOUND_VARIABLE = "UNBOUND_VARIABLE"
    UNBOUND_FORMULA_VARIABLE = "UNBOUND_FORMULA_VARIABLE"
    UNGUARDED_FORMULA = "UNGUARDED_FORMULA"
    UNUSED_ACTION = "UNUSED_ACTION"


@dataclass(frozen=True, order=True)
class SourcePosition:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: DiagnosticCode
    message: str
    line: int
    column: int
    hint: Optional[str] = None

    @classmethod
    def error(cls, code: DiagnosticCode, message: str, at: Optional[SourcePosition], hint: Optional[str] = None) -> "Diagnostic":
        where = at or SourcePosition(1, 1)
        return cls(Severity.ERROR, code, message, where.line, where.column, hint)

    @classmethod
    def warning(cls, code: DiagnosticCode, message: str, at: Optional[SourcePosition], hint: Optional[str] = None) -> "Diagnostic":
        where = at or SourcePosition(1, 1)
        return cls(Severity.WARNING, code, message, where.line, where.column, hint)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code.value,
            "message": self.message,
            "line": self.line,
            "column": self.column,
            "hint": self.hint,
        }

    def __str__(self) -> str:
        text = f"{self.line}:{self.column}: {self.severity.value}[{self.code.value}]: {self.message}"
        return f"{text} (hint: {self.hint})" if self.hint else text


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


def sorted_diagnostics(diagnostics: Iterable[Diagnostic]) -> Tuple[Diagnostic, ...]:
    return tuple(sorted(diagnostics, key=lambda d: (d.line, d.column, d.code.value, d.message)))
