"""The ``.spthy`` theory language: parsing, validation and canonical printing."""

from msrprove.frontend.diagnostics import Diagnostic, DiagnosticCode, Severity, SourcePosition
from msrprove.frontend.facts import Fact, FactKind, FactSchema, construction_fact, knowledge_fact
from msrprove.frontend.parser import ParseResult, load_theory, parse_theory
from msrprove.frontend.printer import format_formula, format_lemma, pretty_print
from msrprove.frontend.theory import LetBinding, Lemma, ProtocolRule, Theory, TraceMode
from msrprove.frontend.validate import IMPLICIT_ACTIONS, validate

__all__ = [
    "Diagnostic",
    "DiagnosticCode",
    "Fact",
    "FactKind",
    "FactSchema",
    "IMPLICIT_ACTIONS",
    "Lemma",
    "LetBinding",
    "ParseResult",
    "ProtocolRule",
    "Severity",
    "SourcePosition",
    "Theory",
    "TraceMode",
    "construction_fact",
    "format_formula",
    "format_lemma",
    "knowledge_fact",
    "load_theory",
    "parse_theory",
    "pretty_print",
    "validate",
]
