from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from msrprove.errors import TheoryError
from msrprove.frontend.diagnostics import Diagnostic, DiagnosticCode, SourcePosition, has_errors, sorted_diagnostics
from msrprove.frontend.facts import Fact
from msrprove.frontend.theory import EquationSite, LetBinding, Lemma, ProtocolRule, Theory, TraceMode
from msrprove.frontend.validate import validate
from msrprove.log import get_logger
from msrprove.properties.formula import (
    ActionAtom,
    And,
    EqTerm,
    EqTime,
    Formula,
    Implies,
    Less,
    Not,
    Or,
    Quantified,
    Quantifier,
    TimeVar,
    substitute,
)
from msrprove.terms import (
    BUILTIN_SIGNATURES,
    RESERVED_NAMES,
    Application,
    FunctionSignature,
    RewriteEquation,
    Sort,
    StringConstant,
    Substitution,
    Variable,
    pair,
)

logger = get_logger(__name__)

UNNAMED_THEORY = "unnamed"

_MASKED = re.compile(r"//[^\n]*|/\*[\s\S]*?\*/|\"[^\"]*\"|'[^'\n]*'")
_HEADER = re.compile(r"\s*theory\b")
_HEADER_FULL = re.compile(r"\s*theory\s+([A-Za-z_][A-Za-z0-9_]*)\s+begin\b")
_END = re.compile(r"\bend\b")
_DECL_START = re.compile(r"\b(rule|lemma|functions|equations|builtins|restriction|axiom)\b")
_UNSUPPORTED = frozenset({"builtins", "restriction", "axiom"})


@dataclass(frozen=True)
class ParseResult:
    """Outcome of ``parse_theory``: the theory when there are no errors, plus every diagnostic."""

    theory: Optional[Theory]
    diagnostics: Tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return self.theory is not None

    @property
    def errors(self) -> Tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.is_error)

    @property
    def warnings(self) -> Tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if not d.is_error)


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark.open("spthy.lark", rel_to=__file__, parser="lalr", start=["decl", "formula"], maybe_placeholders=False)


def _pos(token: Token) -> SourcePosition:
    return SourcePosition(token.line or 1, token.column or 1)


# ---- Parse-tree transformers


@dataclass(frozen=True)
class _FunctionsDecl:
    signatures: Tuple[Tuple[FunctionSignature, SourcePosition], ...]


@dataclass(frozen=True)
class _EquationsDecl:
    equations: Tuple[Tuple[RewriteEquation, EquationSite], ...]


@dataclass(frozen=True)
class _LemmaDecl:
    name: Token
    mode: Optional[Token]
    formula: Token


class _DeclBuilder(Transformer):
    """Turns a declaration parse tree into theory objects, recording variable and
    function positions per fact so that validation can point at them."""

    def __init__(self) -> None:
        super().__init__()
        self._var_sites: List[Tuple[Variable, SourcePosition]] = []
        self._app_sites: List[Tuple[str, int, SourcePosition]] = []

    def _take_sites(self) -> Tuple[tuple, tuple]:
        sites = tuple(self._var_sites), tuple(self._app_sites)
        self._var_sites.clear()
        self._app_sites.clear()
        return sites

    # ---- terms
    def _variable(self, token: Token, sort: Sort) -> Variable:
        var = Variable(str(token), sort)
        self._var_sites.append((var, _pos(token)))
        return var

    def msg_var(self, children):
        return self._variable(children[0], Sort.MSG)

    def fresh_var(self, children):
        return self._variable(children[0], Sort.FRESH)

    def pub_var(self, children):
        return self._variable(children[0], Sort.PUB)

    def string_const(self, children):
        return StringConstant(str(children[0])[1:-1])

    def app(self, children):
        name, args = children[0], tuple(children[1:])
        self._app_sites.append((str(name), len(args), _pos(name)))
        return Application(str(name), args)

    def tuple_term(self, children):
        return pair(*children)

    # ---- facts and rules
    def plain_fact(self, children):
        persistent = isinstance(children[0], Token) and children[0].type == "BANG"
        name = children[1] if persistent else children[0]
        args = tuple(children[2:] if persistent else children[1:])
        var_sites, app_sites = self._take_sites()
        return Fact(str(name), args, persistent=persistent, position=_pos(name), var_sites=var_sites, app_sites=app_sites)

    bare_fact = plain_fact

    def negated_fact(self, children):
        return replace(children[0], negated=True, persistent=True)

    def let_binding(self, children):
        var, term = children
        var_sites, app_sites = self._take_sites()
        position = var_sites[0][1] if var_sites else None
        return LetBinding(var, term, position=position, var_sites=var_sites[1:], app_sites=app_sites)

    def let_block(self, children):
        return ("lets", tuple(children))

    def factlist(self, children):
        return ("facts", tuple(children))

    def silent_arrow(self, children):
        return ("arrow", ())

    def action_arrow(self, children):
        return ("arrow", tuple(children))

    def rule_decl(self, children):
        name, *parts = children
        conclusions = parts[-1][1]
        lets: List[LetBinding] = []
        premises: List[Fact] = []
        actions: Tuple[Fact, ...] = ()
        for tag, items in parts[:-1]:
            if tag == "lets":
                lets.extend(items)
            elif tag == "facts":
                premises.extend(items)
            else:
                actions = items
        return ProtocolRule(str(name), tuple(premises), actions, conclusions, tuple(lets), position=_pos(name))

    # ---- declarations
    def funsig(self, children):
        name, arity = children
        return FunctionSignature(str(name), int(arity)), _pos(name)

    def functions_decl(self, children):
        return _FunctionsDecl(tuple(children))

    def equation(self, children):
        lhs, rhs = children
        var_sites, app_sites = self._take_sites()
        positions = [site[-1] for site in (*var_sites, *app_sites)]
        return RewriteEquation(lhs, rhs), EquationSite(min(positions) if positions else None, app_sites)

    def equations_decl(self, children):
        return _EquationsDecl(tuple(children))

    def lemma_decl(self, children):
        name, *rest = children
        mode = rest[0] if len(rest) == 2 else None
        return _LemmaDecl(name, mode, rest[-1])

    def decl(self, children):
        return children[0]


class _FormulaBuilder(_DeclBuilder):
    def quantified(self, children):
        quantifier, *bound, body = children
        return Quantified(Quantifier(str(quantifier)), tuple(bound), body, position=_pos(quantifier))

    def time_qvar(self, children):
        return TimeVar(str(children[0]))

    def msg_qvar(self, children):
        return Variable(str(children[0]), Sort.MSG)

    def fresh_qvar(self, children):
        return Variable(str(children[0]), Sort.FRESH)

    def pub_qvar(self, children):
        return Variable(str(children[0]), Sort.PUB)

    def implies(self, children):
        return Implies(children[0], children[1])

    def disj(self, children):
        return Or(tuple(p for child in children for p in (child.parts if isinstance(child, Or) else (child,))))

    def conj(self, children):
        return And(tuple(p for child in children for p in (child.parts if isinstance(child, And) else (child,))))

    def negation(self, children):
        return Not(children[0])

    def action(self, children):
        name, *args, time = children
        var_sites, app_sites = self._take_sites()
        fact = Fact(str(name), tuple(args), position=_pos(name), var_sites=var_sites, app_sites=app_sites)
        return ActionAtom(fact, TimeVar(str(time)))

    def less(self, children):
        return Less(TimeVar(str(children[0])), TimeVar(str(children[1])))

    def greater(self, children):
        return Less(TimeVar(str(children[1])), TimeVar(str(children[0])))

    def eq_time(self, children):
        return EqTime(TimeVar(str(children[0])), TimeVar(str(children[1])))

    def eq_term(self, children):
        self._take_sites()
        return EqTerm(children[0], children[1])


# ---- Source segmentation


def _mask(text: str) -> str:
    """Blank out comments and quoted literals, keeping offsets and newlines."""
    return _MASKED.sub(lambda m: re.sub(r"[^\n]", " ", m.group(0)), text)


def _position(text: str, offset: int) -> SourcePosition:
    line = text.count("\n", 0, offset) + 1
    return SourcePosition(line, offset - text.rfind("\n", 0, offset))


def _padding(where: SourcePosition) -> str:
    """Whitespace that shifts a fragment so that parser positions match the source."""
    return "\n" * (where.line - 1) + " " * (where.column - 1)


def _syntax_diagnostic(exc: UnexpectedInput, fallback: SourcePosition) -> Diagnostic:
    if isinstance(exc, UnexpectedCharacters):
        at = SourcePosition(exc.line, exc.column)
        return Diagnostic.error(DiagnosticCode.LEXICAL_ERROR, f"unexpected character {exc.char!r}", at)
    if isinstance(exc, UnexpectedToken) and exc.token.type != "$END":
        token = exc.token
        at = SourcePosition(token.line or fallback.line, token.column or fallback.column)
        expected = ", ".join(sorted(exc.expected)[:8])
        return Diagnostic.error(DiagnosticCode.SYNTAX_ERROR, f"unexpected {str(token)!r}", at, hint=f"expected one of: {expected}")
    return Diagnostic.error(DiagnosticCode.SYNTAX_ERROR, "unexpected end of declaration", fallback)


class _TheoryReader:
    def __init__(self, text: str) -> None:
        self.text = text
        self.masked = _mask(text)
        self.diagnostics: List[Diagnostic] = []
        self.name = UNNAMED_THEORY
        self.functions: Dict[str, FunctionSignature] = {}
        self.equations: List[Tuple[RewriteEquation, EquationSite]] = []
        self.rules: Dict[str, ProtocolRule] = {}
        self.lemmas: Dict[str, Lemma] = {}

    # ---- API
    def read(self) -> Optional[Theory]:
        start, end = self._body_span()
        for chunk_start, chunk_end in self._chunks(start, end):
            self._read_chunk(chunk_start, chunk_end)
        if has_errors(self.diagnostics):
            return None
        return self._resolved_theory()

    # ---- Helpers
    def _body_span(self) -> Tuple[int, int]:
        masked = self.masked
        if not _HEADER.match(masked):
            return 0, len(masked)
        header = _HEADER_FULL.match(masked)
        if header is None:
            at = _position(self.text, len(masked) - len(masked.lstrip()))
            self.diagnostics.append(Diagnostic.error(DiagnosticCode.SYNTAX_ERROR, "expected 'theory <name> begin'", at))
            return len(masked), len(masked)
        self.name = header.group(1)
        ends = list(_END.finditer(masked, header.end()))
        if not ends:
            at = _position(self.text, len(self.text.rstrip()))
            self.diagnostics.append(Diagnostic.error(DiagnosticCode.SYNTAX_ERROR, "missing 'end' after theory body", at))
            return header.end(), len(masked)
        last = ends[-1]
        trailing = masked[last.end():]
        if trailing.strip():
            at = _position(self.text, last.end() + len(trailing) - len(trailing.lstrip()))
            self.diagnostics.append(Diagnostic.error(DiagnosticCode.SYNTAX_ERROR, "text after 'end'", at))
        return header.end(), last.start()

    def _chunks(self, start: int, end: int) -> List[Tuple[int, int]]:
        starts = [m.start() for m in _DECL_START.finditer(self.masked, start, end)]
        bounds: List[Tuple[int, int]] = []
        lead_end = starts[0] if starts else end
        if self.masked[start:lead_end].strip():
            bounds.append((start, lead_end))
        for index, chunk_start in enumerate(starts):
            chunk_end = starts[index + 1] if index + 1 < len(starts) else end
            bounds.append((chunk_start, chunk_end))
        return bounds

    def _read_chunk(self, start: int, end: int) -> None:
        offset = start + len(self.masked[start:end]) - len(self.masked[start:end].lstrip())
        keyword = _DECL_START.match(self.masked, offset)
        if keyword and keyword.group(1) in _UNSUPPORTED:
            self.diagnostics.append(
                Diagnostic.error(
                    DiagnosticCode.UNSUPPORTED_DECLARATION,
                    f"'{keyword.group(1)}' declarations are not supported",
                    _position(self.text, offset),
                )
            )
            return
        source = _padding(_position(self.text, offset)) + self.text[offset:end]
        last = offset + len(self.text[offset:end].rstrip())
        fallback = _position(self.text, max(offset, last - 1))
        try:
            tree = _parser().parse(source, start="decl")
            decl = _DeclBuilder().transform(tree)
        except UnexpectedInput as exc:
            self.diagnostics.append(_syntax_diagnostic(exc, fallback))
            return
        except VisitError as exc:
            self.diagnostics.append(Diagnostic.error(DiagnosticCode.SYNTAX_ERROR, str(exc.orig_exc), _position(self.text, offset)))
            return
        self._add(decl)

    def _add(self, decl: Union[_FunctionsDecl, _EquationsDecl, ProtocolRule, _LemmaDecl]) -> None:
        if isinstance(decl, _FunctionsDecl):
            for signature, at in decl.signatures:
                self._add_function(signature, at)
        elif isinstance(decl, _EquationsDecl):
            self.equations.extend(decl.equations)
        elif isinstance(decl, ProtocolRule):
            if decl.name in self.rules:
                self.diagnostics.append(
                    Diagnostic.error(DiagnosticCode.DUPLICATE_RULE, f"rule '{decl.name}' is defined twice", decl.position)
                )
            else:
                self.rules[decl.name] = decl
        else:
            lemma = self._lemma(decl)
            if lemma is None:
                return
            if lemma.name in self.lemmas:
                self.diagnostics.append(
                    Diagnostic.error(DiagnosticCode.DUPLICATE_LEMMA, f"lemma '{lemma.name}' is defined twice", lemma.position)
                )
            else:
                self.lemmas[lemma.name] = lemma

    def _add_function(self, signature: FunctionSignature, at: SourcePosition) -> None:
        if signature.name in RESERVED_NAMES:
            self.diagnostics.append(
                Diagnostic.error(DiagnosticCode.RESERVED_NAME, f"'{signature.name}' is a reserved fact name", at)
            )
            return
        builtin = next((b for b in BUILTIN_SIGNATURES if b.name == signature.name), None)
        if builtin is not None and builtin.arity != signature.arity:
            self.diagnostics.append(
                Diagnostic.error(
                    DiagnosticCode.ARITY_MISMATCH,
                    f"built-in function '{builtin.name}' has arity {builtin.arity}, declared as {signature.arity}",
                    at,
                )
            )
            return
        known = self.functions.get(signature.name)
        if known is not None and known.arity != signature.arity:
            self.diagnostics.append(
                Diagnostic.error(DiagnosticCode.DUPLICATE_FUNCTION, f"function '{signature.name}' is declared twice", at)
            )
            return
        self.functions.setdefault(signature.name, signature)

    def _lemma(self, decl: _LemmaDecl) -> Optional[Lemma]:
        quoted = decl.formula
        opening = SourcePosition(quoted.line or 1, (quoted.column or 1) + 1)
        source = _padding(opening) + str(quoted)[1:-1]
        try:
            formula = _FormulaBuilder().transform(_parser().parse(source, start="formula"))
        except UnexpectedInput as exc:
            self.diagnostics.append(_syntax_diagnostic(exc, SourcePosition(quoted.end_line or opening.line, max(1, (quoted.end_column or 2) - 1))))
            return None
        mode = TraceMode(str(decl.mode)) if decl.mode is not None else TraceMode.ALL_TRACES
        return Lemma(str(decl.name), formula, mode, position=_pos(decl.name))

    def _resolved_theory(self) -> Theory:
        """Identifiers naming nullary functions denote constants, not variables."""
        nullary = {s.name for s in (*BUILTIN_SIGNATURES, *self.functions.values()) if s.arity == 0}
        subst = Substitution({Variable(n): Application(n) for n in nullary})

        def rule_of(rule: ProtocolRule) -> ProtocolRule:
            return replace(
                rule,
                premises=tuple(f.substituted(subst) for f in rule.premises),
                actions=tuple(f.substituted(subst) for f in rule.actions),
                conclusions=tuple(f.substituted(subst) for f in rule.conclusions),
                lets=tuple(replace(b, term=subst.instantiate(b.term)) for b in rule.lets),
            )

        def lemma_of(lemma: Lemma) -> Lemma:
            formula: Formula = substitute(lemma.formula, subst)
            return replace(lemma, formula=formula)

        return Theory(
            name=self.name,
            functions=tuple(self.functions.values()),
            equations=tuple(
                RewriteEquation(subst.instantiate(eq.lhs), subst.instantiate(eq.rhs)) for eq, _ in self.equations
            ),
            rules=tuple(rule_of(r) for r in self.rules.values()),
            lemmas=tuple(lemma_of(lm) for lm in self.lemmas.values()),
            equation_sites=tuple(site for _, site in self.equations),
        )


# ---- API


def parse_theory(text: str) -> ParseResult:
    """Parse and validate a theory; the theory is returned only when no errors were found."""
    reader = _TheoryReader(text)
    theory = reader.read()
    diagnostics = list(reader.diagnostics)
    if theory is not None:
        diagnostics.extend(validate(theory))
        if has_errors(diagnostics):
            theory = None
    logger.debug("parsed theory %s with %d diagnostic(s)", reader.name, len(diagnostics))
    return ParseResult(theory, sorted_diagnostics(diagnostics))


def load_theory(path: Union[str, Path]) -> Theory:
    source = Path(path)
    result = parse_theory(source.read_text(encoding="utf-8"))
    if result.theory is None:
        raise TheoryError(str(source), result.errors)
    return result.theory
