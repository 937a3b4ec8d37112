from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from msrprove.errors import StructuralError
from msrprove.terms.substitution import match_syntactic
from msrprove.terms.term import (
    Application,
    Position,
    Term,
    Variable,
    is_ground,
    replace_at,
    subterm_at,
    subterms,
    variables,
)

RESERVED_NAMES = frozenset({"Fr", "In", "Out", "K"})


@dataclass(frozen=True)
class FunctionSignature:
    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class RewriteEquation:
    """An oriented equation ``lhs -> rhs``."""

    lhs: Term
    rhs: Term

    @property
    def head(self) -> str:
        if not isinstance(self.lhs, Application):
            raise ValueError(f"equation {self} has no function symbol on its left-hand side")
        return self.lhs.symbol

    def shape_problem(self) -> Optional[str]:
        """Return why the equation is not subterm-convergent, or None."""
        if not isinstance(self.lhs, Application):
            return "left-hand side must be a function application"
        lhs_vars = set(variables(self.lhs))
        if not set(variables(self.rhs)) <= lhs_vars:
            return "right-hand side uses variables that do not occur on the left"
        if isinstance(self.rhs, Variable) or is_ground(self.rhs):
            return None
        return "right-hand side must be a variable of the left-hand side or a ground term"

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


def _v(name: str) -> Variable:
    return Variable(name)


def _app(symbol: str, *args: Term) -> Application:
    return Application(symbol, tuple(args))


BUILTIN_SIGNATURES: Tuple[FunctionSignature, ...] = (
    FunctionSignature("pair", 2),
    FunctionSignature("fst", 1),
    FunctionSignature("snd", 1),
    FunctionSignature("enc", 2),
    FunctionSignature("dec", 2),
    FunctionSignature("aenc", 2),
    FunctionSignature("adec", 2),
    FunctionSignature("pk", 1),
    FunctionSignature("sign", 2),
    FunctionSignature("verify", 3),
    FunctionSignature("getmsg", 1),
    FunctionSignature("true", 0),
    FunctionSignature("mac", 2),
    FunctionSignature("hash", 1),
)

_x, _y, _m, _k = _v("x"), _v("y"), _v("m"), _v("k")

BUILTIN_EQUATIONS: Tuple[RewriteEquation, ...] = (
    RewriteEquation(_app("fst", _app("pair", _x, _y)), _x),
    RewriteEquation(_app("snd", _app("pair", _x, _y)), _y),
    RewriteEquation(_app("dec", _app("enc", _m, _k), _k), _m),
    RewriteEquation(_app("adec", _app("aenc", _m, _app("pk", _k)), _k), _m),
    RewriteEquation(_app("verify", _app("sign", _m, _k), _m, _app("pk", _k)), _app("true")),
    RewriteEquation(_app("getmsg", _app("sign", _m, _k)), _m),
)


class Signature:
    """Function symbols in scope: the built-ins plus a theory's declarations."""

    def __init__(self, declared: Iterable[FunctionSignature] = (), equations: Iterable[RewriteEquation] = ()) -> None:
        self._arity: Dict[str, int] = {sig.name: sig.arity for sig in BUILTIN_SIGNATURES}
        for sig in declared:
            self._arity[sig.name] = sig.arity
        self._destructors = frozenset(eq.head for eq in (*BUILTIN_EQUATIONS, *equations))

    def __contains__(self, name: object) -> bool:
        return name in self._arity

    def arity(self, name: str) -> Optional[int]:
        return self._arity.get(name)

    def is_constructor(self, name: str) -> bool:
        return name in self._arity and name not in self._destructors

    @property
    def functions(self) -> Tuple[FunctionSignature, ...]:
        """Every public function symbol, destructors included."""
        return tuple(FunctionSignature(n, a) for n, a in sorted(self._arity.items()))

    @property
    def constructors(self) -> Tuple[FunctionSignature, ...]:
        return tuple(FunctionSignature(n, a) for n, a in sorted(self._arity.items()) if n not in self._destructors)

    @property
    def destructors(self) -> frozenset:
        return self._destructors

    def check(self, term: Term) -> None:
        for sub in subterms(term):
            if isinstance(sub, Application):
                self.check_symbol(sub)

    def check_symbol(self, term: Application) -> None:
        arity = self._arity.get(term.symbol)
        if arity is None:
            raise StructuralError(f"undeclared function symbol '{term.symbol}'", term.symbol)
        if arity != len(term.args):
            raise StructuralError(
                f"function '{term.symbol}' expects {arity} argument(s), got {len(term.args)}",
                term.symbol,
            )


class Rewriter:
    """Innermost normalization modulo a subterm-convergent rewrite system."""

    _CACHE_LIMIT = 200_000

    def __init__(
        self,
        equations: Iterable[RewriteEquation] = BUILTIN_EQUATIONS,
        signature: Optional[Signature] = None,
    ) -> None:
        self.equations: Tuple[RewriteEquation, ...] = tuple(equations)
        self.signature = signature if signature is not None else Signature(equations=self.equations)
        self._by_head: Dict[str, List[RewriteEquation]] = {}
        for eq in self.equations:
            self._by_head.setdefault(eq.head, []).append(eq)
        self._cache: Dict[Term, Term] = {}

    # ---- API
    def normalize(self, term: Term) -> Term:
        if not isinstance(term, Application):
            return term
        cached = self._cache.get(term)
        if cached is not None:
            return cached
        self.signature.check_symbol(term)
        args = tuple(self.normalize(a) for a in term.args)
        current = term if args == term.args else Application(term.symbol, args)
        result = current
        for eq in self._by_head.get(term.symbol, ()):
            subst = match_syntactic(eq.lhs, current)
            if subst is not None:
                result = self.normalize(subst.instantiate(eq.rhs))
                break
        if len(self._cache) >= self._CACHE_LIMIT:
            self._cache.clear()
        self._cache[term] = result
        return result

    def is_normal(self, term: Term) -> bool:
        return not self.redexes(term)

    def redexes(self, term: Term) -> List[Position]:
        """Positions of every subterm an equation's left-hand side matches."""
        found: List[Position] = []
        self._collect_redexes(term, (), found)
        return found

    def rewrite_at(self, term: Term, position: Position) -> Term:
        """Apply one rewrite step at ``position`` without further normalization."""
        target = subterm_at(term, position)
        if isinstance(target, Application):
            for eq in self._by_head.get(target.symbol, ()):
                subst = match_syntactic(eq.lhs, target)
                if subst is not None:
                    return replace_at(term, position, subst.instantiate(eq.rhs))
        raise ValueError(f"no redex at position {position} of {term}")

    # ---- Helpers
    def _collect_redexes(self, term: Term, position: Position, found: List[Position]) -> None:
        if not isinstance(term, Application):
            return
        for eq in self._by_head.get(term.symbol, ()):
            if match_syntactic(eq.lhs, term) is not None:
                found.append(position)
                break
        for index, arg in enumerate(term.args):
            self._collect_redexes(arg, position + (index,), found)


BUILTIN_REWRITER = Rewriter()
