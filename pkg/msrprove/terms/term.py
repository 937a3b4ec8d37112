from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterator, Tuple, Union


class Sort(str, Enum):
    """Message sorts; fresh and pub are subsorts of msg."""

    MSG = "msg"
    FRESH = "fresh"
    PUB = "pub"

    def admits(self, other: "Sort") -> bool:
        return self is Sort.MSG or self is other


@dataclass(frozen=True)
class Variable:
    name: str
    sort: Sort = Sort.MSG

    def __str__(self) -> str:
        prefix = {Sort.MSG: "", Sort.FRESH: "~", Sort.PUB: "$"}[self.sort]
        return f"{prefix}{self.name}"


@dataclass(frozen=True)
class FreshName:
    """A fresh value; identity is the per-trace index, the label is for display."""

    label: str
    index: int

    def __str__(self) -> str:
        return f"{self.label}#{self.index}"


@dataclass(frozen=True)
class PublicName:
    label: str

    def __str__(self) -> str:
        return f"${self.label}"


@dataclass(frozen=True)
class StringConstant:
    label: str

    def __str__(self) -> str:
        return f"'{self.label}'"


@dataclass(frozen=True, eq=False)
class Application:
    symbol: str
    args: Tuple["Term", ...] = ()
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.symbol, self.args)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Application):
            return NotImplemented
        return self._hash == other._hash and self.symbol == other.symbol and self.args == other.args

    def __str__(self) -> str:
        if self.symbol == "pair" and len(self.args) == 2:
            return "<" + ", ".join(str(item) for item in tuple_items(self)) + ">"
        if not self.args:
            return self.symbol
        return f"{self.symbol}(" + ", ".join(str(a) for a in self.args) + ")"


Term = Union[Variable, FreshName, PublicName, StringConstant, Application]
Atom = (FreshName, PublicName, StringConstant)
Position = Tuple[int, ...]


def pair(*items: Term) -> Term:
    """Right-nested pairing: ``pair(a, b, c) == <a, <b, c>>``."""
    if len(items) < 2:
        raise ValueError("a tuple needs at least two components")
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Application("pair", (item, result))
    return result


def tuple_items(term: Term) -> Tuple[Term, ...]:
    items = []
    while isinstance(term, Application) and term.symbol == "pair" and len(term.args) == 2:
        items.append(term.args[0])
        term = term.args[1]
    items.append(term)
    return tuple(items)


def sort_of(term: Term) -> Sort:
    if isinstance(term, Variable):
        return term.sort
    if isinstance(term, FreshName):
        return Sort.FRESH
    if isinstance(term, (PublicName, StringConstant)):
        return Sort.PUB
    return Sort.MSG


def is_atom(term: Term) -> bool:
    return isinstance(term, Atom)


def variables(term: Term) -> Iterator[Variable]:
    if isinstance(term, Variable):
        yield term
    elif isinstance(term, Application):
        for arg in term.args:
            yield from variables(arg)


def is_ground(term: Term) -> bool:
    return next(variables(term), None) is None


def subterms(term: Term) -> Iterator[Term]:
    yield term
    if isinstance(term, Application):
        for arg in term.args:
            yield from subterms(arg)


def fresh_names(term: Term) -> Iterator[FreshName]:
    for sub in subterms(term):
        if isinstance(sub, FreshName):
            yield sub


def depth(term: Term) -> int:
    if isinstance(term, Application) and term.args:
        return 1 + max(depth(a) for a in term.args)
    return 0


def subterm_at(term: Term, position: Position) -> Term:
    for index in position:
        if not isinstance(term, Application):
            raise IndexError(f"no subterm at position {position}")
        term = term.args[index]
    return term


def replace_at(term: Term, position: Position, replacement: Term) -> Term:
    if not position:
        return replacement
    if not isinstance(term, Application):
        raise IndexError(f"no subterm at position {position}")
    head, rest = position[0], position[1:]
    args = list(term.args)
    args[head] = replace_at(args[head], rest, replacement)
    return Application(term.symbol, tuple(args))


@lru_cache(maxsize=1 << 16)
def term_key(term: Term) -> tuple:
    """Canonical total order used for every deterministic sort."""
    if isinstance(term, Variable):
        return (0, term.sort.value, term.name)
    if isinstance(term, FreshName):
        return (1, term.index, term.label)
    if isinstance(term, PublicName):
        return (2, term.label)
    if isinstance(term, StringConstant):
        return (3, term.label)
    return (4, term.symbol, len(term.args), tuple(term_key(a) for a in term.args))
