"""Nested multiset terms: atoms, coordinates and labelled compartments.

A system state is a tree of compartments whose wraps and contents are
canonical multisets, so structural equality, hashing and rendering are
order-insensitive and deterministic.  All values here are immutable and
safe to share across concurrent simulation runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Tuple

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

#: Reserved label of the single root compartment of every system.
TOP_LABEL = "top"


class TermError(ValueError):
    """Raised for structurally invalid terms."""


@dataclass(frozen=True)
class Atom:
    name: str

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.name):
            raise TermError(f"invalid atom name: {self.name!r}")

    def __repr__(self) -> str:
        return f"Atom({self.name})"


@dataclass(frozen=True)
class Coordinate:
    """Grid-cell address carried on the wrap of a spatial compartment."""

    row: int
    col: int

    def __post_init__(self) -> None:
        if self.row < 1 or self.col < 1:
            raise TermError(f"coordinate out of range: {self.row},{self.col}")

    def __repr__(self) -> str:
        return f"Coordinate({self.row},{self.col})"


class Term:
    """A canonical multiset of simple terms.

    Stored as a sorted tuple of (element, multiplicity) pairs; the sort key
    is a structural encoding, which makes rendering injective and equality,
    hashing and multiplicity queries cheap.
    """

    __slots__ = ("items", "size", "_counts", "_key", "_hash")

    def __init__(self, pairs: Iterable[Tuple[object, int]] = ()):
        counts: dict = {}
        for elem, n in pairs:
            if n < 0:
                raise TermError(f"negative multiplicity for {elem!r}")
            if n:
                counts[elem] = counts.get(elem, 0) + n
        decorated = sorted((simple_key(e), e, n) for e, n in counts.items())
        self.items: Tuple[Tuple[object, int], ...] = tuple((e, n) for _, e, n in decorated)
        self.size: int = sum(n for _, n in self.items)
        self._counts = counts
        self._key = tuple((k, n) for k, _, n in decorated)
        self._hash = hash(self._key)

    def multiplicity(self, elem) -> int:
        return self._counts.get(elem, 0)

    def is_empty(self) -> bool:
        return not self.items

    def __eq__(self, other) -> bool:
        return isinstance(other, Term) and self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __add__(self, other: "Term") -> "Term":
        return Term(self.items + other.items)

    def __sub__(self, other: "Term") -> "Term":
        pairs = list(self.items)
        for e, n in other.items:
            if self.multiplicity(e) < n:
                raise TermError(f"cannot remove {n} x {render_simple(e)}: not present")
            pairs.append((e, -n))
        counts: dict = {}
        for e, n in pairs:
            counts[e] = counts.get(e, 0) + n
        return Term((e, n) for e, n in counts.items() if n)

    def __le__(self, other: "Term") -> bool:
        """Multiset inclusion: every element of self occurs in other at least as often."""
        return all(other.multiplicity(e) >= n for e, n in self.items)

    def add_elem(self, elem, n: int = 1) -> "Term":
        return Term(self.items + ((elem, n),))

    def remove_elem(self, elem, n: int = 1) -> "Term":
        return self - Term(((elem, n),))

    def __reduce__(self):
        return (Term, (self.items,))

    def __repr__(self) -> str:
        return f"Term({render_term(self)})"


EMPTY_TERM = Term()


@dataclass(frozen=True)
class Compartment:
    """A labelled compartment with a wrap (membrane atoms) and a content term."""

    label: str
    wrap: Term
    content: Term

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.label):
            raise TermError(f"invalid compartment label: {self.label!r}")
        for e, _ in self.wrap.items:
            if isinstance(e, Compartment):
                raise TermError("a wrap may contain only atoms and coordinates")

    def coordinate(self) -> Coordinate | None:
        for e, _ in self.wrap.items:
            if isinstance(e, Coordinate):
                return e
        return None

    def __repr__(self) -> str:
        return f"Compartment({render_simple(self)})"


def simple_key(e) -> tuple:
    """Total order on simple terms used for canonical multiset storage."""
    if isinstance(e, Atom):
        return (0, e.name)
    if isinstance(e, Coordinate):
        return (1, e.row, e.col)
    if isinstance(e, Compartment):
        return (2, e.label, e.wrap._key, e.content._key)
    raise TermError(f"not a simple term: {e!r}")


def multiplicity(t: Term, s) -> int:
    """Number of occurrences of the simple term s in t."""
    return t.multiplicity(s)


def terms_equal(t1: Term, t2: Term) -> bool:
    """Multiset equality, recursively order-insensitive."""
    return t1 == t2


def render_simple(e) -> str:
    if isinstance(e, Atom):
        return e.name
    if isinstance(e, Coordinate):
        return f"{e.row},{e.col}"
    if isinstance(e, Compartment):
        return f"({{{e.label}}} {render_term(e.wrap)} | {render_term(e.content)})"
    raise TermError(f"not a simple term: {e!r}")


def render_term(t: Term) -> str:
    r"""Canonical text form: elements in canonical order, `n elem` for
    repetitions, `\e` for the empty multiset."""
    if t.is_empty():
        return r"\e"
    parts = []
    for e, n in t.items:
        s = render_simple(e)
        parts.append(f"{n} {s}" if n > 1 else s)
    return " ".join(parts)
