r"""Lexer and parser for the grid-model surface syntax.

A model file is a sequence of `;`-terminated declarations, in this order:

    model NAME ;
    grid R , C ;
    nse { L } PATTERN [ RATE ] OPENTERM ;
    se < COORDS >? { LS } PATTERN [ RATE ] ( { LS' } )? OPENTERM ;
    sme < COORDS >? [ DIRS ] { L1 } P1 { L2 } P2 [ RATE ]
        ( { L1' } )? O1 ( { L2' } | _ ) O2 ;
    cell < COORDS > { LS } TERM ;
    monitor NAME ( < COORDS > )? ( { LS } )? PATTERN ;

Terms, patterns and open terms share one syntax: atoms are identifiers,
`n t` repeats t n times, `\e` is the empty multiset, `r,c` is a grid
coordinate, and compartments are `({label} wrap | content)`.  Variables
are written `$name`: a lowercase initial means a wrap variable, an
uppercase initial a content variable.  Rule patterns are written without
the implicit remainder variable; the compiler adds it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from .matching import (
    CompartmentPattern,
    ContentVar,
    OpenCompartment,
    OpenTerm,
    Pattern,
    WrapVar,
)
from .terms import Atom, Compartment, Coordinate, Term


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int  # 1-based
    col: int  # 1-based
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.diagnostic = Diagnostic(message, line, col)


# --- coordinate set expressions ---


@dataclass(frozen=True)
class Singleton:
    row: int
    col: int


@dataclass(frozen=True)
class Rect:
    r1: int
    c1: int
    r2: int
    c2: int


@dataclass(frozen=True)
class Row:
    i: int


@dataclass(frozen=True)
class Col:
    j: int


@dataclass(frozen=True)
class WholeGrid:
    pass


CoordPart = Union[Singleton, Rect, Row, Col, WholeGrid]
CoordSet = Tuple[CoordPart, ...]  # union of its parts


# --- declarations ---


@dataclass(frozen=True)
class NseDecl:
    label: str
    pattern: Pattern
    rate: float
    result: OpenTerm
    line: int = 0


@dataclass(frozen=True)
class SeDecl:
    coords: Optional[CoordSet]  # None = whole grid
    label: str
    pattern: Pattern
    rate: float
    new_label: Optional[str]  # None = unchanged
    result: OpenTerm
    line: int = 0


@dataclass(frozen=True)
class SmeDecl:
    coords: Optional[CoordSet]
    directions: Tuple[str, ...]
    label1: str
    pattern1: Pattern
    label2: str
    pattern2: Pattern
    rate: float
    new_label1: Optional[str]
    result1: OpenTerm
    new_label2: Optional[str]
    result2: OpenTerm
    line: int = 0


RuleDecl = Union[NseDecl, SeDecl, SmeDecl]


@dataclass(frozen=True)
class CellDecl:
    coords: CoordSet
    label: str
    content: Term
    line: int = 0


@dataclass(frozen=True)
class MonitorDecl:
    name: str
    coords: Optional[CoordSet]  # None = whole-grid average
    label: Optional[str]  # None = every spatial label in the model
    pattern: Pattern
    line: int = 0


@dataclass(frozen=True)
class SurfaceModel:
    name: str
    rows: int
    cols: int
    rules: Tuple[RuleDecl, ...]
    cells: Tuple[CellDecl, ...]
    monitors: Tuple[MonitorDecl, ...]


# --- lexer ---


TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
    | (?P<int>\d+)
    | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
    | (?P<var>\$[A-Za-z][A-Za-z0-9_]*)
    | (?P<empty>\\e)
    | (?P<punct>[{}()\[\]<>|,;*+_])
    """,
    re.VERBOSE,
)

COMMENT_RE = re.compile(r"#[^\n]*")


@dataclass(frozen=True)
class Token:
    kind: str  # ws/float/int/ident/var/empty/punct/eof
    value: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    text = COMMENT_RE.sub(lambda m: " " * len(m.group()), text)
    tokens: List[Token] = []
    pos = 0
    line = 1
    col = 1
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        value = m.group()
        if kind != "ws":
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


ORTHOGONAL = ("N", "S", "E", "W")
DIAGONAL = ("NW", "NE", "SW", "SE")
ALL_DIRECTIONS = ORTHOGONAL + DIAGONAL

RESERVED_VAR_RE = re.compile(r"[xX]__\d+\Z")

_SECTION_ORDER = {"model": 0, "grid": 1, "nse": 2, "se": 2, "sme": 2, "cell": 3, "monitor": 4}
_SECTION_NAME = {0: "model", 1: "grid", 2: "rules", 3: "cells", 4: "monitors"}


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    # token helpers

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)

    def expect_punct(self, ch: str) -> Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.value != ch:
            raise self.error(f"expected {ch!r}, found {tok.value!r}" if tok.kind != "eof"
                             else f"expected {ch!r}, found end of input")
        return self.next()

    def accept_punct(self, ch: str) -> bool:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == ch:
            self.next()
            return True
        return False

    def at_punct(self, *chars: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value in chars

    def expect_ident(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(f"expected {what}, found {tok.value!r}")
        return self.next().value

    def expect_int(self, what: str = "integer") -> int:
        tok = self.peek()
        if tok.kind != "int":
            raise self.error(f"expected {what}, found {tok.value!r}")
        return int(self.next().value)

    # multiset syntax, shared by terms, patterns and open terms

    def parse_multiset(self, mode: str, stops: Tuple[str, ...]):
        """Parse a multiset until one of the stop punctuation tokens.

        mode is 'ground', 'pattern' or 'open'; returns a list of
        (item, count) pairs, where items depend on the mode.
        """
        tok = self.peek()
        if tok.kind == "empty":
            self.next()
            after = self.peek()
            if not (after.kind == "punct" and after.value in stops) and after.kind != "eof":
                raise self.error(r"\e must stand alone in a multiset", after)
            return []
        pairs = []
        while True:
            tok = self.peek()
            if tok.kind == "eof" or (tok.kind == "punct" and tok.value in stops):
                if not pairs:
                    raise self.error(r"expected a term (use \e for the empty multiset)", tok)
                return pairs
            pairs.append(self.parse_item(mode))

    def parse_item(self, mode: str):
        tok = self.peek()
        if tok.kind == "int":
            # `r , c` is a coordinate; `n simple` is a repetition count
            if self.peek(1).kind == "punct" and self.peek(1).value == "," and self.peek(2).kind == "int":
                return (self.parse_coordinate(), 1)
            n = int(self.next().value)
            if n < 1:
                raise self.error("repetition count must be >= 1", tok)
            return (self.parse_simple(mode), n)
        return (self.parse_simple(mode), 1)

    def parse_coordinate(self) -> Coordinate:
        tok = self.peek()
        row = self.expect_int("coordinate row")
        self.expect_punct(",")
        col = self.expect_int("coordinate column")
        if row < 1 or col < 1:
            raise self.error("coordinates are 1-based", tok)
        return Coordinate(row, col)

    def parse_simple(self, mode: str):
        in_wrap = mode.startswith("wrap-")
        base = mode[5:] if in_wrap else mode
        tok = self.peek()
        if tok.kind == "ident":
            return Atom(self.next().value)
        if tok.kind == "int":
            if self.peek(1).kind == "punct" and self.peek(1).value == ",":
                return self.parse_coordinate()
            raise self.error("a bare number must be followed by a term", tok)
        if tok.kind == "var":
            name = tok.value[1:]
            if base == "ground":
                raise self.error(f"variable ${name} not allowed in a ground term", tok)
            if RESERVED_VAR_RE.match(name):
                raise self.error(f"variable name ${name} is reserved", tok)
            if in_wrap:
                if not name[0].islower():
                    raise self.error(f"content variable ${name} cannot occur in a wrap", tok)
                self.next()
                return WrapVar(name)
            if name[0].islower():
                raise self.error(f"wrap variable ${name} cannot occur outside a wrap", tok)
            self.next()
            return ContentVar(name)
        if tok.kind == "punct" and tok.value == "(":
            if in_wrap:
                raise self.error("a wrap may contain only atoms and coordinates", tok)
            return self.parse_compartment(base)
        raise self.error(f"unexpected token {tok.value!r} in a term", tok)

    def parse_compartment(self, mode: str):
        open_tok = self.expect_punct("(")
        self.expect_punct("{")
        label = self.expect_ident("compartment label")
        self.expect_punct("}")
        wrap_pairs = self.parse_multiset("wrap-" + mode, ("|",))
        self.expect_punct("|")
        content_pairs = self.parse_multiset(mode, (")",))
        self.expect_punct(")")
        if mode == "ground":
            return Compartment(label, Term(wrap_pairs), Term(content_pairs))
        if mode == "open":
            return OpenCompartment(label, tuple(wrap_pairs), OpenTerm(content_pairs))
        # pattern mode: exactly one wrap variable and one content variable
        wrap_atoms = []
        wrap_vars = []
        for item, n in wrap_pairs:
            if isinstance(item, WrapVar):
                wrap_vars.extend([item.name] * n)
            else:
                wrap_atoms.append((item, n))
        if len(wrap_vars) != 1:
            raise self.error(
                f"a compartment pattern wrap needs exactly one wrap variable, found {len(wrap_vars)}",
                open_tok,
            )
        content_items = []
        content_vars = []
        for item, n in content_pairs:
            if isinstance(item, ContentVar):
                content_vars.extend([item.name] * n)
            else:
                content_items.append((item, n))
        if len(content_vars) != 1:
            raise self.error(
                "a compartment pattern content needs exactly one content variable, "
                f"found {len(content_vars)}",
                open_tok,
            )
        return CompartmentPattern(
            label, Term(wrap_atoms), wrap_vars[0], Pattern(content_items), content_vars[0]
        )

    def parse_multiset_mode(self, mode: str, stops: Tuple[str, ...]):
        start = self.peek()
        pairs = self.parse_multiset(mode, stops)
        if mode == "ground":
            return Term(pairs)
        if mode == "open":
            return OpenTerm(pairs)
        for item, _n in pairs:
            if isinstance(item, ContentVar):
                raise self.error(
                    f"content variable ${item.name} may only occur inside a "
                    "compartment pattern (the remainder variable is implicit)",
                    start,
                )
        return Pattern(pairs)

    # coordinate set expressions

    def parse_coord_set(self) -> CoordSet:
        parts: List[CoordPart] = []
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "*":
                self.next()
                parts.append(WholeGrid())
            elif tok.kind == "int":
                c = self.parse_coordinate()
                parts.append(Singleton(c.row, c.col))
            elif tok.kind == "ident" and tok.value in ("rect", "row", "col"):
                self.next()
                self.expect_punct("[")
                if tok.value == "rect":
                    a = self.parse_coordinate()
                    b = self.parse_coordinate()
                    parts.append(Rect(a.row, a.col, b.row, b.col))
                elif tok.value == "row":
                    parts.append(Row(self.expect_int("row index")))
                else:
                    parts.append(Col(self.expect_int("column index")))
                self.expect_punct("]")
            else:
                break
        if not parts:
            raise self.error("expected a coordinate set")
        return tuple(parts)

    def parse_coords_opt(self) -> Optional[CoordSet]:
        if self.accept_punct("<"):
            coords = self.parse_coord_set()
            self.expect_punct(">")
            return coords
        return None

    def parse_directions(self) -> Tuple[str, ...]:
        self.expect_punct("[")
        dirs: List[str] = []
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "*":
                self.next()
                dirs.extend(ALL_DIRECTIONS)
            elif tok.kind == "punct" and tok.value == "+":
                self.next()
                dirs.extend(ORTHOGONAL)
            elif tok.kind == "ident" and tok.value == "x":
                self.next()
                dirs.extend(DIAGONAL)
            elif tok.kind == "ident" and tok.value in ALL_DIRECTIONS:
                self.next()
                dirs.append(tok.value)
            else:
                raise self.error(f"expected a direction, found {tok.value!r}", tok)
            if self.accept_punct(","):
                continue
            if self.at_punct("]"):
                break
        self.expect_punct("]")
        seen = set()
        unique = []
        for d in dirs:
            if d not in seen:
                seen.add(d)
                unique.append(d)
        return tuple(unique)

    def parse_rate(self) -> float:
        self.expect_punct("[")
        tok = self.peek()
        if tok.kind not in ("int", "float"):
            raise self.error(f"expected a rate constant, found {tok.value!r}", tok)
        self.next()
        self.expect_punct("]")
        return float(tok.value)

    def parse_braced_label(self) -> str:
        self.expect_punct("{")
        label = self.expect_ident("label")
        self.expect_punct("}")
        return label

    # declarations

    def parse_model(self) -> SurfaceModel:
        name: Optional[str] = None
        rows = cols = 0
        rules: List[RuleDecl] = []
        cells: List[CellDecl] = []
        monitors: List[MonitorDecl] = []
        stage = -1
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.kind != "ident" or tok.value not in _SECTION_ORDER:
                raise self.error(f"expected a declaration keyword, found {tok.value!r}", tok)
            decl_stage = _SECTION_ORDER[tok.value]
            if decl_stage < stage:
                raise self.error(
                    f"{tok.value!r} declaration out of order: {_SECTION_NAME[decl_stage]} "
                    f"must come before {_SECTION_NAME[stage]}",
                    tok,
                )
            if decl_stage == 0 and name is not None:
                raise self.error("duplicate model declaration", tok)
            if decl_stage == 1 and rows:
                raise self.error("duplicate grid declaration", tok)
            stage = decl_stage
            self.next()
            if tok.value == "model":
                name = self.expect_ident("model name")
            elif tok.value == "grid":
                rows = self.expect_int("grid rows")
                self.expect_punct(",")
                cols = self.expect_int("grid columns")
                if rows < 1 or cols < 1:
                    raise self.error("grid dimensions must be >= 1", tok)
            elif tok.value == "nse":
                rules.append(self.parse_nse(tok.line))
            elif tok.value == "se":
                rules.append(self.parse_se(tok.line))
            elif tok.value == "sme":
                rules.append(self.parse_sme(tok.line))
            elif tok.value == "cell":
                cells.append(self.parse_cell(tok.line))
            elif tok.value == "monitor":
                monitors.append(self.parse_monitor(tok.line))
            self.expect_punct(";")
        if name is None:
            raise self.error("missing model declaration")
        if not rows:
            raise self.error("missing grid declaration")
        return SurfaceModel(
            name, rows, cols, tuple(rules), tuple(cells), tuple(monitors)
        )

    def parse_nse(self, line: int) -> NseDecl:
        label = self.parse_braced_label()
        pattern = self.parse_multiset_mode("pattern", ("[",))
        rate = self.parse_rate()
        result = self.parse_multiset_mode("open", (";",))
        return NseDecl(label, pattern, rate, result, line)

    def parse_se(self, line: int) -> SeDecl:
        coords = self.parse_coords_opt()
        label = self.parse_braced_label()
        pattern = self.parse_multiset_mode("pattern", ("[",))
        rate = self.parse_rate()
        new_label = None
        if self.at_punct("{"):
            new_label = self.parse_braced_label()
        result = self.parse_multiset_mode("open", (";",))
        return SeDecl(coords, label, pattern, rate, new_label, result, line)

    def parse_sme(self, line: int) -> SmeDecl:
        coords = self.parse_coords_opt()
        directions = self.parse_directions()
        label1 = self.parse_braced_label()
        pattern1 = self.parse_multiset_mode("pattern", ("{",))
        label2 = self.parse_braced_label()
        pattern2 = self.parse_multiset_mode("pattern", ("[",))
        rate = self.parse_rate()
        new_label1 = None
        if self.at_punct("{"):
            new_label1 = self.parse_braced_label()
        result1 = self.parse_multiset_mode("open", ("{", "_"))
        if self.accept_punct("_"):
            new_label2 = None
        else:
            new_label2 = self.parse_braced_label()
        result2 = self.parse_multiset_mode("open", (";",))
        return SmeDecl(
            coords, directions, label1, pattern1, label2, pattern2,
            rate, new_label1, result1, new_label2, result2, line,
        )

    def parse_cell(self, line: int) -> CellDecl:
        self.expect_punct("<")
        coords = self.parse_coord_set()
        self.expect_punct(">")
        label = self.parse_braced_label()
        content = self.parse_multiset_mode("ground", (";",))
        return CellDecl(coords, label, content, line)

    def parse_monitor(self, line: int) -> MonitorDecl:
        name = self.expect_ident("monitor name")
        coords = self.parse_coords_opt()
        label = None
        if self.at_punct("{"):
            label = self.parse_braced_label()
        pattern = self.parse_multiset_mode("pattern", (";",))
        return MonitorDecl(name, coords, label, pattern, line)


def parse_model(text: str):
    """Parse a full surface model.

    Returns (model, diagnostics); on error the model is None and the
    diagnostics carry 1-based line/column positions.
    """
    try:
        model = _Parser(tokenize(text)).parse_model()
        return model, []
    except ParseError as exc:
        return None, [exc.diagnostic]


def parse_term_text(text: str, mode: str = "ground"):
    """Parse a standalone term (mode 'ground'), pattern ('pattern') or open
    term ('open') and check variable constraints for the mode."""
    if mode not in ("ground", "pattern", "open"):
        raise ValueError(f"unknown parse mode {mode!r}")
    parser = _Parser(tokenize(text))
    value = parser.parse_multiset_mode(mode, ())
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.value!r}", tok.line, tok.col)
    if mode == "pattern":
        from .matching import validate_pattern

        validate_pattern(value)
    return value


def parse_coord_expr(text: str) -> CoordSet:
    """Parse a standalone coordinate set expression (no grid-bound checks)."""
    parser = _Parser(tokenize(text))
    coords = parser.parse_coord_set()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.value!r}", tok.line, tok.col)
    return coords
