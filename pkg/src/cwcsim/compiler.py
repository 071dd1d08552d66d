"""Lowering of surface models to ground rule sets over an explicit grid.

Coordinate set expressions are evaluated to explicit cell sets, direction
shifts are clipped at the grid edges, and each surface event expands into
one ground rule per (coordinate, direction) instance.  Expansion order is
deterministic: declarations in file order, coordinates row-major, and
directions in the fixed order N, S, E, W, NW, NE, SW, SE.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .matching import (
    CompartmentPattern,
    ContentVar,
    OpenCompartment,
    OpenTerm,
    Pattern,
    RewriteRule,
    WrapVar,
    render_open,
    render_pattern,
)
from .monitors import Monitor
from .surface import (
    CellDecl,
    Col,
    CoordSet,
    Diagnostic,
    MonitorDecl,
    NseDecl,
    Rect,
    Row,
    SeDecl,
    Singleton,
    SmeDecl,
    SurfaceModel,
    WholeGrid,
)
from .terms import TOP_LABEL, Compartment, Coordinate, Term, render_simple, render_term

GROUND_FORMAT_VERSION = "cwc-ground v1"

#: Fixed expansion order for direction sets.
DIRECTION_ORDER: Tuple[str, ...] = ("N", "S", "E", "W", "NW", "NE", "SW", "SE")

_DIRECTION_DELTA = {
    "N": (-1, 0),
    "S": (1, 0),
    "E": (0, 1),
    "W": (0, -1),
    "NW": (-1, -1),
    "NE": (-1, 1),
    "SW": (1, -1),
    "SE": (1, 1),
}


class CompileError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class CompiledModel:
    name: str
    dims: Tuple[int, int]  # (rows, columns)
    initial: Compartment  # root: top label, empty wrap, one spatial compartment per cell
    rules: Tuple[RewriteRule, ...]
    rule_origins: Tuple[int, ...]  # index of the surface declaration each rule came from
    monitors: Tuple[Monitor, ...]
    spatial_labels: Tuple[str, ...]


def shift(c: Coordinate, direction: str, dims: Tuple[int, int]) -> Optional[Coordinate]:
    """Neighbouring coordinate in the given direction, or None off the grid."""
    dr, dc = _DIRECTION_DELTA[direction]
    row, col = c.row + dr, c.col + dc
    if 1 <= row <= dims[0] and 1 <= col <= dims[1]:
        return Coordinate(row, col)
    return None


def eval_coords(coords: Optional[CoordSet], dims: Tuple[int, int]) -> List[Coordinate]:
    """Explicit deduplicated coordinate list in row-major order.

    None (an omitted set) means the whole grid.  Raises CompileError on
    out-of-bounds or malformed parts.
    """
    rows, cols = dims
    if coords is None:
        coords = (WholeGrid(),)
    seen: Set[Tuple[int, int]] = set()
    problems: List[str] = []

    def add_rect(r1, c1, r2, c2, what):
        if r1 > r2 or c1 > c2:
            problems.append(f"{what}: empty rectangle [{r1},{c1} {r2},{c2}]")
            return
        if r1 < 1 or c1 < 1 or r2 > rows or c2 > cols:
            problems.append(
                f"{what}: outside the {rows}x{cols} grid: [{r1},{c1} {r2},{c2}]"
            )
            return
        for r in range(r1, r2 + 1):
            for c in range(c1, c2 + 1):
                seen.add((r, c))

    for part in coords:
        if isinstance(part, Singleton):
            add_rect(part.row, part.col, part.row, part.col, "coordinate")
        elif isinstance(part, Rect):
            add_rect(part.r1, part.c1, part.r2, part.c2, "rect")
        elif isinstance(part, Row):
            add_rect(part.i, 1, part.i, cols, f"row[{part.i}]")
        elif isinstance(part, Col):
            add_rect(1, part.j, rows, part.j, f"col[{part.j}]")
        elif isinstance(part, WholeGrid):
            add_rect(1, 1, rows, cols, "*")
        else:
            problems.append(f"unknown coordinate expression {part!r}")
    if problems:
        raise CompileError([Diagnostic(p, 0, 0) for p in problems])
    return [Coordinate(r, c) for r, c in sorted(seen)]


def _pattern_vars(p: Pattern) -> List[str]:
    return p.variables()


def _check_term_no_coordinates(t: Term, where: str, line: int, diags: List[Diagnostic]):
    for e, _n in t.items:
        if isinstance(e, Coordinate):
            diags.append(
                Diagnostic(f"{where}: coordinates are reserved for grid cells", line, 1)
            )
        elif isinstance(e, Compartment):
            for w, _m in e.wrap.items:
                if isinstance(w, Coordinate):
                    diags.append(
                        Diagnostic(
                            f"{where}: coordinates are reserved for grid cells", line, 1
                        )
                    )
            _check_term_no_coordinates(e.content, where, line, diags)


def _check_labels(decl_labels: List[Tuple[str, int]], diags: List[Diagnostic]):
    for label, line in decl_labels:
        if label == TOP_LABEL:
            diags.append(
                Diagnostic(f"label {TOP_LABEL!r} is reserved for the system root", line, 1)
            )


def validate(model: SurfaceModel) -> List[Diagnostic]:
    """Semantic checks; an empty list means the model is compilable."""
    diags: List[Diagnostic] = []
    dims = (model.rows, model.cols)

    def check_coords(coords: Optional[CoordSet], line: int) -> None:
        try:
            eval_coords(coords, dims)
        except CompileError as exc:
            for d in exc.diagnostics:
                diags.append(Diagnostic(d.message, line, 1))

    labels: List[Tuple[str, int]] = []
    for decl in model.rules:
        if isinstance(decl, NseDecl):
            labels.append((decl.label, decl.line))
            _check_rule_vars(decl.pattern, (decl.result,), decl.line, diags)
        elif isinstance(decl, SeDecl):
            labels.append((decl.label, decl.line))
            if decl.new_label:
                labels.append((decl.new_label, decl.line))
            check_coords(decl.coords, decl.line)
            _check_rule_vars(decl.pattern, (decl.result,), decl.line, diags)
        elif isinstance(decl, SmeDecl):
            labels.append((decl.label1, decl.line))
            labels.append((decl.label2, decl.line))
            for lab in (decl.new_label1, decl.new_label2):
                if lab:
                    labels.append((lab, decl.line))
            check_coords(decl.coords, decl.line)
            _check_rule_vars(
                decl.pattern1,
                (decl.result1, decl.result2),
                decl.line,
                diags,
                extra_pattern=decl.pattern2,
            )
        if decl.rate < 0:
            diags.append(Diagnostic("rule rate must be nonnegative", decl.line, 1))

    covered: Dict[Tuple[int, int], int] = {}
    for decl in model.cells:
        labels.append((decl.label, decl.line))
        check_coords(decl.coords, decl.line)
        _check_term_no_coordinates(decl.content, "cell content", decl.line, diags)
        try:
            for c in eval_coords(decl.coords, dims):
                key = (c.row, c.col)
                if key in covered:
                    diags.append(
                        Diagnostic(
                            f"cell {c.row},{c.col} covered by more than one cell declaration",
                            decl.line,
                            1,
                        )
                    )
                covered[key] = decl.line
        except CompileError:
            pass  # bounds problem already reported
    missing = [
        (r, c)
        for r in range(1, model.rows + 1)
        for c in range(1, model.cols + 1)
        if (r, c) not in covered
    ]
    if missing:
        head = ", ".join(f"{r},{c}" for r, c in missing[:5])
        more = "" if len(missing) <= 5 else f" (and {len(missing) - 5} more)"
        diags.append(
            Diagnostic(f"grid cells not covered by any cell declaration: {head}{more}", 0, 0)
        )

    for decl in model.monitors:
        check_coords(decl.coords, decl.line)
        if decl.label:
            labels.append((decl.label, decl.line))
        if decl.pattern.variables():
            diags.append(
                Diagnostic(
                    f"monitor {decl.name!r}: pattern contains variables; matches are "
                    "counted but bindings are ignored",
                    decl.line,
                    1,
                    severity="warning",
                )
            )

    _check_labels(labels, diags)
    return diags


def _check_rule_vars(
    pattern: Pattern,
    results: Tuple[OpenTerm, ...],
    line: int,
    diags: List[Diagnostic],
    extra_pattern: Optional[Pattern] = None,
) -> None:
    pvars = list(pattern.variables())
    if extra_pattern is not None:
        pvars += extra_pattern.variables()
    dupes = {v for v in pvars if pvars.count(v) > 1}
    for v in sorted(dupes):
        diags.append(Diagnostic(f"variable ${v} occurs more than once in the pattern", line, 1))
    bound = set(pvars)
    used: Set[str] = set()
    for o in results:
        used.update(o.variables())
    for v in sorted(used - bound):
        diags.append(
            Diagnostic(f"variable ${v} used in the result but not bound by the pattern", line, 1)
        )


class _FreshVars:
    """Reserved wrap/content variable names for expansion-introduced remainders."""

    def __init__(self) -> None:
        self.n = 0

    def pair(self) -> Tuple[str, str]:
        i = self.n
        self.n += 1
        return f"x__{i}", f"X__{i}"


def _spatial_pattern(coord: Coordinate, label: str, inner: Pattern, fresh: _FreshVars):
    x, cx = fresh.pair()
    return (
        CompartmentPattern(label, Term(((coord, 1),)), x, inner, cx),
        x,
        cx,
    )


def _spatial_result(
    coord: Coordinate, label: str, inner: OpenTerm, x: str, cx: str
) -> OpenCompartment:
    wrap = ((coord, 1), (WrapVar(x), 1))
    content = OpenTerm(inner.items + ((ContentVar(cx), 1),))
    return OpenCompartment(label, wrap, content)


def compile_model(model: SurfaceModel) -> CompiledModel:
    """Lower a validated surface model to its ground form."""
    diags = [d for d in validate(model) if d.severity == "error"]
    if diags:
        raise CompileError(diags)
    dims = (model.rows, model.cols)
    fresh = _FreshVars()

    rules: List[RewriteRule] = []
    origins: List[int] = []
    for idx, decl in enumerate(model.rules):
        if isinstance(decl, NseDecl):
            rules.append(RewriteRule(decl.label, decl.pattern, decl.result, decl.rate))
            origins.append(idx)
        elif isinstance(decl, SeDecl):
            for c in eval_coords(decl.coords, dims):
                cp, x, cx = _spatial_pattern(c, decl.label, decl.pattern, fresh)
                oc = _spatial_result(c, decl.new_label or decl.label, decl.result, x, cx)
                rules.append(
                    RewriteRule(
                        TOP_LABEL,
                        Pattern(((cp, 1),)),
                        OpenTerm(((oc, 1),)),
                        decl.rate,
                    )
                )
                origins.append(idx)
        elif isinstance(decl, SmeDecl):
            for c in eval_coords(decl.coords, dims):
                for d in DIRECTION_ORDER:
                    if d not in decl.directions:
                        continue
                    c2 = shift(c, d, dims)
                    if c2 is None:
                        continue
                    cp1, x1, cx1 = _spatial_pattern(c, decl.label1, decl.pattern1, fresh)
                    cp2, x2, cx2 = _spatial_pattern(c2, decl.label2, decl.pattern2, fresh)
                    oc1 = _spatial_result(
                        c, decl.new_label1 or decl.label1, decl.result1, x1, cx1
                    )
                    oc2 = _spatial_result(
                        c2, decl.new_label2 or decl.label2, decl.result2, x2, cx2
                    )
                    rules.append(
                        RewriteRule(
                            TOP_LABEL,
                            Pattern(((cp1, 1), (cp2, 1))),
                            OpenTerm(((oc1, 1), (oc2, 1))),
                            decl.rate,
                        )
                    )
                    origins.append(idx)
        else:
            raise TypeError(f"unknown rule declaration {decl!r}")

    cell_pairs = []
    for decl in model.cells:
        for c in eval_coords(decl.coords, dims):
            comp = Compartment(decl.label, Term(((c, 1),)), decl.content)
            cell_pairs.append((comp, 1))
    initial = Compartment(TOP_LABEL, Term(), Term(cell_pairs))

    spatial_labels = tuple(sorted({decl.label for decl in model.cells}))
    monitors = expand_monitors(model.monitors, dims, spatial_labels)

    return CompiledModel(
        model.name,
        dims,
        initial,
        tuple(rules),
        tuple(origins),
        tuple(monitors),
        spatial_labels,
    )


def expand_monitors(
    decls: Sequence[MonitorDecl],
    dims: Tuple[int, int],
    spatial_labels: Sequence[str],
) -> List[Monitor]:
    """Expand monitor declarations: one monitor per coordinate for explicit
    sets (name suffixed `@r,c`), a single averaged monitor otherwise; an
    omitted label multiplies over every spatial label in the model."""
    out: List[Monitor] = []
    for decl in decls:
        labels = [decl.label] if decl.label else list(spatial_labels)
        explicit = decl.label is not None
        if decl.coords is None:
            for label in labels:
                name = decl.name if explicit else f"{decl.name}:{label}"
                out.append(Monitor(name, None, label, decl.pattern))
        else:
            for c in eval_coords(decl.coords, dims):
                for label in labels:
                    name = f"{decl.name}@{c.row},{c.col}"
                    if not explicit:
                        name = f"{name}:{label}"
                    out.append(Monitor(name, c, label, decl.pattern))
    return out


def emit_ground_model(m: CompiledModel) -> str:
    """Deterministic text listing of the initial term and every ground rule."""
    lines = [
        GROUND_FORMAT_VERSION,
        f"model {m.name}",
        f"grid {m.dims[0]} {m.dims[1]}",
        f"init {render_simple(m.initial)}",
    ]
    for rule in m.rules:
        lines.append(
            f"rule {{{rule.label}}} {render_pattern(rule.pattern)} "
            f"[{rule.rate!r}] {render_open(rule.result)}"
        )
    for mon in m.monitors:
        target = "*" if mon.coord is None else f"{mon.coord.row},{mon.coord.col}"
        lines.append(
            f"monitor {mon.name} <{target}> {{{mon.label}}} {render_pattern(mon.pattern)}"
        )
    return "\n".join(lines) + "\n"
