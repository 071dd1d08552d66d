"""Patterns, open terms, substitutions, and match enumeration/counting.

Two views of matching are provided:

* :func:`enumerate_matches` lists every distinct occurrence selection,
  which is the reference semantics (and the quantity mass-action
  propensities are proportional to).
* :func:`match_classes` collapses selections that produce the same
  substitution and consumed multiset into weighted classes, which is what
  the simulator uses: the weights sum to the enumeration count, but the
  cost stays proportional to the number of distinct outcomes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .terms import (
    Atom,
    Compartment,
    Coordinate,
    Term,
    TermError,
    render_simple,
    render_term,
    simple_key,
)


class PatternError(ValueError):
    """Raised for patterns violating linearity or rules with unbound variables."""


class MatchError(RuntimeError):
    """Raised on internal matching inconsistencies (stale matches, unbound variables)."""


@dataclass(frozen=True)
class CompartmentPattern:
    """Matches a compartment of the same label whose wrap contains wrap_atoms.

    The wrap remainder binds to wrap_var; content must match `content`
    with the remainder bound to content_var.
    """

    label: str
    wrap_atoms: Term
    wrap_var: str
    content: "Pattern"
    content_var: str


class Pattern:
    """Canonical multiset of simple patterns (atoms, coordinates, compartment patterns)."""

    __slots__ = ("items", "atom_items", "slots", "_key", "_hash")

    def __init__(self, pairs=()):
        counts: dict = {}
        for p, n in pairs:
            if n < 0:
                raise PatternError(f"negative multiplicity in pattern for {p!r}")
            if n:
                counts[p] = counts.get(p, 0) + n
        decorated = sorted((pattern_key(p), p, n) for p, n in counts.items())
        self.items: Tuple[Tuple[object, int], ...] = tuple((p, n) for _, p, n in decorated)
        self.atom_items = tuple(
            (p, n) for p, n in self.items if not isinstance(p, CompartmentPattern)
        )
        slots: List[CompartmentPattern] = []
        for p, n in self.items:
            if isinstance(p, CompartmentPattern):
                slots.extend([p] * n)
        self.slots: Tuple[CompartmentPattern, ...] = tuple(slots)
        self._key = tuple((k, n) for k, _, n in decorated)
        self._hash = hash(self._key)

    def variables(self) -> List[str]:
        """All variable names, in order of occurrence (duplicates preserved)."""
        out: List[str] = []
        for p, n in self.items:
            if isinstance(p, CompartmentPattern):
                for _ in range(n):
                    out.append(p.wrap_var)
                    out.extend(p.content.variables())
                    out.append(p.content_var)
        return out

    def is_atom_only(self) -> bool:
        return not self.slots

    def __eq__(self, other) -> bool:
        return isinstance(other, Pattern) and self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Pattern, (self.items,))

    def __repr__(self) -> str:
        return f"Pattern({render_pattern(self)})"


EMPTY_PATTERN = Pattern()


def pattern_key(p) -> tuple:
    if isinstance(p, CompartmentPattern):
        return (
            3,
            p.label,
            p.wrap_atoms._key,
            p.content._key,
            p.wrap_var,
            p.content_var,
        )
    return simple_key(p)


# --- open terms (rule right-hand sides) ---


@dataclass(frozen=True)
class WrapVar:
    name: str


@dataclass(frozen=True)
class ContentVar:
    name: str


@dataclass(frozen=True)
class OpenCompartment:
    label: str
    wrap: Tuple[Tuple[object, int], ...]  # atoms, coordinates and wrap variables
    content: "OpenTerm"


class OpenTerm:
    """Multiset of simple open terms; kept in the order it was written."""

    __slots__ = ("items",)

    def __init__(self, pairs=()):
        self.items: Tuple[Tuple[object, int], ...] = tuple((o, n) for o, n in pairs if n)

    def variables(self) -> List[str]:
        out: List[str] = []
        for o, _ in self.items:
            if isinstance(o, ContentVar):
                out.append(o.name)
            elif isinstance(o, OpenCompartment):
                for w, _ in o.wrap:
                    if isinstance(w, WrapVar):
                        out.append(w.name)
                out.extend(o.content.variables())
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, OpenTerm) and self.items == other.items

    def __hash__(self) -> int:
        return hash(self.items)

    def __reduce__(self):
        return (OpenTerm, (self.items,))

    def __repr__(self) -> str:
        return f"OpenTerm({render_open(self)})"


EMPTY_OPEN = OpenTerm()

Substitution = Dict[str, Term]


@dataclass(frozen=True)
class RewriteRule:
    """Ground stochastic rule: within a compartment of `label`, consume a
    match of `pattern` and add the instantiated `result`; the unmatched
    remainder of the compartment content is preserved implicitly."""

    label: str
    pattern: Pattern
    result: OpenTerm
    rate: float

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise PatternError(f"negative rate {self.rate} in rule for {self.label}")
        validate_pattern(self.pattern)
        unknown = set(self.result.variables()) - set(self.pattern.variables())
        if unknown:
            raise PatternError(
                f"result uses variables not bound by the pattern: {sorted(unknown)}"
            )


def validate_pattern(p: Pattern) -> None:
    """Check linearity: every wrap/content variable name occurs exactly once."""
    names = p.variables()
    seen = set()
    for name in names:
        if name in seen:
            raise PatternError(f"variable ${name} occurs more than once in pattern")
        seen.add(name)
    _check_var_kinds(p)


def _check_var_kinds(p: Pattern) -> None:
    for sp, _ in p.items:
        if isinstance(sp, CompartmentPattern):
            if not sp.wrap_var or not sp.content_var:
                raise PatternError("compartment pattern missing wrap or content variable")
            _check_var_kinds(sp.content)


# --- rendering ---


def render_simple_pattern(p) -> str:
    if isinstance(p, CompartmentPattern):
        wrap = render_term(p.wrap_atoms)
        inner = render_pattern(p.content) if p.content.items else ""
        inner = (inner + " " if inner else "") + f"${p.content_var}"
        if p.wrap_atoms.is_empty():
            return f"({{{p.label}}} ${p.wrap_var} | {inner})"
        return f"({{{p.label}}} {wrap} ${p.wrap_var} | {inner})"
    return render_simple(p)


def render_pattern(p: Pattern) -> str:
    if not p.items:
        return r"\e"
    parts = []
    for sp, n in p.items:
        s = render_simple_pattern(sp)
        parts.append(f"{n} {s}" if n > 1 else s)
    return " ".join(parts)


def render_simple_open(o) -> str:
    if isinstance(o, ContentVar):
        return f"${o.name}"
    if isinstance(o, OpenCompartment):
        wrap_parts = []
        for w, n in o.wrap:
            s = f"${w.name}" if isinstance(w, WrapVar) else render_simple(w)
            wrap_parts.append(f"{n} {s}" if n > 1 else s)
        wrap = " ".join(wrap_parts) if wrap_parts else r"\e"
        return f"({{{o.label}}} {wrap} | {render_open(o.content)})"
    return render_simple(o)


def render_open(o: OpenTerm) -> str:
    if not o.items:
        return r"\e"
    parts = []
    for so, n in o.items:
        s = render_simple_open(so)
        parts.append(f"{n} {s}" if n > 1 else s)
    return " ".join(parts)


# --- instantiation ---


def instantiate(o: OpenTerm, subst: Substitution) -> Term:
    """Replace every variable in o by its binding, splicing multisets in place."""
    pairs: List[Tuple[object, int]] = []
    for item, n in o.items:
        if isinstance(item, ContentVar):
            binding = _lookup(subst, item.name)
            pairs.extend((e, m * n) for e, m in binding.items)
        elif isinstance(item, OpenCompartment):
            wrap_pairs: List[Tuple[object, int]] = []
            for w, m in item.wrap:
                if isinstance(w, WrapVar):
                    binding = _lookup(subst, w.name)
                    wrap_pairs.extend((e, k * m) for e, k in binding.items)
                else:
                    wrap_pairs.append((w, m))
            comp = Compartment(item.label, Term(wrap_pairs), instantiate(item.content, subst))
            pairs.append((comp, n))
        else:
            pairs.append((item, n))
    return Term(pairs)


def _lookup(subst: Substitution, name: str) -> Term:
    try:
        return subst[name]
    except KeyError:
        raise MatchError(f"unbound variable ${name} during instantiation") from None


# --- weighted match classes (simulator path) ---


@dataclass(frozen=True, eq=False)
class MatchClass:
    """A set of matches sharing substitution and consumed multiset."""

    substitution: Substitution
    consumed: Term
    remainder: Term
    weight: int


MatchCache = Dict[Tuple[Pattern, Term], Tuple[MatchClass, ...]]


def match_classes(
    pattern: Pattern, content: Term, cache: Optional[MatchCache] = None
) -> Tuple[MatchClass, ...]:
    """All match classes of pattern against content, in a deterministic order.

    The sum of class weights equals len(enumerate_matches(pattern, content)).
    """
    if cache is None:
        return _match_classes(pattern, content, None)
    key = (pattern, content)
    hit = cache.get(key)
    if hit is None:
        hit = _match_classes(pattern, content, cache)
        cache[key] = hit
    return hit


def _match_classes(pattern, content, cache):
    base_weight = 1
    for e, m in pattern.atom_items:
        n = content.multiplicity(e)
        if n < m:
            return ()
        base_weight *= math.comb(n, m)
    slots = pattern.slots
    atom_consumed = pattern.atom_items

    if not slots:
        consumed = Term(atom_consumed)
        return (MatchClass({}, consumed, content - consumed, base_weight),)

    order: List[tuple] = []  # class keys in first-seen order
    merged: Dict[tuple, List] = {}

    def emit(subst_items, weight, consumed_pairs):
        consumed = Term(atom_consumed + tuple(consumed_pairs))
        subst_key = tuple(sorted((name, t._key) for name, t in subst_items))
        key = (consumed._key, subst_key)
        slot = merged.get(key)
        if slot is None:
            merged[key] = [dict(subst_items), consumed, weight]
            order.append(key)
        else:
            slot[2] += weight

    def assign(i, used, subst_items, weight, consumed_pairs):
        if i == len(slots):
            emit(subst_items, weight, consumed_pairs)
            return
        cp = slots[i]
        for e, n in content.items:
            if not isinstance(e, Compartment) or e.label != cp.label:
                continue
            if not (cp.wrap_atoms <= e.wrap):
                continue
            avail = n - used.get(e, 0)
            if avail <= 0:
                continue
            inner = match_classes(cp.content, e.content, cache)
            if not inner:
                continue
            wrap_rem = e.wrap - cp.wrap_atoms
            used[e] = used.get(e, 0) + 1
            for mc in inner:
                items2 = (
                    subst_items
                    + [(cp.wrap_var, wrap_rem), (cp.content_var, mc.remainder)]
                    + list(mc.substitution.items())
                )
                assign(
                    i + 1,
                    used,
                    items2,
                    weight * avail * mc.weight,
                    consumed_pairs + [(e, 1)],
                )
            used[e] -= 1

    assign(0, {}, [], base_weight, [])
    out = []
    for key in order:
        subst, consumed, weight = merged[key]
        out.append(MatchClass(subst, consumed, content - consumed, weight))
    return tuple(out)


def count_matches(
    pattern: Pattern, content: Term, cache: Optional[MatchCache] = None
) -> int:
    """Number of distinct occurrence selections matching the pattern.

    For atom-only patterns this is the product of per-species binomial
    coefficients; compartment patterns are counted through their weighted
    match classes.
    """
    validate_pattern(pattern)
    return sum(mc.weight for mc in match_classes(pattern, content, cache))


# --- full enumeration (reference semantics) ---


@dataclass(frozen=True, eq=False)
class Match:
    """One occurrence selection: which occurrences instantiate each simple
    pattern, plus the induced substitution."""

    substitution: Substitution
    consumed: Term
    remainder: Term
    selection: tuple


def enumerate_matches(pattern: Pattern, content: Term) -> List[Match]:
    """All distinct matches of pattern against content, in canonical order.

    Two matches are distinct iff their occurrence selections or nested
    bindings differ.  Exponential in the multiplicities involved; intended
    for analysis and testing, not for the simulator hot path.
    """
    validate_pattern(pattern)
    return _enumerate(pattern, content)


def _enumerate(pattern: Pattern, content: Term) -> List[Match]:
    per_species: List[List[tuple]] = []
    for e, m in pattern.atom_items:
        n = content.multiplicity(e)
        if n < m:
            return []
        per_species.append([(e, combo) for combo in itertools.combinations(range(n), m)])

    slots = pattern.slots

    def slot_assignments(i, used, acc):
        if i == len(slots):
            yield tuple(acc)
            return
        cp = slots[i]
        for e, n in content.items:
            if not isinstance(e, Compartment) or e.label != cp.label:
                continue
            if not (cp.wrap_atoms <= e.wrap):
                continue
            inner = _enumerate(cp.content, e.content)
            if not inner:
                continue
            for j in range(n):
                if (e, j) in used:
                    continue
                for im_idx, im in enumerate(inner):
                    acc.append((cp, e, j, im_idx, im))
                    yield from slot_assignments(i + 1, used | {(e, j)}, acc)
                    acc.pop()

    matches: List[Match] = []
    atom_part = list(itertools.product(*per_species)) if per_species else [()]
    for atom_sel in atom_part:
        for slot_sel in slot_assignments(0, frozenset(), []):
            subst: Substitution = {}
            consumed_pairs: List[Tuple[object, int]] = [
                (e, len(idxs)) for e, idxs in atom_sel
            ]
            sel_slots = []
            for cp, e, j, im_idx, im in slot_sel:
                wrap_rem = e.wrap - cp.wrap_atoms
                subst[cp.wrap_var] = wrap_rem
                subst[cp.content_var] = im.remainder
                subst.update(im.substitution)
                consumed_pairs.append((e, 1))
                sel_slots.append((simple_key(e), j, im.selection))
            consumed = Term(consumed_pairs)
            selection = (
                tuple((simple_key(e), idxs) for e, idxs in atom_sel),
                tuple(sel_slots),
            )
            matches.append(Match(subst, consumed, content - consumed, selection))
    return matches


# --- sites and rewriting over a rooted system ---


SitePath = Tuple[Tuple[int, int], ...]  # (element index, occurrence index) per level


def iter_compartments(root: Compartment):
    """Pre-order traversal of the compartment tree, yielding (compartment, path)."""
    stack = [(root, ())]
    while stack:
        comp, path = stack.pop()
        yield comp, path
        children = []
        for i, (e, n) in enumerate(comp.content.items):
            if isinstance(e, Compartment):
                for j in range(n):
                    children.append((e, path + ((i, j),)))
        stack.extend(reversed(children))


def collect_sites(
    rules: Sequence[RewriteRule],
    root: Compartment,
    cache: Optional[MatchCache] = None,
) -> List[Tuple[int, SitePath, int]]:
    """(rule index, site path, match count) for every enabled (rule, compartment)
    pair, ordered by rule index then pre-order site position."""
    comps = list(iter_compartments(root))
    out: List[Tuple[int, SitePath, int]] = []
    for ri, rule in enumerate(rules):
        for comp, path in comps:
            if comp.label != rule.label:
                continue
            count = sum(mc.weight for mc in match_classes(rule.pattern, comp.content, cache))
            if count > 0:
                out.append((ri, path, count))
    return out


def compartment_at(root: Compartment, site: SitePath) -> Compartment:
    comp = root
    for i, _ in site:
        e, _n = comp.content.items[i]
        if not isinstance(e, Compartment):
            raise MatchError(f"site path {site} does not address a compartment")
        comp = e
    return comp


def apply_rewrite(root: Compartment, rule: RewriteRule, site: SitePath, m) -> Compartment:
    """Apply a match (a Match or MatchClass) of rule at the given site.

    Only the content multiset of the addressed compartment changes: the
    consumed occurrences are removed and the instantiated result is added.
    """

    def rebuild(comp: Compartment, path: SitePath) -> Compartment:
        if not path:
            if not (m.consumed <= comp.content):
                raise MatchError("stale match: consumed occurrences absent from site")
            new_content = (comp.content - m.consumed) + instantiate(rule.result, m.substitution)
            return Compartment(comp.label, comp.wrap, new_content)
        (i, _j), rest = path[0], path[1:]
        e, _n = comp.content.items[i]
        if not isinstance(e, Compartment):
            raise MatchError(f"site path {site} does not address a compartment")
        new_child = rebuild(e, rest)
        new_content = comp.content.remove_elem(e).add_elem(new_child)
        return Compartment(comp.label, comp.wrap, new_content)

    return rebuild(root, site)
