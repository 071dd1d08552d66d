"""Independent reference implementations used to cross-check the library.

The brute-force match counter enumerates ordered injective assignments of
pattern slots to term occurrences and divides by the symmetry of repeated
slots; it shares no code with the library's counting path.
"""

from __future__ import annotations

import itertools
import random
from math import factorial

from cwcsim.matching import CompartmentPattern, Pattern
from cwcsim.terms import Atom, Compartment, Term


def brute_count(pattern: Pattern, content: Term) -> int:
    slots = []
    denom = 1
    for p, n in pattern.items:
        slots.extend([p] * n)
        denom *= factorial(n)
    occs = []
    for e, n in content.items:
        occs.extend((e, j) for j in range(n))
    if len(slots) > len(occs):
        return 0

    def slot_occ_count(p, e) -> int:
        if isinstance(p, CompartmentPattern):
            if not isinstance(e, Compartment) or e.label != p.label:
                return 0
            if not (p.wrap_atoms <= e.wrap):
                return 0
            return brute_count(p.content, e.content)
        return 1 if p == e else 0

    total = 0
    for assignment in itertools.permutations(occs, len(slots)):
        ways = 1
        for p, (e, _j) in zip(slots, assignment):
            ways *= slot_occ_count(p, e)
            if ways == 0:
                break
        total += ways
    assert total % denom == 0
    return total // denom


# --- random (pattern, term) pair generation for the counting oracle ---

ATOMS = [Atom(n) for n in ("a", "b", "c")]
LABELS = ("l1", "l2")


def random_term(rng: random.Random, depth: int, max_elems: int = 10) -> Term:
    pairs = []
    budget = rng.randint(0, max_elems)
    used = 0
    while used < budget:
        if depth > 1 and rng.random() < 0.3:
            wrap = Term([(rng.choice(ATOMS), 1) for _ in range(rng.randint(0, 2))])
            inner = random_term(rng, depth - 1, max_elems=4)
            pairs.append((Compartment(rng.choice(LABELS), wrap, inner), 1))
            used += 1
        else:
            n = rng.randint(1, 3)
            pairs.append((rng.choice(ATOMS), min(n, budget - used)))
            used += min(n, budget - used)
    return Term(pairs)


def random_pattern(rng: random.Random, depth: int, counter, max_elems: int = 4) -> Pattern:
    pairs = []
    budget = rng.randint(0, max_elems)
    used = 0
    while used < budget:
        if depth > 1 and rng.random() < 0.35:
            wrap = Term([(rng.choice(ATOMS), 1) for _ in range(rng.randint(0, 1))])
            inner = random_pattern(rng, depth - 1, counter, max_elems=2)
            i = counter[0]
            counter[0] += 1
            pairs.append(
                (CompartmentPattern(rng.choice(LABELS), wrap, f"w{i}", inner, f"C{i}"), 1)
            )
            used += 1
        else:
            n = rng.randint(1, 2)
            pairs.append((rng.choice(ATOMS), min(n, budget - used)))
            used += min(n, budget - used)
    return Pattern(pairs)


def random_pair(rng: random.Random):
    return random_pattern(rng, 3, [0]), random_term(rng, 3)
