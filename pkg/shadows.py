#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Shadows of T-quadruples, their stabilizers and the constant C_d.

A quadruple of subsets is relabeled onto [r] (its shadow); two shadows are
equivalent when a permutation of [r] maps one onto the other. A shadow is fixed
up to equivalence by how many elements carry each membership pattern (the set
of positions l with a in F_l), so classes are enumerated as pattern counts and
gamma is the product of the factorials of those counts. ``canonical_form`` and
``stabilizer_size`` recompute both by brute force over S_r.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterator, Sequence

from errors import CapabilityError, ContractError
from hoeffding import DegenerateUStatistic, rho_squared
from moments import Quadruple, at_least_three, no_free_index_quadruples, to_mask

logger = logging.getLogger(__name__)

SHADOW_CAP = 5
PUBLISHED_CONSTANTS = {2: 13}
CONSTANT_SOURCES = ("enumerated", "published")

# bit l set means "element belongs to F_{l+1}"; free indices and empty patterns are excluded
PATTERNS = tuple(p for p in range(1, 16) if p.bit_count() >= 2)

Sets = tuple[int, int, int, int]


@dataclass(frozen=True)
class ShadowClass:
    sets: Sets
    size: int
    gamma: int

    @property
    def orbit_size(self) -> int:
        return math.factorial(self.size) // self.gamma

    def subsets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(a + 1 for a in range(self.size) if mask >> a & 1) for mask in self.sets)


@dataclass(frozen=True)
class ShadowContribution:
    shadow: ShadowClass
    total: float
    bound: float


def _pattern_key(pattern: int) -> tuple[int, ...]:
    return tuple(0 if pattern >> l & 1 else 1 for l in range(4))


def _class_from_counts(counts: dict[int, int]) -> ShadowClass:
    sets = [0, 0, 0, 0]
    element = 0
    for pattern in sorted(counts, key=_pattern_key):
        for _ in range(counts[pattern]):
            for l in range(4):
                if pattern >> l & 1:
                    sets[l] |= 1 << element
            element += 1
    gamma = math.prod(math.factorial(c) for c in counts.values())
    return ShadowClass(sets=tuple(sets), size=element, gamma=gamma)


def _count_vectors(sizes: Sequence[int]) -> Iterator[dict[int, int]]:
    chosen: dict[int, int] = {}

    def walk(index: int, remaining: tuple[int, ...]) -> Iterator[dict[int, int]]:
        if index == len(PATTERNS):
            if not any(remaining):
                yield dict(chosen)
            return
        pattern = PATTERNS[index]
        members = [l for l in range(4) if pattern >> l & 1]
        for count in range(min(remaining[l] for l in members) + 1):
            if count:
                chosen[pattern] = count
            left = tuple(x - count if pattern >> l & 1 else x for l, x in enumerate(remaining))
            yield from walk(index + 1, left)
            chosen.pop(pattern, None)

    yield from walk(0, tuple(sizes))


def _check_cap(*orders: int, cap: int) -> None:
    for order in orders:
        if order < 1:
            raise ContractError(f"Shadow orders must be >= 1, got {order}.")
        if order > cap:
            raise CapabilityError(f"Shadow enumeration is capped at order {cap}, got {order}.")


def _enumerate(sizes: Sequence[int]) -> list[ShadowClass]:
    classes = [
        _class_from_counts(counts)
        for counts in _count_vectors(sizes)
        if any(p.bit_count() >= 3 for p in counts)
    ]
    classes.sort(key=lambda c: (c.size, c.sets))
    logger.debug("shadow classes for sizes %s: %d", tuple(sizes), len(classes))
    return classes


def enumerate_shadow_classes(d: int, cap: int = SHADOW_CAP) -> list[ShadowClass]:
    """One canonical representative per class of d-shadows induced by T-quadruples."""
    _check_cap(d, cap=cap)
    classes = _enumerate((d, d, d, d))
    for shadow in classes:
        if not pairwise_intersecting(shadow.sets):
            raise RuntimeError(f"Shadow {shadow.subsets()} has disjoint sets; enumeration is broken.")
    return classes


def enumerate_mixed_shadow_classes(p: int, q: int, cap: int = SHADOW_CAP) -> list[ShadowClass]:
    """(p, q)-shadows: |F_1| = |F_3| = p and |F_2| = |F_4| = q."""
    _check_cap(p, q, cap=cap)
    return _enumerate((p, q, p, q))


def compute_Cd(d: int, cap: int = SHADOW_CAP) -> float:
    """d!(d-1)! times the sum of 1/gamma over all classes."""
    weight = sum((Fraction(1, c.gamma) for c in enumerate_shadow_classes(d, cap)), Fraction(0))
    return float(math.factorial(d) * math.factorial(d - 1) * weight)


def mixed_shadow_weight(p: int, q: int, cap: int = SHADOW_CAP) -> float:
    """Sum of 1/gamma over (p, q)-shadow classes; a diagnostic, not a bound constant."""
    return float(sum((Fraction(1, c.gamma) for c in enumerate_mixed_shadow_classes(p, q, cap)), Fraction(0)))


def shadow_constant(d: int, source: str = "enumerated") -> float:
    """C_d from the class enumeration, or the published value where one exists."""
    if source == "enumerated":
        return compute_Cd(d)
    if source == "published":
        if d not in PUBLISHED_CONSTANTS:
            raise CapabilityError(f"No published shadow constant for order {d}.")
        return float(PUBLISHED_CONSTANTS[d])
    raise ContractError(f"Unknown constant source {source!r}; expected one of {', '.join(CONSTANT_SOURCES)}.")


def kappa(d: int, source: str = "enumerated") -> float:
    return shadow_constant(d, source) + 2 * d


def pairwise_intersecting(sets: Sets) -> bool:
    return all(sets[a] & sets[b] for a in range(4) for b in range(a + 1, 4))


def relabel(sets: Sets, perm: Sequence[int]) -> Sets:
    """Image of the shadow under a -> perm[a] (0-based)."""
    out = []
    for mask in sets:
        image = 0
        for a, b in enumerate(perm):
            if mask >> a & 1:
                image |= 1 << b
        out.append(image)
    return tuple(out)


def orbit(sets: Sets, size: int) -> set[Sets]:
    return {relabel(sets, perm) for perm in permutations(range(size))}


def canonical_form(sets: Sets, size: int) -> Sets:
    """Lexicographically minimal relabeling, by exhaustive search over S_r."""
    return min(orbit(sets, size))


def stabilizer_size(sets: Sets, size: int) -> int:
    return sum(1 for perm in permutations(range(size)) if relabel(sets, perm) == sets)


def induced_shadow(quadruple: Quadruple) -> ShadowClass:
    """The class of the shadow of a concrete quadruple of subsets of [n]."""
    union = sorted(set().union(*quadruple))
    counts = Counter(
        sum(1 << l for l, subset in enumerate(quadruple) if element in subset) for element in union
    )
    return _class_from_counts(dict(counts))


def tau_by_shadow_class(u: DegenerateUStatistic) -> list[ShadowContribution]:
    """Split tau over the shadow classes of its T-quadruples, with each class bound."""
    sigma = {s: math.sqrt(v) for s, v in u.sigma2().items()}
    subsets = list(u.components)
    totals: dict[ShadowClass, float] = defaultdict(float)
    for quadruple in no_free_index_quadruples(subsets, subsets, subsets, subsets):
        a, b, c, d = (to_mask(s) for s in quadruple)
        if not at_least_three(a, b, c, d):
            continue
        totals[induced_shadow(quadruple)] += math.prod(sigma[s] for s in quadruple)
    rho2 = rho_squared(u)
    weight = math.factorial(u.order) * math.factorial(u.order - 1)
    return [
        ShadowContribution(shadow=shadow, total=totals[shadow], bound=weight / shadow.gamma * rho2)
        for shadow in sorted(totals, key=lambda c: (c.size, c.sets))
    ]
