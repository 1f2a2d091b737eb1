#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Exact moment engine over quadruples of Hoeffding components.

A quadruple (J1, J2, J3, J4) with a free index (an element lying in exactly one
of the sets) has a vanishing joint moment, so every enumeration here only visits
quadruples without one. The remaining quadruples are either bifold (every
element in exactly two sets) or in class T (some element in three or more).
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Callable, Iterator, Mapping, Sequence, TypeVar

import numpy as np

from errors import ContractError
from hoeffding import DegenerateUStatistic, HoeffdingDecomposition, VectorModel, rho_squared
from space import Subset, SubsetKernel, joint_moment, union_of

logger = logging.getLogger(__name__)

Quadruple = tuple[Subset, Subset, Subset, Subset]
Item = TypeVar("Item")


class QuadrupleLabel(str, Enum):
    FREE_INDEX = "FreeIndex"
    BIFOLD = "Bifold"
    T = "T"
    OTHER = "Other"


@dataclass(frozen=True)
class QuadrupleClass:
    label: QuadrupleLabel
    quadruple: Quadruple
    free_index: int | None = None


@dataclass(frozen=True)
class CrossMoments:
    i: int
    k: int
    fourth: float  # E[W(i)^2 W(k)^2]
    covariance: float
    s0: float
    tau: float


def to_mask(subset: Subset) -> int:
    mask = 0
    for j in subset:
        mask |= 1 << (j - 1)
    return mask


def from_mask(mask: int) -> Subset:
    items = []
    j = 1
    while mask:
        if mask & 1:
            items.append(j)
        mask >>= 1
        j += 1
    return tuple(items)


def classify_quadruple(j1: Subset, j2: Subset, j3: Subset, j4: Subset) -> QuadrupleClass:
    quadruple = (tuple(j1), tuple(j2), tuple(j3), tuple(j4))
    if any(not s for s in quadruple):
        raise ContractError("classify_quadruple needs four nonempty subsets.")
    counts = Counter(j for s in quadruple for j in s)
    free = sorted(j for j, c in counts.items() if c == 1)
    if free:
        return QuadrupleClass(QuadrupleLabel.FREE_INDEX, quadruple, free[0])
    if all(c == 2 for c in counts.values()):
        return QuadrupleClass(QuadrupleLabel.BIFOLD, quadruple)
    if any(c >= 3 for c in counts.values()):
        return QuadrupleClass(QuadrupleLabel.T, quadruple)
    return QuadrupleClass(QuadrupleLabel.OTHER, quadruple)


def at_least_three(a: int, b: int, c: int, d: int) -> int:
    return (a & b & c) | (a & b & d) | (a & c & d) | (b & c & d)


def _completions(a: int, b: int, c: int, fourth: Mapping[int, Subset], size: int) -> Iterator[Subset]:
    """Every J4 in ``fourth`` such that (a, b, c, J4) has no free index."""
    seen_twice = (a & b) | (a & c) | (b & c)
    seen_once = (a | b | c) & ~seen_twice
    missing = size - seen_once.bit_count()
    if missing < 0:
        return
    optional = [1 << bit for bit in range(seen_twice.bit_length()) if seen_twice >> bit & 1]
    for extra in combinations(optional, missing):
        mask = seen_once | sum(extra)
        if mask in fourth:
            yield fourth[mask]


def no_free_index_quadruples(
    first: Sequence[Subset],
    second: Sequence[Subset],
    third: Sequence[Subset],
    fourth: Sequence[Subset],
) -> Iterator[Quadruple]:
    """Quadruples over the four candidate lists that have no free index.

    The candidates in ``fourth`` must all have the same size.
    """
    if not (first and second and third and fourth):
        return
    size = len(fourth[0])
    lookup = {to_mask(s): s for s in fourth}
    second_masks = [(s, to_mask(s)) for s in second]
    third_masks = [(s, to_mask(s)) for s in third]
    for j1 in first:
        a = to_mask(j1)
        for j2, b in second_masks:
            for j3, c in third_masks:
                for j4 in _completions(a, b, c, lookup, size):
                    yield (j1, j2, j3, j4)


def _reduce_over(items: Sequence[Item], partial: Callable[[Item], float], threads: int) -> float:
    """Sum ``partial(item)`` in item order; bitwise identical for every thread count."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pieces = list(pool.map(partial, items))
    else:
        pieces = [partial(item) for item in items]
    total = 0.0
    for piece in pieces:
        total += piece
    return total


def _quadruple_sum(
    components: Sequence[Mapping[Subset, SubsetKernel]],
    term: Callable[[Quadruple], float],
    threads: int,
) -> float:
    first, second, third, fourth = (list(c) for c in components)

    def partial(j1: Subset) -> float:
        total = 0.0
        for quadruple in no_free_index_quadruples([j1], second, third, fourth):
            total += term(quadruple)
        return total

    return _reduce_over(first, partial, threads)


def fourth_moment(u: DegenerateUStatistic, threads: int = 1) -> float:
    """E[W^4] as the sum of joint moments over quadruples without a free index."""
    comps = u.components
    space = u.space

    def term(q: Quadruple) -> float:
        return joint_moment(space, [comps[s] for s in q])

    value = _quadruple_sum([comps] * 4, term, threads)
    logger.debug("fourth_moment: order %d, %d components -> %r", u.order, len(comps), value)
    return value


def _tau_sum(first: DegenerateUStatistic, second: DegenerateUStatistic, threads: int) -> float:
    sig_a = {s: math.sqrt(v) for s, v in first.sigma2().items()}
    sig_b = {s: math.sqrt(v) for s, v in second.sigma2().items()}

    def term(q: Quadruple) -> float:
        a, b, c, d = (to_mask(s) for s in q)
        if not at_least_three(a, b, c, d):
            return 0.0
        return sig_a[q[0]] * sig_b[q[1]] * sig_a[q[2]] * sig_b[q[3]]

    comps = [first.components, second.components, first.components, second.components]
    return _quadruple_sum(comps, term, threads)


def s0_quadruples(first: DegenerateUStatistic, second: DegenerateUStatistic) -> Iterator[Quadruple]:
    """Quadruples (J, K, L, M) of the S_0 class without a free index.

    J, L come from ``first`` and K, M from ``second``; J and K are disjoint,
    L and M are disjoint, and L splits both J and itself properly. Together
    these force L ∪ M = J ∪ K.
    """
    left, right = first.components, second.components
    size = first.order
    right_masks = [(k, to_mask(k)) for k in right]
    for j in left:
        jm = to_mask(j)
        for k, km in right_masks:
            if jm & km:
                continue
            pool = j + k
            for l in combinations(sorted(pool), size):
                if l not in left:
                    continue
                lm = to_mask(l)
                overlap = jm & lm
                if not overlap or overlap == jm or overlap == lm:
                    continue
                m = from_mask((jm | km) & ~lm)
                if m in right:
                    yield (j, k, l, m)


def _s0_sum(first: DegenerateUStatistic, second: DegenerateUStatistic) -> float:
    space = first.space
    total = 0.0
    for j, k, l, m in s0_quadruples(first, second):
        total += joint_moment(
            space,
            [first.components[j], second.components[k], first.components[l], second.components[m]],
        )
    return total


def s0(u: DegenerateUStatistic) -> float:
    return _s0_sum(u, u)


def tau(u: DegenerateUStatistic, threads: int = 1) -> float:
    """Sum of sigma_J sigma_K sigma_L sigma_M over quadruples in class T."""
    return _tau_sum(u, u, threads)


def cross_moments(v: VectorModel, i: int, k: int, threads: int = 1) -> CrossMoments:
    if not 1 <= i <= k <= v.r:
        raise ContractError(f"cross_moments needs 1 <= i <= k <= {v.r}, got i={i}, k={k}.")
    first, second = v.components[i - 1], v.components[k - 1]
    space = v.space
    a, b = first.components, second.components

    def term(q: Quadruple) -> float:
        return joint_moment(space, [a[q[0]], b[q[1]], a[q[2]], b[q[3]]])

    fourth = _quadruple_sum([a, b, a, b], term, threads)
    return CrossMoments(
        i=i,
        k=k,
        fourth=fourth,
        covariance=v.covariance_entry(i, k),
        s0=_s0_sum(first, second),
        tau=_tau_sum(first, second, threads),
    )


def overlap_variance_sum(first: DegenerateUStatistic, second: DegenerateUStatistic) -> float:
    """sum over J ∩ K nonempty of sigma_J(first)^2 sigma_K(second)^2."""
    right = [(to_mask(s), v) for s, v in second.sigma2().items()]
    total = 0.0
    for subset, value in first.sigma2().items():
        mask = to_mask(subset)
        total += value * sum(w for m, w in right if m & mask)
    return total


def overlap_bound(first: DegenerateUStatistic, second: DegenerateUStatistic) -> float:
    return min(first.order * rho_squared(second), second.order * rho_squared(first))


def full_atom_moment(decompositions: Sequence[HoeffdingDecomposition], powers: Sequence[int]) -> float:
    """E[prod_i W_i^{powers[i]}] by enumerating every atom of the joint support."""
    if len(decompositions) != len(powers) or not decompositions:
        raise ContractError("full_atom_moment needs one power per decomposition.")
    space = decompositions[0].space
    subset = union_of(dec.support() for dec in decompositions)
    space.check_budget(subset, "full-atom moment")
    table = space.weights(subset)
    for dec, power in zip(decompositions, powers):
        table = table * dec.dense(subset) ** power
    return float(np.sum(table))
