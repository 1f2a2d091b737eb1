#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Hoeffding decomposition of a product of two degenerate U-statistics."""

from __future__ import annotations

import logging
from itertools import combinations
from typing import Callable

import numpy as np

from errors import ContractError, ModelError
from hoeffding import VARIANCE_FLOOR, DegenerateUStatistic, HoeffdingDecomposition, decompose, subsets_of
from space import (
    FiniteProductSpace,
    Subset,
    SubsetKernel,
    conditional_expectation,
    embed,
    joint_moment,
    multiply_kernels,
    union_of,
)

logger = logging.getLogger(__name__)


def _product_pieces(
    space: FiniteProductSpace,
    first: SubsetKernel,
    second: SubsetKernel,
    keep: Callable[[Subset], bool] = lambda subset: True,
) -> dict[Subset, np.ndarray]:
    """Contributions of W_J V_K to each U_M with JΔK ⊆ M ⊆ J∪K.

    U_M gets sum over JΔK ⊆ L ⊆ M of (-1)^{|M|-|L|} E[W_J V_K | F_L].
    """
    left, right = set(first.subset), set(second.subset)
    symmetric = tuple(sorted(left ^ right))
    shared = tuple(sorted(left & right))
    product = multiply_kernels(space, first, second)
    conditioned: dict[Subset, SubsetKernel] = {}
    pieces: dict[Subset, np.ndarray] = {}
    for extra in subsets_of(shared):
        target = tuple(sorted(symmetric + extra))
        if not keep(target):
            continue
        table = np.zeros(space.shape(target))
        for inner_extra in subsets_of(extra):
            inner = tuple(sorted(symmetric + inner_extra))
            if inner not in conditioned:
                conditioned[inner] = conditional_expectation(space, product, inner)
            sign = -1.0 if (len(extra) - len(inner_extra)) % 2 else 1.0
            table = table + sign * embed(space, conditioned[inner], target)
        pieces[target] = table
    return pieces


def _collect(space: FiniteProductSpace, tables: dict[Subset, np.ndarray]) -> HoeffdingDecomposition:
    components = {}
    for subset in sorted(tables):
        kernel = SubsetKernel(subset, tables[subset])
        if joint_moment(space, [kernel, kernel]) >= VARIANCE_FLOOR:
            components[subset] = kernel
    return HoeffdingDecomposition(space, components)


def hoeffding_product(v: DegenerateUStatistic, w: DegenerateUStatistic) -> HoeffdingDecomposition:
    """Components U_M of the product v·w via the product formula."""
    if v.space != w.space:
        raise ModelError("hoeffding_product needs both statistics on the same space.")
    space = v.space
    tables: dict[Subset, np.ndarray] = {}
    for first in v.components.values():
        for second in w.components.values():
            for subset, table in _product_pieces(space, first, second).items():
                tables[subset] = tables[subset] + table if subset in tables else table
    logger.debug("hoeffding_product: orders (%d, %d), %d candidate components", v.order, w.order, len(tables))
    return _collect(space, tables)


def _as_decomposition(value: DegenerateUStatistic | HoeffdingDecomposition) -> HoeffdingDecomposition:
    return value.decomposition if isinstance(value, DegenerateUStatistic) else value


def product_oracle(
    v: DegenerateUStatistic | HoeffdingDecomposition,
    w: DegenerateUStatistic | HoeffdingDecomposition,
) -> HoeffdingDecomposition:
    """Decompose the pointwise product of two functions tabulated on their joint support."""
    first, second = _as_decomposition(v), _as_decomposition(w)
    if first.space != second.space:
        raise ModelError("product_oracle needs both functions on the same space.")
    space = first.space
    subset = union_of((first.support(), second.support()))
    space.check_budget(subset, "product oracle")
    table = first.dense(subset) * second.dense(subset)
    return decompose(space, [SubsetKernel(subset, table)])


def components_residual(first: HoeffdingDecomposition, second: HoeffdingDecomposition) -> float:
    """max pointwise difference between matching components of two decompositions."""
    worst = 0.0
    for subset in set(first.components) | set(second.components):
        a, b = first.component(subset), second.component(subset)
        if a is None or b is None:
            present = a if b is None else b
            worst = max(worst, float(np.max(np.abs(present.values))))
            continue
        worst = max(worst, float(np.max(np.abs(a.values - b.values))))
    return worst


def vanishing_product_residual(
    space: FiniteProductSpace, first: SubsetKernel, second: SubsetKernel, condition: Subset
) -> float:
    """max |E[W_J V_K | F_L]| for an L that misses part of JΔK; zero for degenerate W_J, V_K."""
    symmetric = set(first.subset) ^ set(second.subset)
    if symmetric.issubset(condition):
        raise ContractError(f"Condition {list(condition)} contains the symmetric difference {sorted(symmetric)}.")
    table = conditional_expectation(space, multiply_kernels(space, first, second), condition).values
    return float(np.max(np.abs(table)))


def conditional_product_residual(space: FiniteProductSpace, first: SubsetKernel, second: SubsetKernel, j: int) -> float:
    """Compare E[W_J V_K | F_{(J∪K) minus j}] with its expansion over JΔK ⊆ M ⊆ (J∪K) minus j."""
    if j not in first.subset or j not in second.subset:
        raise ContractError(f"Coordinate {j} must lie in both {list(first.subset)} and {list(second.subset)}.")
    rest = tuple(i for i in union_of((first.subset, second.subset)) if i != j)
    direct = conditional_expectation(space, multiply_kernels(space, first, second), rest)
    pieces = _product_pieces(space, first, second, keep=lambda subset: j not in subset)
    expanded = np.zeros(space.shape(rest))
    for subset, table in pieces.items():
        expanded = expanded + embed(space, SubsetKernel(subset, table), rest)
    return float(np.max(np.abs(embed(space, direct, rest) - expanded)))


def symmetric_difference_misses(first: Subset, second: Subset) -> list[Subset]:
    """Every L ⊆ J∪K that does not contain JΔK."""
    symmetric = set(first) ^ set(second)
    pool = union_of((first, second))
    return [
        combo
        for size in range(len(pool) + 1)
        for combo in combinations(pool, size)
        if not symmetric.issubset(combo)
    ]
