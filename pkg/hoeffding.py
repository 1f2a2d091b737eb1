#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Hoeffding decompositions, degenerate U-statistics and the influence quantity rho^2."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from errors import ModelError, NormalizationError
from space import (
    FiniteProductSpace,
    Subset,
    SubsetKernel,
    conditional_expectation,
    dense_values,
    embed,
    joint_moment,
    union_of,
)

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-12


def subsets_of(subset: Subset) -> list[Subset]:
    """All subsets of ``subset``, smallest first, each in increasing order."""
    return [combo for size in range(len(subset) + 1) for combo in combinations(subset, size)]


@dataclass(frozen=True, eq=False)
class HoeffdingDecomposition:
    space: FiniteProductSpace
    components: Mapping[Subset, SubsetKernel]

    def __post_init__(self) -> None:
        ordered = {subset: self.components[subset] for subset in sorted(self.components)}
        for subset, kernel in ordered.items():
            if kernel.subset != subset:
                raise ModelError(f"Component stored under {list(subset)} lives on {list(kernel.subset)}.")
            self.space.validate_subset(subset)
        object.__setattr__(self, "components", ordered)

    def subsets(self) -> list[Subset]:
        return list(self.components)

    def kernels(self) -> list[SubsetKernel]:
        return list(self.components.values())

    def component(self, subset: Subset) -> SubsetKernel | None:
        return self.components.get(tuple(subset))

    def support(self) -> Subset:
        return union_of(self.components)

    def mean(self) -> float:
        constant = self.components.get(())
        return float(constant.values) if constant is not None else 0.0

    def variances(self) -> dict[Subset, float]:
        """sigma_J^2 = E[W_J^2] for every nonempty stored J."""
        return {
            subset: joint_moment(self.space, [kernel, kernel])
            for subset, kernel in self.components.items()
            if subset
        }

    def variance(self) -> float:
        return math.fsum(self.variances().values())

    def scaled(self, factor: float) -> HoeffdingDecomposition:
        return HoeffdingDecomposition(
            self.space, {subset: kernel.scaled(factor) for subset, kernel in self.components.items()}
        )

    def dense(self, subset: Subset | None = None) -> np.ndarray:
        """Tabulate the sum of all components over ``subset`` (default: their joint support)."""
        subset = self.support() if subset is None else subset
        self.space.check_budget(subset, "dense evaluation")
        return dense_values(self.space, self.kernels(), subset)


@dataclass(frozen=True)
class DegeneracyReport:
    ok: bool
    order: int
    offenders: tuple[Subset, ...] = ()


@dataclass(frozen=True, eq=False)
class DegenerateUStatistic:
    """A statistic whose Hoeffding decomposition lives on subsets of size ``order``."""

    order: int
    decomposition: HoeffdingDecomposition

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ModelError(f"order must be >= 1, got {self.order}.")
        report = check_degenerate(self.decomposition, self.order)
        if not report.ok:
            offenders = ", ".join(str(list(s)) for s in report.offenders)
            raise ModelError(f"Statistic is not degenerate of order {self.order}; offending subsets: {offenders}")

    @classmethod
    def from_kernels(cls, space: FiniteProductSpace, order: int, kernels: Sequence[SubsetKernel]) -> DegenerateUStatistic:
        return cls(order, decompose(space, kernels))

    @property
    def space(self) -> FiniteProductSpace:
        return self.decomposition.space

    @property
    def components(self) -> Mapping[Subset, SubsetKernel]:
        return self.decomposition.components

    def sigma2(self) -> dict[Subset, float]:
        return self.decomposition.variances()

    def variance(self) -> float:
        return self.decomposition.variance()

    def scaled(self, factor: float) -> DegenerateUStatistic:
        return DegenerateUStatistic(self.order, self.decomposition.scaled(factor))


def decompose(space: FiniteProductSpace, kernels: Iterable[SubsetKernel]) -> HoeffdingDecomposition:
    """Hoeffding decomposition of the sum of ``kernels``.

    Each kernel is expanded over the subsets of its own support with
    W_K = sum_{L ⊆ K} (-1)^{|K|-|L|} E[W | F_L]; the per-kernel pieces are then
    merged additively. Components whose second moment falls below
    ``VARIANCE_FLOOR`` are dropped.
    """
    merged: dict[Subset, np.ndarray] = {}
    for kernel in kernels:
        subset = space.validate_subset(kernel.subset)
        space.check_budget(subset, "decomposition")
        conditioned = {inner: conditional_expectation(space, kernel, inner) for inner in subsets_of(subset)}
        for target in subsets_of(subset):
            table = np.zeros(space.shape(target))
            for inner in subsets_of(target):
                sign = -1.0 if (len(target) - len(inner)) % 2 else 1.0
                table = table + sign * embed(space, conditioned[inner], target)
            merged[target] = merged[target] + table if target in merged else table

    components: dict[Subset, SubsetKernel] = {}
    for subset in sorted(merged):
        kernel = SubsetKernel(subset, merged[subset])
        if joint_moment(space, [kernel, kernel]) >= VARIANCE_FLOOR:
            components[subset] = kernel
    logger.debug("decompose: %d components kept out of %d", len(components), len(merged))
    return HoeffdingDecomposition(space, components)


def check_degenerate(dec: HoeffdingDecomposition, d: int) -> DegeneracyReport:
    """True iff every component with second moment at least ``VARIANCE_FLOOR`` has exactly ``d`` coordinates."""
    offenders = tuple(
        subset
        for subset, kernel in dec.components.items()
        if len(subset) != d and joint_moment(dec.space, [kernel, kernel]) >= VARIANCE_FLOOR
    )
    return DegeneracyReport(ok=not offenders, order=d, offenders=offenders)


def influences(u: DegenerateUStatistic) -> np.ndarray:
    """Per-coordinate influence sum_{K ∋ i} sigma_K^2 for i = 1..n."""
    values = np.zeros(u.space.n)
    for subset, sigma2 in u.sigma2().items():
        for j in subset:
            values[j - 1] += sigma2
    return values


def rho_squared(u: DegenerateUStatistic) -> float:
    return float(np.max(influences(u)))


def normalize(u: DegenerateUStatistic) -> DegenerateUStatistic:
    variance = u.variance()
    if variance <= VARIANCE_FLOOR:
        raise NormalizationError(f"Cannot normalize a statistic with variance {variance!r}.")
    return u.scaled(1.0 / math.sqrt(variance))


def is_normalized(u: DegenerateUStatistic, tolerance: float = 1e-9) -> bool:
    return abs(u.variance() - 1.0) <= tolerance


def reconstruction_residual(space: FiniteProductSpace, kernels: Sequence[SubsetKernel], dec: HoeffdingDecomposition) -> float:
    """max over atoms of |sum of input kernels - sum of components|."""
    subset = union_of([k.subset for k in kernels] + dec.subsets())
    space.check_budget(subset, "reconstruction check")
    difference = dense_values(space, kernels, subset) - dense_values(space, dec.kernels(), subset)
    return float(np.max(np.abs(difference))) if difference.size else 0.0


def orthogonality_residual(dec: HoeffdingDecomposition) -> float:
    """max |E[W_J W_K]| over distinct stored J, K."""
    worst = 0.0
    kernels = dec.kernels()
    for a, b in combinations(kernels, 2):
        worst = max(worst, abs(joint_moment(dec.space, [a, b])))
    return worst


def degeneracy_residual(dec: HoeffdingDecomposition) -> float:
    """max |E[W_J | F_{J minus j}]| over components J and j in J."""
    worst = 0.0
    for subset, kernel in dec.components.items():
        for j in subset:
            rest = tuple(i for i in subset if i != j)
            table = conditional_expectation(dec.space, kernel, rest).values
            worst = max(worst, float(np.max(np.abs(table))))
    return worst


@dataclass(frozen=True, eq=False)
class VectorModel:
    """Degenerate U-statistics W(1), ..., W(r) over one shared space."""

    components: tuple[DegenerateUStatistic, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ModelError("A vector model needs at least one component.")
        first = self.components[0].space
        for index, component in enumerate(self.components[1:], start=2):
            if component.space != first:
                raise ModelError(f"vector[{index}] is defined on a different space.")

    @property
    def space(self) -> FiniteProductSpace:
        return self.components[0].space

    @property
    def r(self) -> int:
        return len(self.components)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(c.order for c in self.components)

    def is_sorted(self) -> bool:
        return all(a <= b for a, b in zip(self.orders, self.orders[1:]))

    def covariance_entry(self, i: int, k: int) -> float:
        """v_ik = E[W(i) W(k)]; zero across different orders by orthogonality."""
        first, second = self.components[i - 1], self.components[k - 1]
        if first.order != second.order:
            return 0.0
        return math.fsum(
            joint_moment(self.space, [kernel, second.components[subset]])
            for subset, kernel in first.components.items()
            if subset in second.components
        )

    def covariance(self) -> np.ndarray:
        matrix = np.zeros((self.r, self.r))
        for i in range(1, self.r + 1):
            for k in range(i, self.r + 1):
                matrix[i - 1, k - 1] = matrix[k - 1, i - 1] = self.covariance_entry(i, k)
        return matrix
