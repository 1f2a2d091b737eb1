#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Exchangeable pair built by redrawing one uniformly chosen coordinate.

W' is W with X_alpha replaced by an independent copy, alpha uniform on [n].
Everything here is an exact average over alpha and the replacement value; the
pair is never sampled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from errors import ContractError
from hoeffding import DegenerateUStatistic, HoeffdingDecomposition
from moments import fourth_moment
from product import hoeffding_product
from space import FiniteProductSpace, Subset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairQuantities:
    order: int
    n: int
    lam: float
    coefficients: dict[int, float]
    variance_term: float
    fourth_increment: float
    third_increment_bound: float
    third_increment_exact: float | None = None

    @property
    def third_increment(self) -> float:
        """Exact third increment moment when it was computed, else its upper bound."""
        return self.third_increment_exact if self.third_increment_exact is not None else self.third_increment_bound


@dataclass(frozen=True, eq=False)
class IncrementDecomposition:
    """(n/2d) E[(W'-W)^2 | X] as sum of a_M U_M, with U the decomposition of W^2."""

    decomposition: HoeffdingDecomposition
    square: HoeffdingDecomposition
    coefficients: dict[int, float] = field(default_factory=dict)


def increment_coefficient(size: int, d: int) -> float:
    if d < 1 or not 0 <= size <= 2 * d:
        raise ContractError(f"No increment coefficient for |M| = {size} at order {d}.")
    return 1.0 - size / (2.0 * d)


def increment_coefficients(d: int) -> dict[int, float]:
    return {size: increment_coefficient(size, d) for size in range(2 * d + 1)}


def _dense(dec: HoeffdingDecomposition, factor: int = 1) -> tuple[Subset, np.ndarray]:
    subset = dec.support()
    dec.space.check_budget(subset, "pair enumeration", factor=factor)
    return subset, dec.dense(subset)


def _replacements(space: FiniteProductSpace, subset: Subset, table: np.ndarray) -> Iterator[tuple[int, float, np.ndarray]]:
    """(axis, probability, W with that coordinate set to one replacement atom)."""
    for axis, j in enumerate(subset):
        weights = space.coordinates[j - 1].weights()
        for index, weight in enumerate(weights):
            replaced = np.expand_dims(np.take(table, index, axis=axis), axis)
            yield axis, float(weight), np.broadcast_to(replaced, table.shape)


def conditional_drift(dec: HoeffdingDecomposition) -> tuple[Subset, np.ndarray]:
    """E[W' - W | X] tabulated over the support of W."""
    space = dec.space
    subset, table = _dense(dec)
    drift = np.zeros(table.shape)
    for _, weight, replaced in _replacements(space, subset, table):
        drift = drift + weight * (replaced - table)
    return subset, drift / space.n


def regression_check(u: DegenerateUStatistic | HoeffdingDecomposition, order: int | None = None) -> float:
    """max over atoms of |E[W' - W | X] + (d/n) W|.

    A plain decomposition can be checked against an explicit ``order``; this is
    how a non-degenerate input shows a nonzero residual.
    """
    if isinstance(u, DegenerateUStatistic):
        dec, d = u.decomposition, u.order if order is None else order
    else:
        if order is None:
            raise ContractError("regression_check on a plain decomposition needs an order.")
        dec, d = u, order
    subset, drift = conditional_drift(dec)
    if not subset:
        return 0.0
    residual = drift + (d / dec.space.n) * dec.dense(subset)
    return float(np.max(np.abs(residual)))


def squared_increment_decomposition(u: DegenerateUStatistic) -> IncrementDecomposition:
    square = hoeffding_product(u, u)
    coefficients = increment_coefficients(u.order)
    components = {
        subset: kernel.scaled(coefficients[len(subset)])
        for subset, kernel in square.components.items()
        if len(subset) <= 2 * u.order - 1
    }
    return IncrementDecomposition(HoeffdingDecomposition(u.space, components), square, coefficients)


def direct_squared_increment(u: DegenerateUStatistic) -> tuple[Subset, np.ndarray]:
    """(n/2d) E[(W'-W)^2 | X] by averaging over coordinate and replacement."""
    subset, table = _dense(u.decomposition)
    total = np.zeros(table.shape)
    for _, weight, replaced in _replacements(u.space, subset, table):
        total = total + weight * (replaced - table) ** 2
    return subset, total / (2.0 * u.order)


def squared_increment_residual(u: DegenerateUStatistic, increment: IncrementDecomposition | None = None) -> float:
    increment = increment or squared_increment_decomposition(u)
    subset, direct = direct_squared_increment(u)
    expanded = increment.decomposition.dense(subset)
    return float(np.max(np.abs(direct - expanded))) if direct.size else 0.0


def conditional_increment_variance(u: DegenerateUStatistic, increment: IncrementDecomposition | None = None) -> float:
    """Var((n/2d) E[(W'-W)^2 | X]) = sum over nonempty M of a_M^2 Var(U_M)."""
    increment = increment or squared_increment_decomposition(u)
    return math.fsum(increment.decomposition.variances().values())


def fourth_increment(u: DegenerateUStatistic, increment: IncrementDecomposition | None = None, fourth: float | None = None) -> float:
    """(n/4d) E[(W'-W)^4] = 3 E[W^2 (n/2d) E[(W'-W)^2|X]] - E[W^4].

    The middle expectation equals sum_M a_M E[U_M^2] by orthogonality.
    """
    increment = increment or squared_increment_decomposition(u)
    fourth = fourth_moment(u) if fourth is None else fourth
    weighted = math.fsum(
        increment.coefficients[len(subset)] * float(np.sum(kernel.values**2 * u.space.weights(subset)))
        for subset, kernel in increment.square.components.items()
    )
    return 3.0 * weighted - fourth


def _direct_power_increment(u: DegenerateUStatistic, power: int) -> float:
    space = u.space
    subset, table = _dense(u.decomposition, factor=sum(space.shape(u.decomposition.support())) or 1)
    weights = space.weights(subset)
    total = 0.0
    for _, weight, replaced in _replacements(space, subset, table):
        total += weight * float(np.sum(weights * np.abs(replaced - table) ** power))
    return total


def direct_fourth_increment(u: DegenerateUStatistic) -> float:
    """(n/4d) E[(W'-W)^4] by full enumeration over atom, coordinate and replacement."""
    return _direct_power_increment(u, 4) / (4.0 * u.order)


def direct_third_increment(u: DegenerateUStatistic) -> float:
    """(n/3d) E|W'-W|^3 by full enumeration."""
    return _direct_power_increment(u, 3) / (3.0 * u.order)


def third_increment_bound(u: DegenerateUStatistic, fourth_inc: float) -> float:
    """Cauchy-Schwarz bound on (n/3d) E|W'-W|^3 from E(W'-W)^2 = (2d/n) Var(W)."""
    return (2.0 * math.sqrt(2.0) / 3.0) * math.sqrt(max(u.variance(), 0.0)) * math.sqrt(max(fourth_inc, 0.0))


def pair_quantities(u: DegenerateUStatistic, exact_third: bool = False, fourth: float | None = None) -> PairQuantities:
    increment = squared_increment_decomposition(u)
    fourth_inc = fourth_increment(u, increment, fourth)
    quantities = PairQuantities(
        order=u.order,
        n=u.space.n,
        lam=u.order / u.space.n,
        coefficients=increment.coefficients,
        variance_term=conditional_increment_variance(u, increment),
        fourth_increment=fourth_inc,
        third_increment_bound=third_increment_bound(u, fourth_inc),
        third_increment_exact=direct_third_increment(u) if exact_third else None,
    )
    logger.debug("pair quantities: %s", quantities)
    return quantities
