#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Finite product probability spaces and exact expectations of subset kernels.

Coordinates are 1-based to match the usual [n] = {1, ..., n} indexing. A kernel
on a subset J stores a dense table whose axes follow the increasing order of J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import reduce
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from errors import BudgetError, ModelError

DEFAULT_BUDGET = 2**24
PROB_TOLERANCE = 1e-12

Subset = tuple[int, ...]


@dataclass(frozen=True)
class Coordinate:
    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(float(x) for x in self.support))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not self.support:
            raise ModelError("Coordinate support must contain at least one atom.")
        if len(self.support) != len(self.probs):
            raise ModelError(
                f"Coordinate support has {len(self.support)} atoms but {len(self.probs)} probabilities."
            )
        if len(set(self.support)) != len(self.support):
            raise ModelError(f"Coordinate atoms must be distinct: {list(self.support)}")
        if any(not p > 0 for p in self.probs):
            raise ModelError(f"Coordinate probabilities must be strictly positive: {list(self.probs)}")
        if abs(math.fsum(self.probs) - 1.0) > PROB_TOLERANCE:
            raise ModelError(f"Coordinate probabilities must sum to 1, got {math.fsum(self.probs)!r}.")

    @property
    def size(self) -> int:
        return len(self.support)

    def atoms(self) -> np.ndarray:
        return np.asarray(self.support, dtype=float)

    def weights(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


@dataclass(frozen=True)
class FiniteProductSpace:
    """n independent discrete coordinates plus the joint-atom budget for exact work."""

    coordinates: tuple[Coordinate, ...]
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        if not self.coordinates:
            raise ModelError("A product space needs at least one coordinate.")
        if self.budget < 1:
            raise ModelError("budget must be >= 1.")

    @classmethod
    def iid(cls, n: int, support: Sequence[float], probs: Sequence[float], budget: int = DEFAULT_BUDGET) -> FiniteProductSpace:
        coordinate = Coordinate(tuple(support), tuple(probs))
        return cls(tuple(coordinate for _ in range(n)), budget)

    @property
    def n(self) -> int:
        return len(self.coordinates)

    def with_budget(self, budget: int) -> FiniteProductSpace:
        return replace(self, budget=budget)

    def coordinate(self, index: int) -> Coordinate:
        if not 1 <= index <= self.n:
            raise ModelError(f"Coordinate index {index} is outside [1, {self.n}].")
        return self.coordinates[index - 1]

    def validate_subset(self, subset: Iterable[int]) -> Subset:
        """Return the subset as a tuple after checking it is increasing and inside [1, n]."""
        items = tuple(int(j) for j in subset)
        for j in items:
            if not 1 <= j <= self.n:
                raise ModelError(f"Subset index {j} is outside [1, {self.n}].")
        if any(a >= b for a, b in zip(items, items[1:])):
            raise ModelError(f"Subset indices must be strictly increasing: {list(items)}")
        return items

    def shape(self, subset: Subset) -> tuple[int, ...]:
        return tuple(self.coordinates[j - 1].size for j in subset)

    def atom_count(self, subset: Subset) -> int:
        return math.prod(self.shape(subset))

    def check_budget(self, subset: Subset, what: str = "enumeration", factor: int = 1) -> None:
        count = self.atom_count(subset) * factor
        if count > self.budget:
            raise BudgetError(
                f"{what} over coordinates {list(subset)} needs {count} joint atoms; budget is {self.budget}."
            )

    def weights(self, subset: Subset) -> np.ndarray:
        """Joint probability table of the coordinates in ``subset``."""
        return reduce(
            np.multiply.outer,
            (self.coordinates[j - 1].weights() for j in subset),
            np.ones(()),
        )

    def atom_grid(self, subset: Subset) -> list[np.ndarray]:
        """Atom values of each coordinate broadcast over the table of ``subset``."""
        axes = [self.coordinates[j - 1].atoms() for j in subset]
        return list(np.meshgrid(*axes, indexing="ij")) if axes else []


@dataclass(frozen=True, eq=False)
class SubsetKernel:
    """A real function of the coordinates in ``subset`` stored as a dense table."""

    subset: Subset
    values: np.ndarray

    def __post_init__(self) -> None:
        subset = tuple(int(j) for j in self.subset)
        if any(a >= b for a, b in zip(subset, subset[1:])):
            raise ModelError(f"Kernel subset must be strictly increasing: {list(subset)}")
        values = np.array(self.values, dtype=float)
        if values.ndim != len(subset):
            raise ModelError(
                f"Kernel on {list(subset)} needs a {len(subset)}-dimensional table, got {values.ndim} dimensions."
            )
        values.flags.writeable = False
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_flat(cls, space: FiniteProductSpace, subset: Iterable[int], values: Sequence[float]) -> SubsetKernel:
        """Build a kernel from a row-major flat list of values."""
        subset = space.validate_subset(subset)
        shape = space.shape(subset)
        if len(values) != math.prod(shape):
            raise ModelError(
                f"Kernel on {list(subset)} needs {math.prod(shape)} values, got {len(values)}."
            )
        return cls(subset, np.asarray(values, dtype=float).reshape(shape))

    @classmethod
    def constant(cls, value: float) -> SubsetKernel:
        return cls((), np.asarray(float(value)))

    @property
    def order(self) -> int:
        return len(self.subset)

    def flat(self) -> list[float]:
        return [float(x) for x in self.values.ravel()]

    def scaled(self, factor: float) -> SubsetKernel:
        return SubsetKernel(self.subset, self.values * factor)


def make_kernel(space: FiniteProductSpace, subset: Iterable[int], fn: Callable[..., float]) -> SubsetKernel:
    """Tabulate ``fn(x_j for j in subset)`` at every atom of the subset."""
    subset = space.validate_subset(subset)
    shape = space.shape(subset)
    table = np.empty(shape, dtype=float)
    axes = [space.coordinates[j - 1].support for j in subset]
    for index, atom in zip(product(*(range(m) for m in shape)), product(*axes)):
        table[index] = fn(*atom)
    return SubsetKernel(subset, table)


def union_of(subsets: Iterable[Subset]) -> Subset:
    return tuple(sorted(set().union(*subsets)))


def embed(space: FiniteProductSpace, kernel: SubsetKernel, subset: Subset) -> np.ndarray:
    """View ``kernel`` as a table over the larger ``subset`` (a superset of its own)."""
    own = set(kernel.subset)
    if not own.issubset(subset):
        raise ModelError(f"Cannot embed kernel on {list(kernel.subset)} into {list(subset)}.")
    shape = [space.coordinates[j - 1].size if j in own else 1 for j in subset]
    return np.broadcast_to(kernel.values.reshape(shape), space.shape(subset))


def dense_values(space: FiniteProductSpace, kernels: Iterable[SubsetKernel], subset: Subset) -> np.ndarray:
    """Pointwise sum of ``kernels`` tabulated over ``subset``."""
    total = np.zeros(space.shape(subset))
    for kernel in kernels:
        total = total + embed(space, kernel, subset)
    return total


def multiply_kernels(space: FiniteProductSpace, first: SubsetKernel, second: SubsetKernel) -> SubsetKernel:
    subset = union_of((first.subset, second.subset))
    space.check_budget(subset, "kernel product")
    return SubsetKernel(subset, embed(space, first, subset) * embed(space, second, subset))


def expectation(space: FiniteProductSpace, kernel: SubsetKernel) -> float:
    """E[f_J(X_J)] under the product measure."""
    subset = space.validate_subset(kernel.subset)
    return float(np.sum(kernel.values * space.weights(subset)))


def conditional_expectation(space: FiniteProductSpace, kernel: SubsetKernel, condition: Iterable[int]) -> SubsetKernel:
    """E[f_J | F_L] as a kernel on J ∩ L.

    Coordinates of J outside L are integrated out with their marginal weights;
    coordinates of L outside J play no role by independence.
    """
    subset = space.validate_subset(kernel.subset)
    keep = set(int(j) for j in condition)
    for j in keep:
        space.coordinate(j)
    table = kernel.values
    for axis in reversed(range(len(subset))):
        j = subset[axis]
        if j not in keep:
            table = np.tensordot(table, space.coordinates[j - 1].weights(), axes=([axis], [0]))
    return SubsetKernel(tuple(j for j in subset if j in keep), table)


def joint_moment(space: FiniteProductSpace, kernels: Sequence[SubsetKernel]) -> float:
    """E[prod_i f_{J_i}] enumerating only the coordinates in the union of the J_i."""
    if not kernels:
        raise ModelError("joint_moment needs at least one kernel.")
    subset = union_of(space.validate_subset(k.subset) for k in kernels)
    space.check_budget(subset, "joint moment")
    table = space.weights(subset)
    for kernel in kernels:
        table = table * embed(space, kernel, subset)
    return float(np.sum(table))
