#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Built-in model families: homogeneous sums, symmetric and weighted U-statistics.

Every builder returns a ``GeneratedModel`` carrying the statistic together with
the ``kind``/``params`` pair that rebuilds it, so generated models can be stored
in a model file by recipe instead of by table.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from errors import ContractError, ModelError, NormalizationError
from hoeffding import VARIANCE_FLOOR, DegenerateUStatistic, HoeffdingDecomposition, decompose, normalize
from space import DEFAULT_BUDGET, Coordinate, FiniteProductSpace, Subset, SubsetKernel, make_kernel

logger = logging.getLogger(__name__)

LAW_TOLERANCE = 1e-12
KINDS = ("homogeneous", "symmetric", "weighted")

KernelSpec = Callable[..., float] | Sequence[float] | np.ndarray


@dataclass(frozen=True)
class CoordinateLaw:
    support: tuple[float, ...]
    probs: tuple[float, ...]

    def space(self, n: int, budget: int = DEFAULT_BUDGET) -> FiniteProductSpace:
        return FiniteProductSpace.iid(n, self.support, self.probs, budget)

    def moment(self, power: int) -> float:
        return math.fsum(p * x**power for x, p in zip(self.support, self.probs))

    def check_standardized(self, tolerance: float = LAW_TOLERANCE) -> None:
        mean, second = self.moment(1), self.moment(2)
        if abs(mean) > tolerance or abs(second - 1.0) > tolerance:
            raise ContractError(f"Coordinate law must have mean 0 and variance 1, got mean {mean!r} and E[x^2] {second!r}.")

    def as_dict(self) -> dict[str, list[float]]:
        return {"support": list(self.support), "probs": list(self.probs)}


def rademacher() -> CoordinateLaw:
    return CoordinateLaw((-1.0, 1.0), (0.5, 0.5))


@dataclass(frozen=True, eq=False)
class GeneratedModel:
    statistic: DegenerateUStatistic
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    projected: bool = False


def _check_order(n: int, d: int) -> None:
    if d < 1:
        raise ContractError(f"Order d must be >= 1, got {d}.")
    if n < d:
        raise ContractError(f"Need n >= d, got n = {n} and d = {d}.")


def balanced_coefficients(n: int, d: int) -> dict[Subset, float]:
    """a_J = C(n, d)^{-1/2} on every d-subset."""
    _check_order(n, d)
    value = 1.0 / math.sqrt(math.comb(n, d))
    return {subset: value for subset in combinations(range(1, n + 1), d)}


def random_coefficients(n: int, d: int, seed: int) -> dict[Subset, float]:
    """Gaussian coefficients on every d-subset, rescaled to unit sum of squares."""
    _check_order(n, d)
    subsets = list(combinations(range(1, n + 1), d))
    draws = np.random.default_rng(seed).standard_normal(len(subsets))
    draws = draws / math.sqrt(float(np.sum(draws**2)))
    return {subset: float(a) for subset, a in zip(subsets, draws)}


def disjoint_block_coefficients(n: int, d: int) -> dict[Subset, float]:
    """Equal weights on the blocks {1..d}, {d+1..2d}, ...; n must be a multiple of d."""
    _check_order(n, d)
    if n % d:
        raise ContractError(f"Disjoint blocks need d | n, got n = {n} and d = {d}.")
    blocks = n // d
    return {tuple(range(b * d + 1, b * d + d + 1)): 1.0 / math.sqrt(blocks) for b in range(blocks)}


def homogeneous_sum(
    n: int,
    d: int,
    coefficients: Mapping[Sequence[int], float],
    law: CoordinateLaw | None = None,
    budget: int = DEFAULT_BUDGET,
) -> GeneratedModel:
    """W = sum_J a_J prod_{j in J} x_j over standardized coordinates."""
    law = law or rademacher()
    _check_order(n, d)
    law.check_standardized()
    space = law.space(n, budget)
    atoms = np.asarray(law.support, dtype=float)
    monomial = atoms
    for _ in range(d - 1):
        monomial = np.multiply.outer(monomial, atoms)

    components: dict[Subset, SubsetKernel] = {}
    for raw_subset, a in coefficients.items():
        subset = space.validate_subset(sorted(raw_subset))
        if len(subset) != d:
            raise ModelError(f"Coefficient subset {list(subset)} does not have size {d}.")
        if a * a < VARIANCE_FLOOR:
            continue
        components[subset] = SubsetKernel(subset, float(a) * monomial)
    statistic = DegenerateUStatistic(d, HoeffdingDecomposition(space, components))
    params = {
        "n": n,
        "d": d,
        "coefficients": [{"subset": list(s), "value": float(a)} for s, a in sorted(coefficients.items())],
        "law": law.as_dict(),
    }
    return GeneratedModel(statistic, "homogeneous", params)


def _kernel_table(law: CoordinateLaw, d: int, kernel: KernelSpec) -> np.ndarray:
    local = law.space(d)
    if callable(kernel):
        return make_kernel(local, range(1, d + 1), kernel).values
    return SubsetKernel.from_flat(local, range(1, d + 1), list(np.asarray(kernel, dtype=float).ravel())).values


def _project_top(law: CoordinateLaw, d: int, table: np.ndarray) -> tuple[np.ndarray, bool]:
    """Top Hoeffding component of a kernel on d i.i.d. coordinates, and whether lower parts were removed."""
    local = law.space(d)
    full = tuple(range(1, d + 1))
    dec = decompose(local, [SubsetKernel(full, table)])
    top = dec.component(full)
    if top is None:
        raise NormalizationError("Projected kernel has zero variance.")
    projected = any(len(subset) < d for subset in dec.components)
    return np.array(top.values), projected


def _finish(statistic: DegenerateUStatistic, scale: bool) -> DegenerateUStatistic:
    return normalize(statistic) if scale else statistic


def symmetric_ustat(
    n: int,
    d: int,
    kernel: KernelSpec,
    law: CoordinateLaw | None = None,
    scale: bool = True,
    budget: int = DEFAULT_BUDGET,
) -> GeneratedModel:
    """sum over all d-subsets J of g(x_J), i.i.d. coordinates, g projected onto its top component."""
    law = law or rademacher()
    _check_order(n, d)
    table = _kernel_table(law, d, kernel)
    top, projected = _project_top(law, d, table)
    if projected:
        logger.warning("symmetric kernel is not degenerate; using its order-%d Hoeffding component", d)
    space = law.space(n, budget)
    components = {subset: SubsetKernel(subset, top) for subset in combinations(range(1, n + 1), d)}
    statistic = _finish(DegenerateUStatistic(d, HoeffdingDecomposition(space, components)), scale)
    params = {"n": n, "d": d, "kernel": [float(x) for x in table.ravel()], "law": law.as_dict(), "normalize": scale}
    return GeneratedModel(statistic, "symmetric", params, projected)


def _pair_weights(n: int, weights: Mapping[Sequence[int], float] | Sequence[Sequence[float]] | np.ndarray) -> dict[Subset, float]:
    if isinstance(weights, Mapping):
        pairs = {}
        for raw, w in weights.items():
            pair = tuple(sorted(int(j) for j in raw))
            if len(pair) != 2 or pair[0] == pair[1] or not (1 <= pair[0] and pair[1] <= n):
                raise ModelError(f"Weight index {list(raw)} is not a pair of distinct coordinates in [1, {n}].")
            pairs[pair] = float(w)
        return pairs
    matrix = np.asarray(weights, dtype=float)
    if matrix.shape != (n, n):
        raise ModelError(f"Weight matrix must be {n}x{n}, got shape {matrix.shape}.")
    return {(i, j): float(matrix[i - 1, j - 1]) for i, j in combinations(range(1, n + 1), 2)}


def weighted_ustat(
    n: int,
    weights: Mapping[Sequence[int], float] | Sequence[Sequence[float]] | np.ndarray,
    kernel: KernelSpec,
    law: CoordinateLaw | None = None,
    scale: bool = True,
    budget: int = DEFAULT_BUDGET,
) -> GeneratedModel:
    """sum over pairs of w_ij psi(x_i, x_j) for a symmetric kernel psi."""
    law = law or rademacher()
    _check_order(n, 2)
    table = _kernel_table(law, 2, kernel)
    if np.max(np.abs(table - table.T)) > LAW_TOLERANCE:
        raise ContractError("Weighted U-statistic kernel must be symmetric.")
    top, projected = _project_top(law, 2, table)
    if projected:
        logger.warning("weighted kernel is not degenerate; using its order-2 Hoeffding component")
    space = law.space(n, budget)
    pairs = _pair_weights(n, weights)
    components = {
        pair: SubsetKernel(pair, w * top) for pair, w in sorted(pairs.items()) if w != 0.0
    }
    statistic = DegenerateUStatistic(2, decompose(space, components.values()))
    if not statistic.components:
        raise NormalizationError("All weights vanish; the weighted U-statistic is identically zero.")
    params = {
        "n": n,
        "weights": [{"pair": list(p), "value": w} for p, w in sorted(pairs.items())],
        "kernel": [float(x) for x in table.ravel()],
        "law": law.as_dict(),
        "normalize": scale,
    }
    return GeneratedModel(_finish(statistic, scale), "weighted", params, projected)


def _law_from(params: Mapping[str, Any]) -> CoordinateLaw:
    raw = params.get("law")
    if raw is None:
        return rademacher()
    return CoordinateLaw(tuple(float(x) for x in raw["support"]), tuple(float(p) for p in raw["probs"]))


def generate(kind: str, params: Mapping[str, Any], budget: int = DEFAULT_BUDGET) -> GeneratedModel:
    """Rebuild a model from a ``generator`` block of a model file."""
    try:
        n = int(params["n"])
        if kind == "homogeneous":
            d = int(params["d"])
            raw = params.get("coefficients", "balanced")
            if raw == "balanced":
                coefficients = balanced_coefficients(n, d)
            elif raw == "random":
                coefficients = random_coefficients(n, d, int(params["seed"]))
            elif raw == "blocks":
                coefficients = disjoint_block_coefficients(n, d)
            else:
                coefficients = {tuple(item["subset"]): float(item["value"]) for item in raw}
            return homogeneous_sum(n, d, coefficients, _law_from(params), budget)
        if kind == "symmetric":
            return symmetric_ustat(
                n, int(params["d"]), params["kernel"], _law_from(params), bool(params.get("normalize", True)), budget
            )
        if kind == "weighted":
            weights = {tuple(item["pair"]): float(item["value"]) for item in params["weights"]}
            return weighted_ustat(n, weights, params["kernel"], _law_from(params), bool(params.get("normalize", True)), budget)
    except KeyError as exc:
        raise ModelError(f"Missing keys in generator params: {exc.args[0]}") from exc
    raise ModelError(f"Unknown generator kind {kind!r}; expected one of {', '.join(KINDS)}.")


def random_space(rng: np.random.Generator, n: int, max_support: int = 3, budget: int = DEFAULT_BUDGET) -> FiniteProductSpace:
    """n independent coordinates with 2..max_support atoms and probabilities bounded away from 0."""
    coordinates = []
    for _ in range(n):
        size = int(rng.integers(2, max_support + 1))
        atoms = np.sort(rng.choice(np.arange(-5, 6), size=size, replace=False)).astype(float)
        probs = 0.2 / size + 0.8 * rng.dirichlet(np.ones(size))
        probs = probs / probs.sum()
        coordinates.append((tuple(atoms), tuple(probs)))
    return FiniteProductSpace(tuple(Coordinate(s, p) for s, p in coordinates), budget)


def random_statistic(rng: np.random.Generator, space: FiniteProductSpace, d: int, kernels: int = 3) -> DegenerateUStatistic:
    """Order-d part of a sum of random kernels on random d-subsets."""
    subsets = list(combinations(range(1, space.n + 1), d))
    chosen = rng.choice(len(subsets), size=min(kernels, len(subsets)), replace=False)
    raw = [SubsetKernel(subsets[i], rng.standard_normal(space.shape(subsets[i]))) for i in sorted(chosen)]
    dec = decompose(space, raw)
    top = {subset: kernel for subset, kernel in dec.components.items() if len(subset) == d}
    return DegenerateUStatistic(d, HoeffdingDecomposition(space, top))
