#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Monte Carlo sampling of U-statistics and the empirical 1-Wasserstein distance to N(0, 1)."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erfc

from bounds import univariate_bound
from errors import ContractError
from hoeffding import DegenerateUStatistic, HoeffdingDecomposition, VectorModel, rho_squared
from moments import cross_moments, fourth_moment
from space import FiniteProductSpace

logger = logging.getLogger(__name__)

SAMPLE_CHUNK = 65536
MAX_SEED = 2**64 - 1
ROOT_TWO = math.sqrt(2.0)
ROOT_TWO_PI = math.sqrt(2.0 * math.pi)

# rational approximation of the normal quantile (central region and tails)
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02, 1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02, 6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00, -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00, 3.754408661907416e00)
_P_LOW = 0.02425


@dataclass(frozen=True, eq=False)
class SampleRun:
    seed: int
    count: int
    samples: np.ndarray
    wasserstein: float | tuple[float, ...]
    error_proxy: float | tuple[float, ...]


@dataclass(frozen=True)
class ValidationResult:
    empirical: float
    bound: float
    error_proxy: float
    margin: float
    verdict: str
    seed: int
    count: int

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


@dataclass(frozen=True)
class LimitDiagnostics:
    """Per-component and per-pair quantities whose limits make the vector asymptotically normal."""

    n: int
    covariance: tuple[tuple[float, ...], ...]
    rho2: tuple[float, ...]
    fourth_gaps: tuple[float, ...]
    cross_gaps: dict[tuple[int, int], float]


def normal_pdf(x: float | np.ndarray) -> float | np.ndarray:
    value = np.exp(-0.5 * np.square(x)) / ROOT_TWO_PI
    return float(value) if np.ndim(value) == 0 else value


def normal_cdf(x: float | np.ndarray) -> float | np.ndarray:
    value = 0.5 * erfc(-np.asarray(x, dtype=float) / ROOT_TWO)
    return float(value) if np.ndim(value) == 0 else value


def _polynomial(coefficients: Sequence[float], x: np.ndarray) -> np.ndarray:
    total = np.zeros_like(x)
    for c in coefficients:
        total = total * x + c
    return total


def normal_quantile(p: float | np.ndarray) -> float | np.ndarray:
    """Inverse of the standard normal cdf: rational approximation plus one Halley step."""
    probs = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(probs)) or np.any(probs <= 0.0) or np.any(probs >= 1.0):
        raise ContractError("normal_quantile needs probabilities strictly inside (0, 1).")
    upper = 1.0 - probs
    low_tail = probs < _P_LOW
    high_tail = probs > 1.0 - _P_LOW
    central = ~(low_tail | high_tail)

    x = np.empty_like(probs)
    q = probs[central] - 0.5
    r = q * q
    x[central] = _polynomial(_A, r) * q / (_polynomial(_B, r) * r + 1.0)
    t = np.sqrt(-2.0 * np.log(probs[low_tail]))
    x[low_tail] = _polynomial(_C, t) / (_polynomial(_D, t) * t + 1.0)
    t = np.sqrt(-2.0 * np.log(upper[high_tail]))
    x[high_tail] = -_polynomial(_C, t) / (_polynomial(_D, t) * t + 1.0)

    # Phi(x) - p, computed on the tail that keeps the digits
    error = np.where(x <= 0.0, 0.5 * erfc(-x / ROOT_TWO) - probs, upper - 0.5 * erfc(x / ROOT_TWO))
    step = error * ROOT_TWO_PI * np.exp(0.5 * x * x)
    x = x - step / (1.0 + 0.5 * x * step)
    return float(x) if np.ndim(x) == 0 else x


def _quantile_antiderivative(u: np.ndarray) -> np.ndarray:
    """-phi(Phi^{-1}(u)), the antiderivative of the quantile function, with value 0 at u = 0 and 1."""
    values = np.zeros_like(u)
    inside = (u > 0.0) & (u < 1.0)
    values[inside] = -normal_pdf(normal_quantile(u[inside]))
    return values


def wasserstein1_to_normal(samples: Sequence[float] | np.ndarray) -> float:
    """Exact W_1 between the empirical law of ``samples`` and N(0, 1).

    Sums over order statistics the integral of |X_(i) - Phi^{-1}(u)| over the
    cell [(i-1)/N, i/N], split at Phi(X_(i)) when that falls inside the cell.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ContractError("wasserstein1_to_normal needs at least one sample.")
    if not np.all(np.isfinite(x)):
        raise ContractError("wasserstein1_to_normal received a non-finite sample.")
    count = x.size
    grid = np.arange(count + 1, dtype=float) / count
    anti = _quantile_antiderivative(grid)
    a, b = grid[:-1], grid[1:]
    fa, fb = anti[:-1], anti[1:]
    split = np.asarray(normal_cdf(x), dtype=float)
    fsplit = -np.asarray(normal_pdf(x), dtype=float)

    below = (fb - fa) - x * (b - a)
    above = x * (b - a) - (fb - fa)
    inside = x * (split - a) - (fsplit - fa) + (fb - fsplit) - x * (b - split)
    cells = np.where(split <= a, below, np.where(split >= b, above, inside))
    return float(np.sum(cells))


def error_proxy(samples: np.ndarray) -> float:
    """sqrt(2/N) * sample std + 2/sqrt(N)."""
    count = samples.size
    spread = float(np.std(samples, ddof=1)) if count > 1 else 0.0
    return math.sqrt(2.0 / count) * spread + 2.0 / math.sqrt(count)


def stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for chunk ``index`` of the run keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _draw_indices(space: FiniteProductSpace, size: int, rng: np.random.Generator) -> np.ndarray:
    """Atom indices of every coordinate, shape (size, n)."""
    columns = [rng.choice(c.size, size=size, p=c.weights()) for c in space.coordinates]
    return np.stack(columns, axis=1)


def evaluate(dec: HoeffdingDecomposition, indices: np.ndarray) -> np.ndarray:
    """W at each row of atom indices."""
    values = np.zeros(indices.shape[0])
    for subset, kernel in dec.components.items():
        if subset:
            values = values + kernel.values[tuple(indices[:, j - 1] for j in subset)]
        else:
            values = values + float(kernel.values)
    return values


def _model_parts(model: DegenerateUStatistic | VectorModel) -> list[HoeffdingDecomposition]:
    if isinstance(model, VectorModel):
        return [c.decomposition for c in model.components]
    return [model.decomposition]


def sample(model: DegenerateUStatistic | VectorModel, count: int, seed: int, threads: int = 1) -> SampleRun:
    """Draw ``count`` realizations of W (or of the vector W); reproducible for any ``threads``."""
    if count < 1:
        raise ContractError(f"Sample count must be >= 1, got {count}.")
    if not 0 <= seed <= MAX_SEED:
        raise ContractError(f"Seed must be an unsigned 64-bit integer, got {seed}.")
    parts = _model_parts(model)
    space = parts[0].space
    sizes = [min(SAMPLE_CHUNK, count - start) for start in range(0, count, SAMPLE_CHUNK)]

    def draw(chunk: int) -> np.ndarray:
        indices = _draw_indices(space, sizes[chunk], stream(seed, chunk))
        return np.stack([evaluate(dec, indices) for dec in parts], axis=1)

    started = time.perf_counter()
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pieces = list(pool.map(draw, range(len(sizes))))
    else:
        pieces = [draw(chunk) for chunk in range(len(sizes))]
    values = np.concatenate(pieces, axis=0)
    logger.debug("sampled %d draws in %d chunks (%.3fs)", count, len(sizes), time.perf_counter() - started)

    if isinstance(model, VectorModel):
        columns = [values[:, i] for i in range(values.shape[1])]
        return SampleRun(
            seed=seed,
            count=count,
            samples=values,
            wasserstein=tuple(wasserstein1_to_normal(c) for c in columns),
            error_proxy=tuple(error_proxy(c) for c in columns),
        )
    scalar = values[:, 0]
    return SampleRun(seed, count, scalar, wasserstein1_to_normal(scalar), error_proxy(scalar))


def bound_validation(
    u: DegenerateUStatistic,
    count: int,
    seed: int,
    mode: str = "cd-rho",
    constant_source: str = "enumerated",
    threads: int = 1,
) -> ValidationResult:
    """PASS iff the empirical W_1 is at most the bound plus three error proxies."""
    report = univariate_bound(u, mode=mode, constant_source=constant_source, threads=threads)
    run = sample(u, count, seed, threads)
    margin = report.bound + 3.0 * run.error_proxy - run.wasserstein
    return ValidationResult(
        empirical=run.wasserstein,
        bound=report.bound,
        error_proxy=run.error_proxy,
        margin=margin,
        verdict="PASS" if margin >= 0.0 else "FAIL",
        seed=seed,
        count=count,
    )


def limit_diagnostics(v: VectorModel, threads: int = 1) -> LimitDiagnostics:
    covariance = v.covariance()
    cross_gaps = {}
    for i in range(1, v.r + 1):
        for k in range(i + 1, v.r + 1):
            if v.orders[i - 1] == v.orders[k - 1]:
                moments = cross_moments(v, i, k, threads)
                cross_gaps[(i, k)] = moments.fourth - 1.0 - 2.0 * moments.covariance**2
    return LimitDiagnostics(
        n=v.space.n,
        covariance=tuple(tuple(float(x) for x in row) for row in covariance),
        rho2=tuple(rho_squared(c) for c in v.components),
        fourth_gaps=tuple(fourth_moment(c, threads) - 3.0 for c in v.components),
        cross_gaps=cross_gaps,
    )


def component_wasserstein(run: SampleRun) -> tuple[float, ...]:
    """Per-component W_1 to N(0, 1); a scalar run gives a 1-tuple."""
    if isinstance(run.wasserstein, tuple):
        return run.wasserstein
    return (run.wasserstein,)
