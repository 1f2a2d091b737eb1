#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Wasserstein-type error bounds for normal approximation of degenerate U-statistics."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from itertools import groupby
from typing import Any, Sequence

import numpy as np

from errors import ContractError, PositiveDefinitenessError
from hoeffding import DegenerateUStatistic, VectorModel, is_normalized, rho_squared
from moments import cross_moments, fourth_moment
from pair import pair_quantities
from shadows import shadow_constant

logger = logging.getLogger(__name__)

MODES = ("cd-rho", "exact")
ROOT_TWO_OVER_PI = math.sqrt(2.0 / math.pi)
THIRD_FACTOR = 2.0 * math.sqrt(2.0) / 3.0
RADICAND_TOLERANCE = 1e-9
PD_THRESHOLD = 1e-10
JACOBI_TOLERANCE = 1e-12
MAX_JACOBI_DIM = 64


@dataclass(frozen=True)
class UnivariateBoundReport:
    mode: str
    order: int
    n: int
    constant_source: str
    fourth_moment: float
    fourth_cumulant_gap: float
    rho2: float
    c_d: float
    kappa: float
    term1: float
    term2: float
    total: float
    simplified: float
    exact_variance_term: float | None = None
    exact_third_term: float | None = None
    exact_total: float | None = None
    inconsistent: bool = False

    @property
    def bound(self) -> float:
        return self.exact_total if self.mode == "exact" and self.exact_total is not None else self.total

    def as_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["bound"] = self.bound
        return data


@dataclass(frozen=True)
class PairIngredient:
    i: int
    k: int
    order_i: int
    order_k: int
    cross_fourth: float
    covariance: float
    gaussian_fourth: float
    s0: float
    tau: float
    contribution: float


@dataclass(frozen=True)
class MultivariateBoundReport:
    r: int
    n: int
    orders: tuple[int, ...]
    constant_source: str
    quantity_a: float
    fourth_moments: tuple[float, ...]
    rho2: tuple[float, ...]
    sigma_term: float
    covariance: tuple[tuple[float, ...], ...]
    min_eigenvalue: float
    lambda_inverse_norm: float
    coefficient_m2_tilde: float
    coefficient_m3: float
    coefficient_m1: float | None
    coefficient_m2: float | None
    inverse_sqrt_norm: float | None
    ingredients: tuple[PairIngredient, ...] = field(default=())
    inconsistent: bool = False

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SmoothnessConstants:
    """Caller-supplied bounds on derivatives of the test function h."""

    m1: float | None = None
    m2: float | None = None
    m2_tilde: float = 0.0
    m3: float = 0.0

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "m2_tilde", "m3"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ContractError(f"Smoothness constant {name} must be >= 0, got {value!r}.")


@dataclass(frozen=True)
class MultivariateBounds:
    smooth_third: float
    smooth_second: float | None


def _clamp(value: float, label: str, flags: list[str]) -> float:
    """Clamp a radicand at 0, flagging values below -RADICAND_TOLERANCE."""
    if value < -RADICAND_TOLERANCE:
        flags.append(label)
        logger.warning("negative radicand for %s: %r", label, value)
    return max(value, 0.0)


def bound_terms(gap: float, rho2: float, kappa_d: float, flags: list[str] | None = None) -> tuple[float, float, float, float]:
    """(term1, term2, total, simplified) of the univariate bound."""
    flags = [] if flags is None else flags
    term1 = ROOT_TWO_OVER_PI * math.sqrt(_clamp(gap + kappa_d * rho2, "variance radicand", flags))
    term2 = THIRD_FACTOR * math.sqrt(_clamp(2.0 * gap + 3.0 * kappa_d * rho2, "fourth increment radicand", flags))
    simplified = (ROOT_TWO_OVER_PI + 4.0 / 3.0) * math.sqrt(abs(gap)) + math.sqrt(kappa_d) * (
        ROOT_TWO_OVER_PI + 2.0 * math.sqrt(2.0) / math.sqrt(3.0)
    ) * math.sqrt(max(rho2, 0.0))
    return term1, term2, term1 + term2, simplified


def symmetric_bound(d: int, n: int, gap: float, constant_source: str = "enumerated") -> float:
    """Simplified univariate bound with rho^2 = d/n, valid for symmetric statistics.

    (sqrt(2/pi) + 4/3) sqrt|gap| + sqrt(kappa_d d / n) (sqrt(2/pi) + 2 sqrt(2) / sqrt(3))
    """
    kappa_d = shadow_constant(d, constant_source) + 2 * d
    return bound_terms(gap, d / n, kappa_d)[3]


def plugin_univariate(var_term: float, third_term: float) -> float:
    """sqrt(2/pi) sqrt(Var((1/2λ)E[(W'-W)^2|G])) + (1/3λ)E|W'-W|^3."""
    if var_term < 0 or third_term < 0:
        raise ContractError(f"Plug-in inputs must be >= 0, got {var_term!r} and {third_term!r}.")
    return ROOT_TWO_OVER_PI * math.sqrt(var_term) + third_term


def plugin_multivariate(
    lambda_inverse_norm: float,
    expected_remainder: float,
    expected_hs_norm: float,
    expected_cubed_increment: float,
    smoothness: SmoothnessConstants,
    inverse_sqrt_norm: float | None = None,
) -> MultivariateBounds:
    """Multivariate plug-in bounds for test functions with three or two bounded derivatives."""
    inputs = (lambda_inverse_norm, expected_remainder, expected_hs_norm, expected_cubed_increment)
    if any(x < 0 for x in inputs) or (inverse_sqrt_norm is not None and inverse_sqrt_norm < 0):
        raise ContractError("Plug-in inputs must all be >= 0.")
    third = lambda_inverse_norm * (
        (smoothness.m1 or 0.0) * expected_remainder
        + 0.25 * smoothness.m2_tilde * expected_hs_norm
        + smoothness.m3 * expected_cubed_increment / 18.0
    )
    second = None
    if inverse_sqrt_norm is not None:
        second = (smoothness.m1 or 0.0) * lambda_inverse_norm * (
            expected_remainder + inverse_sqrt_norm / math.sqrt(2.0 * math.pi) * expected_hs_norm
        ) + math.sqrt(2.0 * math.pi) / 24.0 * (smoothness.m2 or 0.0) * lambda_inverse_norm * inverse_sqrt_norm * expected_cubed_increment
    return MultivariateBounds(smooth_third=third, smooth_second=second)


def univariate_bound(
    u: DegenerateUStatistic,
    mode: str = "cd-rho",
    constant_source: str = "enumerated",
    exact_third: bool = False,
    tolerance: float = 1e-9,
    threads: int = 1,
) -> UnivariateBoundReport:
    if mode not in MODES:
        raise ContractError(f"Unknown bound mode {mode!r}; expected one of {', '.join(MODES)}.")
    if not is_normalized(u, tolerance):
        raise ContractError(f"univariate_bound needs a normalized statistic; variance is {u.variance()!r}.")
    d = u.order
    fourth = fourth_moment(u, threads)
    gap = fourth - 3.0
    rho2 = rho_squared(u)
    c_d = shadow_constant(d, constant_source)
    kappa_d = c_d + 2 * d
    flags: list[str] = []
    term1, term2, total, simplified = bound_terms(gap, rho2, kappa_d, flags)

    exact_variance = exact_third_term = exact_total = None
    if mode == "exact":
        quantities = pair_quantities(u, exact_third=exact_third, fourth=fourth)
        exact_variance = max(quantities.variance_term, 0.0)
        exact_third_term = quantities.third_increment
        exact_total = plugin_univariate(exact_variance, exact_third_term)

    return UnivariateBoundReport(
        mode=mode,
        order=d,
        n=u.space.n,
        constant_source=constant_source,
        fourth_moment=fourth,
        fourth_cumulant_gap=gap,
        rho2=rho2,
        c_d=c_d,
        kappa=kappa_d,
        term1=term1,
        term2=term2,
        total=total,
        simplified=simplified,
        exact_variance_term=exact_variance,
        exact_third_term=exact_third_term,
        exact_total=exact_total,
        inconsistent=bool(flags),
    )


def gaussian_square_moment(v: float) -> float:
    """E[Z_i^2 Z_k^2] for a centered Gaussian pair with unit variances and covariance v."""
    return 1.0 + 2.0 * v * v


def min_eigenvalue_sym(matrix: Sequence[Sequence[float]] | np.ndarray, tolerance: float = JACOBI_TOLERANCE, max_sweeps: int = 100) -> float:
    """Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"Expected a square matrix, got shape {a.shape}.")
    size = a.shape[0]
    if size > MAX_JACOBI_DIM:
        raise ContractError(f"Jacobi solver handles at most {MAX_JACOBI_DIM} rows, got {size}.")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
        raise ContractError("Matrix is not symmetric within 1e-12.")
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(a**2) - np.sum(np.diag(a) ** 2)))
        if off < tolerance:
            break
        for p in range(size - 1):
            for q in range(p + 1, size):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * row_p - s * row_q, s * row_p + c * row_q
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * col_p - s * col_q, s * col_p + c * col_q
    else:
        logger.warning("Jacobi solver stopped after %d sweeps", max_sweeps)
    return float(np.min(np.diag(a)))


def inverse_sqrt_norm(matrix: Sequence[Sequence[float]] | np.ndarray) -> float:
    """Operator norm of V^{-1/2}, i.e. lambda_min^{-1/2}."""
    smallest = min_eigenvalue_sym(matrix)
    if smallest <= PD_THRESHOLD:
        raise PositiveDefinitenessError(f"Covariance matrix is not positive definite (lambda_min = {smallest!r}).")
    return 1.0 / math.sqrt(smallest)


def multivariate_A(
    v: VectorModel,
    mode: str = "exact-tau",
    constant_source: str = "enumerated",
    tolerance: float = 1e-9,
    threads: int = 1,
) -> MultivariateBoundReport:
    """Quantity A and the bound coefficients for a vector of degenerate U-statistics.

    Every C_{i,k} max(rho_i^2, rho_k^2) term is replaced by the exact tau_{i,k}.
    """
    if mode != "exact-tau":
        raise ContractError(f"Unknown multivariate mode {mode!r}; only 'exact-tau' is supported.")
    if not v.is_sorted():
        raise ContractError(f"Component orders must be non-decreasing, got {list(v.orders)}.")
    for index, component in enumerate(v.components, start=1):
        if not is_normalized(component, tolerance):
            raise ContractError(f"vector[{index}] is not normalized (variance {component.variance()!r}).")

    orders = v.orders
    q1 = orders[0]
    fourths = [fourth_moment(c, threads) for c in v.components]
    rho2 = [rho_squared(c) for c in v.components]
    constants = {q: shadow_constant(q, constant_source) for q in sorted(set(orders))}
    blocks = [list(group) for _, group in groupby(range(1, v.r + 1), key=lambda i: orders[i - 1])]
    flags: list[str] = []
    ingredients: list[PairIngredient] = []
    quantity_a = 0.0

    for block in blocks:
        q = orders[block[0] - 1]
        block_sum = 0.0
        for i in block:
            for k in block:
                if k < i:
                    continue
                cross = cross_moments(v, i, k, threads)
                ri, rk = rho2[i - 1], rho2[k - 1]
                gaussian = gaussian_square_moment(cross.covariance)
                value = cross.fourth - gaussian + q * min(rk, ri) + q * math.sqrt(rk * ri) + cross.tau
                block_sum += value if i == k else 2.0 * value
                ingredients.append(PairIngredient(i, k, q, q, cross.fourth, cross.covariance, gaussian, cross.s0, cross.tau, value))
        quantity_a += 4.0 * (q * q) / (q1 * q1) * block_sum

    for left_index, left in enumerate(blocks):
        for right in blocks[left_index + 1 :]:
            ql, qm = orders[left[0] - 1], orders[right[0] - 1]
            cross_sum = 0.0
            for i in left:
                for k in right:
                    cross = cross_moments(v, i, k, threads)
                    ri, rk = rho2[i - 1], rho2[k - 1]
                    first = math.sqrt(_clamp(fourths[i - 1] - 1.0, f"E[W({i})^4]-1", flags))
                    second = math.sqrt(
                        _clamp(fourths[k - 1] - 3.0 + (2 * qm + constants[qm]) * rk, f"mixed radicand ({i},{k})", flags)
                    )
                    value = first * second + min(ql * rk, qm * ri) + cross.tau
                    cross_sum += value
                    ingredients.append(
                        PairIngredient(i, k, ql, qm, cross.fourth, cross.covariance, gaussian_square_moment(cross.covariance), cross.s0, cross.tau, value)
                    )
            quantity_a += 2.0 * (ql + qm) ** 2 / (q1 * q1) * cross_sum

    if quantity_a < -RADICAND_TOLERANCE:
        flags.append("quantity A")
        logger.warning("quantity A is negative: %r", quantity_a)
    root_a = math.sqrt(max(quantity_a, 0.0))

    sigma_term = 0.0
    for block in blocks:
        q = orders[block[0] - 1]
        sigma_term += (q / q1) * sum(
            math.sqrt(_clamp(2.0 * (fourths[i - 1] - 3.0) + 3.0 * (constants[q] + 2 * q) * rho2[i - 1], f"component {i} radicand", flags))
            for i in block
        )

    covariance = v.covariance()
    smallest = min_eigenvalue_sym(covariance)
    norm = 1.0 / math.sqrt(smallest) if smallest > PD_THRESHOLD else None
    return MultivariateBoundReport(
        r=v.r,
        n=v.space.n,
        orders=orders,
        constant_source=constant_source,
        quantity_a=quantity_a,
        fourth_moments=tuple(fourths),
        rho2=tuple(rho2),
        sigma_term=sigma_term,
        covariance=tuple(tuple(float(x) for x in row) for row in covariance),
        min_eigenvalue=smallest,
        lambda_inverse_norm=v.space.n / q1,
        coefficient_m2_tilde=root_a / (4.0 * q1),
        coefficient_m3=math.sqrt(2.0 * v.r) / 9.0 * sigma_term,
        coefficient_m1=None if norm is None else norm * root_a / (math.sqrt(2.0 * math.pi) * q1),
        coefficient_m2=None if norm is None else math.sqrt(math.pi * v.r) / 6.0 * norm * sigma_term,
        inverse_sqrt_norm=norm,
        ingredients=tuple(ingredients),
        inconsistent=bool(flags),
    )


def multivariate_bound(report: MultivariateBoundReport, smoothness: SmoothnessConstants) -> MultivariateBounds:
    """Evaluate bound (i) and, when M_1 or M_2 is supplied, bound (ii)."""
    third = report.coefficient_m2_tilde * smoothness.m2_tilde + report.coefficient_m3 * smoothness.m3
    second = None
    if smoothness.m1 is not None or smoothness.m2 is not None:
        if report.inverse_sqrt_norm is None:
            raise PositiveDefinitenessError(
                f"Bound (ii) needs a positive definite covariance (lambda_min = {report.min_eigenvalue!r})."
            )
        second = (report.coefficient_m1 or 0.0) * (smoothness.m1 or 0.0) + (report.coefficient_m2 or 0.0) * (smoothness.m2 or 0.0)
    return MultivariateBounds(smooth_third=third, smooth_second=second)
