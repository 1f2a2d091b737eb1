#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Tests for sampling, the normal helpers and the W_1 estimator."""

import math

import numpy as np
import pytest

from conftest import disjoint_pairs, linear_sum
from errors import ContractError
from generators import balanced_coefficients, homogeneous_sum, random_coefficients
from hoeffding import VectorModel
from mc import (
    SAMPLE_CHUNK,
    bound_validation,
    component_wasserstein,
    limit_diagnostics,
    normal_cdf,
    normal_pdf,
    normal_quantile,
    sample,
    wasserstein1_to_normal,
)
from moments import fourth_moment


def quadrature_distance(samples, nodes=1_000_001, lo=-8.0, hi=8.0):
    """Midpoint rule for the integral of |F_N - Phi| on a grid refined at every sample."""
    x = np.sort(np.asarray(samples, dtype=float))
    grid = np.union1d(np.linspace(lo, hi, nodes), x)
    mid = 0.5 * (grid[1:] + grid[:-1])
    empirical = np.searchsorted(x, mid, side="right") / x.size
    return float(np.sum(np.abs(empirical - normal_cdf(mid)) * np.diff(grid)))


def test_normal_helpers():
    assert normal_cdf(0.0) == 0.5
    assert normal_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert normal_quantile(0.5) == pytest.approx(0.0, abs=1e-12)
    assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)


@pytest.mark.parametrize("p", [1e-12, 1e-6, 0.01, 0.3, 0.7, 0.99, 1 - 1e-6, 1 - 1e-12])
def test_normal_quantile_inverts_cdf(p):
    x = normal_quantile(p)
    tail = min(p, 1 - p)
    recovered = normal_cdf(x) if p <= 0.5 else normal_cdf(-x)
    assert recovered == pytest.approx(tail, rel=1e-8)


def test_normal_quantile_is_vectorized():
    probs = np.array([0.001, 0.5, 0.999])
    values = normal_quantile(probs)
    assert values.shape == (3,)
    assert values[0] == pytest.approx(-values[2])


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_normal_quantile_domain(p):
    with pytest.raises(ContractError):
        normal_quantile(p)


def test_point_mass_at_zero():
    assert wasserstein1_to_normal(np.zeros(10)) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-9)
    assert wasserstein1_to_normal([0.0]) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-9)


def test_symmetric_two_point_law():
    samples = [-1.0, 1.0] * 50
    assert wasserstein1_to_normal(samples) == pytest.approx(quadrature_distance(samples), abs=1e-6)


def test_matches_quadrature_oracle():
    rng = np.random.default_rng(17)
    for _ in range(20):
        size = int(rng.integers(1, 40))
        samples = np.round(rng.standard_normal(size) * 1.5, 1)
        assert wasserstein1_to_normal(samples) == pytest.approx(quadrature_distance(samples), abs=1e-6)


def test_normal_draws_are_close():
    rng = np.random.default_rng(23)
    draws = normal_quantile(rng.uniform(1e-12, 1 - 1e-12, size=1_000_000))
    assert wasserstein1_to_normal(draws) < 0.01


def test_shift_increases_distance():
    grid = normal_quantile((np.arange(200) + 0.5) / 200)
    base = wasserstein1_to_normal(grid)
    assert base < wasserstein1_to_normal(grid + 0.5) < wasserstein1_to_normal(grid + 1.0)


def test_estimator_contract():
    with pytest.raises(ContractError):
        wasserstein1_to_normal([])
    with pytest.raises(ContractError):
        wasserstein1_to_normal([0.0, float("inf")])


def test_sample_range_and_determinism(x1x2):
    run = sample(x1x2, 4, seed=7)
    assert run.samples.shape == (4,)
    assert set(np.unique(run.samples)) <= {-1.0, 1.0}
    again = sample(x1x2, 4, seed=7)
    assert np.array_equal(run.samples, again.samples)
    assert run.wasserstein == again.wasserstein


def test_sampling_is_thread_independent(x1x2):
    count = SAMPLE_CHUNK * 2 + 17
    single = sample(x1x2, count, seed=99)
    threaded = sample(x1x2, count, seed=99, threads=3)
    assert np.array_equal(single.samples, threaded.samples)
    assert single.wasserstein == threaded.wasserstein


def test_sample_moments():
    u = homogeneous_sum(8, 2, random_coefficients(8, 2, seed=4)).statistic
    count = 100_000
    run = sample(u, count, seed=2024)
    assert abs(run.samples.mean()) <= 4 * math.sqrt(1 / count)
    assert abs(np.mean(run.samples**2) - 1.0) <= 5 * math.sqrt(fourth_moment(u) / count)


def test_sample_contract(x1x2):
    with pytest.raises(ContractError):
        sample(x1x2, 0, seed=1)
    with pytest.raises(ContractError):
        sample(x1x2, 10, seed=-1)
    with pytest.raises(ContractError):
        sample(x1x2, 10, seed=2**64)


def test_bound_validation_x1x2(x1x2):
    result = bound_validation(x1x2, 100_000, seed=5)
    assert result.passed
    assert result.bound == pytest.approx(11.2575, abs=1e-3)
    assert result.empirical < result.bound


def test_bound_validation_random_dense_sum():
    u = homogeneous_sum(12, 2, random_coefficients(12, 2, seed=12)).statistic
    result = bound_validation(u, 100_000, seed=6)
    assert result.verdict == "PASS"
    assert result.margin >= 0.0


def test_bound_validation_balanced_sum():
    u = homogeneous_sum(12, 2, balanced_coefficients(12, 2)).statistic
    result = bound_validation(u, 100_000, seed=12)
    assert result.verdict == "PASS"
    assert result.empirical <= result.bound


def test_limit_diagnostics_trend():
    diagnostics = [limit_diagnostics(VectorModel((linear_sum(n), disjoint_pairs(n)))) for n in (4, 8, 12)]
    for earlier, later in zip(diagnostics, diagnostics[1:]):
        for index in range(2):
            assert later.rho2[index] < earlier.rho2[index]
            assert abs(later.fourth_gaps[index]) < abs(earlier.fourth_gaps[index])
    assert np.allclose(diagnostics[-1].covariance, np.eye(2), atol=1e-12)
    assert diagnostics[-1].cross_gaps == {}


def test_vector_sampling():
    v = VectorModel((linear_sum(4), disjoint_pairs(4)))
    run = sample(v, 1000, seed=3)
    assert run.samples.shape == (1000, 2)
    assert len(component_wasserstein(run)) == 2


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
