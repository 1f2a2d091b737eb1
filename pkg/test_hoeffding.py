#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Tests for Hoeffding decompositions and degenerate U-statistics."""

import math
from itertools import combinations

import numpy as np
import pytest

from conftest import disjoint_pairs
from errors import ModelError, NormalizationError
from generators import random_space, symmetric_ustat
from hoeffding import (
    DegenerateUStatistic,
    HoeffdingDecomposition,
    VectorModel,
    check_degenerate,
    decompose,
    degeneracy_residual,
    influences,
    is_normalized,
    normalize,
    orthogonality_residual,
    reconstruction_residual,
    rho_squared,
)
from space import SubsetKernel, make_kernel


def test_decompose_splits_linear_and_product_parts(coins):
    space = coins(2)
    dec = decompose(space, [make_kernel(space, [1, 2], lambda x, y: x + x * y)])
    assert dec.subsets() == [(1,), (1, 2)]
    np.testing.assert_allclose(dec.component((1,)).values, [-1.0, 1.0])
    np.testing.assert_allclose(dec.component((1, 2)).values, [[1.0, -1.0], [-1.0, 1.0]])
    assert dec.mean() == 0.0


def test_decompose_keeps_the_mean(coins):
    space = coins(1)
    dec = decompose(space, [SubsetKernel.from_flat(space, [1], [2.0, 4.0])])
    assert dec.mean() == pytest.approx(3.0)
    np.testing.assert_allclose(dec.component((1,)).values, [-1.0, 1.0])
    assert dec.variance() == pytest.approx(1.0)


def test_decompose_drops_negligible_components(coins):
    space = coins(2)
    dec = decompose(space, [make_kernel(space, [1, 2], lambda x, y: x * y + 1e-9 * x)])
    assert dec.subsets() == [(1, 2)]


def test_identities_on_random_kernels():
    rng = np.random.default_rng(11)
    for _ in range(50):
        space = random_space(rng, int(rng.integers(2, 6)))
        kernels = []
        for size in range(space.n + 1):
            for subset in combinations(range(1, space.n + 1), size):
                if rng.random() < 0.3:
                    kernels.append(SubsetKernel(subset, rng.standard_normal(space.shape(subset))))
        dec = decompose(space, kernels)
        assert reconstruction_residual(space, kernels, dec) <= 1e-9
        assert orthogonality_residual(dec) <= 1e-9
        assert degeneracy_residual(dec) <= 1e-9


def test_non_degenerate_statistic_is_rejected(coins):
    space = coins(2)
    dec = decompose(space, [make_kernel(space, [1, 2], lambda x, y: x + x * y)])
    report = check_degenerate(dec, 2)
    assert not report.ok
    assert report.offenders == ((1,),)
    with pytest.raises(ModelError, match=r"offending subsets: \[1\]"):
        DegenerateUStatistic(2, dec)


def test_negligible_off_order_component_is_not_an_offender(coins):
    space = coins(2)
    top = SubsetKernel((1, 2), np.array([[1.0, -1.0], [-1.0, 1.0]]))
    tiny = SubsetKernel((1,), np.array([1e-8, -1e-8]))
    assert check_degenerate(HoeffdingDecomposition(space, {(1,): tiny, (1, 2): top}), 2).ok
    DegenerateUStatistic(2, HoeffdingDecomposition(space, {(1,): tiny, (1, 2): top}))

    visible = SubsetKernel((1,), np.array([1e-3, -1e-3]))
    report = check_degenerate(HoeffdingDecomposition(space, {(1,): visible, (1, 2): top}), 2)
    assert report.offenders == ((1,),)


def test_symmetric_influences_equal_d_over_n():
    u = symmetric_ustat(4, 2, lambda x, y: x * y).statistic
    np.testing.assert_allclose(influences(u), [0.5] * 4)
    assert rho_squared(u) == pytest.approx(0.5, abs=1e-12)
    for n in (4, 6, 8):
        assert rho_squared(symmetric_ustat(n, 2, lambda x, y: x * y).statistic) == pytest.approx(2 / n, abs=1e-12)


def test_normalize(x1x2):
    scaled = x1x2.scaled(2.0)
    assert scaled.variance() == pytest.approx(4.0)
    assert not is_normalized(scaled)
    assert is_normalized(normalize(scaled))
    empty = DegenerateUStatistic(2, HoeffdingDecomposition(x1x2.space, {}))
    with pytest.raises(NormalizationError):
        normalize(empty)


def test_vector_covariance(coins):
    pairs = disjoint_pairs(4)
    single = DegenerateUStatistic(2, HoeffdingDecomposition(pairs.space, {(1, 2): pairs.components[(1, 2)].scaled(math.sqrt(2))}))
    space = pairs.space
    linear = DegenerateUStatistic(1, decompose(space, [make_kernel(space, [3], lambda x: x)]))
    v = VectorModel((linear, single, pairs))
    assert v.r == 3 and v.orders == (1, 2, 2)
    assert v.is_sorted()
    cov = v.covariance()
    assert cov[1, 2] == pytest.approx(1 / math.sqrt(2))
    assert cov[0, 1] == 0.0
    np.testing.assert_allclose(np.diag(cov), [1.0, 1.0, 1.0])


def test_vector_model_needs_one_space(x1x2, coins):
    other = DegenerateUStatistic(1, decompose(coins(3), [make_kernel(coins(3), [1], lambda x: x)]))
    with pytest.raises(ModelError, match="different space"):
        VectorModel((x1x2, other))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
