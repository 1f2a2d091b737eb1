#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Shared fixtures: fair-coin spaces, the x1*x2 model and seeded random instances."""

from __future__ import annotations

import math

import numpy as np
import pytest

from generators import homogeneous_sum, random_space, random_statistic
from hoeffding import DegenerateUStatistic, HoeffdingDecomposition, normalize
from space import FiniteProductSpace, SubsetKernel

INSTANCE_SEED = 20240611
INSTANCE_COUNT = 50


def coin_space(n: int) -> FiniteProductSpace:
    return FiniteProductSpace.iid(n, (-1.0, 1.0), (0.5, 0.5))


def disjoint_pairs(n: int) -> DegenerateUStatistic:
    """sum_m x_{2m-1} x_{2m} / sqrt(n/2) on fair coins."""
    space = coin_space(n)
    table = np.array([[1.0, -1.0], [-1.0, 1.0]]) / math.sqrt(n / 2)
    components = {(2 * m - 1, 2 * m): SubsetKernel((2 * m - 1, 2 * m), table) for m in range(1, n // 2 + 1)}
    return DegenerateUStatistic(2, HoeffdingDecomposition(space, components))


def linear_sum(n: int) -> DegenerateUStatistic:
    space = coin_space(n)
    table = np.array([-1.0, 1.0]) / math.sqrt(n)
    return DegenerateUStatistic(1, HoeffdingDecomposition(space, {(j,): SubsetKernel((j,), table) for j in range(1, n + 1)}))


@pytest.fixture
def coins():
    return coin_space


@pytest.fixture
def x1x2() -> DegenerateUStatistic:
    return homogeneous_sum(2, 2, {(1, 2): 1.0}).statistic


@pytest.fixture(scope="session")
def random_instances() -> list[DegenerateUStatistic]:
    """Normalized degenerate statistics with n <= 5, d <= 2 and at most 3 atoms per coordinate."""
    rng = np.random.default_rng(INSTANCE_SEED)
    instances = []
    for _ in range(INSTANCE_COUNT):
        space = random_space(rng, int(rng.integers(2, 6)))
        instances.append(normalize(random_statistic(rng, space, int(rng.integers(1, 3)))))
    return instances


@pytest.fixture(scope="session")
def random_pairs() -> list[tuple[DegenerateUStatistic, DegenerateUStatistic]]:
    """Pairs of normalized statistics sharing one random space."""
    rng = np.random.default_rng(INSTANCE_SEED + 1)
    pairs = []
    for _ in range(INSTANCE_COUNT):
        space = random_space(rng, int(rng.integers(2, 6)))
        first = normalize(random_statistic(rng, space, int(rng.integers(1, 3))))
        second = normalize(random_statistic(rng, space, int(rng.integers(1, 3))))
        pairs.append((first, second))
    return pairs
