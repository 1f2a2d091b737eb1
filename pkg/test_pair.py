#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Tests for the coordinate-replacement exchangeable pair."""

import math

import pytest

from bounds import ROOT_TWO_OVER_PI
from conftest import disjoint_pairs
from errors import ContractError
from hoeffding import decompose, rho_squared
from moments import fourth_moment
from pair import (
    conditional_increment_variance,
    direct_fourth_increment,
    direct_third_increment,
    fourth_increment,
    increment_coefficient,
    increment_coefficients,
    pair_quantities,
    regression_check,
    squared_increment_decomposition,
    squared_increment_residual,
    third_increment_bound,
)
from shadows import kappa
from space import make_kernel


def test_increment_coefficients():
    assert increment_coefficients(2) == {0: 1.0, 1: 0.75, 2: 0.5, 3: 0.25, 4: 0.0}
    assert increment_coefficient(1, 1) == 0.5
    with pytest.raises(ContractError):
        increment_coefficient(5, 2)


def test_regression_property(random_instances):
    for u in random_instances:
        assert regression_check(u) <= 1e-12


def test_regression_fails_without_degeneracy(coins):
    space = coins(2)
    dec = decompose(space, [make_kernel(space, [1, 2], lambda x, y: x + x * y)])
    assert regression_check(dec, 2) == pytest.approx(0.5)
    with pytest.raises(ContractError):
        regression_check(dec)


def test_x1x2_pair_quantities(x1x2):
    assert fourth_increment(x1x2) == pytest.approx(2.0)
    assert direct_fourth_increment(x1x2) == pytest.approx(2.0)
    assert direct_third_increment(x1x2) == pytest.approx(4.0 / 3.0)
    assert third_increment_bound(x1x2, 2.0) == pytest.approx(4.0 / 3.0)
    quantities = pair_quantities(x1x2, exact_third=True)
    assert quantities.lam == 1.0
    assert quantities.variance_term == pytest.approx(0.0)
    assert quantities.third_increment == pytest.approx(4.0 / 3.0)


def test_squared_increment_of_disjoint_pairs():
    # W^2 = 1 + x1 x2 x3 x4 and the top subset carries coefficient 0
    increment = squared_increment_decomposition(disjoint_pairs(4))
    assert increment.square.subsets() == [(), (1, 2, 3, 4)]
    assert increment.decomposition.subsets() == [()]
    assert increment.decomposition.mean() == pytest.approx(1.0)
    assert increment.coefficients[4] == 0.0


def test_squared_increment_expansion(random_instances):
    for u in random_instances:
        assert squared_increment_residual(u) <= 1e-9


def test_fourth_increment_matches_enumeration(random_instances):
    for u in random_instances:
        assert fourth_increment(u) == pytest.approx(direct_fourth_increment(u), abs=1e-9)


def test_third_increment_bound_dominates(random_instances):
    for u in random_instances:
        assert direct_third_increment(u) <= third_increment_bound(u, fourth_increment(u)) + 1e-9


def test_increment_radicands(random_instances):
    for u in random_instances:
        gap = fourth_moment(u) - 3.0
        kappa_d = kappa(u.order)
        rho2 = rho_squared(u)
        variance_term = conditional_increment_variance(u)
        assert 0.0 <= variance_term <= gap + kappa_d * rho2 + 1e-9
        assert fourth_increment(u) <= 2.0 * gap + 3.0 * kappa_d * rho2 + 1e-9


def test_plug_in_terms_are_finite(x1x2):
    quantities = pair_quantities(x1x2)
    total = ROOT_TWO_OVER_PI * math.sqrt(quantities.variance_term) + quantities.third_increment
    assert total == pytest.approx(4.0 / 3.0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
