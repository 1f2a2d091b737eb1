#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Tests for shadow classes, stabilizers and C_d."""

import math

import pytest

from errors import CapabilityError, ContractError
from generators import symmetric_ustat
from hoeffding import rho_squared
from moments import tau
from shadows import (
    canonical_form,
    compute_Cd,
    enumerate_mixed_shadow_classes,
    enumerate_shadow_classes,
    induced_shadow,
    kappa,
    mixed_shadow_weight,
    orbit,
    pairwise_intersecting,
    shadow_constant,
    stabilizer_size,
    tau_by_shadow_class,
)


def test_order_one_has_a_single_class():
    classes = enumerate_shadow_classes(1)
    assert len(classes) == 1
    assert classes[0].subsets() == ((1,), (1,), (1,), (1,))
    assert compute_Cd(1) == 1.0


def test_order_two_classes():
    classes = enumerate_shadow_classes(2)
    assert len(classes) == 10
    by_size = {size: [c for c in classes if c.size == size] for size in (2, 3)}
    assert [c.gamma for c in by_size[2]] == [2]
    assert len(by_size[3]) == 9 and all(c.gamma == 1 for c in by_size[3])
    assert all(pairwise_intersecting(c.sets) for c in classes)
    assert compute_Cd(2) == pytest.approx(19.0, abs=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_closed_form_matches_brute_force(d):
    for shadow in enumerate_shadow_classes(d):
        assert canonical_form(shadow.sets, shadow.size) == shadow.sets
        assert stabilizer_size(shadow.sets, shadow.size) == shadow.gamma
        assert len(orbit(shadow.sets, shadow.size)) == shadow.orbit_size


def test_classes_are_distinct():
    classes = enumerate_shadow_classes(3)
    assert len({(c.size, c.sets) for c in classes}) == len(classes)


def test_constants_by_source():
    assert shadow_constant(2) == pytest.approx(19.0)
    assert shadow_constant(2, "published") == 13.0
    assert kappa(2, "published") == 17.0
    assert kappa(2) == pytest.approx(23.0)
    with pytest.raises(CapabilityError):
        shadow_constant(3, "published")
    with pytest.raises(ContractError):
        shadow_constant(2, "guessed")


def test_capability_cap():
    with pytest.raises(CapabilityError):
        enumerate_shadow_classes(6)
    with pytest.raises(ContractError):
        enumerate_shadow_classes(0)


def test_mixed_one_two_shadows():
    classes = enumerate_mixed_shadow_classes(1, 2)
    assert len(classes) == 2
    for shadow in classes:
        f1, f2, f3, f4 = shadow.subsets()
        assert shadow.size == 2 and shadow.gamma == 1
        assert f2 == f4 == (1, 2)
        assert len(f1) == len(f3) == 1
    assert {c.subsets()[0] == c.subsets()[2] for c in classes} == {True, False}
    assert mixed_shadow_weight(1, 2) == 2.0


def test_induced_shadow():
    shadow = induced_shadow(((3, 5), (3, 5), (3, 5), (3, 5)))
    assert shadow.size == 2 and shadow.gamma == 2
    assert shadow in enumerate_shadow_classes(2)
    relabeled = induced_shadow(((2, 7), (2, 9), (7, 9), (2, 7)))
    assert relabeled == induced_shadow(((1, 2), (1, 3), (2, 3), (1, 2)))


def test_tau_split_by_class():
    u = symmetric_ustat(5, 2, lambda x, y: x * y).statistic
    parts = tau_by_shadow_class(u)
    assert math.fsum(p.total for p in parts) == pytest.approx(tau(u))
    assert len(parts) == 10
    for part in parts:
        assert part.total <= part.bound + 1e-12
        expected = 0.1 if part.shadow.size == 2 else 0.6
        assert part.total == pytest.approx(expected)
    assert math.fsum(p.bound for p in parts) == pytest.approx(compute_Cd(2) * rho_squared(u))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
