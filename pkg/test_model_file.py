#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Tests for loading, validating and saving model files."""

import json

import pytest

from errors import BudgetError, ModelError
from generators import symmetric_ustat
from hoeffding import is_normalized, rho_squared
from model_file import (
    MODELS_DIR,
    list_models,
    load_model,
    model_from_statistic,
    model_to_dict,
    parse_model,
    resolve_model_path,
    save_model,
)
from moments import fourth_moment

COIN = {"support": [-1, 1], "probs": [0.5, 0.5]}


def test_bundled_models_are_listed():
    names = list_models()
    for expected in ("x1x2", "symmetric_xy_n4", "balanced_d2_n8", "nondegenerate_pair", "linear_quadratic_n8"):
        assert expected in names
    assert resolve_model_path("x1x2") == MODELS_DIR / "x1x2.json"
    assert resolve_model_path("x1x2.json") == MODELS_DIR / "x1x2.json"


def test_load_x1x2():
    model = load_model("x1x2")
    u = model.statistic()
    assert model.name == "x1x2"
    assert u.order == 2
    assert list(u.components) == [(1, 2)]
    assert fourth_moment(u) == pytest.approx(1.0)


def test_generator_model():
    model = load_model("symmetric_xy_n4")
    u = model.statistic()
    assert model.generator["kind"] == "symmetric"
    assert len(u.components) == 6
    assert rho_squared(u) == pytest.approx(0.5)
    assert is_normalized(u)


def test_round_trip(tmp_path):
    for name in ("x1x2", "balanced_d2_n8", "linear_quadratic_n8"):
        model = load_model(name)
        path = save_model(model, tmp_path / "nested" / f"{name}.json")
        again = load_model(path)
        assert model_to_dict(again) == model_to_dict(model)


def test_saved_generator_model_keeps_recipe(tmp_path):
    model = load_model("balanced_d2_n8")
    path = save_model(model, tmp_path / "balanced.json")
    raw = json.loads(path.read_text(encoding="utf-8"))
    assert raw["generator"]["kind"] == "homogeneous"
    assert len(raw["components"]) == 28
    assert load_model(path).statistic().order == 2


def test_model_from_statistic(x1x2):
    model = model_from_statistic("product", x1x2)
    data = model_to_dict(model)
    assert data["order"] == 2
    assert data["components"] == [{"subset": [1, 2], "values": [1.0, -1.0, -1.0, 1.0]}]


def test_projection_flag_survives_save_and_load(tmp_path):
    built = symmetric_ustat(4, 2, lambda x, y: x + y + x * y)
    assert built.projected
    model = model_from_statistic("projected_n4", built.statistic, projected=built.projected)
    assert model_to_dict(model)["projected"] is True
    again = load_model(save_model(model, tmp_path / "projected.json"))
    assert again.projected
    assert model_to_dict(again) == model_to_dict(model)
    assert not load_model("x1x2").projected
    assert "projected" not in model_to_dict(load_model("x1x2"))


def test_nondegenerate_model_is_reported():
    model = load_model("nondegenerate_pair")
    with pytest.raises(ModelError, match="not degenerate"):
        model.statistic()


def test_vector_model():
    model = load_model("linear_quadratic_n8")
    v = model.vector_model()
    assert v.orders == (1, 2)
    assert v.is_sorted()
    assert all(is_normalized(c) for c in v.components)
    with pytest.raises(ModelError, match="vector"):
        load_model("x1x2").vector_model()


@pytest.mark.parametrize(
    "raw, message",
    [
        ({"components": []}, "Missing keys in root model: coordinates"),
        ({"coordinates": [COIN]}, "needs `components`"),
        ({"coordinates": [{"support": [-1, 1]}], "components": []}, r"coordinates\[0\]"),
        ({"coordinates": [{"support": [-1, 1], "probs": [0.5, 0.6]}], "components": []}, "sum to 1"),
        ({"coordinates": [{"support": [-1, 1], "probs": [1.0, 0.0]}], "components": []}, "strictly positive"),
        ({"coordinates": [COIN, COIN], "components": [{"subset": [1, 2], "values": [1, 2, 3]}]}, "needs 4 values"),
        ({"coordinates": [COIN], "components": [{"subset": [2], "values": [1, 2]}]}, "outside"),
        ({"coordinates": [COIN], "components": [{"values": [1, 2]}]}, r"components\[0\]"),
        ({"coordinates": [COIN], "order": 0, "components": []}, "order"),
        ({"coordinates": [COIN], "order": "two", "components": []}, "`order` must be an integer"),
        ({"coordinates": [COIN], "order": 1.5, "components": []}, "`order` must be an integer"),
        ({"coordinates": [COIN], "components": [{"subset": [1], "values": ["a", "b"]}]}, r"components\[0\] needs .* numeric values"),
        ({"coordinates": [COIN], "components": [{"subset": [1], "values": 3}]}, r"components\[0\]\.values must be an array"),
        ({"coordinates": [COIN], "components": [{"subset": 1, "values": [1, 2]}]}, r"components\[0\] needs an integer subset"),
        (
            {"coordinates": [COIN], "vector": [{"order": None, "components": []}]},
            r"vector\[0\]\.order must be an integer",
        ),
        ({"coordinates": [COIN], "components": [{"subset": [1], "values": [1, -1]}], "projected": "yes"}, "projected"),
        ({"generator": {"kind": "symmetric"}}, "Missing keys in generator: params"),
        ({"generator": {"kind": "nope", "params": {"n": 2}}}, "Unknown generator"),
    ],
)
def test_invalid_models(raw, message):
    with pytest.raises(ModelError, match=message):
        parse_model(raw)


def test_file_errors(tmp_path):
    with pytest.raises(ModelError, match="not found"):
        load_model(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ModelError, match="Invalid JSON"):
        load_model(broken)
    listed = tmp_path / "list.json"
    listed.write_text("[]", encoding="utf-8")
    with pytest.raises(ModelError, match="JSON object"):
        load_model(listed)


def test_budget_is_carried():
    model = load_model("balanced_d2_n8", budget=2)
    with pytest.raises(BudgetError):
        model.statistic()
    assert load_model("x1x2").with_budget(16).space.budget == 16


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
