#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""JSON model files: coordinates, kernels, optional vector components and generator recipe.

Subsets are 1-based and kernel values are listed row-major over the atoms of
the coordinates in increasing index order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from errors import ModelError
from generators import generate
from hoeffding import DegenerateUStatistic, HoeffdingDecomposition, VectorModel, decompose
from space import DEFAULT_BUDGET, Coordinate, FiniteProductSpace, SubsetKernel

MODELS_DIR = Path(__file__).resolve().parent / "models"
MODEL_SUFFIX = ".json"


@dataclass(frozen=True)
class VectorEntry:
    order: int
    kernels: tuple[SubsetKernel, ...]


@dataclass(frozen=True, eq=False)
class Model:
    name: str
    space: FiniteProductSpace
    kernels: tuple[SubsetKernel, ...]
    order: int | None = None
    vector: tuple[VectorEntry, ...] = ()
    generator: dict[str, Any] | None = None
    projected: bool = False

    def decomposition(self) -> HoeffdingDecomposition:
        return decompose(self.space, self.kernels)

    def inferred_order(self) -> int:
        if self.order is not None:
            return self.order
        sizes = [k.order for k in self.kernels]
        if not sizes:
            raise ModelError(f"Model {self.name!r} has no components and no order.")
        return max(sizes)

    def statistic(self) -> DegenerateUStatistic:
        """The model as a degenerate U-statistic; ModelError lists the offending subsets otherwise."""
        return DegenerateUStatistic(self.inferred_order(), self.decomposition())

    def vector_model(self) -> VectorModel:
        if not self.vector:
            raise ModelError(f"Model {self.name!r} has no `vector` block.")
        return VectorModel(
            tuple(DegenerateUStatistic(entry.order, decompose(self.space, entry.kernels)) for entry in self.vector)
        )

    def with_budget(self, budget: int) -> Model:
        return replace(self, space=self.space.with_budget(budget))


def load_json(path: Path) -> dict[str, Any]:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ModelError(f"Model file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ModelError(f"Invalid JSON in model {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ModelError(f"Model {path} must be a JSON object.")
    return raw


def require_keys(data: dict[str, Any], keys: list[str], context: str) -> None:
    missing = [key for key in keys if key not in data]
    if missing:
        raise ModelError(f"Missing keys in {context}: {', '.join(missing)}")


def _parse_coordinates(raw: Any, budget: int) -> FiniteProductSpace:
    if not isinstance(raw, list) or not raw:
        raise ModelError("Model key `coordinates` must be a non-empty array.")
    coordinates = []
    for index, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ModelError(f"coordinates[{index}] must be an object.")
        require_keys(item, ["support", "probs"], f"coordinates[{index}]")
        try:
            coordinates.append(Coordinate(tuple(item["support"]), tuple(item["probs"])))
        except ModelError as exc:
            raise ModelError(f"coordinates[{index}]: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ModelError(f"coordinates[{index}] must hold numeric arrays.") from exc
    return FiniteProductSpace(tuple(coordinates), budget)


def _parse_kernels(space: FiniteProductSpace, raw: Any, context: str) -> tuple[SubsetKernel, ...]:
    if not isinstance(raw, list):
        raise ModelError(f"{context} must be an array.")
    kernels = []
    for index, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ModelError(f"{context}[{index}] must be an object.")
        require_keys(item, ["subset", "values"], f"{context}[{index}]")
        if not isinstance(item["values"], list):
            raise ModelError(f"{context}[{index}].values must be an array.")
        try:
            kernels.append(SubsetKernel.from_flat(space, item["subset"], item["values"]))
        except ModelError as exc:
            raise ModelError(f"{context}[{index}]: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ModelError(f"{context}[{index}] needs an integer subset and numeric values.") from exc
    return tuple(kernels)


def _parse_order(value: Any, field: str) -> int:
    integral = isinstance(value, int) or (isinstance(value, float) and value.is_integer())
    if isinstance(value, bool) or not integral:
        raise ModelError(f"{field} must be an integer, got {value!r}.")
    if value < 1:
        raise ModelError(f"{field} must be >= 1, got {value!r}.")
    return int(value)


def parse_model(raw: dict[str, Any], name: str = "model", budget: int = DEFAULT_BUDGET) -> Model:
    """Validate a decoded model document.

    A document either lists ``components`` (with ``coordinates``) or carries a
    ``generator`` block; when both are present the tables win and the recipe is
    kept as metadata.
    """
    name = str(raw.get("name", name))
    generator = raw.get("generator")
    if generator is not None:
        if not isinstance(generator, dict):
            raise ModelError("Model key `generator` must be an object.")
        require_keys(generator, ["kind", "params"], "generator")

    order = raw.get("order")
    if order is not None:
        order = _parse_order(order, "Model key `order`")

    if "components" not in raw and generator is not None:
        built = generate(str(generator["kind"]), generator["params"], budget)
        stat = built.statistic
        return Model(name, stat.space, tuple(stat.components.values()), stat.order, (), generator, built.projected)

    require_keys(raw, ["coordinates"], "root model")
    space = _parse_coordinates(raw["coordinates"], budget)
    kernels = _parse_kernels(space, raw.get("components", []), "components")

    vector: list[VectorEntry] = []
    raw_vector = raw.get("vector", [])
    if not isinstance(raw_vector, list):
        raise ModelError("Model key `vector` must be an array.")
    for index, item in enumerate(raw_vector):
        if not isinstance(item, dict):
            raise ModelError(f"vector[{index}] must be an object.")
        require_keys(item, ["order", "components"], f"vector[{index}]")
        entry_order = _parse_order(item["order"], f"vector[{index}].order")
        vector.append(VectorEntry(entry_order, _parse_kernels(space, item["components"], f"vector[{index}].components")))

    if not kernels and not vector:
        raise ModelError("Model needs `components`, `vector` or a `generator` block.")
    projected = raw.get("projected", False)
    if not isinstance(projected, bool):
        raise ModelError("Model key `projected` must be true or false.")
    return Model(name, space, kernels, order, tuple(vector), generator, projected)


def resolve_model_path(name_or_path: str | Path) -> Path:
    """A path as given, or a bundled model looked up by name in ``MODELS_DIR``."""
    path = Path(name_or_path)
    if path.exists():
        return path
    bundled = MODELS_DIR / f"{path.name.removesuffix(MODEL_SUFFIX)}{MODEL_SUFFIX}"
    if bundled.exists():
        return bundled
    return path


def load_model(path: str | Path, budget: int = DEFAULT_BUDGET) -> Model:
    resolved = resolve_model_path(path)
    return parse_model(load_json(resolved), name=resolved.stem, budget=budget)


def list_models() -> list[str]:
    return sorted(p.stem for p in MODELS_DIR.glob(f"*{MODEL_SUFFIX}"))


def _kernels_to_list(kernels: tuple[SubsetKernel, ...]) -> list[dict[str, Any]]:
    return [{"subset": list(k.subset), "values": k.flat()} for k in kernels]


def model_to_dict(model: Model) -> dict[str, Any]:
    data: dict[str, Any] = {
        "name": model.name,
        "coordinates": [{"support": list(c.support), "probs": list(c.probs)} for c in model.space.coordinates],
        "components": _kernels_to_list(model.kernels),
    }
    if model.order is not None:
        data["order"] = model.order
    if model.vector:
        data["vector"] = [{"order": e.order, "components": _kernels_to_list(e.kernels)} for e in model.vector]
    if model.generator is not None:
        data["generator"] = model.generator
    if model.projected:
        data["projected"] = True
    return data


def save_model(model: Model, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(model), indent=2), encoding="utf-8")
    return path


def model_from_statistic(
    name: str, u: DegenerateUStatistic, generator: dict[str, Any] | None = None, projected: bool = False
) -> Model:
    return Model(name, u.space, tuple(u.components.values()), u.order, (), generator, projected)
