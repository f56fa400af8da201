"""Linear scorer for the standalone executable.

Reads the same JSON shape the engine's built-in linear model uses, so a
file can be served over the bridge or loaded directly and produce the
same numbers: {"weights": [...], "bias": b, "squash": "clip01"|"logistic",
"categorical_weights": {"index": {"CATEGORY": w, ...}}}.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .serve import FeatureValue, Prediction


def _logistic(z: float) -> float:
    # split on sign so exp never overflows
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _number(value: object, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{what} must be a number, got {value!r}")
    return float(value)


class LinearScorer:
    def __init__(
        self,
        weights: list[float | None],
        bias: float,
        squash: str,
        categorical_weights: dict[int, dict[str, float]],
    ):
        self.weights = weights
        self.bias = bias
        self.squash = squash
        self.categorical_weights = categorical_weights

    def _contribution(self, index: int, value: FeatureValue) -> float:
        if isinstance(value, str):
            table = self.categorical_weights.get(index)
            if table is None or value not in table:
                raise ValueError(f"no categorical weight for feature {index} value {value!r}")
            return table[value]
        if index >= len(self.weights) or self.weights[index] is None:
            raise ValueError(f"no numeric weight for feature {index}")
        return self.weights[index] * value

    def score_one(self, values: list[FeatureValue]) -> float:
        z = self.bias + sum(self._contribution(i, v) for i, v in enumerate(values))
        if self.squash == "logistic":
            return _logistic(z)
        return min(1.0, max(0.0, z))

    def __call__(self, instances: list[list[FeatureValue]]) -> list[float]:
        return [self.score_one(values) for values in instances]


def linear_from_obj(obj: object) -> LinearScorer:
    if not isinstance(obj, dict):
        raise ValueError("linear model file must be a JSON object")
    raw_weights = obj.get("weights", [])
    if not isinstance(raw_weights, list):
        raise ValueError('"weights" must be an array')
    weights: list[float | None] = [
        None if w is None else _number(w, "weight entry") for w in raw_weights
    ]

    squash = obj.get("squash", "clip01")
    if squash not in ("clip01", "logistic"):
        raise ValueError(f'"squash" must be "clip01" or "logistic", got {squash!r}')

    categorical: dict[int, dict[str, float]] = {}
    raw_categorical = obj.get("categorical_weights") or {}
    if not isinstance(raw_categorical, dict):
        raise ValueError('"categorical_weights" must be an object')
    for key, table in raw_categorical.items():
        try:
            index = int(key)
        except ValueError:
            raise ValueError(f"categorical weight index {key!r} is not an integer") from None
        if not isinstance(table, dict):
            raise ValueError(f"categorical weights for feature {key} must be an object")
        categorical[index] = {
            category: _number(w, f"categorical weight {key}/{category}")
            for category, w in table.items()
        }

    return LinearScorer(
        weights=weights,
        bias=_number(obj.get("bias", 0.0), '"bias"'),
        squash=squash,
        categorical_weights=categorical,
    )


def load_linear(path: str | Path) -> Prediction:
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from exc
    return linear_from_obj(obj)
