"""Black-box scoring contract and the built-in evaluators.

Every model exposes one primitive, ``score_batch``: a list of instances in,
one class-1 probability per instance out, order preserved. A batch interface
is the primitive (rather than single scoring) because the coalition engine
needs 2^K scores and the subprocess bridge pays per round-trip; the built-ins
simply loop.

Three built-in kinds exist mainly as exact test oracles:

* ``linear``  - weighted sum squashed by clip01 or the logistic function.
* ``table``   - an explicit subset -> score map over one declared
  factual/counterfactual pair.
* ``tree``    - a small binary decision tree with scores at the leaves.

A fourth kind, ``exec``, delegates scoring to an external process over a
line-delimited JSON protocol; see :mod:`cfikit.bridge_client`.

Built-in models are immutable and thread-safe. A bridge handle is
single-flight: batches through it must be serialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .core import (
    Delta,
    FeatureValue,
    Instance,
    compute_delta,
    instance_from_obj,
    load_json,
)
from .errors import ArityMismatchError, ParseError, TableDomainError


class Model(Protocol):
    """Anything that can score a batch of instances."""

    def score_batch(self, instances: Sequence[Instance]) -> list[float]:
        """One score in [0, 1] per instance, same order."""
        ...

    def close(self) -> None:
        """Release resources; no-op for built-ins."""
        ...


class ModelKind(str, Enum):
    LINEAR = "linear"
    TABLE = "table"
    TREE = "tree"
    EXEC = "exec"


@dataclass(frozen=True)
class ModelSpec:
    """How to obtain a model: a file path for built-ins, a command line for exec."""

    kind: ModelKind
    source: str

    def __post_init__(self) -> None:
        if not self.source:
            raise ParseError("model spec needs a non-empty source")


def parse_model_spec(text: str) -> ModelSpec:
    """Parse the CLI grammar "linear:PATH" | "table:PATH" | "tree:PATH" | "exec:COMMAND"."""
    kind, sep, source = text.partition(":")
    if not sep:
        raise ParseError(
            f"model spec {text!r} must look like kind:source "
            "(kinds: linear, table, tree, exec)"
        )
    try:
        parsed = ModelKind(kind)
    except ValueError:
        raise ParseError(f"unknown model kind {kind!r}") from None
    return ModelSpec(parsed, source)


class Squash(str, Enum):
    CLIP01 = "clip01"
    LOGISTIC = "logistic"


def _logistic(z: float) -> float:
    # split on sign so exp never overflows
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@dataclass(frozen=True)
class LinearModel:
    """Weighted sum of feature contributions, squashed into [0, 1].

    Numeric features contribute weight * value; categorical features look
    their category up in a per-index table. clip01 keeps the model exactly
    additive wherever no clipping occurs, which makes it a precise oracle
    for additivity checks; logistic gives a smooth strictly monotone score.
    """

    weights: tuple[float | None, ...]
    bias: float = 0.0
    squash: Squash = Squash.CLIP01
    categorical_weights: Mapping[int, Mapping[str, float]] = field(default_factory=dict)

    def _contribution(self, index: int, value: FeatureValue) -> float:
        if isinstance(value, str):
            table = self.categorical_weights.get(index)
            if table is None or value not in table:
                raise ArityMismatchError(
                    f"no categorical weight for feature {index} value {value!r}"
                )
            return table[value]
        if index >= len(self.weights) or self.weights[index] is None:
            raise ArityMismatchError(f"no numeric weight for feature {index}")
        return self.weights[index] * value

    def score_one(self, instance: Instance) -> float:
        z = self.bias + sum(
            self._contribution(i, v) for i, v in enumerate(instance.values)
        )
        if self.squash is Squash.LOGISTIC:
            return _logistic(z)
        return min(1.0, max(0.0, z))

    def score_batch(self, instances: Sequence[Instance]) -> list[float]:
        return [self.score_one(x) for x in instances]

    def close(self) -> None:
        pass


def _linear_from_obj(obj: object) -> LinearModel:
    if not isinstance(obj, dict):
        raise ParseError("linear model file must be a JSON object")
    raw_weights = obj.get("weights", [])
    if not isinstance(raw_weights, list):
        raise ParseError('"weights" must be an array')
    weights: list[float | None] = []
    for w in raw_weights:
        if w is None:
            weights.append(None)
        elif isinstance(w, (int, float)) and not isinstance(w, bool):
            weights.append(float(w))
        else:
            raise ParseError(f"weight entries must be numbers or null, got {w!r}")
    cat: dict[int, dict[str, float]] = {}
    for key, table in (obj.get("categorical_weights") or {}).items():
        try:
            index = int(key)
        except ValueError:
            raise ParseError(f"categorical weight index {key!r} is not an integer") from None
        if not isinstance(table, dict):
            raise ParseError("categorical weight tables must be objects")
        cat[index] = {str(c): float(w) for c, w in table.items()}
    bias = obj.get("bias", 0.0)
    if isinstance(bias, bool) or not isinstance(bias, (int, float)):
        raise ParseError('"bias" must be a number')
    try:
        squash = Squash(obj.get("squash", "clip01"))
    except ValueError:
        raise ParseError(f'unknown squash {obj.get("squash")!r}') from None
    return LinearModel(tuple(weights), float(bias), squash, cat)


def subset_key(mask: int, k: int) -> str:
    """Canonical bitmask key: binary string, most significant bit first,
    bit j standing for the j-th smallest changed index."""
    return format(mask, f"0{k}b")


@dataclass(frozen=True)
class TableModel:
    """Explicit subset -> score map over one factual/counterfactual pair.

    Exists purely as a test oracle: it can score exactly the 2^K instances
    reachable by applying change subsets to its declared pair, and nothing
    else (anything else raises TableDomainError).
    """

    factual: Instance
    counterfactual: Instance
    scores: Mapping[int, float]
    delta: Delta = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", compute_delta(self.factual, self.counterfactual))
        k = self.delta.k
        expected = set(range(1 << k))
        if set(self.scores) != expected:
            missing = sorted(expected - set(self.scores))
            extra = sorted(set(self.scores) - expected)
            raise ParseError(
                f"table model must define all {1 << k} subsets; "
                f"missing {missing[:4]}, extra {extra[:4]}"
            )
        for mask, s in self.scores.items():
            if not (isinstance(s, float) and math.isfinite(s) and 0.0 <= s <= 1.0):
                raise ParseError(
                    f"table score for subset {subset_key(mask, k)} must be in [0, 1], got {s!r}"
                )

    def mask_of(self, instance: Instance) -> int:
        """Which change subset produced this instance, or TableDomainError."""
        if len(instance) != len(self.factual):
            raise ArityMismatchError(
                f"table model declared {len(self.factual)} features, instance has {len(instance)}"
            )
        mask = 0
        delta_set = set(self.delta.indices)
        for i, value in enumerate(instance.values):
            if i in delta_set:
                if value == self.counterfactual.values[i]:
                    mask |= 1 << self.delta.position_of(i)
                elif value != self.factual.values[i]:
                    raise TableDomainError(
                        f"value {value!r} at index {i} matches neither declared instance"
                    )
            elif value != self.factual.values[i]:
                raise TableDomainError(
                    f"index {i} is outside the declared change set but differs from the factual"
                )
        return mask

    def score_one(self, instance: Instance) -> float:
        return self.scores[self.mask_of(instance)]

    def score_batch(self, instances: Sequence[Instance]) -> list[float]:
        return [self.score_one(x) for x in instances]

    def close(self) -> None:
        pass


def _table_from_obj(obj: object) -> TableModel:
    if not isinstance(obj, dict):
        raise ParseError("table model file must be a JSON object")
    for key in ("factual", "counterfactual", "scores"):
        if key not in obj:
            raise ParseError(f'table model file missing "{key}"')
    factual = instance_from_obj(obj["factual"])
    counterfactual = instance_from_obj(obj["counterfactual"])
    raw_scores = obj["scores"]
    if not isinstance(raw_scores, dict):
        raise ParseError('"scores" must be an object keyed by bitmask strings')
    k = compute_delta(factual, counterfactual).k
    scores: dict[int, float] = {}
    for key, value in raw_scores.items():
        if len(key) != k or any(ch not in "01" for ch in key):
            raise ParseError(f"subset key {key!r} is not a {k}-bit binary string")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"score for subset {key!r} must be a number")
        scores[int(key, 2)] = float(value)
    return TableModel(factual, counterfactual, scores)


@dataclass(frozen=True)
class TreeNode:
    """Internal split node: route left iff value <= threshold."""

    feature: int
    threshold: float
    left: "TreeNode | float"
    right: "TreeNode | float"


@dataclass(frozen=True)
class TreeModel:
    """Binary decision tree with class-1 probabilities at the leaves."""

    root: TreeNode | float

    def score_one(self, instance: Instance) -> float:
        node = self.root
        while isinstance(node, TreeNode):
            if node.feature >= len(instance):
                raise ArityMismatchError(
                    f"tree splits on feature {node.feature}, instance has {len(instance)}"
                )
            value = instance.values[node.feature]
            if isinstance(value, str):
                raise ArityMismatchError(
                    f"tree splits numerically on feature {node.feature}, "
                    f"got categorical value {value!r}"
                )
            node = node.left if value <= node.threshold else node.right
        return node

    def score_batch(self, instances: Sequence[Instance]) -> list[float]:
        return [self.score_one(x) for x in instances]

    def close(self) -> None:
        pass


def _tree_node_from_obj(obj: object) -> TreeNode | float:
    if not isinstance(obj, dict):
        raise ParseError("tree nodes must be JSON objects")
    if "leaf" in obj:
        leaf = obj["leaf"]
        if isinstance(leaf, bool) or not isinstance(leaf, (int, float)):
            raise ParseError(f"leaf score must be a number, got {leaf!r}")
        leaf = float(leaf)
        if not (math.isfinite(leaf) and 0.0 <= leaf <= 1.0):
            raise ParseError(f"leaf score must be in [0, 1], got {leaf}")
        return leaf
    for key in ("feature", "threshold", "left", "right"):
        if key not in obj:
            raise ParseError(f'tree node missing "{key}"')
    feature = obj["feature"]
    if isinstance(feature, bool) or not isinstance(feature, int) or feature < 0:
        raise ParseError(f"split feature must be a non-negative integer, got {feature!r}")
    threshold = obj["threshold"]
    if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
        raise ParseError(f"split threshold must be a number, got {threshold!r}")
    return TreeNode(
        feature=feature,
        threshold=float(threshold),
        left=_tree_node_from_obj(obj["left"]),
        right=_tree_node_from_obj(obj["right"]),
    )


class CountingModel:
    """Wrapper counting model evaluations (instances scored, not batches)."""

    def __init__(self, inner: Model):
        self.inner = inner
        self.calls = 0

    def score_batch(self, instances: Sequence[Instance]) -> list[float]:
        self.calls += len(instances)
        return self.inner.score_batch(instances)

    def close(self) -> None:
        self.inner.close()


class CachingModel:
    """Wrapper memoizing scores by instance values.

    Only forwards cache misses, preserving batch order in the result. Used
    by the CLI's --share-cache mode; with deterministic models it changes
    call counts but never values.
    """

    def __init__(self, inner: Model):
        self.inner = inner
        self._cache: dict[tuple[FeatureValue, ...], float] = {}

    def score_batch(self, instances: Sequence[Instance]) -> list[float]:
        misses: list[Instance] = []
        miss_keys: list[tuple[FeatureValue, ...]] = []
        seen: set[tuple[FeatureValue, ...]] = set()
        for x in instances:
            key = x.values
            if key not in self._cache and key not in seen:
                misses.append(x)
                miss_keys.append(key)
                seen.add(key)
        if misses:
            for key, score in zip(miss_keys, self.inner.score_batch(misses)):
                self._cache[key] = score
        return [self._cache[x.values] for x in instances]

    def close(self) -> None:
        self.inner.close()


def load_model(spec: ModelSpec | str, *, timeout_ms: int | None = None) -> Model:
    """Load a scoring handle from a spec, parsed or as a "kind:source" string.

    Built-ins parse their JSON file; exec spawns the bridge process and
    completes the hello/ready handshake before returning.
    """
    if isinstance(spec, str):
        spec = parse_model_spec(spec)
    if spec.kind is ModelKind.EXEC:
        from .bridge_client import BridgeModel

        return BridgeModel.spawn(spec.source, timeout_ms=timeout_ms)
    path = Path(spec.source)
    if not path.exists():
        raise ParseError(f"model file {path} does not exist")
    obj = load_json(path)
    if spec.kind is ModelKind.LINEAR:
        return _linear_from_obj(obj)
    if spec.kind is ModelKind.TABLE:
        return _table_from_obj(obj)
    if spec.kind is ModelKind.TREE:
        return TreeModel(_tree_node_from_obj(obj))
    raise ParseError(f"unhandled model kind {spec.kind}")


def score_case_pair(model: Model, factual: Instance, counterfactual: Instance) -> tuple[float, float]:
    """Score the factual/counterfactual pair in one batch."""
    fs, cs = model.score_batch([factual, counterfactual])
    return fs, cs


def table_model_from_map(
    factual: Instance, counterfactual: Instance, scores_by_key: Mapping[str, float]
) -> TableModel:
    """Build a TableModel from bitmask-string keys (the on-disk form)."""
    scores = {int(key, 2): float(value) for key, value in scores_by_key.items()}
    return TableModel(factual, counterfactual, scores)


__all__ = [
    "Model",
    "ModelKind",
    "ModelSpec",
    "Squash",
    "LinearModel",
    "TableModel",
    "TreeModel",
    "TreeNode",
    "CountingModel",
    "CachingModel",
    "parse_model_spec",
    "load_model",
    "subset_key",
    "score_case_pair",
    "table_model_from_map",
]
