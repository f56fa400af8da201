"""Domain types shared by every engine: instances, change sets, oriented scores.

An explanation case pairs a factual instance with a counterfactual instance
scored by the same binary classifier. The change set (:class:`Delta`) lists
the feature indices where the two differ; every importance method in this
package assigns a value to each of those changes.

Scores are class-1 probabilities in [0, 1]. When the counterfactual sits on
the low-score side, :func:`orient` reflects scores through 1 - s so that all
engines can assume "higher oriented score = closer to the counterfactual
class". All types are immutable and all functions are pure, so everything
here may be shared freely between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Union

from .errors import (
    EmptyDeltaError,
    IndexOutOfRangeError,
    LengthMismatchError,
    ParseError,
)

FeatureValue = Union[float, str]


def check_feature_value(value: object) -> FeatureValue:
    """Normalize and validate a single feature value.

    Numbers become 64-bit floats and must be finite; categories must be
    non-empty strings. Anything else (booleans included) is rejected.
    """
    if isinstance(value, bool):
        raise ParseError(f"feature values must be numbers or strings, got {value!r}")
    if isinstance(value, (int, float)):
        value = float(value)
        if not math.isfinite(value):
            raise ParseError("feature values must be finite (no NaN/Inf)")
        return value
    if isinstance(value, str):
        if not value:
            raise ParseError("categorical feature values must be non-empty")
        return value
    raise ParseError(f"feature values must be numbers or strings, got {type(value).__name__}")


@dataclass(frozen=True)
class Instance:
    """An ordered vector of feature values, optionally named.

    Attributes:
        values: the feature values, numeric or categorical.
        feature_names: optional names, one per value, unique when present.
    """

    values: tuple[FeatureValue, ...]
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        values = tuple(check_feature_value(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) < 1:
            raise ParseError("an instance needs at least one feature value")
        if self.feature_names is not None:
            names = tuple(self.feature_names)
            object.__setattr__(self, "feature_names", names)
            if len(names) != len(values):
                raise ParseError(
                    f"{len(names)} feature names for {len(values)} values"
                )
            if len(set(names)) != len(names):
                raise ParseError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.values)

    def name_of(self, index: int) -> str:
        """Display name for a feature index ("f3" when unnamed)."""
        if self.feature_names is not None:
            return self.feature_names[index]
        return f"f{index}"

    def replace(self, changes: dict[int, FeatureValue]) -> "Instance":
        """Copy of this instance with the given index -> value substitutions."""
        values = list(self.values)
        for index, value in changes.items():
            if not 0 <= index < len(values):
                raise IndexOutOfRangeError(
                    f"index {index} out of range for instance of length {len(values)}"
                )
            values[index] = value
        return Instance(tuple(values), self.feature_names)


def instance_from_obj(obj: object) -> Instance:
    """Build an Instance from decoded JSON: a bare array or a
    {"feature_names": [...], "values": [...]} object."""
    if isinstance(obj, list):
        return Instance(tuple(obj))
    if isinstance(obj, dict):
        if "values" not in obj:
            raise ParseError('instance object must carry a "values" array')
        names = obj.get("feature_names")
        if names is not None:
            if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
                raise ParseError('"feature_names" must be an array of strings')
            names = tuple(names)
        values = obj["values"]
        if not isinstance(values, list):
            raise ParseError('"values" must be an array')
        return Instance(tuple(values), names)
    raise ParseError("instance JSON must be an array or an object with values")


def _reject_constant(token: str) -> float:
    raise ParseError(f"non-finite JSON literal {token!r} is not allowed")


def load_json(path: str | Path) -> object:
    """Load a UTF-8 JSON document, rejecting NaN/Infinity literals."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc


def load_instance(path: str | Path) -> Instance:
    """Load an instance file (JSON array or object form)."""
    return instance_from_obj(load_json(path))


@dataclass(frozen=True)
class Delta:
    """The set of feature indices where factual and counterfactual differ,
    together with both value lists (aligned with the indices).
    """

    indices: tuple[int, ...]
    factual_values: tuple[FeatureValue, ...]
    counterfactual_values: tuple[FeatureValue, ...]

    def __post_init__(self) -> None:
        if not self.indices:
            raise EmptyDeltaError("a counterfactual must change at least one feature")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ParseError("delta indices must be strictly increasing")
        if not (len(self.indices) == len(self.factual_values) == len(self.counterfactual_values)):
            raise LengthMismatchError("delta value lists must align with the indices")

    @property
    def k(self) -> int:
        return len(self.indices)

    def position_of(self, index: int) -> int:
        """Position of a feature index within the sorted change set."""
        try:
            return self.indices.index(index)
        except ValueError:
            from .errors import IndexNotInDeltaError

            raise IndexNotInDeltaError(f"feature {index} is not part of the change set") from None


def values_differ(a: FeatureValue, b: FeatureValue, epsilon: float = 0.0) -> bool:
    """Equality rule for the change set: numerics differ beyond epsilon,
    categoricals differ as strings, mixed types always differ."""
    a_num = isinstance(a, float)
    b_num = isinstance(b, float)
    if a_num and b_num:
        return abs(a - b) > epsilon
    if not a_num and not b_num:
        return a != b
    return True


def compute_delta(x: Instance, c: Instance, epsilon: float = 0.0) -> Delta:
    """Indices where the two instances differ, with both value lists.

    Raises LengthMismatchError on unequal lengths and EmptyDeltaError when no
    feature differs (identical instances explain nothing).
    """
    if len(x) != len(c):
        raise LengthMismatchError(
            f"factual has {len(x)} features, counterfactual has {len(c)}"
        )
    if epsilon < 0:
        raise ParseError("epsilon must be >= 0")
    indices = tuple(
        i for i, (a, b) in enumerate(zip(x.values, c.values)) if values_differ(a, b, epsilon)
    )
    if not indices:
        raise EmptyDeltaError("factual and counterfactual are identical: empty delta")
    return Delta(
        indices=indices,
        factual_values=tuple(x.values[i] for i in indices),
        counterfactual_values=tuple(c.values[i] for i in indices),
    )


def apply_changes(x: Instance, c: Instance, subset: Iterable[int]) -> Instance:
    """Copy of x with c's values substituted at the given indices."""
    if len(x) != len(c):
        raise LengthMismatchError(
            f"factual has {len(x)} features, counterfactual has {len(c)}"
        )
    return x.replace({i: c.values[i] for i in subset})


class Orientation(str, Enum):
    """Direction of the counterfactual class on the raw score axis."""

    TOWARD_ONE = "toward_one"
    TOWARD_ZERO = "toward_zero"


def orient(score: float, orientation: Orientation) -> float:
    """Map a raw score so that larger always means closer to the
    counterfactual class: identity for toward_one, 1 - s for toward_zero."""
    if orientation is Orientation.TOWARD_ZERO:
        return 1.0 - score
    return score


def check_score(score: float, what: str = "score") -> float:
    """Validate a probability-like score: finite and within [0, 1]."""
    score = float(score)
    if not math.isfinite(score) or not 0.0 <= score <= 1.0:
        from .errors import ScoreOutOfRangeError

        raise ScoreOutOfRangeError(f"{what} {score!r} is not a probability in [0, 1]")
    return score


@dataclass(frozen=True)
class ExplanationCase:
    """A factual/counterfactual pair with its raw scores and threshold.

    The orientation is fully determined by the two raw scores: toward_one
    whenever the counterfactual scores at least as high as the factual.
    """

    factual: Instance
    counterfactual: Instance
    threshold: float
    orientation: Orientation
    factual_score: float
    counterfactual_score: float

    def __post_init__(self) -> None:
        if len(self.factual) != len(self.counterfactual):
            raise LengthMismatchError("factual and counterfactual must have equal length")
        if not 0.0 < self.threshold < 1.0:
            raise ParseError(f"threshold must lie strictly inside (0, 1), got {self.threshold}")
        check_score(self.factual_score, "factual score")
        check_score(self.counterfactual_score, "counterfactual score")
        expected = (
            Orientation.TOWARD_ONE
            if self.counterfactual_score >= self.factual_score
            else Orientation.TOWARD_ZERO
        )
        if self.orientation is not expected:
            raise ParseError(
                f"orientation {self.orientation.value} contradicts the scores "
                f"({self.factual_score} -> {self.counterfactual_score})"
            )

    @classmethod
    def from_scores(
        cls,
        factual: Instance,
        counterfactual: Instance,
        threshold: float,
        factual_score: float,
        counterfactual_score: float,
    ) -> "ExplanationCase":
        """Build a case, deriving the orientation from the two scores."""
        orientation = (
            Orientation.TOWARD_ONE
            if counterfactual_score >= factual_score
            else Orientation.TOWARD_ZERO
        )
        return cls(
            factual=factual,
            counterfactual=counterfactual,
            threshold=threshold,
            orientation=orientation,
            factual_score=factual_score,
            counterfactual_score=counterfactual_score,
        )

    def oriented(self, score: float) -> float:
        return orient(score, self.orientation)

    @property
    def class_flip(self) -> bool:
        """True when the pair sits on opposite sides of the threshold
        (>= t means class 1)."""
        return (self.factual_score >= self.threshold) != (
            self.counterfactual_score >= self.threshold
        )
