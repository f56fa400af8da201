"""CounterShapley values: Shapley attribution over the subset lattice of a
feature-change set.

The change set of size K induces 2^K hybrid instances (factual values with
some subset of changes applied). Scoring all of them once gives a coalition
map; each change's value is then the weighted average of its oriented
marginal contributions across all subsets not containing it.

The weight for a subset of size l is l!(K-l-1)!/K!, computed exactly as
1/(K*C(K-1, l)) to avoid factorial overflow at larger K.

Exactly 2^K model evaluations are performed, all through the coalition map;
aggregation is pure arithmetic on the map.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .core import Delta, ExplanationCase, Instance
from .errors import DeltaTooLargeError
from .models import Model

# Hard cap on change-set size for the exact computation: 2^20 instances is
# already ~1M scores; beyond that the exact lattice is not a sane default.
MAX_K = 20

# Subsets are scored in fixed-size chunks so the peak batch handed to the
# model stays bounded even at the K cap.
_BATCH_SIZE = 4096

# The brute-force check enumerates K! orderings; 8! = 40320 is the most we
# allow before it stops being a quick cross-check.
ORACLE_MAX_K = 8


@dataclass(frozen=True)
class CoalitionMap:
    """Raw scores for every subset of the change set.

    Keys are bitmasks over delta positions: bit j (value 1 << j) set means
    the j-th smallest changed index is switched to its counterfactual value.
    Mask 0 is the factual, mask 2^K - 1 the full counterfactual.
    """

    k: int
    scores: dict[int, float]

    def __post_init__(self) -> None:
        expected = 1 << self.k
        if len(self.scores) != expected or set(self.scores) != set(range(expected)):
            raise ValueError(f"coalition map must cover all {expected} subsets")

    @property
    def factual_score(self) -> float:
        return self.scores[0]

    @property
    def counterfactual_score(self) -> float:
        return self.scores[(1 << self.k) - 1]


def subset_instance(factual: Instance, delta: Delta, mask: int) -> Instance:
    """Hybrid instance with the masked subset of changes applied."""
    changes = {
        delta.indices[j]: delta.counterfactual_values[j]
        for j in range(delta.k)
        if mask >> j & 1
    }
    return factual.replace(changes) if changes else factual


def build_coalition_map(case: ExplanationCase, delta: Delta, model: Model) -> CoalitionMap:
    """Score every subset of the change set, in ascending bitmask order."""
    if delta.k > MAX_K:
        raise DeltaTooLargeError(
            f"change set of size {delta.k} exceeds the exact-computation cap of {MAX_K}"
        )

    total = 1 << delta.k
    scores: dict[int, float] = {}
    for start in range(0, total, _BATCH_SIZE):
        masks = range(start, min(start + _BATCH_SIZE, total))
        batch = [subset_instance(case.factual, delta, m) for m in masks]
        for mask, score in zip(masks, model.score_batch(batch)):
            scores[mask] = score
    return CoalitionMap(k=delta.k, scores=scores)


def shapley_weight(k: int, subset_size: int) -> float:
    """Weight of a marginal contribution on top of a subset of the given size,
    among k players: l!(k-l-1)!/k!."""
    return 1.0 / (k * comb(k - 1, subset_size))


def shapley_weight_exact(k: int, subset_size: int) -> Fraction:
    """Same weight as an exact rational, for tests that sum them."""
    return Fraction(1, k * comb(k - 1, subset_size))


def countershapley_value(
    case: ExplanationCase, delta: Delta, coalition: CoalitionMap, feature_index: int
) -> float:
    """Shapley value of one changed feature, from a prebuilt coalition map."""
    position = delta.position_of(feature_index)
    bit = 1 << position
    k = delta.k
    total = 0.0
    for mask in range(1 << k):
        if mask & bit:
            continue
        weight = shapley_weight(k, mask.bit_count())
        marginal = case.oriented(coalition.scores[mask | bit]) - case.oriented(
            coalition.scores[mask]
        )
        total += weight * marginal
    return total


@dataclass(frozen=True)
class CounterShapleyValues:
    """Per-feature attribution plus the coalition map it was derived from.

    The map is None only when values were deserialized from a report that
    did not embed its coalition scores.
    """

    values: dict[int, float]
    coalition: CoalitionMap | None

    def total(self) -> float:
        return sum(self.values.values())


def countershapley_values(
    case: ExplanationCase, delta: Delta, model: Model
) -> CounterShapleyValues:
    """Attribute the oriented score difference across all changed features.

    Builds the coalition map (2^K evaluations) and aggregates it once per
    feature. Values sum to the oriented difference between the full
    counterfactual and the factual; individual values can be negative when a
    change hurts in most contexts.
    """
    coalition = build_coalition_map(case, delta, model)
    values = {
        i: countershapley_value(case, delta, coalition, i) for i in delta.indices
    }
    return CounterShapleyValues(values=values, coalition=coalition)


def permutation_oracle(
    case: ExplanationCase, delta: Delta, model: Model
) -> dict[int, float]:
    """Brute-force Shapley values by enumerating all K! change orderings.

    Deliberately shares no code with the lattice path above: subsets are
    rebuilt per prefix and scored through a local memo keyed by frozenset of
    delta positions, and each feature's value is the plain average of its
    marginals over orderings. Only usable for small K.
    """
    if delta.k > ORACLE_MAX_K:
        raise DeltaTooLargeError(
            f"ordering enumeration is capped at K={ORACLE_MAX_K}, got {delta.k}"
        )

    memo: dict[frozenset[int], float] = {}

    def oriented_score(positions: frozenset[int]) -> float:
        if positions not in memo:
            changes = {
                delta.indices[j]: delta.counterfactual_values[j] for j in positions
            }
            hybrid = case.factual.replace(changes) if changes else case.factual
            memo[positions] = case.oriented(model.score_batch([hybrid])[0])
        return memo[positions]

    sums = {i: 0.0 for i in delta.indices}
    count = 0
    for ordering in itertools.permutations(range(delta.k)):
        count += 1
        prefix: frozenset[int] = frozenset()
        before = oriented_score(prefix)
        for position in ordering:
            prefix = prefix | {position}
            after = oriented_score(prefix)
            sums[delta.indices[position]] += after - before
            before = after
    return {i: s / count for i, s in sums.items()}
