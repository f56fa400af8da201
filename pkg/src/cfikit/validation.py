"""Counterfactual quality checks, computed from an existing coalition map.

A usable counterfactual must actually change the predicted class, must
change at least one feature, and should be irreducible: no proper subset of
its changes already crosses the threshold on its own. Reducible
counterfactuals still get importance values (the checks are diagnostics,
not gates), but the CLI surfaces them through exit codes.

Everything here is pure arithmetic over scores already paid for; no model
calls are made.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Delta, ExplanationCase
from .countershapley import CoalitionMap, CounterShapleyValues

# Attribution values above this are treated as rounding noise, not as a
# genuinely harmful change.
NEGATIVE_TOLERANCE = -1e-12


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the three counterfactual checks plus diagnostics.

    Subsets are tuples of feature indices (ascending). A subset is
    "flipping" when applying just those changes already lands on the
    counterfactual's side of the threshold; a flipping subset is minimal
    when none of its own proper subsets flips.
    """

    class_flip: bool
    delta_nonempty: bool
    irreducible: bool
    flipping_subsets: tuple[tuple[int, ...], ...]
    minimal_flipping_subsets: tuple[tuple[int, ...], ...]
    negative_contributions: tuple[tuple[int, float], ...]


def _class_of(score: float, threshold: float) -> int:
    # Scores at the threshold count as class 1, everywhere in the package.
    return 1 if score >= threshold else 0


def find_flipping_subsets(coalition: CoalitionMap, threshold: float) -> list[int]:
    """Bitmasks of all proper non-empty subsets that land on the
    counterfactual's side of the threshold, in ascending mask order.

    When the full change set does not flip the class at all there is no
    crossing direction to test against, so the answer is empty.
    """
    full = (1 << coalition.k) - 1
    factual_side = _class_of(coalition.scores[0], threshold)
    cf_side = _class_of(coalition.scores[full], threshold)
    if factual_side == cf_side:
        return []
    return [
        mask
        for mask in range(1, full)
        if _class_of(coalition.scores[mask], threshold) == cf_side
    ]


def _proper_subsets(mask: int):
    sub = (mask - 1) & mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def minimal_flipping_masks(flipping: list[int]) -> list[int]:
    """Filter a flipping-mask list down to masks with no flipping proper subset."""
    flip_set = set(flipping)
    return [
        mask
        for mask in flipping
        if not any(sub in flip_set for sub in _proper_subsets(mask))
    ]


def _mask_to_indices(delta: Delta, mask: int) -> tuple[int, ...]:
    return tuple(delta.indices[j] for j in range(delta.k) if mask >> j & 1)


def validate_counterfactual(
    case: ExplanationCase,
    delta: Delta,
    coalition: CoalitionMap,
    values: CounterShapleyValues,
) -> ValidationReport:
    """Run all checks against a complete coalition map.

    The class-flip check compares the map's factual and full-counterfactual
    scores against the threshold; reducibility scans the 2^K - 2 proper
    non-empty subsets already present in the map; negative contributions are
    read off the attribution values. Never raises on an invalid
    counterfactual: callers decide what invalidity means for them.
    """
    full = (1 << coalition.k) - 1
    threshold = case.threshold
    class_flip = _class_of(coalition.scores[0], threshold) != _class_of(
        coalition.scores[full], threshold
    )

    flipping = find_flipping_subsets(coalition, threshold)
    minimal = minimal_flipping_masks(flipping)
    negative = tuple(
        (i, values.values[i])
        for i in delta.indices
        if values.values[i] < NEGATIVE_TOLERANCE
    )
    return ValidationReport(
        class_flip=class_flip,
        delta_nonempty=delta.k >= 1,
        irreducible=not flipping,
        flipping_subsets=tuple(_mask_to_indices(delta, m) for m in flipping),
        minimal_flipping_subsets=tuple(_mask_to_indices(delta, m) for m in minimal),
        negative_contributions=negative,
    )
