"""Greedy importance values: steepest-ascent ordering of feature changes.

Starting from the factual, each round applies the single remaining change
that yields the highest oriented score, and records the oriented increment
as that change's importance. The sum of increments telescopes to the
oriented score difference between counterfactual and factual.

Cost is exactly 1 + K(K+1)/2 model evaluations: one for the starting score,
then K, K-1, ..., 1 candidates per round, each round scored as one batch.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Delta, ExplanationCase, FeatureValue, Orientation
from .models import Model


@dataclass(frozen=True)
class GreedyStep:
    """One committed change: which feature moved, to what, and the oriented
    score increment it bought at its point in the sequence."""

    feature_index: int
    feature_name: str | None
    from_value: FeatureValue
    to_value: FeatureValue
    raw_score_after: float
    gain: float


@dataclass(frozen=True)
class GreedyResult:
    """The full greedy trajectory.

    ``round_scores`` keeps the raw score of every candidate evaluated in each
    round (keyed by feature index), so the argmax decision and any tie-breaks
    can be audited after the fact.
    """

    steps: tuple[GreedyStep, ...]
    factual_raw_score: float
    counterfactual_raw_score: float
    orientation: Orientation
    round_scores: tuple[dict[int, float], ...]

    def gains(self) -> dict[int, float]:
        """Importance per feature index, in committed order."""
        return {step.feature_index: step.gain for step in self.steps}

    def tie_breaks(self) -> list[dict]:
        """Rounds where several candidates shared the best oriented score."""
        from .core import orient

        ties = []
        for round_no, (scores, step) in enumerate(zip(self.round_scores, self.steps)):
            best = max(orient(s, self.orientation) for s in scores.values())
            tied = sorted(
                i for i, s in scores.items() if orient(s, self.orientation) == best
            )
            if len(tied) > 1:
                ties.append({"round": round_no, "tied": tied, "chosen": step.feature_index})
        return ties


def greedy_cfi(case: ExplanationCase, delta: Delta, model: Model) -> GreedyResult:
    """Assign an importance value to each change by greedy sequential search.

    Each round scores all remaining single-change extensions in one batch and
    commits the one with the highest oriented score; exact ties go to the
    lowest feature index. Gains may be negative when a remaining change can
    only decrease the score; they are recorded as-is.
    """
    orientation = case.orientation
    current = case.factual
    factual_raw = model.score_batch([current])[0]
    current_oriented = case.oriented(factual_raw)

    to_value = dict(zip(delta.indices, delta.counterfactual_values))
    from_value = dict(zip(delta.indices, delta.factual_values))
    remaining = list(delta.indices)

    steps: list[GreedyStep] = []
    round_scores: list[dict[int, float]] = []
    while remaining:
        candidates = [current.replace({i: to_value[i]}) for i in remaining]
        raw_scores = model.score_batch(candidates)
        round_scores.append(dict(zip(remaining, raw_scores)))

        best_oriented = float("-inf")
        best_index = -1
        best_raw = 0.0
        best_candidate = current
        for i, candidate, raw in zip(remaining, candidates, raw_scores):
            oriented = case.oriented(raw)
            if oriented > best_oriented:
                best_oriented = oriented
                best_index = i
                best_raw = raw
                best_candidate = candidate

        steps.append(
            GreedyStep(
                feature_index=best_index,
                feature_name=(
                    case.factual.feature_names[best_index]
                    if case.factual.feature_names is not None
                    else None
                ),
                from_value=from_value[best_index],
                to_value=to_value[best_index],
                raw_score_after=best_raw,
                gain=best_oriented - current_oriented,
            )
        )
        current = best_candidate
        current_oriented = best_oriented
        remaining.remove(best_index)

    return GreedyResult(
        steps=tuple(steps),
        factual_raw_score=factual_raw,
        counterfactual_raw_score=steps[-1].raw_score_after,
        orientation=orientation,
        round_scores=tuple(round_scores),
    )
