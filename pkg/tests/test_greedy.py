import random

import pytest

from cfikit.core import ExplanationCase, Instance, Orientation, compute_delta
from cfikit.greedy import greedy_cfi
from cfikit.models import CountingModel, LinearModel, table_model_from_map
from tests.conftest import TABLE_SCORES
from tests.helpers.cases import random_case


def table_case(scores, factual=(0.0, "basic"), counterfactual=(1.0, "pro"), threshold=0.5):
    x = Instance(tuple(factual), ("age", "plan")[: len(factual)] if len(factual) == 2 else None)
    c = Instance(tuple(counterfactual), x.feature_names)
    model = table_model_from_map(x, c, scores)
    delta = compute_delta(x, c)
    full = "1" * delta.k
    empty = "0" * delta.k
    case = ExplanationCase.from_scores(x, c, threshold, scores[empty], scores[full])
    return case, delta, model


class TestWorkedCase:
    def test_gains_and_order(self):
        case, delta, model = table_case(TABLE_SCORES)
        result = greedy_cfi(case, delta, model)
        assert [s.feature_index for s in result.steps] == [1, 0]
        assert result.gains() == {1: pytest.approx(0.2), 0: pytest.approx(0.5)}
        assert result.factual_raw_score == 0.2
        assert result.counterfactual_raw_score == 0.9

    def test_round_trace(self):
        case, delta, model = table_case(TABLE_SCORES)
        result = greedy_cfi(case, delta, model)
        assert result.round_scores == ({0: 0.3, 1: 0.4}, {0: 0.9})

    def test_steps_carry_names_and_values(self):
        case, delta, model = table_case(TABLE_SCORES)
        first = greedy_cfi(case, delta, model).steps[0]
        assert first.feature_name == "plan"
        assert first.from_value == "basic"
        assert first.to_value == "pro"
        assert first.raw_score_after == 0.4


def test_ties_go_to_the_lowest_index():
    case, delta, model = table_case({"00": 0.2, "01": 0.4, "10": 0.4, "11": 0.9})
    result = greedy_cfi(case, delta, model)
    assert [s.feature_index for s in result.steps] == [0, 1]
    assert result.tie_breaks() == [{"round": 0, "tied": [0, 1], "chosen": 0}]


def test_negative_gain_recorded_as_is():
    # every single change undershoots the factual score, so round one must
    # commit a negative gain
    case, delta, model = table_case({"00": 0.2, "01": 0.1, "10": 0.15, "11": 0.9})
    result = greedy_cfi(case, delta, model)
    assert result.steps[0].feature_index == 1
    assert result.steps[0].gain == pytest.approx(-0.05)
    assert result.steps[1].gain == pytest.approx(0.75)


def test_toward_zero_orientation_maximizes_descent():
    case, delta, model = table_case({"00": 0.9, "01": 0.6, "10": 0.8, "11": 0.2})
    assert case.orientation is Orientation.TOWARD_ZERO
    result = greedy_cfi(case, delta, model)
    assert [s.feature_index for s in result.steps] == [0, 1]
    assert result.gains() == {0: pytest.approx(0.3), 1: pytest.approx(0.4)}
    # raw trace still reports raw scores
    assert [s.raw_score_after for s in result.steps] == [0.6, 0.2]


@pytest.mark.parametrize("k", range(1, 7))
def test_evaluation_count_is_exact(k):
    model = CountingModel(LinearModel(weights=tuple([0.01] * k), bias=0.2))
    x = Instance(tuple([0.0] * k))
    c = Instance(tuple([1.0] * k))
    delta = compute_delta(x, c)
    case = ExplanationCase.from_scores(x, c, 0.5, 0.2, 0.2 + 0.01 * k)
    greedy_cfi(case, delta, model)
    assert model.calls == 1 + k * (k + 1) // 2


def test_gains_telescope_to_oriented_difference():
    rng = random.Random(11)
    for _ in range(120):
        generated = random_case(rng)
        result = greedy_cfi(generated.case, generated.delta, generated.model)
        total = sum(step.gain for step in result.steps)
        expected = generated.case.oriented(
            generated.case.counterfactual_score
        ) - generated.case.oriented(generated.case.factual_score)
        assert total == pytest.approx(expected, abs=1e-9)
        # the final committed instance is the counterfactual
        assert result.counterfactual_raw_score == pytest.approx(
            generated.case.counterfactual_score, abs=1e-12
        )


def test_round_trace_shrinks_by_one_each_round():
    rng = random.Random(12)
    for _ in range(30):
        generated = random_case(rng)
        result = greedy_cfi(generated.case, generated.delta, generated.model)
        k = generated.delta.k
        assert [len(r) for r in result.round_scores] == list(range(k, 0, -1))
        committed = [s.feature_index for s in result.steps]
        assert sorted(committed) == list(generated.delta.indices)
