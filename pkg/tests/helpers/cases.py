"""Random explanation cases for property tests and acceptance runs.

Three model families: linear with a logistic squash (optionally with
categorical features), depth-bounded decision trees (numeric only), and
exact score tables over the change-set lattice. A separate generator builds
clip-free linear cases where every subset score stays strictly inside
(0, 1), so the clipped linear model is exactly additive there.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from cfikit.core import Delta, ExplanationCase, Instance, compute_delta
from cfikit.models import (
    LinearModel,
    Model,
    Squash,
    TableModel,
    TreeModel,
    TreeNode,
    score_case_pair,
    subset_key,
    table_model_from_map,
)

CATEGORIES = ("red", "green", "blue", "amber")


@dataclass
class GeneratedCase:
    kind: str
    case: ExplanationCase
    delta: Delta
    model: Model


def _distinct_pairs(rng: random.Random, n: int, k: int, categorical_ok: bool):
    """Factual/counterfactual value vectors differing at exactly k indices."""
    indices = sorted(rng.sample(range(n), k))
    kinds = [
        "cat" if categorical_ok and rng.random() < 0.25 else "num" for _ in range(n)
    ]
    factual, counterfactual = [], []
    for i in range(n):
        if kinds[i] == "num":
            value = round(rng.uniform(-2.0, 2.0), 3)
            factual.append(value)
            if i in indices:
                counterfactual.append(round(value + rng.choice([-1, 1]) * rng.uniform(0.3, 1.5), 3))
            else:
                counterfactual.append(value)
        else:
            value = rng.choice(CATEGORIES)
            factual.append(value)
            if i in indices:
                counterfactual.append(rng.choice([c for c in CATEGORIES if c != value]))
            else:
                counterfactual.append(value)
    return factual, counterfactual, indices, kinds


def _linear_case(rng: random.Random, k: int) -> GeneratedCase:
    n = k + rng.randint(0, 3)
    factual, counterfactual, _, kinds = _distinct_pairs(rng, n, k, categorical_ok=True)
    weights = []
    categorical_weights: dict[int, dict[str, float]] = {}
    for i in range(n):
        if kinds[i] == "num":
            weights.append(round(rng.uniform(-1.5, 1.5), 3))
        else:
            weights.append(None)
            categorical_weights[i] = {c: round(rng.uniform(-1.0, 1.0), 3) for c in CATEGORIES}
    model = LinearModel(
        weights=tuple(weights),
        bias=round(rng.uniform(-1.0, 1.0), 3),
        squash=Squash.LOGISTIC,
        categorical_weights=categorical_weights,
    )
    return _finish(rng, "linear", factual, counterfactual, model)


def _tree_case(rng: random.Random, k: int) -> GeneratedCase:
    n = k + rng.randint(0, 3)
    factual, counterfactual, _, _ = _distinct_pairs(rng, n, k, categorical_ok=False)

    def grow(depth: int):
        if depth == 0 or rng.random() < 0.3:
            return round(rng.random(), 3)
        return TreeNode(
            feature=rng.randrange(n),
            threshold=round(rng.uniform(-2.0, 2.0), 3),
            left=grow(depth - 1),
            right=grow(depth - 1),
        )

    root = grow(3)
    if not isinstance(root, TreeNode):
        root = TreeNode(feature=0, threshold=0.0, left=root, right=round(rng.random(), 3))
    return _finish(rng, "tree", factual, counterfactual, TreeModel(root))


def _table_case(rng: random.Random, k: int) -> GeneratedCase:
    n = k + rng.randint(0, 2)
    factual, counterfactual, _, _ = _distinct_pairs(rng, n, k, categorical_ok=True)
    x = Instance(tuple(factual))
    c = Instance(tuple(counterfactual))
    scores = {subset_key(mask, k): round(rng.random(), 6) for mask in range(1 << k)}
    model = table_model_from_map(x, c, scores)
    return _finish(rng, "table", factual, counterfactual, model)


def _finish(rng, kind, factual, counterfactual, model) -> GeneratedCase:
    x = Instance(tuple(factual))
    c = Instance(tuple(counterfactual))
    delta = compute_delta(x, c)
    f_score, cf_score = score_case_pair(model, x, c)
    case = ExplanationCase.from_scores(x, c, 0.5, f_score, cf_score)
    return GeneratedCase(kind=kind, case=case, delta=delta, model=model)


_MAKERS = {"linear": _linear_case, "tree": _tree_case, "table": _table_case}


def random_case(rng: random.Random, kind: str | None = None, k: int | None = None) -> GeneratedCase:
    if kind is None:
        kind = rng.choice(("linear", "tree", "table"))
    if k is None:
        k = rng.randint(1, 6)
    return _MAKERS[kind](rng, k)


def clipfree_linear_case(rng: random.Random, k: int | None = None) -> GeneratedCase:
    """Linear model with clipping that never engages.

    Weights are sized so that no subset of the changes can push the score
    outside (0, 1): the per-change contributions sum to at most ~0.4 around
    a base score near 0.5. On such cases the clipped linear score is exactly
    additive in the changes.
    """
    if k is None:
        k = rng.randint(1, 6)
    n = k + rng.randint(0, 3)
    factual, counterfactual, indices, _ = _distinct_pairs(rng, n, k, categorical_ok=False)

    budget = 0.4
    shares = [rng.uniform(0.2, 1.0) for _ in range(k)]
    scale = budget / sum(shares)
    weights: list[float | None] = [0.0] * n
    for position, index in enumerate(indices):
        gap = counterfactual[index] - factual[index]
        signed = shares[position] * scale * rng.choice([-1.0, 1.0])
        weights[index] = signed / gap
    base = 0.5 + rng.uniform(-0.05, 0.05)
    bias = base - sum(
        w * v for w, v in zip(weights, factual) if isinstance(w, float) and w != 0.0
    )
    # Unchanged features keep weight 0 so the base score is exact.
    model = LinearModel(
        weights=tuple(weights), bias=bias, squash=Squash.CLIP01, categorical_weights={}
    )
    generated = _finish(rng, "linear-clipfree", factual, counterfactual, model)
    assert 0.0 < generated.case.factual_score < 1.0
    assert 0.0 < generated.case.counterfactual_score < 1.0
    return generated
