"""The four frozen chart documents compared against golden files.

Kept in one place so the committed SVGs and the tests can never drift
apart: regenerating a golden means rendering exactly these objects.
"""

from __future__ import annotations

from cfikit.charts import ChartDocument, render_constellation_chart, render_countershapley_chart, render_greedy_chart
from cfikit.core import ExplanationCase, Instance, compute_delta
from cfikit.countershapley import countershapley_values
from cfikit.greedy import greedy_cfi
from cfikit.models import table_model_from_map

WORKED_SCORES = {"00": 0.2, "01": 0.3, "10": 0.4, "11": 0.9}
NEGATIVE_SCORES = {"00": 0.4, "01": 0.1, "10": 0.45, "11": 0.6}
K3_SCORES = {
    "000": 0.1, "001": 0.2, "010": 0.35, "100": 0.3,
    "011": 0.5, "101": 0.55, "110": 0.6, "111": 0.9,
}


def _setup(scores, factual, counterfactual, names=None):
    x = Instance(factual, names)
    c = Instance(counterfactual, names)
    model = table_model_from_map(x, c, scores)
    delta = compute_delta(x, c)
    k = delta.k
    case = ExplanationCase.from_scores(x, c, 0.5, scores["0" * k], scores["1" * k])
    return case, delta, model


def golden_documents() -> dict[str, ChartDocument]:
    documents: dict[str, ChartDocument] = {}

    case, delta, model = _setup(
        WORKED_SCORES, (0.0, "basic"), (1.0, "pro"), ("age", "plan")
    )
    documents["greedy_k2"] = render_greedy_chart(
        greedy_cfi(case, delta, model), case.threshold
    )
    shapley = countershapley_values(case, delta, model)
    documents["countershapley_k2"] = render_countershapley_chart(shapley, case)
    documents["constellation_k2"] = render_constellation_chart(
        shapley.coalition, delta, shapley, case.threshold,
        feature_names=("age", "plan"),
    )

    case, delta, model = _setup(NEGATIVE_SCORES, (0.0, "basic"), (1.0, "pro"))
    shapley = countershapley_values(case, delta, model)
    documents["countershapley_negative"] = render_countershapley_chart(shapley, case)

    case, delta, model = _setup(K3_SCORES, (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    shapley = countershapley_values(case, delta, model)
    documents["constellation_k3"] = render_constellation_chart(
        shapley.coalition, delta, shapley, case.threshold
    )
    return documents
