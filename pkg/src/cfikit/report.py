"""Report serialization: everything one run produced, as stable JSON.

A report echoes the inputs losslessly and carries whichever engine outputs
were computed, so charts can be re-rendered later without model access.
Coalition scores use binary bitmask strings as keys ("01" = only the
lowest-position change applied), the same convention as the table-model
file format; a report with a coalition dump can therefore be replayed as an
exact model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .core import (
    Delta,
    ExplanationCase,
    Instance,
    Orientation,
    instance_from_obj,
    load_json,
)
from .countershapley import CoalitionMap, CounterShapleyValues
from .errors import ParseError
from .greedy import GreedyResult, GreedyStep
from .models import subset_key
from .validation import ValidationReport

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CfiReport:
    schema_version: int
    case: ExplanationCase
    delta: Delta
    greedy: GreedyResult | None
    countershapley: CounterShapleyValues | None
    coalition_scores: CoalitionMap | None
    validation: ValidationReport | None
    model_call_count: int
    decisions: dict[str, Any]


def _instance_to_obj(instance: Instance) -> dict:
    obj: dict[str, Any] = {"values": list(instance.values)}
    if instance.feature_names is not None:
        obj["feature_names"] = list(instance.feature_names)
    return obj


def _case_to_obj(case: ExplanationCase) -> dict:
    return {
        "factual": _instance_to_obj(case.factual),
        "counterfactual": _instance_to_obj(case.counterfactual),
        "threshold": case.threshold,
        "orientation": case.orientation.value,
        "factual_score": case.factual_score,
        "counterfactual_score": case.counterfactual_score,
    }


def _case_from_obj(obj: dict) -> ExplanationCase:
    try:
        return ExplanationCase(
            factual=instance_from_obj(obj["factual"]),
            counterfactual=instance_from_obj(obj["counterfactual"]),
            threshold=float(obj["threshold"]),
            orientation=Orientation(obj["orientation"]),
            factual_score=float(obj["factual_score"]),
            counterfactual_score=float(obj["counterfactual_score"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"malformed case section: {exc}") from exc


def _delta_to_obj(delta: Delta) -> dict:
    return {
        "indices": list(delta.indices),
        "factual_values": list(delta.factual_values),
        "counterfactual_values": list(delta.counterfactual_values),
        "k": delta.k,
    }


def _delta_from_obj(obj: dict) -> Delta:
    try:
        delta = Delta(
            indices=tuple(int(i) for i in obj["indices"]),
            factual_values=tuple(obj["factual_values"]),
            counterfactual_values=tuple(obj["counterfactual_values"]),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed delta section: {exc}") from exc
    if "k" in obj and int(obj["k"]) != delta.k:
        raise ParseError(f"delta k={obj['k']} disagrees with {delta.k} indices")
    return delta


def _greedy_to_obj(result: GreedyResult) -> dict:
    return {
        "steps": [
            {
                "feature_index": step.feature_index,
                "feature_name": step.feature_name,
                "from_value": step.from_value,
                "to_value": step.to_value,
                "raw_score_after": step.raw_score_after,
                "gain": step.gain,
            }
            for step in result.steps
        ],
        "factual_raw_score": result.factual_raw_score,
        "counterfactual_raw_score": result.counterfactual_raw_score,
        "orientation": result.orientation.value,
        "round_scores": [
            {str(i): s for i, s in scores.items()} for scores in result.round_scores
        ],
    }


def _greedy_from_obj(obj: dict) -> GreedyResult:
    try:
        return GreedyResult(
            steps=tuple(
                GreedyStep(
                    feature_index=int(s["feature_index"]),
                    feature_name=s.get("feature_name"),
                    from_value=s["from_value"],
                    to_value=s["to_value"],
                    raw_score_after=float(s["raw_score_after"]),
                    gain=float(s["gain"]),
                )
                for s in obj["steps"]
            ),
            factual_raw_score=float(obj["factual_raw_score"]),
            counterfactual_raw_score=float(obj["counterfactual_raw_score"]),
            orientation=Orientation(obj["orientation"]),
            round_scores=tuple(
                {int(i): float(s) for i, s in scores.items()}
                for scores in obj["round_scores"]
            ),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"malformed greedy section: {exc}") from exc


def _coalition_to_obj(coalition: CoalitionMap) -> dict:
    return {
        subset_key(mask, coalition.k): coalition.scores[mask]
        for mask in range(1 << coalition.k)
    }


def _coalition_from_obj(obj: dict) -> CoalitionMap:
    if not isinstance(obj, dict) or not obj:
        raise ParseError("coalition_scores must be a non-empty object")
    k = len(next(iter(obj)))
    scores: dict[int, float] = {}
    for key, value in obj.items():
        if len(key) != k or any(ch not in "01" for ch in key):
            raise ParseError(f"coalition key {key!r} is not a {k}-bit mask")
        scores[int(key, 2)] = float(value)
    try:
        return CoalitionMap(k=k, scores=scores)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def validation_to_obj(validation: ValidationReport) -> dict:
    return {
        "class_flip": validation.class_flip,
        "delta_nonempty": validation.delta_nonempty,
        "irreducible": validation.irreducible,
        "flipping_subsets": [list(s) for s in validation.flipping_subsets],
        "minimal_flipping_subsets": [list(s) for s in validation.minimal_flipping_subsets],
        "negative_contributions": [[i, v] for i, v in validation.negative_contributions],
    }


def _validation_from_obj(obj: dict) -> ValidationReport:
    try:
        return ValidationReport(
            class_flip=bool(obj["class_flip"]),
            delta_nonempty=bool(obj["delta_nonempty"]),
            irreducible=bool(obj["irreducible"]),
            flipping_subsets=tuple(tuple(int(i) for i in s) for s in obj["flipping_subsets"]),
            minimal_flipping_subsets=tuple(
                tuple(int(i) for i in s) for s in obj["minimal_flipping_subsets"]
            ),
            negative_contributions=tuple(
                (int(i), float(v)) for i, v in obj["negative_contributions"]
            ),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"malformed validation section: {exc}") from exc


def report_to_obj(report: CfiReport) -> dict:
    obj: dict[str, Any] = {
        "schema_version": report.schema_version,
        "case": _case_to_obj(report.case),
        "delta": _delta_to_obj(report.delta),
    }
    if report.greedy is not None:
        obj["greedy"] = _greedy_to_obj(report.greedy)
    if report.countershapley is not None:
        obj["countershapley"] = {
            "values": {str(i): v for i, v in report.countershapley.values.items()}
        }
    if report.coalition_scores is not None:
        obj["coalition_scores"] = _coalition_to_obj(report.coalition_scores)
    if report.validation is not None:
        obj["validation"] = validation_to_obj(report.validation)
    obj["model_call_count"] = report.model_call_count
    obj["decisions"] = report.decisions
    return obj


def report_from_obj(obj: object) -> CfiReport:
    if not isinstance(obj, dict):
        raise ParseError("report must be a JSON object")
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    if "case" not in obj or "delta" not in obj:
        raise ParseError("report must carry case and delta sections")

    coalition = (
        _coalition_from_obj(obj["coalition_scores"]) if "coalition_scores" in obj else None
    )
    countershapley = None
    if "countershapley" in obj:
        try:
            raw = obj["countershapley"]["values"]
            values = {int(i): float(v) for i, v in raw.items()}
        except (KeyError, ValueError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed countershapley section: {exc}") from exc
        countershapley = CounterShapleyValues(values=values, coalition=coalition)

    return CfiReport(
        schema_version=SCHEMA_VERSION,
        case=_case_from_obj(obj["case"]),
        delta=_delta_from_obj(obj["delta"]),
        greedy=_greedy_from_obj(obj["greedy"]) if "greedy" in obj else None,
        countershapley=countershapley,
        coalition_scores=coalition,
        validation=_validation_from_obj(obj["validation"]) if "validation" in obj else None,
        model_call_count=int(obj.get("model_call_count", 0)),
        decisions=dict(obj.get("decisions", {})),
    )


def report_to_json(report: CfiReport) -> str:
    return json.dumps(report_to_obj(report), indent=2, ensure_ascii=False) + "\n"


def load_report(path: str | Path) -> CfiReport:
    return report_from_obj(load_json(path))
