"""Report serialization round-trips and parse failure modes."""

import json

import pytest

from cfikit.core import Delta, ExplanationCase, Instance, compute_delta
from cfikit.countershapley import (
    CounterShapleyValues,
    build_coalition_map,
    countershapley_value,
    countershapley_values,
)
from cfikit.errors import ParseError
from cfikit.greedy import greedy_cfi
from cfikit.models import TableModel
from cfikit.report import (
    SCHEMA_VERSION,
    CfiReport,
    load_report,
    report_from_obj,
    report_to_json,
    report_to_obj,
)
from cfikit.validation import validate_counterfactual

from tests.conftest import COUNTERFACTUAL_OBJ, FACTUAL_OBJ, TABLE_SCORES, write_json


def _worked_case():
    factual = Instance(values=(0.0, "basic"), feature_names=("age", "plan"))
    counterfactual = Instance(values=(1.0, "pro"), feature_names=("age", "plan"))
    delta = compute_delta(factual, counterfactual)
    model = TableModel(
        factual=factual,
        counterfactual=counterfactual,
        scores={0b00: 0.2, 0b01: 0.3, 0b10: 0.4, 0b11: 0.9},
    )
    case = ExplanationCase.from_scores(
        factual=factual,
        counterfactual=counterfactual,
        threshold=0.5,
        factual_score=0.2,
        counterfactual_score=0.9,
    )
    return case, delta, model


def _full_report():
    case, delta, model = _worked_case()
    greedy = greedy_cfi(case, delta, model)
    shap = countershapley_values(case, delta, model)
    validation = validate_counterfactual(case, delta, shap.coalition, shap)
    return CfiReport(
        schema_version=SCHEMA_VERSION,
        case=case,
        delta=delta,
        greedy=greedy,
        countershapley=shap,
        coalition_scores=shap.coalition,
        validation=validation,
        model_call_count=12,
        decisions={"orientation": "toward_one", "epsilon": 0.0},
    )


class TestRoundTrip:
    def test_full_report_survives_obj_round_trip(self):
        report = _full_report()
        restored = report_from_obj(report_to_obj(report))

        assert restored.case == report.case
        assert restored.delta == report.delta
        assert restored.greedy == report.greedy
        assert restored.countershapley.values == report.countershapley.values
        assert restored.coalition_scores == report.coalition_scores
        assert restored.validation == report.validation
        assert restored.model_call_count == 12
        assert restored.decisions == report.decisions

    def test_full_report_survives_json_round_trip(self):
        report = _full_report()
        text = report_to_json(report)
        restored = report_from_obj(json.loads(text))
        assert report_to_obj(restored) == report_to_obj(report)

    def test_json_is_stable_and_newline_terminated(self):
        report = _full_report()
        assert report_to_json(report) == report_to_json(report)
        assert report_to_json(report).endswith("\n")

    def test_load_report_reads_file(self, tmp_path):
        report = _full_report()
        path = tmp_path / "report.json"
        path.write_text(report_to_json(report), encoding="utf-8")
        restored = load_report(path)
        assert report_to_obj(restored) == report_to_obj(report)

    def test_greedy_only_report_omits_other_sections(self):
        case, delta, model = _worked_case()
        report = CfiReport(
            schema_version=SCHEMA_VERSION,
            case=case,
            delta=delta,
            greedy=greedy_cfi(case, delta, model),
            countershapley=None,
            coalition_scores=None,
            validation=None,
            model_call_count=4,
            decisions={},
        )
        obj = report_to_obj(report)
        assert "countershapley" not in obj
        assert "coalition_scores" not in obj
        assert "validation" not in obj

        restored = report_from_obj(obj)
        assert restored.countershapley is None
        assert restored.coalition_scores is None
        assert restored.validation is None
        assert restored.greedy == report.greedy

    def test_unicode_feature_values_survive(self):
        factual = Instance(values=(0.0, "Grundtarif"), feature_names=("alter", "tarif"))
        counterfactual = Instance(values=(1.0, "Premium Plus ±"), feature_names=("alter", "tarif"))
        delta = compute_delta(factual, counterfactual)
        case = ExplanationCase.from_scores(
            factual=factual,
            counterfactual=counterfactual,
            threshold=0.5,
            factual_score=0.2,
            counterfactual_score=0.9,
        )
        report = CfiReport(
            schema_version=SCHEMA_VERSION,
            case=case,
            delta=delta,
            greedy=None,
            countershapley=None,
            coalition_scores=None,
            validation=None,
            model_call_count=0,
            decisions={},
        )
        text = report_to_json(report)
        assert "Premium Plus ±" in text
        restored = report_from_obj(json.loads(text))
        assert restored.case.counterfactual.values[1] == "Premium Plus ±"


class TestCoalitionReplay:
    """A dumped coalition section is an exact stand-in for the model."""

    def test_restored_coalition_reproduces_values_exactly(self):
        report = _full_report()
        restored = report_from_obj(report_to_obj(report))

        for index in report.delta.indices:
            replayed = countershapley_value(
                restored.case, restored.delta, restored.coalition_scores, index
            )
            assert replayed == report.countershapley.values[index]

    def test_restored_coalition_matches_fresh_model_run(self):
        report = _full_report()
        restored = report_from_obj(report_to_obj(report))
        _, delta, model = _worked_case()
        fresh = build_coalition_map(restored.case, delta, model)
        assert fresh == restored.coalition_scores


class TestSchemaEnforcement:
    def test_wrong_schema_version_rejected(self):
        obj = report_to_obj(_full_report())
        obj["schema_version"] = 2
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_missing_schema_version_rejected(self):
        obj = report_to_obj(_full_report())
        del obj["schema_version"]
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_non_object_report_rejected(self):
        with pytest.raises(ParseError):
            report_from_obj([1, 2, 3])

    @pytest.mark.parametrize("section", ["case", "delta"])
    def test_missing_required_section_rejected(self, section):
        obj = report_to_obj(_full_report())
        del obj[section]
        with pytest.raises(ParseError):
            report_from_obj(obj)


class TestMalformedSections:
    def test_delta_k_disagreeing_with_indices_rejected(self):
        obj = report_to_obj(_full_report())
        obj["delta"]["k"] = 5
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_bad_orientation_string_rejected(self):
        obj = report_to_obj(_full_report())
        obj["case"]["orientation"] = "sideways"
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_greedy_missing_steps_rejected(self):
        obj = report_to_obj(_full_report())
        del obj["greedy"]["steps"]
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_countershapley_non_numeric_value_rejected(self):
        obj = report_to_obj(_full_report())
        obj["countershapley"]["values"]["0"] = "lots"
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_validation_missing_field_rejected(self):
        obj = report_to_obj(_full_report())
        del obj["validation"]["irreducible"]
        with pytest.raises(ParseError):
            report_from_obj(obj)


class TestCoalitionKeys:
    def _obj_with_coalition(self, coalition):
        obj = report_to_obj(_full_report())
        obj["coalition_scores"] = coalition
        del obj["countershapley"]
        return obj

    def test_mixed_key_widths_rejected(self):
        obj = self._obj_with_coalition({"0": 0.2, "01": 0.3})
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_non_binary_key_rejected(self):
        obj = self._obj_with_coalition({"0x": 0.2, "01": 0.3, "10": 0.4, "11": 0.9})
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_incomplete_mask_coverage_rejected(self):
        obj = self._obj_with_coalition({"00": 0.2, "11": 0.9})
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_empty_coalition_rejected(self):
        obj = self._obj_with_coalition({})
        with pytest.raises(ParseError):
            report_from_obj(obj)

    def test_keys_serialized_lowest_position_last(self):
        report = _full_report()
        obj = report_to_obj(report)
        assert list(obj["coalition_scores"]) == ["00", "01", "10", "11"]
        assert obj["coalition_scores"]["01"] == 0.3
        assert obj["coalition_scores"]["10"] == 0.4


class TestCliReportFile(object):
    """End-to-end shape check on a report the CLI actually wrote."""

    def test_explain_output_parses_and_matches_engines(self, tmp_path):
        from cfikit.cli import main

        write_json(tmp_path / "factual.json", FACTUAL_OBJ)
        write_json(tmp_path / "counterfactual.json", COUNTERFACTUAL_OBJ)
        write_json(
            tmp_path / "model.json",
            {
                "factual": FACTUAL_OBJ,
                "counterfactual": COUNTERFACTUAL_OBJ,
                "scores": TABLE_SCORES,
            },
        )
        out = tmp_path / "report.json"
        code = main(
            [
                "explain",
                "--factual", str(tmp_path / "factual.json"),
                "--counterfactual", str(tmp_path / "counterfactual.json"),
                "--model", f"table:{tmp_path / 'model.json'}",
                "--out", str(out),
            ]
        )
        assert code == 0

        report = load_report(out)
        case, delta, model = _worked_case()
        assert report.case == case
        assert report.delta == delta
        assert report.greedy == greedy_cfi(case, delta, model)
        expected = countershapley_values(case, delta, model)
        assert report.countershapley.values == expected.values
        assert report.coalition_scores == expected.coalition
        assert report.model_call_count == 8
