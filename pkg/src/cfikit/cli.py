"""Command-line front end.

Subcommands: explain (run engines, write a report), chart (re-render SVG
charts from a report, no model needed), validate (counterfactual checks
only), oracle (brute-force cross-check of the attribution values).

Exit codes: 0 success, 1 usage or parse problem, 2 model or bridge failure,
3 the counterfactual does not flip the class, 4 the counterfactual is
reducible. Reports are still written for 3 and 4; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from .charts import (
    DEFAULT_STYLE,
    ChartDocument,
    load_style,
    render_constellation_chart,
    render_countershapley_chart,
    render_greedy_chart,
)
from .core import ExplanationCase, compute_delta, load_instance
from .countershapley import countershapley_values, permutation_oracle
from .errors import (
    ArityMismatchError,
    BridgeError,
    CfiError,
    DegenerateSumError,
    DeltaTooLargeError,
    EmptyDeltaError,
    IndexNotInDeltaError,
    IndexOutOfRangeError,
    LengthMismatchError,
    ParseError,
    ScoreOutOfRangeError,
    SpawnError,
)
from .greedy import greedy_cfi
from .models import CachingModel, CountingModel, load_model, parse_model_spec, score_case_pair
from .report import (
    CfiReport,
    SCHEMA_VERSION,
    load_report,
    report_to_json,
    validation_to_obj,
)
from .validation import validate_counterfactual

_USAGE_ERRORS = (
    ParseError,
    EmptyDeltaError,
    DeltaTooLargeError,
    LengthMismatchError,
    IndexOutOfRangeError,
    IndexNotInDeltaError,
    DegenerateSumError,
)
_MODEL_ERRORS = (SpawnError, BridgeError, ScoreOutOfRangeError, ArityMismatchError)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_NO_FLIP = 3
EXIT_REDUCIBLE = 4


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; this CLI reserves 2 for
    model failures, so usage problems are rethrown as parse errors."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ParseError(message)


def _add_case_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--factual", required=True, help="factual instance JSON file")
    parser.add_argument(
        "--counterfactual", required=True, help="counterfactual instance JSON file"
    )
    parser.add_argument(
        "--model", required=True,
        help='model spec "linear:PATH" | "table:PATH" | "tree:PATH" | "exec:COMMANDLINE"',
    )
    parser.add_argument("--threshold", type=float, default=0.5,
                        help="class-1 decision threshold (default 0.5)")
    parser.add_argument("--epsilon", type=float, default=0.0,
                        help="numeric tolerance when computing the change set")
    parser.add_argument("--max-k", type=int, default=20,
                        help="refuse change sets larger than this (default 20)")
    parser.add_argument("--out", default=None,
                        help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cfikit", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    explain = sub.add_parser("explain", help="run importance engines and write a report")
    _add_case_flags(explain)
    explain.add_argument("--method", choices=("greedy", "countershapley", "both"),
                         default="both")
    explain.add_argument("--share-cache", action="store_true",
                         help="let engines reuse each other's scores (affects call "
                              "counts only, never values)")

    chart = sub.add_parser("chart", help="render SVG charts from an existing report")
    chart.add_argument("--report", required=True, help="report JSON file")
    chart.add_argument("--type", required=True,
                       choices=("greedy", "countershapley", "constellation", "all"))
    chart.add_argument("--out", required=True, help="output file, or directory for --type all")
    chart.add_argument("--style", default=None, help="style config JSON file")

    validate = sub.add_parser("validate", help="check the counterfactual properties")
    _add_case_flags(validate)

    oracle = sub.add_parser("oracle", help="brute-force attribution cross-check (K <= 8)")
    _add_case_flags(oracle)
    return parser


def _prepare(args: argparse.Namespace):
    """Load instances and model, build the case and change set.

    The factual/counterfactual pair is scored here once to fix the
    orientation; that pair scoring is setup, not an engine evaluation, so it
    stays outside the counted budget.
    """
    factual = load_instance(args.factual)
    counterfactual = load_instance(args.counterfactual)
    spec = parse_model_spec(args.model)
    if args.epsilon < 0:
        raise ParseError("--epsilon must be >= 0")
    if args.max_k < 1:
        raise ParseError("--max-k must be >= 1")
    delta = compute_delta(factual, counterfactual, args.epsilon)
    if delta.k > args.max_k:
        raise DeltaTooLargeError(
            f"change set has {delta.k} features, above --max-k {args.max_k}"
        )
    model = load_model(spec)
    try:
        f_score, cf_score = score_case_pair(model, factual, counterfactual)
        case = ExplanationCase.from_scores(
            factual, counterfactual, args.threshold, f_score, cf_score
        )
    except BaseException:
        model.close()
        raise
    return case, delta, model


def _write_text(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_explain(args: argparse.Namespace) -> int:
    case, delta, model = _prepare(args)
    try:
        counting = CountingModel(model)
        engine_model = CachingModel(counting) if args.share_cache else counting

        greedy_result = None
        shapley = None
        coalition = None
        if args.method in ("greedy", "both"):
            greedy_result = greedy_cfi(case, delta, engine_model)
        if args.method in ("countershapley", "both"):
            shapley = countershapley_values(case, delta, engine_model)
            coalition = shapley.coalition

        validation = None
        if shapley is not None and coalition is not None:
            validation = validate_counterfactual(case, delta, coalition, shapley)

        decisions: dict[str, Any] = {
            "orientation": case.orientation.value,
            "epsilon": args.epsilon,
            "share_cache": bool(args.share_cache),
            "call_count_scope": "engine evaluations only; the factual/counterfactual "
                                "pair scoring that fixes the orientation is excluded",
        }
        if greedy_result is not None:
            decisions["tie_breaks"] = greedy_result.tie_breaks()

        cfi_report = CfiReport(
            schema_version=SCHEMA_VERSION,
            case=case,
            delta=delta,
            greedy=greedy_result,
            countershapley=shapley,
            coalition_scores=coalition,
            validation=validation,
            model_call_count=counting.calls,
            decisions=decisions,
        )
        _write_text(args.out, report_to_json(cfi_report))

        if not case.class_flip:
            print("counterfactual does not flip the class", file=sys.stderr)
            return EXIT_NO_FLIP
        if validation is not None and not validation.irreducible:
            print(
                f"counterfactual is reducible: flipping subsets "
                f"{[list(s) for s in validation.flipping_subsets]}",
                file=sys.stderr,
            )
            return EXIT_REDUCIBLE
        return EXIT_OK
    finally:
        model.close()


def _chart_paths(out: str, kinds: Sequence[str]) -> dict[str, Path]:
    """One output path per chart kind. A directory target gets KIND.svg
    inside it; a file target gets -KIND suffixes when several are written."""
    target = Path(out)
    if target.is_dir() or out.endswith(("/", "\\")):
        return {kind: target / f"{kind}.svg" for kind in kinds}
    if len(kinds) == 1:
        return {kinds[0]: target}
    stem = target.stem if target.suffix else target.name
    suffix = target.suffix if target.suffix else ".svg"
    return {kind: target.with_name(f"{stem}-{kind}{suffix}") for kind in kinds}


def cmd_chart(args: argparse.Namespace) -> int:
    report = load_report(args.report)
    style = load_style(args.style) if args.style is not None else DEFAULT_STYLE

    def render(kind: str) -> ChartDocument:
        if kind == "greedy":
            if report.greedy is None:
                raise ParseError("report has no greedy section")
            return render_greedy_chart(report.greedy, report.case.threshold, style)
        if kind == "countershapley":
            if report.countershapley is None:
                raise ParseError("report has no countershapley section")
            return render_countershapley_chart(report.countershapley, report.case, style)
        if report.coalition_scores is None:
            raise ParseError("report has no coalition_scores section")
        if report.countershapley is None:
            raise ParseError("report has no countershapley section")
        return render_constellation_chart(
            report.coalition_scores,
            report.delta,
            report.countershapley,
            report.case.threshold,
            style,
            feature_names=report.case.factual.feature_names,
        )

    kinds = ["greedy", "countershapley", "constellation"] if args.type == "all" else [args.type]
    paths = _chart_paths(args.out, kinds)
    documents = {kind: render(kind) for kind in kinds}
    for kind, document in documents.items():
        paths[kind].parent.mkdir(parents=True, exist_ok=True)
        paths[kind].write_bytes(document.to_bytes())
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    case, delta, model = _prepare(args)
    try:
        counting = CountingModel(model)
        shapley = countershapley_values(case, delta, counting)
        validation = validate_counterfactual(case, delta, shapley.coalition, shapley)
        _write_text(args.out, json.dumps(validation_to_obj(validation), indent=2) + "\n")
        if not validation.class_flip:
            print("counterfactual does not flip the class", file=sys.stderr)
            return EXIT_NO_FLIP
        if not validation.irreducible:
            print("counterfactual is reducible", file=sys.stderr)
            return EXIT_REDUCIBLE
        return EXIT_OK
    finally:
        model.close()


def cmd_oracle(args: argparse.Namespace) -> int:
    case, delta, model = _prepare(args)
    try:
        counting = CountingModel(model)
        shapley = countershapley_values(case, delta, counting)
        oracle_values = permutation_oracle(case, delta, counting)
        deviation = max(
            abs(shapley.values[i] - oracle_values[i]) for i in delta.indices
        )
        payload = {
            "oracle_values": {str(i): v for i, v in oracle_values.items()},
            "values": {str(i): v for i, v in shapley.values.items()},
            "max_abs_deviation": deviation,
        }
        _write_text(args.out, json.dumps(payload, indent=2) + "\n")
        return EXIT_OK
    finally:
        model.close()


_COMMANDS = {
    "explain": cmd_explain,
    "chart": cmd_chart,
    "validate": cmd_validate,
    "oracle": cmd_oracle,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ParseError("a subcommand is required (explain|chart|validate|oracle)")
        return _COMMANDS[args.command](args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _MODEL_ERRORS as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except CfiError as exc:
        # Anything domain-shaped that slipped through counts as usage.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))
