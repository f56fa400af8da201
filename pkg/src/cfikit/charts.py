"""Deterministic SVG renderers for the three chart types.

All three charts share an x-axis in raw prediction-score units [0, 1] and a
dashed vertical threshold line. Output is plain SVG 1.1 built by string
concatenation: identical inputs produce byte-identical documents, so the
files are golden-testable. Element classes are stable and countable:
"marker" and "segment" (greedy), "bar" (countershapley), "dot-single",
"dot-multi" and "link" (constellation), "threshold" everywhere.

Coordinates are always printed with two decimals and percentages with one,
so formatting can never drift between runs or platforms.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

from .core import Delta, ExplanationCase, FeatureValue, Orientation
from .countershapley import CoalitionMap, CounterShapleyValues
from .errors import DegenerateSumError, DeltaTooLargeError, ParseError
from .greedy import GreedyResult

_HEX_COLOR = re.compile(r"^#[0-9A-Fa-f]{6}$")

# Rendering the full subset lattice stops being legible (and cheap) past
# 2^10 dots; computation caps upstream are separate from this one.
MAX_CONSTELLATION_K = 10


@dataclass(frozen=True)
class Palette:
    accent: str = "#E75480"
    threshold: str = "#CC0000"
    factual: str = "#3A6EA5"
    text: str = "#222222"

    def __post_init__(self) -> None:
        for name in ("accent", "threshold", "factual", "text"):
            color = getattr(self, name)
            if not _HEX_COLOR.match(color):
                raise ParseError(f"palette color {name!r} must be 6-digit hex, got {color!r}")


@dataclass(frozen=True)
class ChartStyle:
    palette: Palette = field(default_factory=Palette)
    font_family: str = "sans-serif"
    font_size_pt: float = 12.0
    # top, right, bottom, left; the wide left margin holds row labels.
    margins: tuple[float, float, float, float] = (40.0, 40.0, 70.0, 230.0)
    width_px: int = 960
    height_px: int = 540


DEFAULT_STYLE = ChartStyle()


def style_from_obj(obj: object, base: ChartStyle = DEFAULT_STYLE) -> ChartStyle:
    """Build a style from a config mapping, overriding only given fields."""
    if not isinstance(obj, dict):
        raise ParseError("style config must be a JSON object")
    known = {"palette", "font_family", "font_size_pt", "margins", "width_px", "height_px"}
    unknown = set(obj) - known
    if unknown:
        raise ParseError(f"unknown style keys: {sorted(unknown)}")

    palette = base.palette
    if "palette" in obj:
        if not isinstance(obj["palette"], dict):
            raise ParseError("style palette must be an object")
        palette_fields = {"accent", "threshold", "factual", "text"}
        bad = set(obj["palette"]) - palette_fields
        if bad:
            raise ParseError(f"unknown palette keys: {sorted(bad)}")
        merged = {name: getattr(palette, name) for name in palette_fields}
        merged.update(obj["palette"])
        palette = Palette(**merged)

    margins = base.margins
    if "margins" in obj:
        raw = obj["margins"]
        if not isinstance(raw, list) or len(raw) != 4:
            raise ParseError("style margins must be a 4-element array")
        margins = tuple(float(v) for v in raw)

    def _num(key: str, default: float) -> float:
        value = obj.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"style {key} must be a number")
        return float(value)

    return ChartStyle(
        palette=palette,
        font_family=str(obj.get("font_family", base.font_family)),
        font_size_pt=_num("font_size_pt", base.font_size_pt),
        margins=margins,
        width_px=int(_num("width_px", base.width_px)),
        height_px=int(_num("height_px", base.height_px)),
    )


def load_style(path: str) -> ChartStyle:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read style file {path}: {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"style file {path} is not valid JSON: {exc}") from exc
    return style_from_obj(obj)


@dataclass(frozen=True)
class ChartDocument:
    width_px: int
    height_px: int
    body: str

    def to_bytes(self) -> bytes:
        return self.body.encode("utf-8")


def format_value(value: FeatureValue) -> str:
    """Numeric values at up to 4 significant digits, categorical verbatim."""
    if isinstance(value, str):
        return value
    return f"{value:.4g}"


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Canvas:
    """Accumulates SVG elements for a fixed plot frame.

    The frame maps score 0..1 onto the horizontal plot span; vertical
    placement is chart-specific.
    """

    def __init__(self, style: ChartStyle) -> None:
        self.style = style
        top, right, bottom, left = style.margins
        self.left = left
        self.right = style.width_px - right
        self.top = top
        self.bottom = style.height_px - bottom
        self.parts: list[str] = []

    def x(self, score: float) -> float:
        return self.left + score * (self.right - self.left)

    def add(self, element: str) -> None:
        self.parts.append(element)

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str,
             cls: str, width: float = 1.0, dashed: bool = False) -> None:
        dash = ' stroke-dasharray="6 4"' if dashed else ""
        self.add(
            f'<line class="{cls}" x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
            f'x2="{_fmt(x2)}" y2="{_fmt(y2)}" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}"{dash}/>'
        )

    def circle(self, cx: float, cy: float, r: float, fill: str, cls: str) -> None:
        self.add(
            f'<circle class="{cls}" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
            f'r="{_fmt(r)}" fill="{fill}"/>'
        )

    def rect(self, x: float, y: float, w: float, h: float, fill: str, cls: str) -> None:
        self.add(
            f'<rect class="{cls}" x="{_fmt(x)}" y="{_fmt(y)}" '
            f'width="{_fmt(w)}" height="{_fmt(h)}" fill="{fill}"/>'
        )

    def text(self, x: float, y: float, content: str, cls: str,
             anchor: str = "start", fill: str | None = None) -> None:
        color = fill if fill is not None else self.style.palette.text
        self.add(
            f'<text class="{cls}" x="{_fmt(x)}" y="{_fmt(y)}" '
            f'text-anchor="{anchor}" fill="{color}">{escape(content)}</text>'
        )

    def score_axis(self) -> None:
        axis_y = self.bottom + 8
        self.line(self.left, axis_y, self.right, axis_y, self.style.palette.text, "axis")
        for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
            tx = self.x(tick)
            self.line(tx, axis_y, tx, axis_y + 5, self.style.palette.text, "tick")
            self.text(tx, axis_y + 20, f"{tick:.2f}", "tick-label", anchor="middle")

    def threshold_line(self, threshold: float) -> None:
        tx = self.x(threshold)
        self.line(tx, self.top, tx, self.bottom + 8, self.style.palette.threshold,
                  "threshold", dashed=True)
        self.text(tx, self.top - 8, f"t = {threshold:.2f}", "threshold-label",
                  anchor="middle", fill=self.style.palette.threshold)

    def document(self) -> ChartDocument:
        style = self.style
        font_size = f"{style.font_size_pt:g}pt"
        header = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{style.width_px}" height="{style.height_px}" '
            f'viewBox="0 0 {style.width_px} {style.height_px}" '
            f'font-family="{escape(style.font_family)}" font-size="{font_size}">\n'
            f'<rect width="{style.width_px}" height="{style.height_px}" fill="#FFFFFF"/>\n'
        )
        return ChartDocument(
            width_px=style.width_px,
            height_px=style.height_px,
            body=header + "\n".join(self.parts) + "\n</svg>\n",
        )


def _change_label(name: str, from_value: FeatureValue, to_value: FeatureValue) -> str:
    return f"{name}: {format_value(from_value)} → {format_value(to_value)}"


def render_greedy_chart(
    result: GreedyResult, threshold: float, style: ChartStyle = DEFAULT_STYLE
) -> ChartDocument:
    """Staircase of committed changes, factual at the bottom row.

    One marker per row at the cumulative raw score, rows connected by
    segments, capped at K+1 markers and K segments by construction.
    """
    canvas = _Canvas(style)
    k = len(result.steps)
    rows = k + 1
    row_step = (canvas.bottom - canvas.top) / rows

    def row_y(row: int) -> float:
        # Row 0 (factual) sits at the bottom.
        return canvas.bottom - (row + 0.5) * row_step

    scores = [result.factual_raw_score] + [s.raw_score_after for s in result.steps]
    points = [(canvas.x(score), row_y(row)) for row, score in enumerate(scores)]

    canvas.score_axis()
    canvas.threshold_line(threshold)
    for (x1, y1), (x2, y2) in zip(points, points[1:]):
        canvas.line(x1, y1, x2, y2, style.palette.text, "segment", width=1.2)
    for row, (px, py) in enumerate(points):
        fill = style.palette.factual if row == 0 else style.palette.accent
        canvas.circle(px, py, 6, fill, "marker")

    canvas.text(canvas.left - 12, points[0][1] + 4, "factual", "row-label", anchor="end")
    for row, step in enumerate(result.steps, start=1):
        name = step.feature_name if step.feature_name is not None else f"f{step.feature_index}"
        canvas.text(canvas.left - 12, points[row][1] + 4,
                    _change_label(name, step.from_value, step.to_value),
                    "row-label", anchor="end")

    canvas.text(points[0][0] + 10, points[0][1] + 4,
                f"{result.factual_raw_score:.3f}", "annotation")
    canvas.text(points[-1][0] + 10, points[-1][1] + 4,
                f"{result.counterfactual_raw_score:.3f}", "annotation")
    return canvas.document()


def _percentage_label(share: float) -> str:
    text = f"{share:.1f}"
    if text == "-0.0":
        text = "0.0"
    return text + "%"


def render_countershapley_chart(
    phi: CounterShapleyValues, case: ExplanationCase, style: ChartStyle = DEFAULT_STYLE
) -> ChartDocument:
    """Horizontal bars spanning factual to counterfactual score.

    Bars stack along the score axis in feature-index order; each covers a
    span equal to its value's raw-score contribution, so widths are
    proportional to |value|. Negative values walk backwards from the running
    anchor and render in the contrasting factual color with a negative
    percentage label.
    """
    total = phi.total()
    if abs(total) < 1e-12:
        raise DegenerateSumError(
            "attribution values sum to ~0; percentage shares are undefined"
        )

    canvas = _Canvas(style)
    mid = (canvas.top + canvas.bottom) / 2
    bar_height = 36.0

    canvas.score_axis()
    canvas.threshold_line(case.threshold)

    # The raw-score direction of travel: attribution values are oriented, so
    # flip their sign when the counterfactual moves the score downwards.
    sign = 1.0 if case.orientation is Orientation.TOWARD_ONE else -1.0

    cursor = case.factual_score
    for position, (index, value) in enumerate(phi.values.items()):
        step = sign * value
        x_start = canvas.x(min(cursor, cursor + step))
        x_end = canvas.x(max(cursor, cursor + step))
        fill = style.palette.accent if value >= 0 else style.palette.factual
        canvas.rect(x_start, mid - bar_height / 2, x_end - x_start, bar_height, fill, "bar")

        center = (x_start + x_end) / 2
        canvas.text(center, mid - bar_height / 2 - 8,
                    _percentage_label(value / total * 100.0), "pct", anchor="middle")
        name = case.factual.name_of(index)
        label = _change_label(name, case.factual.values[index],
                              case.counterfactual.values[index])
        # Alternate label depths so adjacent narrow bars stay readable.
        label_y = mid + bar_height / 2 + (22 if position % 2 == 0 else 40)
        canvas.text(center, label_y, label, "bar-label", anchor="middle")
        cursor += step

    for score, name, color in (
        (case.factual_score, "factual", style.palette.factual),
        (case.counterfactual_score, "counterfactual", style.palette.accent),
    ):
        sx = canvas.x(score)
        canvas.line(sx, mid - bar_height / 2 - 30, sx, mid + bar_height / 2 + 8,
                    color, "anchor", width=1.0)
        canvas.text(sx, mid - bar_height / 2 - 38, f"{name} {score:.3f}",
                    "annotation", anchor="middle", fill=color)
    return canvas.document()


def render_constellation_chart(
    coalition: CoalitionMap,
    delta: Delta,
    phi: CounterShapleyValues,
    threshold: float,
    style: ChartStyle = DEFAULT_STYLE,
    *,
    feature_names: Sequence[str] | None = None,
    max_k: int = MAX_CONSTELLATION_K,
) -> ChartDocument:
    """Every subset's score as a dot: one row per single change, combination
    dots at the mean height of their member rows.

    Large dots are emitted top-to-bottom in row order (descending value);
    small dots in ascending-bitmask order, each linked to its members' large
    dots. Dashed verticals mark the factual score and the threshold.
    """
    k = coalition.k
    if k > max_k:
        raise DeltaTooLargeError(
            f"constellation rendering is capped at K={max_k}, got {k}"
        )

    canvas = _Canvas(style)
    canvas.score_axis()
    canvas.threshold_line(threshold)

    fx = canvas.x(coalition.factual_score)
    canvas.line(fx, canvas.top, fx, canvas.bottom + 8, style.palette.factual,
                "factual-line", dashed=True)
    canvas.text(fx, canvas.top - 8, f"factual {coalition.factual_score:.3f}",
                "annotation", anchor="middle", fill=style.palette.factual)

    # Rows ordered by descending attribution, ties by feature index.
    order = sorted(range(delta.k), key=lambda j: (-phi.values[delta.indices[j]], j))
    row_step = (canvas.bottom - canvas.top) / delta.k
    row_y = {
        position: canvas.top + (row + 0.5) * row_step
        for row, position in enumerate(order)
    }

    def name_of(position: int) -> str:
        index = delta.indices[position]
        if feature_names is not None:
            return feature_names[index]
        return f"f{index}"

    dot_xy: dict[int, tuple[float, float]] = {}
    for position in order:
        mask = 1 << position
        px = canvas.x(coalition.scores[mask])
        py = row_y[position]
        dot_xy[position] = (px, py)

    small: list[tuple[int, float, float]] = []
    for mask in range(1, 1 << k):
        if mask.bit_count() < 2:
            continue
        members = [j for j in range(k) if mask >> j & 1]
        sy = sum(row_y[j] for j in members) / len(members)
        sx = canvas.x(coalition.scores[mask])
        small.append((mask, sx, sy))
        for j in members:
            mx, my = dot_xy[j]
            canvas.line(sx, sy, mx, my, style.palette.text, "link", width=0.6)

    for mask, sx, sy in small:
        canvas.circle(sx, sy, 3.5, style.palette.text, "dot-multi")
    for position in order:
        px, py = dot_xy[position]
        canvas.circle(px, py, 6, style.palette.accent, "dot-single")
        canvas.text(canvas.left - 12, py + 4,
                    _change_label(name_of(position),
                                  delta.factual_values[position],
                                  delta.counterfactual_values[position]),
                    "row-label", anchor="end")

    if k >= 2:
        full = (1 << k) - 1
        fx_full = canvas.x(coalition.counterfactual_score)
        fy_full = next(sy for mask, _, sy in small if mask == full)
        canvas.text(fx_full + 10, fy_full + 4,
                    f"counterfactual {coalition.counterfactual_score:.3f}",
                    "annotation", fill=style.palette.accent)
    else:
        px, py = dot_xy[0]
        canvas.text(px + 10, py + 4,
                    f"counterfactual {coalition.counterfactual_score:.3f}",
                    "annotation", fill=style.palette.accent)
    return canvas.document()
