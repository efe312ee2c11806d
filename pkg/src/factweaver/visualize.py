"""Fact-to-chart mapping and a small deterministic SVG renderer.

Chart choice follows observed chart-type frequencies per fact type; the
diversity knob widens each type's candidate list.  Geographic and pictogram
charts are deliberately not supported, so frequency maxima are taken over the
renderable columns only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional
from xml.sax.saxutils import escape

from .errors import RenderError, SpecError
from .facts import DataFact, FactType, derive_value, group_values
from .narrate import caption as fact_caption
from .narrate import format_number
from .table import DataTable

# 8-color categorical palette plus one accent for highlighted marks.  These
# hex values are part of the rendering contract and golden-file tested.
PALETTE = (
    "#4e79a7",
    "#59a14f",
    "#9c755f",
    "#f28e2b",
    "#76b7b2",
    "#edc948",
    "#b07aa1",
    "#bab0ac",
)
ACCENT = "#e4572e"


class ChartType(str, Enum):
    BAR = "bar"
    LINE = "line"
    PIE = "pie"
    DONUT = "donut"
    HALF_DONUT = "half_donut"
    SCATTER = "scatter"
    AREA = "area"
    BIG_NUMBER = "big_number"
    TABLE_LIST = "table_list"
    BOX_PLOT = "box_plot"
    TREEMAP = "treemap"
    BUBBLE = "bubble"


# Renderable chart usage counts per fact type, most frequent first.
_CHART_FREQUENCIES: dict[FactType, tuple[tuple[ChartType, int], ...]] = {
    FactType.VALUE: (
        (ChartType.BIG_NUMBER, 204),
        (ChartType.BAR, 56),
        (ChartType.TABLE_LIST, 9),
    ),
    FactType.DIFFERENCE: (
        (ChartType.BAR, 99),
        (ChartType.BIG_NUMBER, 46),
        (ChartType.LINE, 37),
    ),
    FactType.PROPORTION: (
        (ChartType.PIE, 131),
        (ChartType.BIG_NUMBER, 58),
        (ChartType.BAR, 45),
    ),
    FactType.TREND: (
        (ChartType.LINE, 170),
        (ChartType.BAR, 60),
        (ChartType.AREA, 14),
    ),
    FactType.CATEGORIZATION: (
        (ChartType.BAR, 24),
        (ChartType.TREEMAP, 5),
        (ChartType.AREA, 4),
    ),
    FactType.DISTRIBUTION: (
        (ChartType.BAR, 40),
        (ChartType.AREA, 12),
    ),
    FactType.RANK: (
        (ChartType.BAR, 24),
        (ChartType.BIG_NUMBER, 22),
        (ChartType.TABLE_LIST, 5),
        (ChartType.PIE, 3),
    ),
    FactType.ASSOCIATION: (
        (ChartType.LINE, 17),
        (ChartType.SCATTER, 9),
        (ChartType.BUBBLE, 2),
        (ChartType.BIG_NUMBER, 1),
    ),
    FactType.EXTREME: (
        (ChartType.BAR, 12),
        (ChartType.BIG_NUMBER, 4),
        (ChartType.LINE, 2),
    ),
    FactType.OUTLIER: (
        (ChartType.AREA, 4),
        (ChartType.BIG_NUMBER, 2),
        (ChartType.BOX_PLOT, 2),
    ),
}

_PIE_VARIANTS = (ChartType.PIE, ChartType.DONUT, ChartType.HALF_DONUT)


def chart_frequency(fact_type: FactType, chart: ChartType) -> int:
    for c, freq in _CHART_FREQUENCIES[fact_type]:
        if c == chart:
            return freq
    if chart in _PIE_VARIANTS:
        return chart_frequency(fact_type, ChartType.PIE)
    return 0


def default_chart(fact_type: FactType) -> ChartType:
    """Most frequently used renderable chart for the fact type."""
    return _CHART_FREQUENCIES[fact_type][0][0]


def chart_candidates(fact_type: FactType, diversity: float) -> list[ChartType]:
    """Candidate charts widened by the diversity knob in [0, 1].

    Diversity 0 keeps only the default; 1 admits every nonzero renderable
    chart of the type.  Whenever more than the default is admitted, pie
    expands in place to its donut and half-donut variants, keeping the list
    prefix-monotone in the diversity value.
    """
    if not (0.0 <= diversity <= 1.0):
        raise ValueError("diversity must lie in [0, 1]")
    row = [c for c, _ in _CHART_FREQUENCIES[fact_type]]
    k = len(row)
    take = math.ceil(1 + diversity * (k - 1))
    chosen = row[: max(1, take)]
    if len(chosen) == 1 and take <= 1:
        return [chosen[0]]
    expanded: list[ChartType] = []
    for c in chosen:
        if c == ChartType.PIE:
            expanded.extend(_PIE_VARIANTS)
        else:
            expanded.append(c)
    return expanded


@dataclass(frozen=True)
class ChartSpec:
    """Declarative chart description derived from one fact."""

    chart: ChartType
    data: tuple[dict, ...]
    category_field: Optional[str]
    measure_fields: tuple[str, ...]
    highlights: tuple[str, ...] = ()
    caption: str = ""
    annotation: Optional[str] = None


def to_chart_record(spec: ChartSpec) -> dict:
    return {
        "chart": spec.chart.value,
        "category_field": spec.category_field,
        "measure_fields": list(spec.measure_fields),
        "data": [dict(row) for row in spec.data],
        "highlights": list(spec.highlights),
        "caption": spec.caption,
        "annotation": spec.annotation,
    }


def from_chart_record(record: dict) -> ChartSpec:
    return ChartSpec(
        chart=ChartType(record["chart"]),
        data=tuple(dict(row) for row in record.get("data", [])),
        category_field=record.get("category_field"),
        measure_fields=tuple(record.get("measure_fields", [])),
        highlights=tuple(record.get("highlights", [])),
        caption=record.get("caption", ""),
        annotation=record.get("annotation"),
    )


def build_chart_spec(fact: DataFact, table: DataTable, chart: ChartType) -> ChartSpec:
    """Populate channels from the fact: breakdown keys as the categorical
    channel, aggregated measures as the numerical channel(s), focus highlighted."""
    if chart not in chart_candidates(fact.type, 1.0):
        raise SpecError(f"chart {chart.value} does not suit a {fact.type.value} fact")

    highlights = tuple(f.value for f in fact.focus)
    text = fact_caption(fact, table)
    annotation = None

    if fact.type == FactType.VALUE:
        derived = fact.derived or derive_value(fact, table)
        data = ({"key": fact.measure.field, "value": derived.number},)
        return ChartSpec(
            chart=chart,
            data=data,
            category_field=None,
            measure_fields=(fact.measure.field,),
            caption=text,
        )

    if fact.type == FactType.ASSOCIATION:
        g1 = dict(group_values(fact, table, fact.measures[0]))
        g2 = dict(group_values(fact, table, fact.measures[1]))
        keys = sorted(set(g1) & set(g2), key=str)
        data = tuple({"key": k, "x": g1[k], "y": g2[k]} for k in keys)
        return ChartSpec(
            chart=chart,
            data=data,
            category_field=fact.breakdown[0],
            measure_fields=(fact.measures[0].field, fact.measures[1].field),
            caption=text,
        )

    if fact.type == FactType.CATEGORIZATION:
        groups = group_values(fact, table)
        data = tuple({"key": k, "value": v} for k, v in groups)
        return ChartSpec(
            chart=chart,
            data=data,
            category_field=fact.breakdown[0],
            measure_fields=(),
            highlights=highlights,
            caption=text,
        )

    groups = group_values(fact, table)
    data = tuple({"key": k, "value": v} for k, v in groups)
    if fact.type == FactType.TREND:
        derived = fact.derived or derive_value(fact, table)
        annotation = derived.text
    return ChartSpec(
        chart=chart,
        data=data,
        category_field=fact.breakdown[0],
        measure_fields=(fact.measure.field,),
        highlights=highlights,
        caption=text,
        annotation=annotation,
    )


# --- SVG rendering ---------------------------------------------------------

_MARGIN = 28


def _color(i: int, key, highlights) -> str:
    if key is not None and str(key) in highlights:
        return ACCENT
    return PALETTE[i % len(PALETTE)]


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _value_range(values) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    lo = min(lo, 0.0)
    hi = max(hi, 0.0)
    if lo == hi:
        hi = lo + 1.0
    return lo, hi


def render_svg(spec: ChartSpec, width: int = 360, height: int = 240) -> str:
    """Render a chart spec to a standalone deterministic SVG document."""
    if width <= 0 or height <= 0:
        raise RenderError("size must be positive")
    body = _render_body(spec, width, height)
    title = escape(spec.caption or spec.chart.value)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
        f"<title>{title}</title>"
        f'<rect class="bg" x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>'
        f"{body}</svg>"
    )


def _render_body(spec: ChartSpec, width: int, height: int) -> str:
    if not spec.data:
        return (
            f'<text class="placeholder" x="{width / 2:.0f}" y="{height / 2:.0f}" '
            f'text-anchor="middle" font-size="14" fill="#888888">no data</text>'
        )
    chart = spec.chart
    if chart == ChartType.BIG_NUMBER:
        return _render_big_number(spec, width, height)
    if chart in (ChartType.BAR,):
        return _render_bars(spec, width, height)
    if chart in (ChartType.LINE, ChartType.AREA):
        return _render_line(spec, width, height, filled=chart == ChartType.AREA)
    if chart in _PIE_VARIANTS:
        return _render_pie(spec, width, height)
    if chart in (ChartType.SCATTER, ChartType.BUBBLE):
        return _render_scatter(spec, width, height, bubble=chart == ChartType.BUBBLE)
    if chart == ChartType.TABLE_LIST:
        return _render_table(spec, width, height)
    if chart == ChartType.BOX_PLOT:
        return _render_box(spec, width, height)
    if chart == ChartType.TREEMAP:
        return _render_treemap(spec, width, height)
    raise RenderError(f"no renderer for chart {chart.value}")


def _series(spec: ChartSpec):
    return [(row.get("key"), float(row.get("value", 0.0))) for row in spec.data]


def _render_big_number(spec: ChartSpec, width, height) -> str:
    row = spec.data[0]
    value = row.get("value", row.get("y", 0.0))
    label = str(row.get("key") or (spec.measure_fields[0] if spec.measure_fields else ""))
    return (
        f'<text class="big-number" x="{width / 2:.0f}" y="{height / 2:.0f}" '
        f'text-anchor="middle" font-size="{max(18, height // 5)}" fill="{PALETTE[0]}">'
        f"{escape(format_number(value))}</text>"
        f'<text class="label" x="{width / 2:.0f}" y="{height / 2 + height // 6:.0f}" '
        f'text-anchor="middle" font-size="12" fill="#555555">{escape(label)}</text>'
    )


def _render_bars(spec: ChartSpec, width, height) -> str:
    series = _series(spec)
    n = len(series)
    lo, hi = _value_range([v for _, v in series])
    plot_w, plot_h = width - 2 * _MARGIN, height - 2 * _MARGIN
    slot = plot_w / n
    bar_w = slot * 0.72
    parts = []
    zero_y = _MARGIN + plot_h * (hi / (hi - lo))
    for i, (key, value) in enumerate(series):
        x = _MARGIN + i * slot + (slot - bar_w) / 2
        h = abs(value) / (hi - lo) * plot_h
        y = zero_y - h if value >= 0 else zero_y
        parts.append(
            f'<rect class="bar" x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_w)}" '
            f'height="{_fmt(h)}" fill="{_color(i, key, spec.highlights)}">'
            f"<desc>{escape(str(key))}: {escape(format_number(value))}</desc></rect>"
        )
        parts.append(
            f'<text class="tick" x="{_fmt(x + bar_w / 2)}" y="{height - 8}" '
            f'text-anchor="middle" font-size="9" fill="#555555">{escape(str(key))}</text>'
        )
    parts.append(
        f'<line class="axis" x1="{_MARGIN}" y1="{_fmt(zero_y)}" x2="{width - _MARGIN}" '
        f'y2="{_fmt(zero_y)}" stroke="#333333" stroke-width="1"/>'
    )
    return "".join(parts)


def _points(spec: ChartSpec, width, height):
    series = _series(spec)
    n = len(series)
    lo, hi = _value_range([v for _, v in series])
    plot_w, plot_h = width - 2 * _MARGIN, height - 2 * _MARGIN
    coords = []
    for i, (key, value) in enumerate(series):
        x = _MARGIN + (plot_w * i / max(1, n - 1))
        y = _MARGIN + plot_h * (1 - (value - lo) / (hi - lo))
        coords.append((x, y, key, value))
    return coords


def _render_line(spec: ChartSpec, width, height, filled: bool) -> str:
    coords = _points(spec, width, height)
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y, _, _ in coords)
    parts = []
    if filled:
        base = height - _MARGIN
        poly = (
            f"{_fmt(coords[0][0])},{base} {pts} {_fmt(coords[-1][0])},{base}"
        )
        parts.append(
            f'<polygon class="area" points="{poly}" fill="{PALETTE[0]}" '
            f'fill-opacity="0.35" stroke="none"/>'
        )
    parts.append(
        f'<polyline class="line" points="{pts}" fill="none" '
        f'stroke="{PALETTE[0]}" stroke-width="2"/>'
    )
    for i, (x, y, key, value) in enumerate(coords):
        cls = "point accent" if str(key) in spec.highlights else "point"
        color = ACCENT if str(key) in spec.highlights else PALETTE[0]
        parts.append(
            f'<circle class="{cls}" cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="{color}">'
            f"<desc>{escape(str(key))}: {escape(format_number(value))}</desc></circle>"
        )
    return "".join(parts)


def _arc_path(cx, cy, r_outer, r_inner, a0, a1) -> str:
    large = 1 if (a1 - a0) > math.pi else 0
    x0, y0 = cx + r_outer * math.cos(a0), cy + r_outer * math.sin(a0)
    x1, y1 = cx + r_outer * math.cos(a1), cy + r_outer * math.sin(a1)
    if r_inner <= 0:
        return (
            f"M {_fmt(cx)} {_fmt(cy)} L {_fmt(x0)} {_fmt(y0)} "
            f"A {_fmt(r_outer)} {_fmt(r_outer)} 0 {large} 1 {_fmt(x1)} {_fmt(y1)} Z"
        )
    xi1, yi1 = cx + r_inner * math.cos(a1), cy + r_inner * math.sin(a1)
    xi0, yi0 = cx + r_inner * math.cos(a0), cy + r_inner * math.sin(a0)
    return (
        f"M {_fmt(x0)} {_fmt(y0)} "
        f"A {_fmt(r_outer)} {_fmt(r_outer)} 0 {large} 1 {_fmt(x1)} {_fmt(y1)} "
        f"L {_fmt(xi1)} {_fmt(yi1)} "
        f"A {_fmt(r_inner)} {_fmt(r_inner)} 0 {large} 0 {_fmt(xi0)} {_fmt(yi0)} Z"
    )


def _render_pie(spec: ChartSpec, width, height) -> str:
    series = [(k, max(0.0, v)) for k, v in _series(spec)]
    total = sum(v for _, v in series)
    if total <= 0:
        return (
            f'<text class="placeholder" x="{width / 2:.0f}" y="{height / 2:.0f}" '
            f'text-anchor="middle" font-size="14" fill="#888888">no data</text>'
        )
    half = spec.chart == ChartType.HALF_DONUT
    cx, cy = width / 2, (height / 2 if not half else height - _MARGIN)
    radius = min(width, height) / 2 - _MARGIN
    if half:
        radius = min(width / 2, height) - _MARGIN
    inner = 0.0
    if spec.chart in (ChartType.DONUT, ChartType.HALF_DONUT):
        inner = radius * 0.55
    span = math.pi if half else 2 * math.pi
    start = -math.pi if half else -math.pi / 2
    parts = []
    angle = start
    for i, (key, value) in enumerate(series):
        sweep = span * value / total
        # A full single-slice circle cannot be drawn as one arc; nudge it.
        end = angle + min(sweep, span - 1e-6 if len(series) == 1 else sweep)
        parts.append(
            f'<path class="slice" d="{_arc_path(cx, cy, radius, inner, angle, end)}" '
            f'fill="{_color(i, key, spec.highlights)}">'
            f"<desc>{escape(str(key))}: {escape(format_number(value))}</desc></path>"
        )
        angle += sweep
    return "".join(parts)


def _render_scatter(spec: ChartSpec, width, height, bubble: bool) -> str:
    xs = [float(r.get("x", i)) for i, r in enumerate(spec.data)]
    ys = [float(r.get("y", r.get("value", 0.0))) for r in spec.data]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_hi = x_lo + 1
    if y_lo == y_hi:
        y_hi = y_lo + 1
    plot_w, plot_h = width - 2 * _MARGIN, height - 2 * _MARGIN
    parts = []
    max_abs = max(abs(v) for v in ys) or 1.0
    for i, row in enumerate(spec.data):
        key = row.get("key")
        px = _MARGIN + plot_w * (xs[i] - x_lo) / (x_hi - x_lo)
        py = _MARGIN + plot_h * (1 - (ys[i] - y_lo) / (y_hi - y_lo))
        r = 4.0 if not bubble else 3.0 + 9.0 * abs(ys[i]) / max_abs
        parts.append(
            f'<circle class="mark" cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(r)}" '
            f'fill="{_color(i, key, spec.highlights)}" fill-opacity="0.85">'
            f"<desc>{escape(str(key))}</desc></circle>"
        )
    return "".join(parts)


def _render_table(spec: ChartSpec, width, height) -> str:
    parts = []
    rows = list(spec.data)[:12]
    step = (height - 2 * _MARGIN) / max(1, len(rows))
    for i, row in enumerate(rows):
        key = row.get("key")
        value = row.get("value", row.get("y", ""))
        y = _MARGIN + step * (i + 0.7)
        fill = ACCENT if str(key) in spec.highlights else "#333333"
        shown = format_number(value) if isinstance(value, (int, float)) else str(value)
        parts.append(
            f'<text class="row" x="{_MARGIN}" y="{_fmt(y)}" font-size="11" '
            f'fill="{fill}">{escape(str(key))}: {escape(shown)}</text>'
        )
    return "".join(parts)


def _render_box(spec: ChartSpec, width, height) -> str:
    values = sorted(v for _, v in _series(spec))
    n = len(values)

    def q(p: float) -> float:
        idx = p * (n - 1)
        lo = int(math.floor(idx))
        hi = int(math.ceil(idx))
        return values[lo] + (values[hi] - values[lo]) * (idx - lo)

    lo, hi = _value_range(values)
    plot_h = height - 2 * _MARGIN

    def y(v: float) -> float:
        return _MARGIN + plot_h * (1 - (v - lo) / (hi - lo))

    cx = width / 2
    box_w = min(80.0, width / 3)
    q1, q2, q3 = q(0.25), q(0.5), q(0.75)
    return (
        f'<line class="whisker" x1="{_fmt(cx)}" y1="{_fmt(y(values[0]))}" '
        f'x2="{_fmt(cx)}" y2="{_fmt(y(values[-1]))}" stroke="#333333"/>'
        f'<rect class="box" x="{_fmt(cx - box_w / 2)}" y="{_fmt(y(q3))}" '
        f'width="{_fmt(box_w)}" height="{_fmt(max(1.0, y(q1) - y(q3)))}" '
        f'fill="{PALETTE[0]}" fill-opacity="0.5" stroke="#333333"/>'
        f'<line class="median" x1="{_fmt(cx - box_w / 2)}" y1="{_fmt(y(q2))}" '
        f'x2="{_fmt(cx + box_w / 2)}" y2="{_fmt(y(q2))}" stroke="#333333" stroke-width="2"/>'
    )


def _render_treemap(spec: ChartSpec, width, height) -> str:
    series = [(k, max(0.0, v)) for k, v in _series(spec)]
    total = sum(v for _, v in series) or 1.0
    x = float(_MARGIN)
    plot_w, plot_h = width - 2 * _MARGIN, height - 2 * _MARGIN
    parts = []
    for i, (key, value) in enumerate(series):
        w = plot_w * value / total
        parts.append(
            f'<rect class="cell" x="{_fmt(x)}" y="{_MARGIN}" width="{_fmt(max(w, 0.5))}" '
            f'height="{_fmt(plot_h)}" fill="{_color(i, key, spec.highlights)}" '
            f'stroke="#ffffff">'
            f"<desc>{escape(str(key))}: {escape(format_number(value))}</desc></rect>"
        )
        x += w
    return "".join(parts)
