"""Story-level composition: factsheet layout optimization, story aggregation
into compound facts, and the storyline/swiper/factsheet documents.

The factsheet partitions the fact sequence into horizontal rows.  Its score
adds an area term (important facts get more space) and a distance term
(similar facts share a row, dissimilar facts separate rows).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np
from scipy.cluster.hierarchy import linkage

from .errors import LayoutError
from .facts import DataFact, fact_similarity
from .narrate import caption as fact_caption
from .search import Scorer, Story
from .table import DataTable
from .visualize import (
    ChartSpec,
    ChartType,
    build_chart_spec,
    chart_candidates,
    chart_frequency,
    render_svg,
)


def fact_distance(f1: DataFact, f2: DataFact, table: DataTable) -> float:
    """1 - similarity, so dissimilar facts sit far apart."""
    return 1.0 - fact_similarity(f1, f2, table)


@dataclass(frozen=True)
class FactsheetLayout:
    """Order-preserving partition of the story facts into rows, with the page
    area fraction assigned to each fact."""

    rows: tuple[tuple[int, ...], ...]
    areas: tuple[float, ...]
    page: tuple[float, float]

    def __post_init__(self):
        flat = [i for row in self.rows for i in row]
        if flat != list(range(len(flat))):
            raise LayoutError("rows must partition 0..n-1 in story order")
        if abs(sum(self.areas) - 1.0) > 1e-9 or any(a <= 0 for a in self.areas):
            raise LayoutError("areas must be positive and sum to 1")


def _normalized_importances(story: Story, table: DataTable, scorer: Optional[Scorer]) -> list[float]:
    scorer = scorer or Scorer(table)
    raw = [scorer.score(f).importance for f in story.facts]
    top = max(raw) if raw else 0.0
    if top <= 0:
        return [1.0 for _ in raw]
    return [max(v / top, 1e-6) for v in raw]


def _areas_for(rows: Sequence[Sequence[int]], importances: Sequence[float]) -> list[float]:
    k = len(rows)
    areas = [0.0] * len(importances)
    for row in rows:
        weight = sum(importances[i] for i in row)
        for i in row:
            share = importances[i] / weight if weight > 0 else 1.0 / len(row)
            areas[i] = share / k
    return areas


def _distance_matrix(story: Story, table: DataTable) -> list[list[float]]:
    n = len(story.facts)
    d = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = fact_distance(story.facts[i], story.facts[j], table)
    return d


def _score_partition(rows, importances, distances) -> tuple[float, float, float]:
    n = len(importances)
    k = len(rows)
    areas = _areas_for(rows, importances)
    total_area = sum(areas)
    f_s = sum(s * a for s, a in zip(importances, areas)) / total_area

    if k <= 1:
        f_inter = 0.0
    else:
        f_inter = sum(
            distances[rows[j][-1]][rows[j + 1][0]] for j in range(k - 1)
        ) / (k - 1)
    if n == k:
        f_intra = 0.0
    else:
        f_intra = sum(
            distances[row[i]][row[i + 1]]
            for row in rows
            for i in range(len(row) - 1)
        ) / (n - k)
    f_d = f_inter - f_intra
    return f_s + f_d, f_s, f_d


def layout_score(
    layout: FactsheetLayout,
    story: Story,
    table: DataTable,
    scorer: Optional[Scorer] = None,
) -> tuple[float, float, float]:
    """(f, f_s, f_d) of a given layout for the story."""
    n = len(story.facts)
    if sum(len(r) for r in layout.rows) != n:
        raise LayoutError("layout does not cover the story")
    importances = _normalized_importances(story, table, scorer)
    distances = _distance_matrix(story, table)
    return _score_partition(layout.rows, importances, distances)


def _compositions(n: int, max_rows: int):
    """All order-preserving partitions of 0..n-1 into at most max_rows rows."""
    items = list(range(n))
    for cut_count in range(0, min(max_rows, n)):
        for cuts in itertools.combinations(range(1, n), cut_count):
            bounds = (0,) + cuts + (n,)
            yield tuple(
                tuple(items[bounds[i] : bounds[i + 1]]) for i in range(len(bounds) - 1)
            )


def layout_factsheet(
    story: Story,
    table: DataTable,
    page: tuple[float, float] = (840.0, 1188.0),
    max_rows: Optional[int] = None,
    scorer: Optional[Scorer] = None,
) -> FactsheetLayout:
    """Exhaustively search the order-preserving row partitions for the best f.

    Ties prefer fewer rows, then the lexicographically smallest row-size
    signature.  Factsheet stories are short, so the 2^(n-1) space is exact.
    """
    n = len(story.facts)
    if n == 0:
        raise LayoutError("cannot lay out an empty story")
    if n > 16:
        raise LayoutError("factsheet layout supports at most 16 facts")
    max_rows = n if max_rows is None else min(max_rows, n)
    if max_rows < 1:
        raise LayoutError("max_rows must be >= 1")

    importances = _normalized_importances(story, table, scorer)
    distances = _distance_matrix(story, table)

    best_rows = None
    best_key = None
    for rows in _compositions(n, max_rows):
        f, _, _ = _score_partition(rows, importances, distances)
        key = (-f, len(rows), tuple(len(r) for r in rows))
        if best_key is None or key < best_key:
            best_key, best_rows = key, rows
    areas = _areas_for(best_rows, importances)
    return FactsheetLayout(rows=best_rows, areas=tuple(areas), page=page)


# --- story aggregation -------------------------------------------------------


@dataclass(frozen=True)
class CompoundFact:
    """Two merged facts sharing one chart, or juxtaposed side by side."""

    parts: tuple[DataFact, DataFact]
    merged_chart: Optional[ChartType]
    juxtaposed: bool
    caption: str

    def __post_init__(self):
        if (self.merged_chart is None) == (not self.juxtaposed):
            raise ValueError("a compound either merges into one chart or juxtaposes")


StoryPiece = Union[DataFact, CompoundFact]


def merge_facts(f1: DataFact, f2: DataFact, table: DataTable) -> CompoundFact:
    """Merge two facts into a compound: shared chart when their non-focus
    tuples agree and their candidate chart sets intersect, else juxtaposition.
    The caption is always the two captions joined."""
    text = f"{fact_caption(f1, table)} {fact_caption(f2, table)}"
    tuples_agree = (
        f1.subspace == f2.subspace
        and f1.breakdown == f2.breakdown
        and f1.measures == f2.measures
    )
    merged: Optional[ChartType] = None
    if tuples_agree:
        shared = [
            c
            for c in chart_candidates(f1.type, 1.0)
            if c in chart_candidates(f2.type, 1.0)
        ]
        if shared:
            merged = max(
                shared,
                key=lambda c: chart_frequency(f1.type, c) + chart_frequency(f2.type, c),
            )
    return CompoundFact(
        parts=(f1, f2),
        merged_chart=merged,
        juxtaposed=merged is None,
        caption=text,
    )


def sibling_leaf_pairs(story: Story, table: DataTable) -> list[tuple[int, int]]:
    """Leaf pairs merged first by average-linkage clustering on fact distance,
    ranked by similarity (most similar first)."""
    n = len(story.facts)
    if n < 2:
        return []
    if n == 2:
        return [(0, 1)]
    distances = _distance_matrix(story, table)
    condensed = np.array(
        [distances[i][j] for i in range(n) for j in range(i + 1, n)], dtype=float
    )
    merges = linkage(condensed, method="average")
    pairs = []
    for row in merges:
        a, b = int(row[0]), int(row[1])
        if a < n and b < n:
            pairs.append((min(a, b), max(a, b), float(row[2])))
    pairs.sort(key=lambda p: (p[2], p[0], p[1]))
    return [(a, b) for a, b, _ in pairs]


def aggregate_story(
    story: Story, level: float, table: DataTable
) -> list[StoryPiece]:
    """Merge the top share of candidate sibling pairs given by `level` in [0, 1].

    Level 0 returns the single facts unchanged; level 1 merges every
    candidate pair."""
    if not (0.0 <= level <= 1.0):
        raise ValueError("aggregation level must lie in [0, 1]")
    candidates = sibling_leaf_pairs(story, table)
    take = math.ceil(level * len(candidates))
    chosen = candidates[:take]
    merged_at: dict[int, CompoundFact] = {}
    swallowed: set[int] = set()
    for a, b in chosen:
        merged_at[a] = merge_facts(story.facts[a], story.facts[b], table)
        swallowed.add(b)
    pieces: list[StoryPiece] = []
    for i, fact in enumerate(story.facts):
        if i in swallowed:
            continue
        pieces.append(merged_at.get(i, fact))
    return pieces


# --- document assembly -------------------------------------------------------

_CSS = (
    "body{font-family:Helvetica,Arial,sans-serif;margin:0;background:#fafafa}"
    ".piece{display:inline-block;vertical-align:top;margin:12px;background:#fff;"
    "border:1px solid #ddd;border-radius:6px;padding:10px;width:380px}"
    ".caption{font-size:13px;color:#333;margin-top:6px;line-height:1.4}"
    ".strip{white-space:nowrap;overflow-x:auto}"
    ".frame{width:100vw;height:100vh;display:flex;flex-direction:column;"
    "align-items:center;justify-content:center}"
)


def _html(title: str, body: str) -> str:
    return (
        "<!DOCTYPE html>"
        f'<html><head><meta charset="utf-8"><title>{escape(title)}</title>'
        f"<style>{_CSS}</style></head><body>{body}</body></html>"
    )


def story_charts(
    story: Story, table: DataTable, chart_diversity: float = 0.0
) -> list[ChartSpec]:
    """One chart spec per fact; repeated fact types rotate through the
    candidate charts admitted by the diversity knob."""
    seen: dict = {}
    specs = []
    for fact in story.facts:
        options = chart_candidates(fact.type, chart_diversity)
        nth = seen.get(fact.type, 0)
        seen[fact.type] = nth + 1
        specs.append(build_chart_spec(fact, table, options[nth % len(options)]))
    return specs


def render_storyline(specs: Sequence[ChartSpec]) -> str:
    """Captioned charts horizontally aligned in one scrollable row."""
    pieces = []
    for spec in specs:
        svg = render_svg(spec, 360, 240)
        pieces.append(
            f'<div class="piece">{svg}<div class="caption">{escape(spec.caption)}</div></div>'
        )
    return _html("storyline", f'<div class="strip">{"".join(pieces)}</div>')


def render_swiper(specs: Sequence[ChartSpec]) -> str:
    """One full-screen frame per fact, in story order."""
    frames = []
    for i, spec in enumerate(specs):
        svg = render_svg(spec, 360, 240)
        frames.append(
            f'<section class="frame" id="fact-{i}">{svg}'
            f'<div class="caption">{escape(spec.caption)}</div></section>'
        )
    return _html("swiper", "".join(frames))


def _wrap_caption(text: str, max_chars: int, max_lines: int = 3) -> list[str]:
    words = text.split()
    lines, current = [], ""
    for word in words:
        probe = f"{current} {word}".strip()
        if len(probe) > max_chars and current:
            lines.append(current)
            current = word
        else:
            current = probe
    if current:
        lines.append(current)
    if len(lines) > max_lines:
        lines = lines[:max_lines]
        lines[-1] = lines[-1][: max(0, max_chars - 3)] + "..."
    return lines


def render_factsheet(
    story: Story,
    table: DataTable,
    specs: Optional[Sequence[ChartSpec]] = None,
    page: tuple[float, float] = (840.0, 1188.0),
    scorer: Optional[Scorer] = None,
) -> str:
    """Single-poster SVG: the optimized layout with a chart and caption per cell."""
    layout = layout_factsheet(story, table, page=page, scorer=scorer)
    if specs is None:
        specs = story_charts(story, table)
    width, height = page
    k = len(layout.rows)
    row_h = height / k
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        "<title>factsheet</title>",
        f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="#ffffff"/>',
    ]
    for j, row in enumerate(layout.rows):
        x = 0.0
        row_weight = sum(layout.areas[i] for i in row)
        for i in row:
            cell_w = width * (layout.areas[i] / row_weight)
            caption_lines = _wrap_caption(specs[i].caption, max_chars=max(12, int(cell_w / 6.2)))
            caption_h = 16 * len(caption_lines) + 8
            chart_h = max(40.0, row_h - caption_h - 16)
            # near-zero-importance facts get sliver cells; keep charts drawable
            inner = render_svg(specs[i], max(24, int(cell_w - 16)), max(24, int(chart_h)))
            inner = inner.replace(
                "<svg ", f'<svg x="{x + 8:.1f}" y="{j * row_h + 8:.1f}" ', 1
            )
            parts.append(
                f'<g class="cell" data-fact="{i}">'
                f'<rect x="{x:.1f}" y="{j * row_h:.1f}" width="{cell_w:.1f}" '
                f'height="{row_h:.1f}" fill="none" stroke="#dddddd"/>'
                f"{inner}"
            )
            for li, line in enumerate(caption_lines):
                parts.append(
                    f'<text x="{x + 10:.1f}" y="{j * row_h + chart_h + 24 + 15 * li:.1f}" '
                    f'font-size="12" fill="#333333">{escape(line)}</text>'
                )
            parts.append("</g>")
            x += cell_w
    parts.append("</svg>")
    return "".join(parts)
