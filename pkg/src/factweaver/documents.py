"""Story documents: the persistence/wire format shared by the service and CLI.

A StoryDocument bundles a story with its per-fact captions, chart specs,
scores and the generation parameters, under an optimistic revision counter.
All artifacts serialize to plain JSON-compatible records.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import ParseError
from .facts import DataFact, from_fact_record, to_fact_record
from .logic import Relation, best_relation
from .search import (
    RewardWeights,
    Scorer,
    Story,
    criteria_breakdown,
)
from .table import DataTable
from .visualize import (
    ChartSpec,
    ChartType,
    build_chart_spec,
    chart_candidates,
    from_chart_record,
    to_chart_record,
)

UNLINKED = "unlinked"


@dataclass(frozen=True)
class StoryDocument:
    id: str
    dataset_id: str
    story: Story
    charts: tuple[ChartSpec, ...]
    params: dict
    revision: int = 1
    scores: tuple[dict, ...] = field(default=())

    @property
    def captions(self) -> tuple[str, ...]:
        return tuple(spec.caption for spec in self.charts)


def weights_from_params(params: dict) -> RewardWeights:
    w = params.get("weights", {})
    return RewardWeights(
        diversity=w.get("diversity", 1 / 3),
        logicality=w.get("logicality", 1 / 3),
        integrity=w.get("integrity", 1 / 3),
    )


def _fact_scores(story: Story, scorer: Scorer) -> tuple[dict, ...]:
    out = []
    for fact in story.facts:
        s = scorer.score(fact)
        out.append(
            {
                "probability": s.probability,
                "self_information_bits": s.self_information_bits,
                "significance": s.significance,
                "importance": s.importance,
                "zero_support": s.zero_support,
            }
        )
    return tuple(out)


def _chart_for(
    fact: DataFact,
    table: DataTable,
    chart_diversity: float,
    type_counter: dict,
    preferred: Optional[ChartType] = None,
) -> ChartSpec:
    if preferred is not None and preferred in chart_candidates(fact.type, 1.0):
        return build_chart_spec(fact, table, preferred)
    options = chart_candidates(fact.type, chart_diversity)
    nth = type_counter.get(fact.type, 0)
    type_counter[fact.type] = nth + 1
    return build_chart_spec(fact, table, options[nth % len(options)])


def build_story_document(
    story: Story,
    table: DataTable,
    dataset_id: str,
    params: dict,
    doc_id: Optional[str] = None,
    scorer: Optional[Scorer] = None,
) -> StoryDocument:
    """Assemble the full document for a freshly generated story."""
    scorer = scorer or Scorer(table)
    weights = weights_from_params(params)
    crits = criteria_breakdown(story, weights, table, scorer)
    story = replace(story, reward=crits["reward"], criteria=crits)
    diversity = float(params.get("chart_diversity", 0.0))
    counter: dict = {}
    charts = tuple(_chart_for(f, table, diversity, counter) for f in story.facts)
    scores = _fact_scores(story, scorer)
    document = StoryDocument(
        id=doc_id or "pending",
        dataset_id=dataset_id,
        story=story,
        charts=charts,
        params=params,
        scores=scores,
    )
    if doc_id is None:
        digest = hashlib.sha256(
            json.dumps(to_story_document_record(document), sort_keys=True).encode()
        ).hexdigest()[:16]
        document = replace(document, id=digest)
    return document


def to_story_record(story: Story) -> dict:
    return {
        "facts": [to_fact_record(f) for f in story.facts],
        "relations": [r.value if r is not None else UNLINKED for r in story.relations],
        "reward": story.reward,
        "criteria": dict(story.criteria),
        "goal_unmet": story.goal_unmet,
        "warning": story.warning,
    }


def from_story_record(record: dict, table: Optional[DataTable] = None) -> Story:
    facts = tuple(from_fact_record(f, table) for f in record.get("facts", []))
    relations = []
    for r in record.get("relations", []):
        if r == UNLINKED or r is None:
            relations.append(None)
        else:
            try:
                relations.append(Relation(r))
            except ValueError:
                raise ParseError(f"unknown relation {r!r}") from None
    return Story(
        facts=facts,
        relations=tuple(relations),
        reward=float(record.get("reward", 0.0)),
        criteria=dict(record.get("criteria", {})),
        goal_unmet=bool(record.get("goal_unmet", False)),
        warning=record.get("warning"),
    )


def to_story_document_record(document: StoryDocument) -> dict:
    return {
        "id": document.id,
        "dataset_id": document.dataset_id,
        "revision": document.revision,
        "story": to_story_record(document.story),
        "charts": [to_chart_record(c) for c in document.charts],
        "captions": list(document.captions),
        "scores": [dict(s) for s in document.scores],
        "params": document.params,
    }


def from_story_document_record(
    record: dict, table: Optional[DataTable] = None
) -> StoryDocument:
    return StoryDocument(
        id=str(record["id"]),
        dataset_id=str(record["dataset_id"]),
        revision=int(record.get("revision", 1)),
        story=from_story_record(record.get("story", {}), table),
        charts=tuple(from_chart_record(c) for c in record.get("charts", [])),
        scores=tuple(dict(s) for s in record.get("scores", [])),
        params=dict(record.get("params", {})),
    )


def replay_reward(document: StoryDocument, table: DataTable) -> float:
    """Recompute the stored story's reward from scratch (audit check)."""
    weights = weights_from_params(document.params)
    return criteria_breakdown(document.story, weights, table)["reward"]


def _recompute(
    document: StoryDocument,
    table: DataTable,
    facts: list[DataFact],
    relations: list[Optional[Relation]],
    charts: list[Optional[ChartSpec]],
) -> StoryDocument:
    """Rebuild captions, charts, scores and criteria after a mutation."""
    scorer = Scorer(table)
    weights = weights_from_params(document.params)
    story = Story(facts=tuple(facts), relations=tuple(relations))
    crits = criteria_breakdown(story, weights, table, scorer)
    story = replace(story, reward=crits["reward"], criteria=crits)
    diversity = float(document.params.get("chart_diversity", 0.0))
    counter: dict = {}
    rebuilt = []
    for fact, prior in zip(facts, charts):
        preferred = prior.chart if prior is not None else None
        rebuilt.append(_chart_for(fact, table, diversity, counter, preferred))
    return StoryDocument(
        id=document.id,
        dataset_id=document.dataset_id,
        revision=document.revision + 1,
        story=story,
        charts=tuple(rebuilt),
        scores=_fact_scores(story, scorer),
        params=document.params,
    )


def edit_fact(
    document: StoryDocument,
    table: DataTable,
    index: int,
    fact: DataFact,
    chart: Optional[ChartType] = None,
) -> StoryDocument:
    """Replace one fact; its caption, chart, derived value and scores are
    recomputed and the revision advances."""
    if not (0 <= index < len(document.story.facts)):
        raise IndexError(f"fact index {index} out of range")
    facts = list(document.story.facts)
    facts[index] = fact
    charts: list[Optional[ChartSpec]] = list(document.charts)
    if chart is not None:
        charts[index] = ChartSpec(
            chart=chart,
            data=(),
            category_field=None,
            measure_fields=(),
        )
    relations = list(document.story.relations)
    return _recompute(document, table, facts, relations, charts)


def _relink(facts: list[DataFact], table: DataTable) -> list[Optional[Relation]]:
    return [
        best_relation(facts[i], facts[i + 1], table) for i in range(len(facts) - 1)
    ]


def add_fact(
    document: StoryDocument,
    table: DataTable,
    fact: DataFact,
    index: Optional[int] = None,
) -> StoryDocument:
    facts = list(document.story.facts)
    charts: list[Optional[ChartSpec]] = list(document.charts)
    pos = len(facts) if index is None else index
    if not (0 <= pos <= len(facts)):
        raise IndexError(f"insert position {pos} out of range")
    facts.insert(pos, fact)
    charts.insert(pos, None)
    return _recompute(document, table, facts, _relink(facts, table), charts)


def remove_fact(document: StoryDocument, table: DataTable, index: int) -> StoryDocument:
    if not (0 <= index < len(document.story.facts)):
        raise IndexError(f"fact index {index} out of range")
    facts = list(document.story.facts)
    charts: list[Optional[ChartSpec]] = list(document.charts)
    facts.pop(index)
    charts.pop(index)
    return _recompute(document, table, facts, _relink(facts, table), charts)


def reorder_facts(
    document: StoryDocument, table: DataTable, order: list[int]
) -> StoryDocument:
    n = len(document.story.facts)
    if sorted(order) != list(range(n)):
        raise IndexError("order must be a permutation of 0..n-1")
    facts = [document.story.facts[i] for i in order]
    charts: list[Optional[ChartSpec]] = [document.charts[i] for i in order]
    return _recompute(document, table, facts, _relink(facts, table), charts)


# --- on-disk store -----------------------------------------------------------


def write_json(path: Path, payload: dict) -> None:
    """Atomic JSON write (temp file + rename) so restarts never see torn docs."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    tmp.replace(path)


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))
