"""Coherence relations between facts: likelihood priors and expansion rules.

Six narrative relations link adjacent story facts.  Each fact type carries a
prior over which relation tends to follow it; expansion turns a (fact,
relation) pair into concrete successor facts.
"""
from __future__ import annotations

import random
from dataclasses import replace
from enum import Enum
from typing import Callable, Optional

from . import stats
from .errors import DegenerateInput, EmptyScope, InsufficientData
from .facts import (
    DataFact,
    FactType,
    Measure,
    derive_value,
    group_values,
    is_valid,
)
from .table import DataTable, FieldKind, Filter, Subspace

# Candidate pools larger than this are sampled rather than fully evaluated.
_MAX_SCAN = 256


class Relation(str, Enum):
    SIMILARITY = "similarity"
    TEMPORAL = "temporal"
    CONTRAST = "contrast"
    CAUSE_EFFECT = "cause_effect"
    ELABORATION = "elaboration"
    GENERALIZATION = "generalization"


RELATIONS = tuple(Relation)

# Observed percentages of each relation following each fact type, from the
# data-video survey.  Rows are normalized by their own sum on lookup.
_RELATION_PERCENTAGES = {
    FactType.VALUE: (45.6, 8.9, 0.0, 4.2, 26.8, 14.5),
    FactType.DIFFERENCE: (41.6, 6.7, 0.0, 5.8, 31.1, 14.8),
    FactType.PROPORTION: (52.1, 7.3, 0.0, 5.2, 22.4, 13.0),
    FactType.TREND: (34.7, 9.4, 8.2, 7.1, 28.2, 12.4),
    FactType.CATEGORIZATION: (37.7, 3.4, 0.0, 3.4, 47.5, 7.8),
    FactType.DISTRIBUTION: (49.0, 12.1, 0.0, 4.4, 22.3, 12.1),
    FactType.RANK: (43.8, 11.7, 0.0, 6.6, 34.3, 3.6),
    FactType.ASSOCIATION: (31.0, 5.6, 15.1, 7.1, 26.2, 15.1),
    FactType.EXTREME: (51.8, 5.6, 0.0, 3.7, 25.9, 13.0),
    FactType.OUTLIER: (20.0, 10.0, 0.0, 10.0, 40.0, 20.0),
}


def relation_table(
    overrides: Optional[dict] = None,
) -> dict[FactType, dict[Relation, float]]:
    """The full normalized likelihood table, optionally overridden row-wise
    with raw percentages (e.g. loaded from a config file)."""
    table = {}
    for ft, row in _RELATION_PERCENTAGES.items():
        if overrides and ft.value in overrides:
            row = tuple(float(v) for v in overrides[ft.value])
            if len(row) != len(RELATIONS):
                raise ValueError(f"override row for {ft.value} needs 6 entries")
        total = sum(row)
        table[ft] = {r: v / total for r, v in zip(RELATIONS, row)}
    return table


def load_relation_table(path) -> dict[FactType, dict[Relation, float]]:
    """Load row overrides from a JSON file of {fact type: [6 percentages]}."""
    import json
    from pathlib import Path

    overrides = json.loads(Path(path).read_text(encoding="utf-8"))
    return relation_table(overrides)


_RELATION_TABLE = relation_table()


def relation_likelihood(fact_type: FactType, relation: Relation) -> float:
    """P(relation | fact type), normalized so each row sums to 1."""
    return _RELATION_TABLE[fact_type][relation]


def draw_relation(fact_type: FactType, rng: random.Random) -> Relation:
    """Sample the relation following a fact of the given type."""
    roll = rng.random()
    cumulative = 0.0
    row = _RELATION_TABLE[fact_type]
    for relation in RELATIONS:
        cumulative += row[relation]
        if roll < cumulative:
            return relation
    return RELATIONS[-1]


def causal_successor(measure_field: str, table: DataTable) -> Optional[str]:
    """Default causal heuristic: the other numerical field most strongly
    correlated with the given one over full-table rows (|r| >= 0.3 required,
    schema-order tie-break).  Swappable for a real causal-discovery method.
    """
    numeric = [m.name for m in table.fields_of_kind(FieldKind.NUMERICAL)]
    if measure_field not in numeric or len(numeric) < 2:
        return None
    source = table.column(measure_field)
    best_name, best_r = None, 0.3
    for name in numeric:
        if name == measure_field:
            continue
        other = table.column(name)
        pairs = [(a, b) for a, b in zip(source, other) if a is not None and b is not None]
        if len(pairs) < 3:
            continue
        try:
            r, _ = stats.pearson_test([p[0] for p in pairs], [p[1] for p in pairs])
        except (DegenerateInput, InsufficientData):
            continue
        if abs(r) > best_r:
            best_name, best_r = name, abs(r)
    return best_name


CausalChooser = Callable[[str, DataTable], Optional[str]]


def _temporal_successor(table: DataTable, field_name: str, value: str) -> Optional[str]:
    ordered = table.field_meta(field_name).distinct_values
    try:
        pos = ordered.index(value)
    except ValueError:
        return None
    return ordered[pos + 1] if pos + 1 < len(ordered) else None


def _breakdown_kind(fact: DataFact, table: DataTable) -> Optional[FieldKind]:
    if not fact.breakdown:
        return None
    return table.field_meta(fact.breakdown[0]).kind


def _overview_type(kind: FieldKind) -> FactType:
    return FactType.TREND if kind == FieldKind.TEMPORAL else FactType.DISTRIBUTION


def _grubbs_focus(groups) -> Optional[str]:
    values = [v for _, v in groups]
    if len(values) < 3:
        return None
    try:
        idx, _ = stats.grubbs_test(values)
    except (DegenerateInput, InsufficientData):
        return None
    return groups[idx][0] if idx is not None else None


def _focused_fact(
    target: FactType,
    base: DataFact,
    groups,
    variant: str = "max",
) -> Optional[DataFact]:
    """Build a focus-carrying fact of the target type over the same scope."""
    if not groups or not base.breakdown:
        return None
    bfield = base.breakdown[0]
    by_value = sorted(groups, key=lambda kv: (-kv[1], str(kv[0])))
    if target == FactType.EXTREME:
        key = by_value[0][0] if variant == "max" else by_value[-1][0]
        focus = (Filter(bfield, key),)
    elif target == FactType.PROPORTION:
        focus = (Filter(bfield, by_value[0][0]),)
    elif target == FactType.OUTLIER:
        hit = _grubbs_focus(groups)
        if hit is None:
            return None
        focus = (Filter(bfield, hit),)
    elif target == FactType.DIFFERENCE:
        if len(by_value) < 2:
            return None
        focus = (Filter(bfield, by_value[0][0]), Filter(bfield, by_value[-1][0]))
    elif target == FactType.RANK:
        if len(by_value) < 3:
            return None
        focus = tuple(Filter(bfield, k) for k, _ in by_value[:3])
    else:  # same-type highlight for trend/distribution/categorization
        focus = (Filter(bfield, by_value[0][0]),)
        target = base.type
    measures = () if target == FactType.CATEGORIZATION else base.measures
    return DataFact(
        type=target,
        subspace=base.subspace,
        breakdown=base.breakdown,
        measures=measures,
        focus=focus,
    )


def _similarity_candidates(fact: DataFact, table: DataTable) -> list[DataFact]:
    out: list[DataFact] = []
    numeric = [m.name for m in table.fields_of_kind(FieldKind.NUMERICAL)]
    ct_fields = [
        m
        for m in table.schema
        if m.kind in (FieldKind.CATEGORICAL, FieldKind.TEMPORAL)
    ]

    # Swap a measure field.  Focus-by-value types are skipped because their
    # focus would no longer name the extreme under the new measure.
    if fact.measures and fact.type not in (
        FactType.EXTREME,
        FactType.OUTLIER,
        FactType.RANK,
    ):
        for pos, measure in enumerate(fact.measures):
            for name in numeric:
                if name in {m.field for m in fact.measures}:
                    continue
                measures = list(fact.measures)
                measures[pos] = Measure(field=name, agg=measure.agg)
                out.append(replace(fact, measures=tuple(measures), derived=None))

    # Swap the breakdown field.  The old focus names values of the old field,
    # so it is dropped; inventing a fresh focus would be a second edit (that
    # is elaboration's move), so swap targets are the focus-free overview
    # types the new field supports.  The measure set is preserved.
    if fact.breakdown:
        for meta in ct_fields:
            if meta.name == fact.breakdown[0]:
                continue
            targets: list[FactType] = []
            n_measures = len(fact.measures)
            if n_measures == 1:
                if meta.kind == FieldKind.TEMPORAL:
                    targets = [FactType.TREND]
                else:
                    targets = [FactType.DISTRIBUTION]
            elif n_measures == 2:
                targets = [FactType.ASSOCIATION]
            elif n_measures == 0:
                if meta.kind == FieldKind.CATEGORICAL:
                    targets = [FactType.CATEGORIZATION]
            base = replace(fact, breakdown=(meta.name,), focus=(), derived=None)
            for target in targets:
                out.append(replace(base, type=target))

    # Move the focus to a different group of the same breakdown.
    if fact.breakdown and fact.focus:
        try:
            groups = group_values(fact, table)
        except Exception:
            groups = []
        current = {f.value for f in fact.focus}
        bfield = fact.breakdown[0]
        arity = len(fact.focus)
        if arity == 1:
            for key, _ in groups:
                if key not in current:
                    out.append(replace(fact, focus=(Filter(bfield, key),), derived=None))
    return out


def _temporal_candidates(fact: DataFact, table: DataTable) -> list[DataFact]:
    temporal_filters = [
        f
        for f in fact.subspace.filters
        if table.has_field(f.field)
        and table.field_meta(f.field).kind == FieldKind.TEMPORAL
    ]
    if temporal_filters:
        current = temporal_filters[0]
        nxt = _temporal_successor(table, current.field, current.value)
        if nxt is None:
            return []
        filters = tuple(
            Filter(f.field, nxt) if f == current else f for f in fact.subspace.filters
        )
        return [replace(fact, subspace=Subspace(filters), derived=None)]
    kind = _breakdown_kind(fact, table)
    if kind == FieldKind.TEMPORAL and len(fact.subspace.filters) < 2:
        ordered = table.field_meta(fact.breakdown[0]).distinct_values
        if not ordered:
            return []
        filters = fact.subspace.filters + (Filter(fact.breakdown[0], ordered[0]),)
        return [replace(fact, subspace=Subspace(filters), derived=None)]
    return []


def _derived_sign(fact: DataFact, table: DataTable) -> Optional[int]:
    try:
        derived = derive_value(fact, table)
    except (EmptyScope, InsufficientData, DegenerateInput):
        return None
    if fact.type == FactType.TREND:
        return 1 if derived.text == "increasing" else -1
    if fact.type == FactType.ASSOCIATION:
        if derived.number is None or derived.number == 0:
            return None
        return 1 if derived.number > 0 else -1
    return None


def _contrast_candidates(
    fact: DataFact, table: DataTable, rng: random.Random, budget: int
) -> list[DataFact]:
    if fact.type not in (FactType.TREND, FactType.ASSOCIATION):
        return []
    source_sign = _derived_sign(fact, table)
    if source_sign is None:
        return []

    raw: list[DataFact] = []
    for f in fact.subspace.filters:
        for value in table.field_meta(f.field).distinct_values:
            if value == f.value:
                continue
            filters = tuple(
                Filter(g.field, value) if g == f else g for g in fact.subspace.filters
            )
            raw.append(replace(fact, subspace=Subspace(filters), derived=None))
    if len(fact.subspace.filters) < 2:
        filtered = {f.field for f in fact.subspace.filters}
        for meta in table.schema:
            if meta.kind == FieldKind.NUMERICAL or meta.name in filtered:
                continue
            if fact.breakdown and meta.name == fact.breakdown[0]:
                continue
            for value in meta.distinct_values:
                filters = fact.subspace.filters + (Filter(meta.name, value),)
                raw.append(replace(fact, subspace=Subspace(filters), derived=None))

    rng.shuffle(raw)
    out = []
    for candidate in raw[:_MAX_SCAN]:
        if _derived_sign(candidate, table) == -source_sign:
            out.append(candidate)
            if len(out) >= budget:
                break
    return out


def _cause_effect_candidates(
    fact: DataFact, table: DataTable, causal: CausalChooser
) -> list[DataFact]:
    if not fact.measures:
        return []
    successor = causal(fact.measures[0].field, table)
    if successor is None:
        return []
    if successor in {m.field for m in fact.measures}:
        return []
    measures = (Measure(field=successor, agg=fact.measures[0].agg),) + fact.measures[1:]
    candidate = replace(fact, measures=measures, derived=None)
    # Refit value-dependent foci so the new fact's claim stays true.
    if fact.type in (FactType.EXTREME, FactType.OUTLIER, FactType.RANK):
        try:
            groups = group_values(candidate, table)
        except Exception:
            return []
        variant = "max"
        if fact.type == FactType.EXTREME and fact.derived is not None:
            variant = fact.derived.text or "max"
        refit = _focused_fact(fact.type, replace(candidate, focus=()), groups, variant)
        if refit is None:
            return []
        candidate = refit
    return [candidate]


def _elaboration_candidates(fact: DataFact, table: DataTable) -> list[DataFact]:
    out: list[DataFact] = []
    # Narrow the subspace with one more filter.
    if len(fact.subspace.filters) < 2:
        filtered = {f.field for f in fact.subspace.filters}
        for meta in table.schema:
            if meta.kind == FieldKind.NUMERICAL or meta.name in filtered:
                continue
            if fact.breakdown and meta.name == fact.breakdown[0]:
                continue
            for value in meta.distinct_values:
                filters = fact.subspace.filters + (Filter(meta.name, value),)
                out.append(replace(fact, subspace=Subspace(filters), derived=None))
    # Or zoom in by setting a focus over the existing groups.
    if fact.breakdown and not fact.focus:
        try:
            groups = group_values(fact, table)
        except Exception:
            groups = []
        if groups:
            if fact.type == FactType.CATEGORIZATION:
                targets = [(FactType.CATEGORIZATION, "max")]
            else:
                targets = [
                    (FactType.EXTREME, "max"),
                    (FactType.EXTREME, "min"),
                    (FactType.PROPORTION, "max"),
                    (FactType.OUTLIER, "max"),
                    (FactType.DIFFERENCE, "max"),
                    (FactType.RANK, "max"),
                    (fact.type, "max"),  # same type, highlight only
                ]
            for target, variant in targets:
                candidate = _focused_fact(target, fact, groups, variant)
                if candidate is not None:
                    out.append(candidate)
    return out


def _generalization_candidates(fact: DataFact, table: DataTable) -> list[DataFact]:
    out: list[DataFact] = []
    for f in fact.subspace.filters:
        filters = tuple(g for g in fact.subspace.filters if g != f)
        out.append(replace(fact, subspace=Subspace(filters), derived=None))
    if fact.focus:
        kind = _breakdown_kind(fact, table)
        if fact.type in (FactType.TREND, FactType.DISTRIBUTION, FactType.CATEGORIZATION):
            out.append(replace(fact, focus=(), derived=None))
        elif kind is not None and fact.measures:
            out.append(
                DataFact(
                    type=_overview_type(kind),
                    subspace=fact.subspace,
                    breakdown=fact.breakdown,
                    measures=fact.measures,
                    focus=(),
                )
            )
    return out


def expand(
    fact: DataFact,
    relation: Relation,
    table: DataTable,
    rng: random.Random,
    budget: int = 8,
    causal: CausalChooser = causal_successor,
) -> list[DataFact]:
    """Facts reachable from `fact` through `relation`, at most `budget` of them.

    Every returned fact validates structurally; an empty list means the
    relation offers no legal move from this fact.
    """
    if budget < 1:
        return []
    if relation == Relation.SIMILARITY:
        raw = _similarity_candidates(fact, table)
        rng.shuffle(raw)
    elif relation == Relation.TEMPORAL:
        raw = _temporal_candidates(fact, table)
    elif relation == Relation.CONTRAST:
        raw = _contrast_candidates(fact, table, rng, budget)
    elif relation == Relation.CAUSE_EFFECT:
        raw = _cause_effect_candidates(fact, table, causal)
    elif relation == Relation.ELABORATION:
        raw = _elaboration_candidates(fact, table)
        rng.shuffle(raw)
    elif relation == Relation.GENERALIZATION:
        raw = _generalization_candidates(fact, table)
    else:
        raise ValueError(f"unknown relation {relation}")

    out: list[DataFact] = []
    seen = {fact.key()}
    for candidate in raw:
        if candidate.key() in seen:
            continue
        if not is_valid(candidate, table):
            continue
        seen.add(candidate.key())
        out.append(candidate)
        if len(out) >= budget:
            break
    return out


def _filters_set(fact: DataFact) -> set:
    return {(f.field, f.value) for f in fact.subspace.filters}


def _focus_set(fact: DataFact) -> set:
    return {(f.field, f.value) for f in fact.focus}


def relation_applies(
    f1: DataFact,
    relation: Relation,
    f2: DataFact,
    table: DataTable,
    causal: CausalChooser = causal_successor,
) -> bool:
    """Post-hoc check that f2 is a legal `relation` successor of f1.

    Used to audit generated stories and to re-link manually edited storylines.
    """
    s1, s2 = _filters_set(f1), _filters_set(f2)
    measures_equal = {m.field for m in f1.measures} == {m.field for m in f2.measures}
    breakdown_equal = f1.breakdown == f2.breakdown
    focus_equal = _focus_set(f1) == _focus_set(f2)

    if relation == Relation.SIMILARITY:
        if s1 != s2 or f1.key() == f2.key():
            return False
        if not breakdown_equal:
            # swapped breakdown: the old focus is dropped, never re-invented
            return measures_equal and not f2.focus
        if not measures_equal:
            return focus_equal
        # replacing an existing focus; introducing or clearing one is the
        # business of elaboration/generalization
        return bool(f1.focus) and bool(f2.focus) and not focus_equal

    if relation == Relation.TEMPORAL:
        if f1.type != f2.type or not breakdown_equal or not measures_equal or not focus_equal:
            return False
        added = s2 - s1
        removed = s1 - s2
        if len(added) == 1 and len(removed) == 1:
            (fld_a, val_a), (fld_r, val_r) = next(iter(added)), next(iter(removed))
            if fld_a != fld_r:
                return False
            if table.field_meta(fld_a).kind != FieldKind.TEMPORAL:
                return False
            return _temporal_successor(table, fld_a, val_r) == val_a
        if len(added) == 1 and not removed:
            fld, val = next(iter(added))
            if not f1.breakdown or fld != f1.breakdown[0]:
                return False
            meta = table.field_meta(fld)
            return (
                meta.kind == FieldKind.TEMPORAL
                and bool(meta.distinct_values)
                and val == meta.distinct_values[0]
            )
        return False

    if relation == Relation.CONTRAST:
        if f1.type != f2.type or f1.type not in (FactType.TREND, FactType.ASSOCIATION):
            return False
        if not breakdown_equal or not measures_equal:
            return False
        if s1 == s2:
            return False
        delta = len(s1 ^ s2)
        if delta not in (1, 2):
            return False
        sign1, sign2 = _derived_sign(f1, table), _derived_sign(f2, table)
        return sign1 is not None and sign2 is not None and sign1 == -sign2

    if relation == Relation.CAUSE_EFFECT:
        if f1.type != f2.type or s1 != s2 or not breakdown_equal:
            return False
        if not f1.measures or not f2.measures or measures_equal:
            return False
        return causal(f1.measures[0].field, table) == f2.measures[0].field

    if relation == Relation.ELABORATION:
        if s1 == s2:
            return (
                breakdown_equal
                and measures_equal
                and not f1.focus
                and bool(f2.focus)
            )
        return (
            f1.type == f2.type
            and breakdown_equal
            and measures_equal
            and focus_equal
            and s1 < s2
            and len(s2 - s1) == 1
        )

    if relation == Relation.GENERALIZATION:
        if s1 == s2:
            return (
                breakdown_equal
                and measures_equal
                and bool(f1.focus)
                and not f2.focus
            )
        return (
            f1.type == f2.type
            and breakdown_equal
            and measures_equal
            and focus_equal
            and s2 < s1
            and len(s1 - s2) == 1
        )

    raise ValueError(f"unknown relation {relation}")


def best_relation(
    f1: DataFact, f2: DataFact, table: DataTable
) -> Optional[Relation]:
    """Highest-likelihood relation whose rule links f1 to f2, if any."""
    applicable = [
        r
        for r in RELATIONS
        if relation_likelihood(f1.type, r) > 0 and relation_applies(f1, r, f2, table)
    ]
    if not applicable:
        return None
    return max(applicable, key=lambda r: relation_likelihood(f1.type, r))
