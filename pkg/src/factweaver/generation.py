"""Candidate fact construction: seeded random sampling and exhaustive enumeration."""
from __future__ import annotations

import itertools
import random
from typing import Iterator, Optional, Sequence

from . import stats
from .errors import DegenerateInput, InsufficientData
from .facts import DataFact, FactType, Measure, group_values, is_valid
from .table import DataTable, FieldKind, Filter, Subspace

DEFAULT_AGGS = ("sum", "avg", "max", "min", "count")


def _ct_fields(table: DataTable, exclude: Sequence[str] = ()) -> list[str]:
    return [
        m.name
        for m in table.schema
        if m.kind in (FieldKind.CATEGORICAL, FieldKind.TEMPORAL)
        and m.name not in exclude
    ]


def random_subspace(
    table: DataTable, rng: random.Random, exclude: Sequence[str] = ()
) -> Subspace:
    """0, 1 or 2 random filters (weighted toward broad scopes)."""
    names = _ct_fields(table, exclude)
    roll = rng.random()
    k = 0 if roll < 0.5 or not names else (1 if roll < 0.85 or len(names) < 2 else 2)
    if k == 0:
        return Subspace()
    fields = rng.sample(names, k)
    filters = []
    for name in fields:
        values = table.field_meta(name).distinct_values
        if not values:
            return Subspace()
        filters.append(Filter(name, rng.choice(values)))
    return Subspace(tuple(filters))


def _random_measure(table: DataTable, rng: random.Random) -> Optional[Measure]:
    numeric = [m.name for m in table.fields_of_kind(FieldKind.NUMERICAL)]
    if not numeric:
        return None
    return Measure(field=rng.choice(numeric), agg=rng.choice(DEFAULT_AGGS))


def _grubbs_hit(groups) -> Optional[str]:
    values = [v for _, v in groups]
    if len(values) < 3:
        return None
    try:
        idx, _ = stats.grubbs_test(values)
    except (DegenerateInput, InsufficientData):
        return None
    return groups[idx][0] if idx is not None else None


def random_fact(
    table: DataTable, fact_type: FactType, rng: random.Random
) -> Optional[DataFact]:
    """One random structurally valid fact of the given type, or None when the
    schema/data cannot support it."""
    numeric = [m.name for m in table.fields_of_kind(FieldKind.NUMERICAL)]
    categorical = [m.name for m in table.fields_of_kind(FieldKind.CATEGORICAL)]
    temporal = [m.name for m in table.fields_of_kind(FieldKind.TEMPORAL)]

    if fact_type == FactType.VALUE:
        measure = _random_measure(table, rng)
        if measure is None:
            return None
        fact = DataFact(
            type=fact_type, subspace=random_subspace(table, rng), measures=(measure,)
        )
        return fact if is_valid(fact, table) else None

    if fact_type == FactType.ASSOCIATION:
        if len(numeric) < 2:
            return None
        f1, f2 = rng.sample(numeric, 2)
        breakdown_pool = categorical + temporal
        if not breakdown_pool:
            return None
        breakdown = rng.choice(breakdown_pool)
        agg = rng.choice(DEFAULT_AGGS[:4])  # count makes both series identical
        fact = DataFact(
            type=fact_type,
            subspace=random_subspace(table, rng, exclude=(breakdown,)),
            breakdown=(breakdown,),
            measures=(Measure(f1, agg), Measure(f2, agg)),
        )
        return fact if is_valid(fact, table) else None

    if fact_type == FactType.CATEGORIZATION:
        if not categorical:
            return None
        breakdown = rng.choice(categorical)
        fact = DataFact(
            type=fact_type,
            subspace=random_subspace(table, rng, exclude=(breakdown,)),
            breakdown=(breakdown,),
        )
        return fact if is_valid(fact, table) else None

    if fact_type == FactType.TREND:
        pool = temporal
    elif fact_type == FactType.DISTRIBUTION:
        pool = categorical
    else:
        pool = categorical + temporal
    if not pool:
        return None
    breakdown = rng.choice(pool)
    measure = _random_measure(table, rng)
    if measure is None:
        return None
    subspace = random_subspace(table, rng, exclude=(breakdown,))
    base = DataFact(
        type=fact_type,
        subspace=subspace,
        breakdown=(breakdown,),
        measures=(measure,),
    )

    if fact_type in (FactType.TREND, FactType.DISTRIBUTION):
        return base if is_valid(base, table) else None

    groups = group_values(base, table)
    if not groups:
        return None
    ordered = sorted(groups, key=lambda kv: (-kv[1], str(kv[0])))
    if fact_type == FactType.EXTREME:
        key = ordered[0][0] if rng.random() < 0.5 else ordered[-1][0]
        focus = (Filter(breakdown, key),)
    elif fact_type == FactType.PROPORTION:
        focus = (Filter(breakdown, rng.choice([k for k, _ in groups])),)
    elif fact_type == FactType.DIFFERENCE:
        if len(groups) < 2:
            return None
        a, b = rng.sample([k for k, _ in groups], 2)
        focus = (Filter(breakdown, a), Filter(breakdown, b))
    elif fact_type == FactType.RANK:
        if len(ordered) < 3:
            return None
        focus = tuple(Filter(breakdown, k) for k, _ in ordered[:3])
    elif fact_type == FactType.OUTLIER:
        hit = _grubbs_hit(groups)
        if hit is None:
            return None
        focus = (Filter(breakdown, hit),)
    else:
        return None
    fact = DataFact(
        type=fact_type,
        subspace=subspace,
        breakdown=(breakdown,),
        measures=(measure,),
        focus=focus,
    )
    return fact if is_valid(fact, table) else None


def _all_subspaces(table: DataTable, exclude: Sequence[str] = ()) -> Iterator[Subspace]:
    yield Subspace()
    names = _ct_fields(table, exclude)
    singles = [
        Filter(name, value)
        for name in names
        for value in table.field_meta(name).distinct_values
    ]
    for f in singles:
        yield Subspace((f,))
    for a, b in itertools.combinations(singles, 2):
        if a.field != b.field:
            yield Subspace((a, b))


def enumerate_facts(
    table: DataTable,
    fact_type: FactType,
    aggs: Sequence[str] = DEFAULT_AGGS,
    limit: Optional[int] = None,
) -> Iterator[DataFact]:
    """Exhaustively enumerate valid facts of one type (focus set canonically).

    Intended for small tables: ranking oracles, the `facts` CLI subcommand.
    """
    numeric = [m.name for m in table.fields_of_kind(FieldKind.NUMERICAL)]
    categorical = [m.name for m in table.fields_of_kind(FieldKind.CATEGORICAL)]
    temporal = [m.name for m in table.fields_of_kind(FieldKind.TEMPORAL)]

    if fact_type == FactType.TREND:
        breakdowns = temporal
    elif fact_type in (FactType.CATEGORIZATION, FactType.DISTRIBUTION):
        breakdowns = categorical
    elif fact_type == FactType.VALUE:
        breakdowns = [None]
    else:
        breakdowns = categorical + temporal

    emitted = 0

    def _capped(candidates: Iterator[DataFact]) -> Iterator[DataFact]:
        nonlocal emitted
        for fact in candidates:
            if not is_valid(fact, table):
                continue
            yield fact
            emitted += 1
            if limit is not None and emitted >= limit:
                return

    def _variants() -> Iterator[DataFact]:
        for breakdown in breakdowns:
            exclude = (breakdown,) if breakdown else ()
            for subspace in _all_subspaces(table, exclude):
                if fact_type == FactType.VALUE:
                    for field in numeric:
                        for agg in aggs:
                            yield DataFact(
                                type=fact_type,
                                subspace=subspace,
                                measures=(Measure(field, agg),),
                            )
                    continue
                if fact_type == FactType.CATEGORIZATION:
                    yield DataFact(
                        type=fact_type, subspace=subspace, breakdown=(breakdown,)
                    )
                    continue
                if fact_type == FactType.ASSOCIATION:
                    for f1, f2 in itertools.combinations(numeric, 2):
                        for agg in aggs:
                            if agg == "count":
                                continue
                            yield DataFact(
                                type=fact_type,
                                subspace=subspace,
                                breakdown=(breakdown,),
                                measures=(Measure(f1, agg), Measure(f2, agg)),
                            )
                    continue
                for field in numeric:
                    for agg in aggs:
                        base = DataFact(
                            type=fact_type,
                            subspace=subspace,
                            breakdown=(breakdown,),
                            measures=(Measure(field, agg),),
                        )
                        if fact_type in (FactType.TREND, FactType.DISTRIBUTION):
                            yield base
                            continue
                        groups = group_values(base, table)
                        if not groups:
                            continue
                        ordered = sorted(groups, key=lambda kv: (-kv[1], str(kv[0])))
                        if fact_type == FactType.EXTREME:
                            for key in {ordered[0][0], ordered[-1][0]}:
                                yield DataFact(
                                    type=fact_type,
                                    subspace=subspace,
                                    breakdown=(breakdown,),
                                    measures=(Measure(field, agg),),
                                    focus=(Filter(breakdown, key),),
                                )
                        elif fact_type == FactType.PROPORTION:
                            for key, _ in groups:
                                yield DataFact(
                                    type=fact_type,
                                    subspace=subspace,
                                    breakdown=(breakdown,),
                                    measures=(Measure(field, agg),),
                                    focus=(Filter(breakdown, key),),
                                )
                        elif fact_type == FactType.DIFFERENCE:
                            for (k1, _), (k2, _) in itertools.combinations(ordered, 2):
                                yield DataFact(
                                    type=fact_type,
                                    subspace=subspace,
                                    breakdown=(breakdown,),
                                    measures=(Measure(field, agg),),
                                    focus=(Filter(breakdown, k1), Filter(breakdown, k2)),
                                )
                        elif fact_type == FactType.RANK:
                            if len(ordered) >= 3:
                                yield DataFact(
                                    type=fact_type,
                                    subspace=subspace,
                                    breakdown=(breakdown,),
                                    measures=(Measure(field, agg),),
                                    focus=tuple(
                                        Filter(breakdown, k) for k, _ in ordered[:3]
                                    ),
                                )
                        elif fact_type == FactType.OUTLIER:
                            hit = _grubbs_hit(groups)
                            if hit is not None:
                                yield DataFact(
                                    type=fact_type,
                                    subspace=subspace,
                                    breakdown=(breakdown,),
                                    measures=(Measure(field, agg),),
                                    focus=(Filter(breakdown, hit),),
                                )

    yield from _capped(_variants())
