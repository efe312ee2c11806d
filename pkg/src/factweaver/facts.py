"""The data-fact model: 10 fact types, validation, derived values and similarity.

A fact is the 5-tuple (type, subspace, breakdown, measure, focus).  Every
other module consumes facts through the operations defined here.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from . import stats
from .errors import DegenerateInput, EmptyScope, FilterError, InsufficientData, ParseError
from .table import (
    AGG_FUNCTIONS,
    DataTable,
    FieldKind,
    Filter,
    Subspace,
    group_and_aggregate,
    select_subspace,
)


class FactType(str, Enum):
    VALUE = "value"
    DIFFERENCE = "difference"
    PROPORTION = "proportion"
    TREND = "trend"
    CATEGORIZATION = "categorization"
    DISTRIBUTION = "distribution"
    RANK = "rank"
    ASSOCIATION = "association"
    EXTREME = "extreme"
    OUTLIER = "outlier"


@dataclass(frozen=True)
class Measure:
    """A numerical field paired with an aggregation function."""

    field: str
    agg: str = "sum"

    def __post_init__(self):
        if self.agg not in AGG_FUNCTIONS:
            raise ParseError(f"unknown aggregation {self.agg!r}")


@dataclass(frozen=True)
class DerivedValue:
    """Per-type computed summary attached to a fact after evaluation."""

    kind: str
    number: Optional[float] = None
    text: Optional[str] = None


@dataclass(frozen=True)
class DataFact:
    type: FactType
    subspace: Subspace = Subspace()
    breakdown: tuple[str, ...] = ()
    measures: tuple[Measure, ...] = ()
    focus: tuple[Filter, ...] = ()
    derived: Optional[DerivedValue] = field(default=None, compare=False)

    @property
    def measure(self) -> Optional[Measure]:
        return self.measures[0] if self.measures else None

    def with_derived(self, derived: DerivedValue) -> "DataFact":
        return replace(self, derived=derived)

    def key(self) -> tuple:
        """Hashable identity of the 5-tuple (ignores any cached derived value)."""
        return (
            self.type,
            tuple(sorted((f.field, f.value) for f in self.subspace.filters)),
            self.breakdown,
            self.measures,
            tuple(sorted((f.field, f.value) for f in self.focus)),
        )


# Constraint matrix: fact type -> (breakdown kinds, measure count, focus arity).
# Focus arity: an int for an exact count, or (min, None) for an open range.
_CT = (FieldKind.CATEGORICAL, FieldKind.TEMPORAL)
_CONSTRAINTS = {
    FactType.VALUE: ((), 1, 0),
    FactType.DIFFERENCE: (_CT, 1, 2),
    FactType.PROPORTION: (_CT, 1, 1),
    FactType.TREND: ((FieldKind.TEMPORAL,), 1, (0, None)),
    FactType.CATEGORIZATION: ((FieldKind.CATEGORICAL,), 0, (0, None)),
    FactType.DISTRIBUTION: ((FieldKind.CATEGORICAL,), 1, (0, None)),
    FactType.RANK: (_CT, 1, 3),
    FactType.ASSOCIATION: (_CT, 2, 0),
    FactType.EXTREME: (_CT, 1, 1),
    FactType.OUTLIER: (_CT, 1, 1),
}


def constraint_row(fact_type: FactType):
    return _CONSTRAINTS[fact_type]


def validate(fact: DataFact, table: DataTable) -> list[str]:
    """Check a fact against the per-type constraint matrix and the schema.

    Returns the list of violations; an empty list means the fact is valid.
    """
    violations: list[str] = []
    breakdown_kinds, measure_count, focus_arity = _CONSTRAINTS[fact.type]

    if not breakdown_kinds:
        if fact.breakdown:
            violations.append(f"{fact.type.value}: breakdown must be empty")
    else:
        if len(fact.breakdown) != 1:
            violations.append(f"{fact.type.value}: breakdown must name exactly one field")
        else:
            name = fact.breakdown[0]
            if not table.has_field(name):
                violations.append(f"breakdown field {name!r} does not exist")
            elif table.field_meta(name).kind not in breakdown_kinds:
                allowed = "/".join(k.value for k in breakdown_kinds)
                violations.append(f"{fact.type.value}: breakdown field must be {allowed}")

    if len(fact.measures) != measure_count:
        violations.append(
            f"{fact.type.value}: expects {measure_count} measure(s), got {len(fact.measures)}"
        )
    if fact.type == FactType.ASSOCIATION and len(fact.measures) == 2:
        if fact.measures[0].field == fact.measures[1].field:
            violations.append("association requires two distinct measure fields")
    for m in fact.measures:
        if not table.has_field(m.field):
            violations.append(f"measure field {m.field!r} does not exist")
        elif m.agg != "count" and table.field_meta(m.field).kind != FieldKind.NUMERICAL:
            violations.append(f"measure field {m.field!r} must be numerical for {m.agg}")

    if isinstance(focus_arity, int):
        if len(fact.focus) != focus_arity:
            violations.append(
                f"{fact.type.value}: expects exactly {focus_arity} focus value(s), "
                f"got {len(fact.focus)}"
            )
    else:
        lo, _hi = focus_arity
        if len(fact.focus) < lo:
            violations.append(f"{fact.type.value}: expects at least {lo} focus value(s)")

    for f in fact.focus:
        if fact.breakdown and f.field != fact.breakdown[0]:
            violations.append(
                f"focus field {f.field!r} must match the breakdown field {fact.breakdown[0]!r}"
            )
        elif not table.has_field(f.field):
            violations.append(f"focus field {f.field!r} does not exist")

    for f in fact.subspace.filters:
        if not table.has_field(f.field):
            violations.append(f"subspace field {f.field!r} does not exist")
        elif table.field_meta(f.field).kind == FieldKind.NUMERICAL:
            violations.append(f"subspace field {f.field!r} must be categorical or temporal")

    return violations


def is_valid(fact: DataFact, table: DataTable) -> bool:
    return not validate(fact, table)


def group_values(fact: DataFact, table: DataTable, measure: Optional[Measure] = None):
    """Aggregate the fact's subspace by its breakdown (helper for derivation/scoring)."""
    rows = select_subspace(table, fact.subspace)
    m = measure if measure is not None else fact.measure
    return group_and_aggregate(
        table,
        rows,
        fact.breakdown,
        m.field if m else None,
        m.agg if m else "count",
    )


def _focus_group_value(groups, focus_value: str) -> float:
    for key, value in groups:
        if key == focus_value:
            return value
    raise EmptyScope(f"focus value {focus_value!r} selects no data")


def derive_value(fact: DataFact, table: DataTable) -> DerivedValue:
    """Compute the per-type derived value from the grouped aggregates."""
    t = fact.type
    if t == FactType.VALUE:
        rows = select_subspace(table, fact.subspace)
        if not rows:
            raise EmptyScope("value fact over an empty subspace")
        entries = group_and_aggregate(
            table, rows, (), fact.measure.field, fact.measure.agg
        )
        if not entries:
            raise EmptyScope("no measurable values in the subspace")
        return DerivedValue(kind="value", number=entries[0][1])

    if t == FactType.CATEGORIZATION:
        groups = group_values(fact, table)
        if not groups:
            raise EmptyScope("categorization fact over an empty subspace")
        return DerivedValue(kind="category_count", number=float(len(groups)))

    if t == FactType.ASSOCIATION:
        g1 = dict(group_values(fact, table, fact.measures[0]))
        g2 = dict(group_values(fact, table, fact.measures[1]))
        keys = sorted(set(g1) & set(g2), key=lambda k: (str(k)))
        if len(keys) < 3:
            raise InsufficientData("association requires at least 3 groups")
        r, _ = stats.pearson_test([g1[k] for k in keys], [g2[k] for k in keys])
        return DerivedValue(kind="correlation", number=r)

    groups = group_values(fact, table)
    if t == FactType.TREND:
        if len(groups) < 3:
            raise InsufficientData("trend requires at least 3 time groups")
        fit = stats.linear_regression([v for _, v in groups])
        direction = "increasing" if fit.slope >= 0 else "decreasing"
        return DerivedValue(kind="trend", text=direction)

    if t == FactType.DIFFERENCE:
        if not groups:
            raise EmptyScope("difference fact over an empty subspace")
        v1 = _focus_group_value(groups, fact.focus[0].value)
        v2 = _focus_group_value(groups, fact.focus[1].value)
        return DerivedValue(kind="difference", number=v1 - v2)

    if t == FactType.PROPORTION:
        if not groups:
            raise EmptyScope("proportion fact over an empty subspace")
        total = sum(v for _, v in groups)
        if total == 0:
            raise EmptyScope("proportion undefined: group total is zero")
        share = _focus_group_value(groups, fact.focus[0].value) / total
        return DerivedValue(kind="proportion", number=share)

    if t == FactType.EXTREME:
        if not groups:
            raise EmptyScope("extreme fact over an empty subspace")
        v = _focus_group_value(groups, fact.focus[0].value)
        hi = max(val for _, val in groups)
        lo = min(val for _, val in groups)
        kind = "max" if v == hi else "min" if v == lo else "max"
        return DerivedValue(kind="extreme", number=v, text=kind)

    if t == FactType.OUTLIER:
        if not groups:
            raise EmptyScope("outlier fact over an empty subspace")
        values = [v for _, v in groups]
        try:
            _, result = stats.grubbs_test(values)
            score = result.statistic
        except (InsufficientData, DegenerateInput):
            score = 0.0
        return DerivedValue(kind="outlier_score", number=score)

    if t == FactType.RANK:
        return DerivedValue(kind="rank")

    if t == FactType.DISTRIBUTION:
        return DerivedValue(kind="distribution")

    raise ValueError(f"unhandled fact type {t}")


def _row_iou(a: Sequence[int], b: Sequence[int]) -> float:
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    union = sa | sb
    return len(sa & sb) / len(union)


def _field_iou(a: Sequence[str], b: Sequence[str]) -> float:
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def focus_rows(fact: DataFact, table: DataTable) -> list[int]:
    """Rows inside the fact's subspace matched by any focus filter."""
    if not fact.focus:
        return []
    subspace_rows = select_subspace(table, fact.subspace)
    matched = []
    for r in subspace_rows:
        row = table.rows[r]
        for f in fact.focus:
            if table.has_field(f.field) and row[table._index[f.field]] == f.value:
                matched.append(r)
                break
    return matched


def fact_similarity(f1: DataFact, f2: DataFact, table: DataTable) -> float:
    """Overlap similarity in [0, 1]: mean of five per-component overlaps.

    Type matches 0/1; measure and breakdown compare field-name sets; subspace
    and focus compare the row sets they cover (two empty sets count as a
    perfect match so the score stays total).
    """
    s_type = 1.0 if f1.type == f2.type else 0.0
    s_measure = _field_iou([m.field for m in f1.measures], [m.field for m in f2.measures])
    s_breakdown = _field_iou(f1.breakdown, f2.breakdown)
    r1 = select_subspace(table, f1.subspace) if f1.subspace.filters else None
    r2 = select_subspace(table, f2.subspace) if f2.subspace.filters else None
    all_rows = range(table.row_count)
    s_subspace = _row_iou(
        all_rows if r1 is None else r1, all_rows if r2 is None else r2
    )
    s_focus = _row_iou(focus_rows(f1, table), focus_rows(f2, table))
    return (s_type + s_measure + s_breakdown + s_subspace + s_focus) / 5.0


def to_fact_record(fact: DataFact) -> dict:
    """Serialize a fact to its wire/persistence record."""
    return {
        "type": fact.type.value,
        "measure": [{"field": m.field, "aggregate": m.agg} for m in fact.measures],
        "subspace": [{"field": f.field, "value": f.value} for f in fact.subspace.filters],
        "breakdown": [{"field": b} for b in fact.breakdown],
        "focus": [{"field": f.field, "value": f.value} for f in fact.focus],
    }


def _parse_filter(entry, context: str) -> Filter:
    if not isinstance(entry, dict) or "field" not in entry or "value" not in entry:
        raise ParseError(f"malformed {context} entry: {entry!r}")
    return Filter(field=str(entry["field"]), value=str(entry["value"]))


def from_fact_record(record: dict, table: Optional[DataTable] = None) -> DataFact:
    """Decode a fact record; raises ParseError on unknown types or malformed parts."""
    if not isinstance(record, dict):
        raise ParseError("fact record must be an object")
    try:
        fact_type = FactType(record.get("type"))
    except ValueError:
        raise ParseError(f"unknown fact type {record.get('type')!r}") from None
    measures = []
    for m in record.get("measure", []):
        if not isinstance(m, dict) or "field" not in m:
            raise ParseError(f"malformed measure entry: {m!r}")
        measures.append(Measure(field=str(m["field"]), agg=str(m.get("aggregate", "sum"))))
    breakdown = []
    for b in record.get("breakdown", []):
        if not isinstance(b, dict) or "field" not in b:
            raise ParseError(f"malformed breakdown entry: {b!r}")
        breakdown.append(str(b["field"]))
    try:
        subspace = Subspace(
            tuple(_parse_filter(f, "subspace") for f in record.get("subspace", []))
        )
    except FilterError as exc:
        raise ParseError(str(exc)) from exc
    focus = tuple(_parse_filter(f, "focus") for f in record.get("focus", []))
    fact = DataFact(
        type=fact_type,
        subspace=subspace,
        breakdown=tuple(breakdown),
        measures=tuple(measures),
        focus=focus,
    )
    if table is not None:
        problems = validate(fact, table)
        if problems:
            raise ParseError("; ".join(problems))
    return fact
