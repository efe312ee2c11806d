"""Tabular ingestion: CSV loading, field-type inference, subspace filtering and aggregation.

The whole engine works against the small vocabulary defined here: a typed
:class:`DataTable`, ``Filter``/``Subspace`` row selectors, and one
group-and-aggregate primitive.
"""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from .errors import CsvStructureError, EmptyTable, FilterError, SchemaError

AGG_FUNCTIONS = ("count", "sum", "avg", "max", "min")

_YEAR_RE = re.compile(r"^\d{4}$")
_YEAR_MONTH_RE = re.compile(r"^(\d{4})-(\d{1,2})$")
_ISO_DATE_RE = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")
_SLASH_DATE_RE = re.compile(r"^(\d{4})/(\d{1,2})/(\d{1,2})$")


class FieldKind(str, Enum):
    NUMERICAL = "numerical"
    CATEGORICAL = "categorical"
    TEMPORAL = "temporal"


@dataclass(frozen=True)
class FieldMeta:
    """Schema entry for one column."""

    name: str
    kind: FieldKind
    distinct_values: tuple[str, ...] = ()
    min_value: Optional[float] = None
    max_value: Optional[float] = None


@dataclass(frozen=True)
class Filter:
    """A single ``field = value`` condition on a categorical/temporal column."""

    field: str
    value: str


@dataclass(frozen=True)
class Subspace:
    """Conjunction of up to two filters; an empty filter list means the whole table."""

    filters: tuple[Filter, ...] = ()

    def __post_init__(self):
        if len(self.filters) > 2:
            raise FilterError("a subspace supports at most 2 filters")
        names = [f.field for f in self.filters]
        if len(set(names)) != len(names):
            raise FilterError("subspace filter fields must be pairwise distinct")

    @property
    def is_empty(self) -> bool:
        return not self.filters


EMPTY_SUBSPACE = Subspace()


@dataclass(frozen=True)
class DataTable:
    """Immutable typed view of an ingested spreadsheet.

    ``rows`` hold one value per schema field: floats (or None) for numerical
    columns, raw strings (or None for blank cells) for categorical/temporal
    columns.
    """

    schema: tuple[FieldMeta, ...]
    rows: tuple[tuple, ...]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {meta.name: i for i, meta in enumerate(self.schema)}
        )

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def field_meta(self, name: str) -> FieldMeta:
        try:
            return self.schema[self._index[name]]
        except KeyError:
            raise FilterError(f"unknown field {name!r}") from None

    def has_field(self, name: str) -> bool:
        return name in self._index

    def column(self, name: str, rows: Optional[Iterable[int]] = None) -> list:
        """Values of one column, optionally restricted to a row subset."""
        idx = self._index.get(name)
        if idx is None:
            raise FilterError(f"unknown field {name!r}")
        if rows is None:
            return [row[idx] for row in self.rows]
        return [self.rows[r][idx] for r in rows]

    def fields_of_kind(self, kind: FieldKind) -> list[FieldMeta]:
        return [m for m in self.schema if m.kind == kind]

    def count_kinds(self) -> tuple[int, int, int]:
        """(numerical, categorical, temporal) field counts."""
        n = sum(1 for m in self.schema if m.kind == FieldKind.NUMERICAL)
        c = sum(1 for m in self.schema if m.kind == FieldKind.CATEGORICAL)
        t = sum(1 for m in self.schema if m.kind == FieldKind.TEMPORAL)
        return n, c, t


def parse_number(text: str) -> Optional[float]:
    """Parse a locale-fixed number: dot decimals, optional thousands commas."""
    cleaned = text.strip().replace(",", "")
    if not cleaned:
        return None
    try:
        return float(cleaned)
    except ValueError:
        return None


def parse_temporal(text: str) -> Optional[tuple[int, int, int]]:
    """Parse one of the four supported date formats into a sortable (y, m, d) key.

    A bare 4-digit number only counts as a year inside a plausible range, so
    quantity columns that happen to hold 4-digit values stay numerical.
    """
    t = text.strip()
    if _YEAR_RE.match(t):
        year = int(t)
        return (year, 1, 1) if 1200 <= year <= 2999 else None
    m = _YEAR_MONTH_RE.match(t) or _ISO_DATE_RE.match(t) or _SLASH_DATE_RE.match(t)
    if m is None:
        return None
    parts = [int(g) for g in m.groups()]
    while len(parts) < 3:
        parts.append(1)
    year, month, day = parts
    if not (1 <= month <= 12 and 1 <= day <= 31):
        return None
    return (year, month, day)


def infer_field_type(values: Sequence[str]) -> FieldKind:
    """Infer a column kind from its raw string values.

    Temporal wins when >=95% of the non-empty values match a supported date
    format (so four-digit years classify as temporal, not numbers); then
    numerical when >=95% parse as numbers; otherwise categorical.
    """
    non_empty = [v for v in values if v is not None and v.strip() != ""]
    if not non_empty:
        raise SchemaError("cannot infer the type of an all-empty column")
    n = len(non_empty)
    temporal = sum(1 for v in non_empty if parse_temporal(v) is not None)
    if temporal / n >= 0.95:
        return FieldKind.TEMPORAL
    numeric = sum(1 for v in non_empty if parse_number(v) is not None)
    if numeric / n >= 0.95:
        return FieldKind.NUMERICAL
    return FieldKind.CATEGORICAL


def _temporal_sort_key(value: str):
    key = parse_temporal(value)
    # Unparseable stragglers (up to 5% of a temporal column) sort after real dates.
    return (key is None, key or (9999, 12, 31), value)


def sorted_temporal(values: Iterable[str]) -> list[str]:
    """Distinct temporal values in chronological order."""
    return sorted(set(values), key=_temporal_sort_key)


def load_csv(data: bytes, delimiter: str = ",") -> DataTable:
    """Load a delimited UTF-8 spreadsheet with a mandatory header row."""
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise CsvStructureError(f"input is not valid UTF-8: {exc}") from exc
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    records = [row for row in reader if row]
    if not records:
        raise EmptyTable("no header row present")
    header = [h.strip() for h in records[0]]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise SchemaError(f"duplicate header names: {dupes}")
    if any(not h for h in header):
        raise SchemaError("blank header name")
    body = records[1:]
    if not body:
        raise EmptyTable("header-only file: no data rows")
    width = len(header)
    for i, row in enumerate(body):
        if len(row) != width:
            raise CsvStructureError(
                f"row {i + 1} has {len(row)} values, expected {width}", row_index=i + 1
            )

    columns = list(zip(*body))
    kinds = [infer_field_type(col) for col in columns]

    schema = []
    typed_columns = []
    for name, kind, col in zip(header, kinds, columns):
        if kind == FieldKind.NUMERICAL:
            typed = [parse_number(v) if v.strip() else None for v in col]
            present = [v for v in typed if v is not None]
            schema.append(
                FieldMeta(
                    name=name,
                    kind=kind,
                    min_value=min(present) if present else None,
                    max_value=max(present) if present else None,
                )
            )
        else:
            typed = [v.strip() if v.strip() else None for v in col]
            present = [v for v in typed if v is not None]
            if kind == FieldKind.TEMPORAL:
                distinct = tuple(sorted_temporal(present))
            else:
                distinct = tuple(sorted(set(present)))
            schema.append(FieldMeta(name=name, kind=kind, distinct_values=distinct))
        typed_columns.append(typed)

    rows = tuple(zip(*typed_columns))
    return DataTable(schema=tuple(schema), rows=rows)


def select_subspace(table: DataTable, subspace: Subspace) -> list[int]:
    """Row indices satisfying every filter; the empty subspace selects all rows.

    A filter value absent from the column yields an empty result, not an
    error, so fact mutation during search can never crash.
    """
    for f in subspace.filters:
        meta = table.field_meta(f.field)
        if meta.kind == FieldKind.NUMERICAL:
            raise FilterError(f"cannot filter on numerical field {f.field!r}")
    selected = []
    for i, row in enumerate(table.rows):
        if all(row[table._index[f.field]] == f.value for f in subspace.filters):
            selected.append(i)
    return selected


def _aggregate(values: list[float], agg: str, group_size: int) -> Optional[float]:
    if agg == "count":
        return float(group_size)
    if not values:
        return None
    if agg == "sum":
        return float(sum(values))
    if agg == "avg":
        return float(sum(values) / len(values))
    if agg == "max":
        return float(max(values))
    if agg == "min":
        return float(min(values))
    raise ValueError(f"unknown aggregation {agg!r}")


def group_and_aggregate(
    table: DataTable,
    rows: Sequence[int],
    breakdown: Sequence[str],
    measure_field: Optional[str],
    agg: str,
) -> list[tuple[Optional[str], float]]:
    """Group the given rows by the breakdown field and aggregate the measure.

    Returns (group key, value) pairs: chronological order for a temporal
    breakdown, otherwise descending value with a lexicographic tie-break.
    An empty breakdown yields a single entry keyed by None.
    """
    if agg not in AGG_FUNCTIONS:
        raise ValueError(f"unknown aggregation {agg!r}")
    if agg != "count":
        if measure_field is None:
            raise TypeError(f"aggregation {agg!r} requires a measure field")
        meta = table.field_meta(measure_field)
        if meta.kind != FieldKind.NUMERICAL:
            raise TypeError(
                f"aggregation {agg!r} requires a numerical measure, "
                f"got {meta.kind.value} field {measure_field!r}"
            )
    for name in breakdown:
        meta = table.field_meta(name)
        if meta.kind == FieldKind.NUMERICAL:
            raise TypeError(f"breakdown field {name!r} must be categorical or temporal")

    measure_idx = table._index[measure_field] if (measure_field and agg != "count") else None

    groups: dict = {}
    order: list = []
    for r in rows:
        row = table.rows[r]
        key = tuple(row[table._index[b]] for b in breakdown)
        if any(part is None for part in key):
            continue
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)

    entries = []
    for key in order:
        members = groups[key]
        values = []
        if measure_idx is not None:
            values = [m[measure_idx] for m in members if m[measure_idx] is not None]
            if not values:
                continue
        value = _aggregate(values, agg, len(members))
        flat_key = key[0] if len(breakdown) == 1 else (None if not breakdown else key)
        entries.append((flat_key, value))

    if not breakdown:
        return entries
    first_kind = table.field_meta(breakdown[0]).kind
    if first_kind == FieldKind.TEMPORAL:
        entries.sort(key=lambda kv: _temporal_sort_key(kv[0]))
    else:
        entries.sort(key=lambda kv: (-kv[1], kv[0]))
    return entries
