"""Template-based captions for facts and the story-level textual briefing."""
from __future__ import annotations

from typing import Optional

from .errors import NarrationError
from .facts import DataFact, DerivedValue, FactType, derive_value, group_values
from .search import Story, integrity
from .table import DataTable, Subspace

AGG_WORDS = {
    "count": "total number of",
    "sum": "total",
    "avg": "average",
    "max": "maximum",
    "min": "minimum",
}

# Long category lists are cut off at this many names plus an "and N more" tail.
MAX_LISTED_CATEGORIES = 6


def format_number(value: float) -> str:
    """Human-readable number: thousands separators, trailing zeros trimmed."""
    if value == int(value):
        return f"{int(value):,}"
    return f"{value:,.2f}"


def format_percent(fraction: float) -> str:
    return f"{fraction * 100:.1f}%"


def subspace_phrase(subspace: Subspace) -> str:
    """Filters joined as '<field> is <value>' clauses; empty subspace reads as nothing."""
    return " and ".join(f"{f.field} is {f.value}" for f in subspace.filters)


def _focus_phrase(fact: DataFact) -> str:
    return " and ".join(f"{f.field} is {f.value}" for f in fact.focus)


def _when(phrase: str) -> str:
    return f" when {phrase}" if phrase else ""


def _listed(names: list[str]) -> str:
    shown = names[:MAX_LISTED_CATEGORIES]
    extra = len(names) - len(shown)
    if extra > 0:
        return ", ".join(shown) + f", and {extra} more"
    if len(shown) == 1:
        return shown[0]
    if len(shown) == 2:
        return f"{shown[0]} and {shown[1]}"
    return ", ".join(shown[:-1]) + f", and {shown[-1]}"


def _ensure_derived(fact: DataFact, table: DataTable) -> Optional[DerivedValue]:
    if fact.derived is not None:
        return fact.derived
    try:
        return derive_value(fact, table)
    except Exception as exc:
        raise NarrationError(f"cannot derive a value for the caption: {exc}") from exc


def caption(fact: DataFact, table: DataTable) -> str:
    """Instantiate the per-type sentence template for a fact."""
    t = fact.type
    s = subspace_phrase(fact.subspace)
    m = fact.measure
    agg = AGG_WORDS[m.agg] if m else ""

    if t == FactType.VALUE:
        d = _ensure_derived(fact, table)
        return f"The {agg} {m.field} is {format_number(d.number)}{_when(s)}."

    if t == FactType.DIFFERENCE:
        d = _ensure_derived(fact, table)
        x1, x2 = fact.focus[0].value, fact.focus[1].value
        return (
            f"The difference between {x1} and {x2} regarding to their "
            f"{agg} {m.field} is {format_number(d.number)}{_when(s)}."
        )

    if t == FactType.PROPORTION:
        d = _ensure_derived(fact, table)
        return (
            f"The {fact.focus[0].value} accounts for {format_percent(d.number)} "
            f"of the {agg} {m.field}{_when(s)}."
        )

    if t == FactType.TREND:
        d = _ensure_derived(fact, table)
        text = f"The {d.text} trend of {agg} {m.field} over {fact.breakdown[0]}(s){_when(s)}"
        if fact.focus:
            values = " and ".join(f.value for f in fact.focus)
            text += f" and the values of {values} needs to pay attention"
        return text + "."

    if t == FactType.CATEGORIZATION:
        groups = group_values(fact, table)
        if not groups:
            raise NarrationError("categorization fact selects no categories")
        names = [k for k, _ in groups]
        b = fact.breakdown[0]
        text = f"There are {len(names)} {b}(s) which are {_listed(names)}{_when(s)}"
        if fact.focus:
            text += f", among which {' and '.join(f.value for f in fact.focus)} needs to pay attention"
        return text + "."

    if t == FactType.DISTRIBUTION:
        text = f"The distribution of the {agg} {m.field} over {fact.breakdown[0]}(s){_when(s)}"
        if fact.focus:
            text += f" and {_focus_phrase(fact)} needs to pay attention"
        return text + "."

    if t == FactType.RANK:
        b = fact.breakdown[0]
        x = [f.value for f in fact.focus]
        text = (
            f"In the {agg} {m.field} ranking of different {b}(s), "
            f"the top three {b}(s) are {x[0]}, {x[1]}, {x[2]}"
        )
        if s:
            text += f", when {s}"
        return text + "."

    if t == FactType.ASSOCIATION:
        d = _ensure_derived(fact, table)
        m1, m2 = fact.measures[0].field, fact.measures[1].field
        return (
            f"The Pearson correlation between the {m1} and the {m2} "
            f"is {d.number:.2f}{_when(s)}."
        )

    if t == FactType.EXTREME:
        d = _ensure_derived(fact, table)
        kind = {"max": "maximum", "min": "minimum"}.get(d.text, d.text)
        clause_parts = [p for p in (s, _focus_phrase(fact)) if p]
        clause = _when(" and ".join(clause_parts))
        return (
            f"The {kind} value of the {agg} {m.field} is "
            f"{format_number(d.number)}{clause}."
        )

    if t == FactType.OUTLIER:
        b = fact.breakdown[0]
        x = fact.focus[0].value
        return (
            f"The {agg} {m.field} of {x} is an outlier when compare with "
            f"that of other {b}(s){_when(s)}."
        )

    raise NarrationError(f"no template for fact type {t}")


def story_summary(story: Story, table: DataTable) -> str:
    """One-paragraph briefing: coverage rate, fact count, captions in order."""
    coverage = integrity(story, table)
    n = len(story.facts)
    lead = (
        f"This story contains {n} facts and covers "
        f"{format_percent(coverage)} of the data."
    )
    sentences = [caption(f, table) for f in story.facts]
    return " ".join([lead] + sentences)
