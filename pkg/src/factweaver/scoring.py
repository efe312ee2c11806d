"""Fact scoring: occurrence probability, self-information and pattern significance.

The importance of a fact is its self-information in bits weighted by a
per-type statistical significance in [0, 1].  Probabilities decompose into
field-choice terms, the subspace term and the focus term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import stats
from .errors import (
    DegenerateInput,
    EmptyScope,
    InsufficientData,
    SchemaError,
)
from .facts import DataFact, FactType, derive_value, group_values
from .table import DataTable, Subspace, select_subspace

# Scale of the logistic model for normalized trend slopes.  The slope of an
# exact straight line through mean-normalized values lands around 1-2 on this
# scale, which maps to a small p and a near-1 significance.
TREND_LOGISTIC_SCALE = 0.5


@dataclass(frozen=True)
class FactScore:
    significance: float
    self_information_bits: float
    probability: float
    importance: float
    zero_support: bool = False


def subspace_probability(subspace: Subspace, table: DataTable) -> float:
    """Probability of the subspace: one field combination out of 2**m, times
    the matching-row fraction of each filter."""
    _, c, t = table.count_kinds()
    m = c + t
    denom = 2.0**m  # sum over i of C(m, i)
    product = 1.0
    for f in subspace.filters:
        column = table.column(f.field)
        fraction = sum(1 for v in column if v == f.value) / table.row_count
        product *= fraction
    return product / denom


def focus_probability(fact: DataFact, table: DataTable) -> float:
    """Share of the subspace rows that the focus selects; 1 for an empty focus."""
    if not fact.focus:
        return 1.0
    subspace_rows = select_subspace(table, fact.subspace)
    if not subspace_rows:
        raise DegenerateInput("focus given on an empty subspace")
    focus_values = {f.value for f in fact.focus}
    fields = {f.field for f in fact.focus}
    count = 0
    for r in subspace_rows:
        row = table.rows[r]
        if any(row[table._index[name]] in focus_values for name in fields):
            count += 1
    return count / len(subspace_rows)


def field_probability(fact: DataFact, table: DataTable) -> tuple[float, float]:
    """(P(measure | type), P(breakdown | type)) from the schema's field counts."""
    n, c, t = table.count_kinds()

    if len(fact.measures) == 0:
        p_m = 1.0
    elif len(fact.measures) == 1:
        if n < 1:
            raise SchemaError("fact requires a numerical field but none exist")
        p_m = 1.0 / n
    else:
        if n < 2:
            raise SchemaError("association requires at least 2 numerical fields")
        p_m = 1.0 / (n * (n - 1) / 2)

    if not fact.breakdown:
        p_b = 1.0
    elif fact.type == FactType.TREND:
        if t < 1:
            raise SchemaError("trend requires a temporal field")
        p_b = 1.0 / t
    elif fact.type in (FactType.CATEGORIZATION, FactType.DISTRIBUTION):
        if c < 1:
            raise SchemaError(f"{fact.type.value} requires a categorical field")
        p_b = 1.0 / c
    else:
        if c + t < 1:
            raise SchemaError("fact requires a categorical or temporal field")
        p_b = 1.0 / (c + t)

    return p_m, p_b


def probability(fact: DataFact, table: DataTable) -> float:
    """Occurrence probability P = P(m|t) * P(b|t) * P(s) * P(x|s)."""
    p_m, p_b = field_probability(fact, table)
    p_s = subspace_probability(fact.subspace, table)
    p_x = focus_probability(fact, table) if p_s > 0 else 0.0
    return p_m * p_b * p_s * p_x


def _trend_significance(fact: DataFact, table: DataTable) -> float:
    groups = group_values(fact, table)
    if len(groups) < 3:
        raise InsufficientData("trend significance requires at least 3 groups")
    ys = [v for _, v in groups]
    scale = sum(abs(v) for v in ys) / len(ys)
    if scale > 0:
        ys = [v / scale for v in ys]
    fit = stats.linear_regression(ys)
    # p is the probability, under the logistic slope model, of a slope at
    # least as extreme in the observed direction.
    if fit.slope >= 0:
        p = 1.0 - stats.logistic_cdf(fit.slope, 0.0, TREND_LOGISTIC_SCALE)
    else:
        p = stats.logistic_cdf(fit.slope, 0.0, TREND_LOGISTIC_SCALE)
    return fit.r_squared * (1.0 - p)


def _difference_significance(fact: DataFact, table: DataTable) -> float:
    groups = group_values(fact, table)
    if not groups:
        raise EmptyScope("difference fact over an empty subspace")
    values = [v for _, v in groups]
    spread = max(values) - min(values)
    if spread == 0:
        return 0.0
    derived = derive_value(fact, table)
    return min(1.0, abs(derived.number) / spread)


def _extreme_significance(fact: DataFact, table: DataTable) -> float:
    groups = group_values(fact, table)
    values = [v for _, v in groups]
    if len(values) < 4:
        raise InsufficientData("extreme significance requires at least 4 groups")
    derived = derive_value(fact, table)
    if derived.text == "min":
        # Mirror the series so the minimum becomes the outstanding maximum.
        hi, lo = max(values), min(values)
        values = [hi + lo - v for v in values]
    floor = min(values)
    if floor < 0:
        values = [v - floor for v in values]
    result = stats.power_law_residual_test(sorted(values, reverse=True))
    return 1.0 - result.p_value


def _rank_significance(fact: DataFact, table: DataTable) -> float:
    groups = group_values(fact, table)
    values = sorted((v for _, v in groups), reverse=True)
    if len(values) < 4:
        raise InsufficientData("rank significance requires at least 4 groups")
    floor = min(values)
    if floor < 0:
        values = [v - floor for v in values]
    result = stats.power_law_residual_test(values)
    return 1.0 - result.p_value


def _outlier_significance(fact: DataFact, table: DataTable) -> float:
    groups = group_values(fact, table)
    if len(groups) < 3:
        raise InsufficientData("outlier significance requires at least 3 groups")
    values = [v for _, v in groups]
    idx, result = stats.grubbs_test(values)
    if idx is None:
        return 0.0
    focus_value = fact.focus[0].value
    if groups[idx][0] != focus_value:
        return 0.0
    return 1.0 - result.p_value


def significance(fact: DataFact, table: DataTable) -> float:
    """Per-type pattern significance in [0, 1].

    Data-shortage and degeneracy errors propagate; callers that score
    candidate batches treat an errored fact as significance 0.
    """
    t = fact.type
    if t == FactType.VALUE:
        return min(1.0, max(0.0, probability(fact, table)))
    if t == FactType.DIFFERENCE:
        return _difference_significance(fact, table)
    if t == FactType.PROPORTION:
        share = derive_value(fact, table).number
        return 1.0 if share >= 0.5 else max(0.0, share)
    if t == FactType.TREND:
        return _trend_significance(fact, table)
    if t == FactType.CATEGORIZATION:
        groups = group_values(fact, table)
        if len(groups) < 2:
            raise DegenerateInput("categorization significance requires 2+ categories")
        result = stats.chi_square_uniform([v for _, v in groups])
        return 1.0 - result.p_value
    if t == FactType.DISTRIBUTION:
        groups = group_values(fact, table)
        if len(groups) < 3:
            raise InsufficientData("distribution significance requires 3+ groups")
        result = stats.shapiro_wilk([v for _, v in groups])
        return 1.0 - result.p_value
    if t == FactType.RANK:
        return _rank_significance(fact, table)
    if t == FactType.ASSOCIATION:
        g1 = dict(group_values(fact, table, fact.measures[0]))
        g2 = dict(group_values(fact, table, fact.measures[1]))
        keys = sorted(set(g1) & set(g2), key=str)
        if len(keys) < 3:
            raise InsufficientData("association significance requires 3+ groups")
        _, result = stats.pearson_test([g1[k] for k in keys], [g2[k] for k in keys])
        return 1.0 - result.p_value
    if t == FactType.EXTREME:
        return _extreme_significance(fact, table)
    if t == FactType.OUTLIER:
        return _outlier_significance(fact, table)
    raise ValueError(f"unhandled fact type {t}")


def importance(fact: DataFact, table: DataTable) -> FactScore:
    """Full score: probability, self-information and significance-weighted importance.

    Zero-support facts (a subspace selecting nothing) score 0 with a flag
    rather than propagating infinities.  A conjunction of individually
    matching filters can still select nothing, which surfaces here as the
    focus term degenerating.
    """
    try:
        p = probability(fact, table)
    except DegenerateInput:
        p = 0.0
    if p <= 0.0:
        return FactScore(
            significance=0.0,
            self_information_bits=0.0,
            probability=0.0,
            importance=0.0,
            zero_support=True,
        )
    try:
        s = significance(fact, table)
    except (InsufficientData, DegenerateInput, EmptyScope):
        s = 0.0
    s = min(1.0, max(0.0, s))
    bits = -math.log2(p)
    return FactScore(
        significance=s,
        self_information_bits=bits,
        probability=p,
        importance=s * bits,
    )
