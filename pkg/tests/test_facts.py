import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_csv
from factweaver.errors import EmptyScope, ParseError
from factweaver.facts import (
    DataFact,
    FactType,
    Measure,
    derive_value,
    fact_similarity,
    from_fact_record,
    is_valid,
    to_fact_record,
    validate,
)
from factweaver.table import Filter, Subspace, load_csv


def fact(**kwargs) -> DataFact:
    return DataFact(**kwargs)


class TestValidate:
    def test_difference_two_focus_ok(self, small_table):
        f = fact(
            type=FactType.DIFFERENCE,
            breakdown=("Brand",),
            measures=(Measure("Sales", "sum"),),
            focus=(Filter("Brand", "Ford"), Filter("Brand", "BMW")),
        )
        assert validate(f, small_table) == []

    def test_value_with_breakdown_rejected(self, small_table):
        f = fact(
            type=FactType.VALUE,
            breakdown=("Brand",),
            measures=(Measure("Sales", "sum"),),
        )
        assert any("breakdown must be empty" in v for v in validate(f, small_table))

    def test_association_needs_distinct_measures(self, small_table):
        f = fact(
            type=FactType.ASSOCIATION,
            breakdown=("Brand",),
            measures=(Measure("Sales", "sum"), Measure("Sales", "sum")),
        )
        assert any("distinct" in v for v in validate(f, small_table))

    def test_trend_needs_temporal_breakdown(self, small_table):
        f = fact(
            type=FactType.TREND,
            breakdown=("Brand",),
            measures=(Measure("Sales", "sum"),),
        )
        assert validate(f, small_table)

    def test_focus_field_must_match_breakdown(self, small_table):
        f = fact(
            type=FactType.EXTREME,
            breakdown=("Brand",),
            measures=(Measure("Sales", "sum"),),
            focus=(Filter("Year", "2008"),),
        )
        assert any("must match the breakdown" in v for v in validate(f, small_table))

    def test_constraint_matrix_enumeration(self, small_table):
        """Generated sweep over (type, breakdown kind, measure count, focus count)
        must agree with the constraint matrix."""
        temporal = ("Year",)
        categorical = ("Brand",)
        measure = Measure("Sales", "sum")
        other = Measure("Extra", "sum")  # nonexistent field, never used below
        matrix = {
            FactType.VALUE: (("none",), (1,), (0,)),
            FactType.DIFFERENCE: (("cat", "temp"), (1,), (2,)),
            FactType.PROPORTION: (("cat", "temp"), (1,), (1,)),
            FactType.TREND: (("temp",), (1,), (0, 1, 2, 3)),
            FactType.CATEGORIZATION: (("cat",), (0,), (0, 1, 2, 3)),
            FactType.DISTRIBUTION: (("cat",), (1,), (0, 1, 2, 3)),
            FactType.RANK: (("cat", "temp"), (1,), (3,)),
            FactType.ASSOCIATION: (("cat", "temp"), (2,), (0,)),
            FactType.EXTREME: (("cat", "temp"), (1,), (1,)),
            FactType.OUTLIER: (("cat", "temp"), (1,), (1,)),
        }
        for ft, (kinds, measure_counts, focus_counts) in matrix.items():
            for kind in ("none", "cat", "temp"):
                breakdown = {"none": (), "cat": categorical, "temp": temporal}[kind]
                bfield = breakdown[0] if breakdown else "Brand"
                values = small_table.field_meta(bfield).distinct_values
                for m_count in (0, 1, 2):
                    if m_count == 2:
                        measures = (measure, Measure("Sales2", "sum"))
                    else:
                        measures = (measure,) * m_count
                    for f_count in (0, 1, 2, 3):
                        focus = tuple(
                            Filter(bfield, values[i % len(values)])
                            for i in range(f_count)
                        )
                        candidate = fact(
                            type=ft,
                            breakdown=breakdown,
                            measures=measures,
                            focus=focus,
                        )
                        problems = validate(candidate, small_table)
                        shape_ok = (
                            kind in kinds
                            and m_count in measure_counts
                            and f_count in focus_counts
                        )
                        # the 2-measure case references a missing field, so it
                        # can only be structurally ok for association
                        if m_count == 2:
                            shape_ok = shape_ok and ft == FactType.ASSOCIATION
                            if shape_ok:
                                assert any("Sales2" in p for p in problems)
                                continue
                        if shape_ok and breakdown == () and f_count > 0:
                            continue
                        assert (not problems) == shape_ok, (ft, kind, m_count, f_count, problems)


class TestDeriveValue:
    def test_total_sales_on_carsales(self, car_sales_table):
        f = fact(type=FactType.VALUE, measures=(Measure("Sales", "sum"),))
        assert derive_value(f, car_sales_table).number == 21_921_768

    def test_proportion_of_whole_subspace_is_one(self, small_table):
        f = fact(
            type=FactType.PROPORTION,
            subspace=Subspace((Filter("Brand", "BMW"),)),
            breakdown=("Year",),
            measures=(Measure("Sales", "sum"),),
            focus=(Filter("Year", "2008"), ),
        )
        # BMW has one 2008 row (50) and one 2009 row (40)
        assert derive_value(f, small_table).number == pytest.approx(50 / 90)

    def test_trend_direction_by_slope_sign(self):
        table = load_csv(
            make_csv("Year,V", ["2001,10", "2002,8", "2003,5", "2004,2"])
        )
        f = fact(type=FactType.TREND, breakdown=("Year",), measures=(Measure("V", "sum"),))
        assert derive_value(f, table).text == "decreasing"

    def test_difference_antisymmetric(self, small_table):
        base = dict(
            type=FactType.DIFFERENCE,
            breakdown=("Brand",),
            measures=(Measure("Sales", "sum"),),
        )
        ab = fact(**base, focus=(Filter("Brand", "Ford"), Filter("Brand", "BMW")))
        ba = fact(**base, focus=(Filter("Brand", "BMW"), Filter("Brand", "Ford")))
        assert derive_value(ab, small_table).number == -derive_value(ba, small_table).number

    def test_empty_scope_errors(self, small_table):
        f = fact(
            type=FactType.VALUE,
            subspace=Subspace((Filter("Brand", "Tesla"),)),
            measures=(Measure("Sales", "sum"),),
        )
        with pytest.raises(EmptyScope):
            derive_value(f, small_table)

    def test_extreme_max(self, small_table):
        f = fact(
            type=FactType.EXTREME,
            breakdown=("Brand",),
            measures=(Measure("Sales", "sum"),),
            focus=(Filter("Brand", "Ford"),),
        )
        d = derive_value(f, small_table)
        assert d.text == "max" and d.number == 450.0

    def test_categorization_counts_groups(self, small_table):
        f = fact(type=FactType.CATEGORIZATION, breakdown=("Brand",))
        assert derive_value(f, small_table).number == 3.0


class TestSimilarity:
    def test_identity(self, small_table):
        f = fact(
            type=FactType.PROPORTION,
            subspace=Subspace((Filter("Brand", "Ford"),)),
            breakdown=("Year",),
            measures=(Measure("Sales", "sum"),),
            focus=(Filter("Year", "2008"),),
        )
        assert fact_similarity(f, f, small_table) == 1.0

    def test_nothing_shared(self, small_table):
        f1 = fact(
            type=FactType.EXTREME,
            subspace=Subspace((Filter("Brand", "Ford"),)),
            breakdown=("Year",),
            measures=(Measure("Sales", "sum"),),
            focus=(Filter("Year", "2007"),),
        )
        # different type, measure-less, disjoint subspace rows, disjoint focus
        f2 = fact(
            type=FactType.CATEGORIZATION,
            subspace=Subspace((Filter("Brand", "BMW"),)),
            breakdown=("Brand",),
            focus=(Filter("Brand", "BMW"),),
        )
        assert fact_similarity(f1, f2, small_table) == 0.0

    def test_same_type_only_scores_one_fifth(self, small_table):
        f1 = fact(
            type=FactType.PROPORTION,
            subspace=Subspace((Filter("Brand", "Ford"),)),
            breakdown=("Year",),
            measures=(Measure("Sales", "sum"),),
            focus=(Filter("Year", "2007"),),
        )
        f2 = fact(
            type=FactType.PROPORTION,
            subspace=Subspace((Filter("Brand", "BMW"),)),
            breakdown=("Brand",),
            measures=(Measure("Other", "sum"),),
            focus=(Filter("Brand", "BMW"),),
        )
        assert fact_similarity(f1, f2, small_table) == pytest.approx(0.2)

    def test_symmetry_and_bounds(self, small_table):
        f1 = fact(
            type=FactType.TREND,
            breakdown=("Year",),
            measures=(Measure("Sales", "sum"),),
        )
        f2 = fact(
            type=FactType.DISTRIBUTION,
            subspace=Subspace((Filter("Year", "2008"),)),
            breakdown=("Brand",),
            measures=(Measure("Sales", "avg"),),
        )
        s12 = fact_similarity(f1, f2, small_table)
        s21 = fact_similarity(f2, f1, small_table)
        assert s12 == s21
        assert 0.0 <= s12 <= 1.0


LISTING_RECORD = {
    "type": "proportion",
    "measure": [{"field": "Sales", "aggregate": "sum"}],
    "subspace": [{"field": "Brand", "value": "Ford"}],
    "breakdown": [{"field": "Category"}],
    "focus": [{"field": "Category", "value": "SUV"}],
}


class TestRecords:
    def test_listing_record_round_trip(self, car_sales_table):
        f = from_fact_record(LISTING_RECORD, car_sales_table)
        assert f.type == FactType.PROPORTION
        assert is_valid(f, car_sales_table)
        assert to_fact_record(f) == LISTING_RECORD

    def test_unknown_type_rejected(self):
        with pytest.raises(ParseError):
            from_fact_record({**LISTING_RECORD, "type": "ratio"})

    def test_malformed_filter_rejected(self):
        bad = dict(LISTING_RECORD)
        bad["subspace"] = [{"field": "Brand"}]
        with pytest.raises(ParseError):
            from_fact_record(bad)

    @settings(max_examples=80, deadline=None)
    @given(
        ft=st.sampled_from([FactType.VALUE, FactType.TREND, FactType.EXTREME]),
        brand=st.sampled_from(["Ford", "Toyota", "BMW"]),
        agg=st.sampled_from(["sum", "avg", "max", "min", "count"]),
        with_subspace=st.booleans(),
    )
    def test_round_trip_identity(self, ft, brand, agg, with_subspace):
        subspace = Subspace((Filter("Brand", brand),)) if with_subspace else Subspace()
        if ft == FactType.VALUE:
            f = fact(type=ft, subspace=subspace, measures=(Measure("Sales", agg),))
        elif ft == FactType.TREND:
            f = fact(
                type=ft,
                subspace=subspace,
                breakdown=("Year",),
                measures=(Measure("Sales", agg),),
            )
        else:
            f = fact(
                type=ft,
                subspace=subspace,
                breakdown=("Year",),
                measures=(Measure("Sales", agg),),
                focus=(Filter("Year", "2008"),),
            )
        assert from_fact_record(to_fact_record(f)) == f
