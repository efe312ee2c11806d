import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_csv
from factweaver.errors import CsvStructureError, EmptyTable, FilterError, SchemaError
from factweaver.table import (
    FieldKind,
    Filter,
    Subspace,
    group_and_aggregate,
    infer_field_type,
    load_csv,
    parse_number,
    parse_temporal,
    select_subspace,
)


class TestInference:
    def test_four_digit_years_are_temporal(self):
        assert infer_field_type(["2007", "2008", "2009"]) == FieldKind.TEMPORAL

    def test_plain_numbers(self):
        assert infer_field_type(["12.5", "-3", "0"]) == FieldKind.NUMERICAL

    def test_text_is_categorical(self):
        assert infer_field_type(["SUV", "Compact", "SUV"]) == FieldKind.CATEGORICAL

    def test_mixed_parse_falls_back_to_categorical(self):
        assert infer_field_type(["1", "2", "x"]) == FieldKind.CATEGORICAL

    def test_all_empty_column_errors(self):
        with pytest.raises(SchemaError):
            infer_field_type(["", "  ", ""])

    def test_inference_is_deterministic(self):
        values = ["2020-01-03", "2020-02-01", "2020-03-11"]
        kinds = {infer_field_type(list(values)) for _ in range(5)}
        assert kinds == {FieldKind.TEMPORAL}

    def test_thousands_commas(self):
        assert parse_number("1,234.5") == 1234.5
        assert parse_number("nope") is None

    @pytest.mark.parametrize(
        "text,expected",
        [
            ("2020", (2020, 1, 1)),
            ("2020-03", (2020, 3, 1)),
            ("2020-03-02", (2020, 3, 2)),
            ("2020/3/2", (2020, 3, 2)),
            ("3 March 2020", None),
        ],
    )
    def test_temporal_formats(self, text, expected):
        assert parse_temporal(text) == expected


class TestLoadCsv:
    def test_carsales_shape(self, car_sales_bytes):
        table = load_csv(car_sales_bytes)
        kinds = {m.name: m.kind for m in table.schema}
        assert table.row_count == 275
        assert kinds["Year"] == FieldKind.TEMPORAL
        assert kinds["Brand"] == FieldKind.CATEGORICAL
        assert kinds["Sales"] == FieldKind.NUMERICAL

    def test_three_column_subset(self, car_sales_bytes):
        lines = car_sales_bytes.decode().strip().splitlines()
        header = "Year,Brand,Sales"
        rows = [",".join(l.split(",")[i] for i in (0, 1, 3)) for l in lines[1:]]
        table = load_csv(make_csv(header, rows))
        assert [m.kind for m in table.schema] == [
            FieldKind.TEMPORAL,
            FieldKind.CATEGORICAL,
            FieldKind.NUMERICAL,
        ]
        assert table.row_count == 275

    def test_header_only_is_empty(self):
        with pytest.raises(EmptyTable):
            load_csv(b"Year,Brand,Sales\n")

    def test_ragged_row_reports_index(self):
        with pytest.raises(CsvStructureError) as err:
            load_csv(b"a,b\n1,2\n3\n")
        assert err.value.row_index == 2

    def test_duplicate_header(self):
        with pytest.raises(SchemaError):
            load_csv(b"a,a\n1,2\n")

    def test_custom_delimiter(self):
        table = load_csv(b"a;b\nx;1\ny;2\n", delimiter=";")
        assert table.row_count == 2
        assert table.field_meta("b").kind == FieldKind.NUMERICAL

    def test_numerical_min_max(self):
        table = load_csv(b"v\n5\n-2\n9\n")
        meta = table.field_meta("v")
        assert (meta.min_value, meta.max_value) == (-2.0, 9.0)


class TestSelectSubspace:
    def test_empty_subspace_selects_all(self, small_table):
        assert select_subspace(small_table, Subspace()) == list(range(10))

    def test_single_filter_linear_scan(self, small_table):
        rows = select_subspace(small_table, Subspace((Filter("Brand", "Ford"),)))
        expected = [
            i
            for i, row in enumerate(small_table.rows)
            if row[0] == "Ford"
        ]
        assert rows == expected
        assert len(rows) == 5

    def test_conjunction_is_intersection(self, small_table):
        both = select_subspace(
            small_table,
            Subspace((Filter("Brand", "Ford"), Filter("Year", "2008"))),
        )
        brand = set(select_subspace(small_table, Subspace((Filter("Brand", "Ford"),))))
        year = set(select_subspace(small_table, Subspace((Filter("Year", "2008"),))))
        assert set(both) == brand & year

    def test_unknown_field_is_error(self, small_table):
        with pytest.raises(FilterError):
            select_subspace(small_table, Subspace((Filter("Nope", "x"),)))

    def test_numerical_filter_is_error(self, small_table):
        with pytest.raises(FilterError):
            select_subspace(small_table, Subspace((Filter("Sales", "100"),)))

    def test_absent_value_is_empty_not_error(self, small_table):
        rows = select_subspace(small_table, Subspace((Filter("Brand", "Tesla"),)))
        assert rows == []

    def test_at_most_two_filters(self):
        with pytest.raises(FilterError):
            Subspace((Filter("a", "1"), Filter("b", "2"), Filter("c", "3")))

    def test_duplicate_filter_fields_rejected(self):
        with pytest.raises(FilterError):
            Subspace((Filter("a", "1"), Filter("a", "2")))


class TestGroupAndAggregate:
    def test_hash_group_oracle(self, small_table):
        rows = select_subspace(small_table, Subspace((Filter("Brand", "Ford"),)))
        got = dict(group_and_aggregate(small_table, rows, ["Year"], "Sales", "sum"))
        oracle = {}
        for r in rows:
            year, sales = small_table.rows[r][1], small_table.rows[r][2]
            oracle[year] = oracle.get(year, 0) + sales
        assert got == oracle

    def test_empty_row_set(self, small_table):
        assert group_and_aggregate(small_table, [], ["Brand"], "Sales", "sum") == []

    def test_degenerate_grouping(self, small_table):
        entries = group_and_aggregate(
            small_table, list(range(10)), [], "Sales", "sum"
        )
        assert entries == [(None, sum(r[2] for r in small_table.rows))]

    def test_temporal_keys_chronological(self, small_table):
        entries = group_and_aggregate(
            small_table, list(range(10)), ["Year"], "Sales", "sum"
        )
        assert [k for k, _ in entries] == ["2007", "2008", "2009"]

    def test_categorical_keys_by_value_desc(self, small_table):
        entries = group_and_aggregate(
            small_table, list(range(10)), ["Brand"], "Sales", "sum"
        )
        values = [v for _, v in entries]
        assert values == sorted(values, reverse=True)

    def test_count_ignores_measure_kind(self, small_table):
        entries = group_and_aggregate(
            small_table, list(range(10)), ["Brand"], None, "count"
        )
        assert dict(entries) == {"Ford": 5, "Toyota": 3, "BMW": 2}

    def test_non_numeric_measure_rejected(self, small_table):
        with pytest.raises(TypeError):
            group_and_aggregate(small_table, list(range(10)), ["Brand"], "Year", "sum")

    @pytest.mark.parametrize("agg", ["sum", "avg", "max", "min"])
    def test_aggregations(self, small_table, agg):
        entries = dict(
            group_and_aggregate(small_table, list(range(10)), ["Brand"], "Sales", agg)
        )
        ford = [r[2] for r in small_table.rows if r[0] == "Ford"]
        expected = {
            "sum": sum(ford),
            "avg": sum(ford) / len(ford),
            "max": max(ford),
            "min": min(ford),
        }[agg]
        assert entries["Ford"] == pytest.approx(expected)


@settings(max_examples=50, deadline=None)
@given(
    data=st.lists(
        st.tuples(
            st.sampled_from(["a", "b", "c"]),
            st.integers(min_value=0, max_value=50),
        ),
        min_size=1,
        max_size=40,
    )
)
def test_counts_partition_rows(data):
    rows = [f"{g},{v}" for g, v in data]
    table = load_csv(make_csv("g,v", rows))
    entries = group_and_aggregate(
        table, list(range(table.row_count)), ["g"], None, "count"
    )
    assert sum(v for _, v in entries) == table.row_count
