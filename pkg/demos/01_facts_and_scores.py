"""Walk through the fact model on the bundled car-sales sheet.

Loads the CSV, shows the inferred schema, builds a few facts by hand,
derives their values and prints the probability / significance / importance
decomposition for each.
"""
from pathlib import Path

from factweaver.facts import DataFact, FactType, Measure, derive_value
from factweaver.narrate import caption
from factweaver.scoring import importance
from factweaver.table import Filter, Subspace, load_csv

DATA = Path(__file__).parent / "data" / "car_sales.csv"


def main():
    table = load_csv(DATA.read_bytes())
    print(f"{table.row_count} rows")
    for meta in table.schema:
        print(f"  {meta.name:10s} {meta.kind.value}")

    facts = [
        DataFact(type=FactType.VALUE, measures=(Measure("Sales", "sum"),)),
        DataFact(
            type=FactType.PROPORTION,
            subspace=Subspace((Filter("Brand", "Ford"),)),
            breakdown=("Category",),
            measures=(Measure("Sales", "sum"),),
            focus=(Filter("Category", "SUV"),),
        ),
        DataFact(
            type=FactType.TREND,
            breakdown=("Year",),
            measures=(Measure("Sales", "sum"),),
        ),
        DataFact(
            type=FactType.RANK,
            breakdown=("Brand",),
            measures=(Measure("Sales", "sum"),),
            focus=(
                Filter("Brand", "Ford"),
                Filter("Brand", "Toyota"),
                Filter("Brand", "Honda"),
            ),
        ),
    ]

    for fact in facts:
        derived = derive_value(fact, table)
        score = importance(fact, table)
        print()
        print(caption(fact, table))
        print(
            f"  derived={derived.text or derived.number}"
            f"  P={score.probability:.5f}"
            f"  bits={score.self_information_bits:.2f}"
            f"  significance={score.significance:.3f}"
            f"  importance={score.importance:.3f}"
        )


if __name__ == "__main__":
    main()
