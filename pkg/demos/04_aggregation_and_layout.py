"""Story aggregation and factsheet layout mechanics, step by step.

Builds a story with two highly similar facts, sweeps the aggregation level,
and prints the layout search's winning row partition with per-fact areas.
"""
from pathlib import Path

from factweaver.compose import (
    CompoundFact,
    aggregate_story,
    fact_distance,
    layout_factsheet,
    layout_score,
)
from factweaver.facts import DataFact, FactType, Measure
from factweaver.search import Story
from factweaver.logic import Relation
from factweaver.table import Filter, load_csv

DATA = Path(__file__).parent / "data" / "car_sales.csv"


def main():
    table = load_csv(DATA.read_bytes())
    trend = DataFact(
        type=FactType.TREND, breakdown=("Year",), measures=(Measure("Sales", "sum"),)
    )
    peak = DataFact(
        type=FactType.EXTREME,
        breakdown=("Year",),
        measures=(Measure("Sales", "sum"),),
        focus=(Filter("Year", "2007"),),
    )
    ford = DataFact(
        type=FactType.PROPORTION,
        breakdown=("Brand",),
        measures=(Measure("Sales", "sum"),),
        focus=(Filter("Brand", "Ford"),),
    )
    cats = DataFact(type=FactType.CATEGORIZATION, breakdown=("Category",))
    story = Story(
        facts=(trend, peak, ford, cats),
        relations=(Relation.ELABORATION, Relation.SIMILARITY, Relation.SIMILARITY),
    )

    print("pairwise distances:")
    for i in range(4):
        print("  ", " ".join(f"{fact_distance(story.facts[i], story.facts[j], table):.2f}" for j in range(4)))

    for level in (0.0, 0.5, 1.0):
        pieces = aggregate_story(story, level, table)
        shapes = [
            f"({p.parts[0].type.value}+{p.parts[1].type.value}"
            f"->{p.merged_chart.value if p.merged_chart else 'juxtaposed'})"
            if isinstance(p, CompoundFact)
            else p.type.value
            for p in pieces
        ]
        print(f"aggregation {level:.0%}: {shapes}")

    layout = layout_factsheet(story, table)
    f, f_s, f_d = layout_score(layout, story, table)
    print(f"\nbest layout rows={layout.rows}  f={f:.3f} (area term {f_s:.3f}, distance term {f_d:.3f})")
    for i, area in enumerate(layout.areas):
        print(f"  fact {i} ({story.facts[i].type.value}): {area:.1%} of the page")


if __name__ == "__main__":
    main()
