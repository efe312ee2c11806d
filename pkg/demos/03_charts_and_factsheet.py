"""Render a generated story as individual SVG charts, then as the three
story documents (storyline, swiper, factsheet) under demos/output/.
"""
from pathlib import Path

from factweaver.compose import (
    render_factsheet,
    render_storyline,
    render_swiper,
    story_charts,
)
from factweaver.search import Goal, RewardWeights, SearchConfig, StorySearch
from factweaver.table import load_csv
from factweaver.visualize import render_svg

DATA = Path(__file__).parent / "data" / "car_sales.csv"
OUT = Path(__file__).parent / "output"


def main():
    table = load_csv(DATA.read_bytes())
    story = StorySearch(
        table, Goal(max_length=5, iteration_budget=120), RewardWeights(),
        SearchConfig(), seed=7,
    ).run()

    OUT.mkdir(exist_ok=True)
    specs = story_charts(story, table, chart_diversity=0.6)
    for i, spec in enumerate(specs):
        path = OUT / f"chart_{i}_{spec.chart.value}.svg"
        path.write_text(render_svg(spec, 420, 280))
        print(f"wrote {path.name}: {spec.caption[:70]}")

    (OUT / "storyline.html").write_text(render_storyline(specs))
    (OUT / "swiper.html").write_text(render_swiper(specs))
    (OUT / "factsheet.svg").write_text(render_factsheet(story, table, specs=specs))
    print("wrote storyline.html, swiper.html, factsheet.svg")


if __name__ == "__main__":
    main()
