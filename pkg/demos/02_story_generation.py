"""Generate a six-fact story from the car-sales sheet and inspect the search.

Shows the reward criteria breakdown, the chain of relations, the story
briefing text, and a summary of the search tree that produced it.
"""
from pathlib import Path

from factweaver.narrate import story_summary
from factweaver.search import Goal, RewardWeights, SearchConfig, StorySearch
from factweaver.table import load_csv

DATA = Path(__file__).parent / "data" / "car_sales.csv"


def main():
    table = load_csv(DATA.read_bytes())
    goal = Goal(max_length=6, iteration_budget=150)
    weights = RewardWeights(diversity=0.3, logicality=0.4, integrity=0.3)
    search = StorySearch(table, goal, weights, SearchConfig(), seed=2024)
    story = search.run()

    print(f"reward = {story.reward:.4f}")
    for name, value in story.criteria.items():
        print(f"  {name:12s} {value:.4f}")
    print()
    for i, fact in enumerate(story.facts):
        arrow = f" --{story.relations[i - 1].value}--> " if i else ""
        print(f"{arrow}[{fact.type.value}]", end="")
    print("\n")
    print(story_summary(story, table))

    tree = search.export_tree()
    depths = [node["depth"] for node in tree["nodes"]]
    print()
    print(
        f"search tree: {len(tree['nodes'])} nodes, max depth {max(depths)}, "
        f"{search.iterations_run} iterations"
    )


if __name__ == "__main__":
    main()
