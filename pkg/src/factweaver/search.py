"""Logic-oriented Monte Carlo tree search: grows a tree of facts linked by
coherence relations and returns the highest-reward root path as a story.

Each iteration runs selection (greedy on propagated path rewards), expansion
(candidates allocated across relations by their likelihood), simulation
(seeded rollouts estimating how far each candidate can go) and
back-propagation (exact path rewards folded into ancestor weights with max).
"""
from __future__ import annotations

import math
import random
import time
import zlib
from dataclasses import dataclass, field
from typing import Optional

from . import scoring
from .errors import GenerationError
from .facts import DataFact, FactType
from .generation import random_fact
from .logic import (
    RELATIONS,
    Relation,
    draw_relation,
    expand,
    relation_likelihood,
)
from .table import DataTable, select_subspace

ROOT_FACT_TYPES = (FactType.VALUE, FactType.TREND, FactType.CATEGORIZATION)


@dataclass(frozen=True)
class Goal:
    """Stopping contract: a target length plus exactly one budget kind."""

    max_length: int
    min_information_bits: Optional[float] = None
    time_budget: Optional[float] = None
    iteration_budget: Optional[int] = None

    def __post_init__(self):
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")
        if (self.time_budget is None) == (self.iteration_budget is None):
            raise ValueError("exactly one of time_budget/iteration_budget is required")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if self.iteration_budget is not None and self.iteration_budget < 1:
            raise ValueError("iteration_budget must be >= 1")


@dataclass(frozen=True)
class RewardWeights:
    diversity: float = 1 / 3
    logicality: float = 1 / 3
    integrity: float = 1 / 3

    def __post_init__(self):
        for w in (self.diversity, self.logicality, self.integrity):
            if not (0.0 <= w <= 1.0):
                raise ValueError("weights must lie in [0, 1]")
        if abs(self.diversity + self.logicality + self.integrity - 1.0) > 1e-6:
            raise ValueError("weights must sum to 1")

    @classmethod
    def normalized(cls, diversity: float, logicality: float, integrity: float):
        total = diversity + logicality + integrity
        if total <= 0:
            raise ValueError("weights must have a positive sum")
        return cls(diversity / total, logicality / total, integrity / total)


@dataclass(frozen=True)
class Story:
    """An ordered fact sequence with the relations linking adjacent facts."""

    facts: tuple[DataFact, ...]
    relations: tuple[Optional[Relation], ...]
    reward: float = 0.0
    criteria: dict = field(default_factory=dict, compare=False)
    goal_unmet: bool = False
    warning: Optional[str] = None

    def __post_init__(self):
        if self.facts and len(self.relations) != len(self.facts) - 1:
            raise ValueError("a story of n facts carries n-1 relations")

    def __len__(self) -> int:
        return len(self.facts)


@dataclass
class SearchConfig:
    fan_out: int = 20
    sim_rollouts: int = 2
    initial_batch: int = 50
    count_cell: bool = False
    expand_budget_rollout: int = 1
    should_stop: Optional[callable] = None  # cooperative cancellation hook


class Scorer:
    """Caching facade over scoring.importance keyed by the fact 5-tuple."""

    def __init__(self, table: DataTable):
        self.table = table
        self._cache: dict = {}
        self._rows_cache: dict = {}

    def score(self, fact: DataFact) -> scoring.FactScore:
        key = fact.key()
        hit = self._cache.get(key)
        if hit is None:
            hit = scoring.importance(fact, self.table)
            self._cache[key] = hit
        return hit

    def subspace_rows(self, subspace) -> frozenset:
        key = tuple(sorted((f.field, f.value) for f in subspace.filters))
        hit = self._rows_cache.get(key)
        if hit is None:
            hit = frozenset(select_subspace(self.table, subspace))
            self._rows_cache[key] = hit
        return hit


def entropy(story: Story, table: DataTable, scorer: Optional[Scorer] = None) -> float:
    """Story information content: sum of P(f) * importance(f) over its facts."""
    scorer = scorer or Scorer(table)
    return sum(
        s.probability * s.importance for s in (scorer.score(f) for f in story.facts)
    )


def diversity(story: Story) -> float:
    """Fact-type variety in [0, 1]: type-count ratio times Shannon evenness."""
    if not story.facts:
        return 0.0
    counts: dict = {}
    for f in story.facts:
        counts[f.type] = counts.get(f.type, 0) + 1
    n_types = len(counts)
    total = len(story.facts)
    first = n_types / min(total, 10)
    if n_types == 1:
        evenness = 1.0
    else:
        proportions = [c / total for c in counts.values()]
        evenness = -sum(p * math.log(p) for p in proportions) / math.log(n_types)
    return first * evenness


def logicality(story: Story) -> float:
    """Mean likelihood of each relation given the fact it follows."""
    if len(story.facts) < 2:
        return 1.0
    total = 0.0
    for fact, relation in zip(story.facts, story.relations):
        if relation is not None:
            total += relation_likelihood(fact.type, relation)
    return total / len(story.relations)


def integrity(
    story: Story,
    table: DataTable,
    count_cell: bool = False,
    scorer: Optional[Scorer] = None,
) -> float:
    """Data coverage: fraction of rows (or cells) touched by the facts' subspaces."""
    if not story.facts or table.row_count == 0:
        return 0.0
    if not count_cell:
        covered: set = set()
        for f in story.facts:
            if scorer is not None:
                covered.update(scorer.subspace_rows(f.subspace))
            else:
                covered.update(select_subspace(table, f.subspace))
            if len(covered) == table.row_count:
                return 1.0
        return len(covered) / table.row_count
    cells: set = set()
    for f in story.facts:
        names = {m.field for m in f.measures}
        names.update(f.breakdown)
        names.update(flt.field for flt in f.subspace.filters)
        names.update(flt.field for flt in f.focus)
        for r in select_subspace(table, f.subspace):
            for name in names:
                cells.add((r, name))
    return len(cells) / (table.row_count * len(table.schema))


def reward(
    story: Story,
    weights: RewardWeights,
    table: DataTable,
    scorer: Optional[Scorer] = None,
    count_cell: bool = False,
) -> float:
    d = diversity(story)
    l = logicality(story)
    c = integrity(story, table, count_cell, scorer)
    h = entropy(story, table, scorer)
    return (weights.diversity * d + weights.logicality * l + weights.integrity * c) * h


def criteria_breakdown(
    story: Story,
    weights: RewardWeights,
    table: DataTable,
    scorer: Optional[Scorer] = None,
    count_cell: bool = False,
) -> dict:
    d = diversity(story)
    l = logicality(story)
    c = integrity(story, table, count_cell, scorer)
    h = entropy(story, table, scorer)
    return {
        "diversity": d,
        "logicality": l,
        "integrity": c,
        "entropy": h,
        "reward": (weights.diversity * d + weights.logicality * l + weights.integrity * c)
        * h,
    }


def initial_fact(
    table: DataTable,
    seed: int = 0,
    batch: int = 50,
    scorer: Optional[Scorer] = None,
) -> DataFact:
    """Most important fact from a seeded batch of story-opening fact types."""
    rng = random.Random(seed)
    scorer = scorer or Scorer(table)
    best: Optional[DataFact] = None
    best_importance = -1.0
    produced = 0
    for _ in range(batch):
        fact_type = rng.choice(ROOT_FACT_TYPES)
        fact = random_fact(table, fact_type, rng)
        if fact is None:
            continue
        produced += 1
        score = scorer.score(fact)
        if score.importance > best_importance:
            best, best_importance = fact, score.importance
    if best is None:
        raise GenerationError("no valid opening fact could be constructed")
    return best


def _mix_seed(*parts: int) -> int:
    h = 0x811C9DC5
    for p in parts:
        h ^= (p + 0x9E3779B9) & 0xFFFFFFFF
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def _fact_seed(fact: DataFact) -> int:
    return zlib.crc32(repr(fact.key()).encode())


def expansion_candidates(
    fact: DataFact, table: DataTable, seed: int, fan_out: int
) -> list[tuple[Relation, DataFact]]:
    """All (relation, successor) moves from a fact under the fan-out policy.

    Per-relation budgets are proportional to the relation's likelihood after
    this fact type (minimum 1 when nonzero).  Candidate draws are seeded by
    the fact content, so the move set depends only on (fact, table, seed),
    never on tree growth order; exhaustive enumerators can replay it exactly.
    """
    pairs: list[tuple[Relation, DataFact]] = []
    for rel_idx, relation in enumerate(RELATIONS):
        p = relation_likelihood(fact.type, relation)
        if p <= 0.0:
            continue
        budget = max(1, round(fan_out * p))
        rng = random.Random(_mix_seed(seed, _fact_seed(fact), rel_idx))
        for successor in expand(fact, relation, table, rng, budget):
            pairs.append((relation, successor))
    return pairs


class _Node:
    __slots__ = (
        "fact",
        "relation",
        "parent",
        "children",
        "weight",
        "index",
        "depth",
        "untried",
        "visits",
    )

    def __init__(self, fact, relation, parent, index, depth):
        self.fact = fact
        self.relation = relation
        self.parent = parent
        self.children: list[_Node] = []
        self.weight = 0.0
        self.index = index
        self.depth = depth
        self.untried: Optional[list] = None  # lazily generated (relation, fact) pairs
        self.visits = 0

    def path(self) -> tuple[list[DataFact], list[Relation]]:
        facts, relations = [], []
        node = self
        while node is not None:
            facts.append(node.fact)
            if node.relation is not None:
                relations.append(node.relation)
            node = node.parent
        facts.reverse()
        relations.reverse()
        return facts, relations

    def path_keys(self) -> set:
        keys = set()
        node = self
        while node is not None:
            keys.add(node.fact.key())
            node = node.parent
        return keys


class StorySearch:
    """One search run; keeps the tree and audit data inspectable after run()."""

    def __init__(
        self,
        table: DataTable,
        goal: Goal,
        weights: RewardWeights = RewardWeights(),
        config: Optional[SearchConfig] = None,
        seed: int = 0,
    ):
        self.table = table
        self.goal = goal
        self.weights = weights
        self.config = config or SearchConfig()
        self.seed = seed
        self.scorer = Scorer(table)
        self.sim_step_starts: list[float] = []
        self.deadline: Optional[float] = None
        self.iterations_run = 0
        self.root: Optional[_Node] = None
        self._nodes: list[_Node] = []

    # -- reward plumbing ---------------------------------------------------

    def _path_story(self, facts, relations) -> Story:
        return Story(facts=tuple(facts), relations=tuple(relations))

    def _path_reward(self, facts, relations) -> float:
        return reward(
            self._path_story(facts, relations),
            self.weights,
            self.table,
            self.scorer,
            self.config.count_cell,
        )

    def _node_reward(self, node: _Node) -> float:
        facts, relations = node.path()
        return self._path_reward(facts, relations)

    # -- tree steps ----------------------------------------------------------

    def _new_node(self, fact, relation, parent) -> _Node:
        node = _Node(fact, relation, parent, index=len(self._nodes), depth=0 if parent is None else parent.depth + 1)
        self._nodes.append(node)
        return node

    def _generate_candidates(self, node: _Node) -> list:
        """Fan the node out across relations, skipping facts already on its path."""
        path_keys = node.path_keys()
        return [
            (relation, fact)
            for relation, fact in expansion_candidates(
                node.fact, self.table, self.seed, self.config.fan_out
            )
            if fact.key() not in path_keys
        ]

    def _expandable(self, node: _Node) -> bool:
        if node.depth + 1 >= self.goal.max_length:
            return False
        return node.untried is None or len(node.untried) > 0

    def _select(self) -> Optional[_Node]:
        candidates = [n for n in self._nodes if self._expandable(n)]
        if not candidates:
            return None
        return min(
            candidates,
            key=lambda n: (-n.weight, 0 if n.untried is None else 1, n.index),
        )

    def _rollout(self, facts, relations, rng) -> float:
        """Extend a path with relation-sampled facts, tracking the best reward seen."""
        best = self._path_reward(facts, relations)
        facts = list(facts)
        relations = list(relations)
        seen = {f.key() for f in facts}
        while len(facts) < self.goal.max_length:
            step = None
            for _ in range(3):
                rel = draw_relation(facts[-1].type, rng)
                found = expand(
                    facts[-1],
                    rel,
                    self.table,
                    rng,
                    self.config.expand_budget_rollout,
                )
                found = [f for f in found if f.key() not in seen]
                if found:
                    step = (rel, found[0])
                    break
            if step is None:
                break
            relations.append(step[0])
            facts.append(step[1])
            seen.add(step[1].key())
            best = max(best, self._path_reward(facts, relations))
        return best

    def _within_deadline(self) -> bool:
        return self.deadline is None or time.monotonic() < self.deadline

    def _simulate(self, node: _Node, iteration: int):
        """Score each untried candidate; returns (best index, simulated reward)."""
        base_facts, base_relations = node.path()
        best_idx, best_sim = None, -1.0
        for idx, (relation, fact) in enumerate(node.untried):
            facts = base_facts + [fact]
            relations = base_relations + [relation]
            sim = self._path_reward(facts, relations)
            rng = random.Random(_mix_seed(self.seed, 7919 * iteration, idx))
            for _ in range(self.config.sim_rollouts):
                if not self._within_deadline():
                    break
                self.sim_step_starts.append(time.monotonic())
                sim = max(sim, self._rollout(facts, relations, rng))
            if sim > best_sim:
                best_idx, best_sim = idx, sim
        return best_idx, best_sim

    def _backpropagate(self, node: _Node):
        value = node.weight
        current = node.parent
        while current is not None:
            if value > current.weight:
                current.weight = value
            current.visits += 1
            current = current.parent

    # -- main loop -----------------------------------------------------------

    def run(self) -> Story:
        config = self.config
        goal = self.goal
        if goal.time_budget is not None:
            self.deadline = time.monotonic() + goal.time_budget

        root_fact = initial_fact(
            self.table, self.seed, config.initial_batch, self.scorer
        )
        self.root = self._new_node(root_fact, None, None)
        self.root.weight = self._node_reward(self.root)
        best_node, best_reward = self.root, self.root.weight

        iteration = 0
        while True:
            if config.should_stop is not None and config.should_stop():
                break
            if goal.iteration_budget is not None and iteration >= goal.iteration_budget:
                break
            if not self._within_deadline():
                break
            if (
                goal.min_information_bits is not None
                and self._best_entropy(best_node) >= goal.min_information_bits
            ):
                break
            if (
                goal.time_budget is not None
                and best_node.depth + 1 >= goal.max_length
            ):
                break

            node = self._select()
            while node is not None and node.untried is None:
                node.untried = self._generate_candidates(node)
                if node.untried:
                    break
                node = self._select()
            if node is None:
                break

            best_idx, _ = self._simulate(node, iteration)
            if best_idx is None:
                node.untried = []
                iteration += 1
                self.iterations_run = iteration
                continue
            relation, fact = node.untried.pop(best_idx)
            child = self._new_node(fact, relation, node)
            child.weight = self._node_reward(child)
            self._backpropagate(child)
            if child.weight > best_reward or (
                child.weight == best_reward and child.depth > best_node.depth
            ):
                best_node, best_reward = child, child.weight

            iteration += 1
            self.iterations_run = iteration

        facts, relations = best_node.path()
        story = Story(facts=tuple(facts), relations=tuple(relations))
        crits = criteria_breakdown(
            story, self.weights, self.table, self.scorer, config.count_cell
        )
        goal_unmet = len(facts) < goal.max_length and (
            goal.min_information_bits is None
            or crits["entropy"] < goal.min_information_bits
        )
        warning = None
        if len(facts) == 1 and goal.max_length > 1:
            warning = "no legal expansion from the opening fact"
        return Story(
            facts=story.facts,
            relations=story.relations,
            reward=crits["reward"],
            criteria=crits,
            goal_unmet=goal_unmet,
            warning=warning,
        )

    def _best_entropy(self, node: _Node) -> float:
        facts, relations = node.path()
        return entropy(self._path_story(facts, relations), self.table, self.scorer)

    def export_tree(self) -> dict:
        """Structured (nodes, edges, weights) record of the final tree."""
        from .facts import to_fact_record

        nodes = []
        for n in self._nodes:
            nodes.append(
                {
                    "index": n.index,
                    "parent": n.parent.index if n.parent else None,
                    "relation": n.relation.value if n.relation else None,
                    "weight": n.weight,
                    "depth": n.depth,
                    "fact": to_fact_record(n.fact),
                }
            )
        return {"nodes": nodes}


def generate_story(
    table: DataTable,
    goal: Goal,
    weights: RewardWeights = RewardWeights(),
    config: Optional[SearchConfig] = None,
    seed: int = 0,
) -> Story:
    """Run the tree search and return the best story for the goal."""
    return StorySearch(table, goal, weights, config, seed).run()
