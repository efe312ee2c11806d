"""factweaver: turn a spreadsheet into a scored, ordered, captioned visual data story."""

from .facts import DataFact, FactType, Measure
from .logic import Relation
from .search import Goal, RewardWeights, Story, generate_story
from .table import DataTable, Filter, Subspace, load_csv

__version__ = "0.1.0"

__all__ = [
    "DataFact",
    "DataTable",
    "FactType",
    "Filter",
    "Goal",
    "Measure",
    "Relation",
    "RewardWeights",
    "Story",
    "Subspace",
    "generate_story",
    "load_csv",
    "__version__",
]
