"""Preference-based planning in MDPs with reachability objectives."""

from .improvement import ImprovementMdp, build_improvement_mdp, check_support_symmetry, compute_mp_table
from .mdp import (
    Mdp,
    ReachabilityObjective,
    Strategy,
    almost_sure_reach_region,
    oracle_reach_qualitative,
    positive_reach_region,
    positive_winning_strategy,
    validate_mdp,
)
from .preferences import (
    MpSet,
    PreferenceModel,
    classify_mp_transition,
    close_preorder,
    compare_plays,
    maximal_elements,
    strict_preferences,
)
from .scenarios import GridworldConfig, build_gridworld, build_toy_example
from .simulate import RunSummary, improvement_statistics, sample_play
from .synthesis import (
    CounterStrategy,
    LevelSets,
    Mode,
    composed_sasi_strategy,
    level_sets,
    rank_histogram,
    rank_of,
    sasi_level_sets,
    sasi_strategy,
    spi_level_sets,
    spi_strategy,
)

__version__ = "0.1.0"

__all__ = [
    "CounterStrategy",
    "GridworldConfig",
    "ImprovementMdp",
    "LevelSets",
    "Mdp",
    "Mode",
    "MpSet",
    "PreferenceModel",
    "ReachabilityObjective",
    "RunSummary",
    "Strategy",
    "almost_sure_reach_region",
    "build_gridworld",
    "build_improvement_mdp",
    "build_toy_example",
    "check_support_symmetry",
    "classify_mp_transition",
    "close_preorder",
    "compare_plays",
    "composed_sasi_strategy",
    "compute_mp_table",
    "improvement_statistics",
    "level_sets",
    "maximal_elements",
    "oracle_reach_qualitative",
    "positive_reach_region",
    "positive_winning_strategy",
    "rank_histogram",
    "rank_of",
    "sample_play",
    "sasi_level_sets",
    "sasi_strategy",
    "spi_level_sets",
    "spi_strategy",
    "strict_preferences",
    "validate_mdp",
]
