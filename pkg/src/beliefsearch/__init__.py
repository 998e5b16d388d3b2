"""Grid-world target search: belief-map planners with region-directed
options, receding-horizon baselines, and a reproducible benchmark harness."""

__version__ = "0.1.0"

from .gridworld import (
    Action,
    AgentState,
    BeliefMap,
    Cell,
    GridSpec,
    Heading,
    PriorConfig,
    generate_prior,
    sample_target,
    step,
)
from .sensing import (
    DegenerateEvidenceError,
    FovMask,
    FovResolver,
    Observation,
    exact_posterior,
    load_mask,
    planning_update,
    resolve_fov,
    sample_observation,
)
from .roi import RoiSet, find_seeds, relative_threshold, roi_target_cell, segment, watershed
from .options import Option, OptionKind, available_options, expand_option, greedy_path
from .planners import (
    HorizonConfig,
    LiteConfig,
    PuctConfig,
    dps_plan,
    greedy_plan,
    make_planner,
    puct_plan,
    reward_full,
    reward_lite,
)
from .harness import EpisodeConfig, EpisodeRecord, percentiles, run_batch, run_episode
