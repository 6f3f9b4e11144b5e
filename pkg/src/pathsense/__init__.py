"""Belief updating and information-gain path planning for grid worlds sensed
through trip-wire style path sensors."""

__version__ = "0.1.0"

from .belief import (
    BeliefState,
    CellBelief,
    cell_joint,
    derived_x_given_not_z,
    update_no_trigger,
    update_trigger,
)
from .experiment import (
    ConfigError,
    MonteCarloResult,
    ScenarioConfig,
    TrialResult,
    run_deployment,
    run_monte_carlo,
    run_trial,
)
from .grid import Cell, GridDims, Path, chebyshev
from .likelihood import OmegaLikelihoods, enumerate_omega, marginal_destruction_prob
from .metrics import EntropyTrace, map_entropy, record_deployment
from .planner import (
    ALGORITHMS,
    KAPPA_BNITP,
    RANDOM,
    RELAXED_BNITP,
    RELAXED_ITP,
    PlannerConfig,
    expected_info_gain,
    plan_path,
    relaxed_itp_trigger_update,
)
from .world import (
    GroundTruth,
    SensorParams,
    TraversalOutcome,
    WorldGenParams,
    generate_world,
    simulate_traversal,
)

__all__ = [
    "ALGORITHMS",
    "BeliefState",
    "Cell",
    "CellBelief",
    "ConfigError",
    "EntropyTrace",
    "GridDims",
    "GroundTruth",
    "KAPPA_BNITP",
    "MonteCarloResult",
    "OmegaLikelihoods",
    "Path",
    "PlannerConfig",
    "RANDOM",
    "RELAXED_BNITP",
    "RELAXED_ITP",
    "ScenarioConfig",
    "SensorParams",
    "TraversalOutcome",
    "TrialResult",
    "WorldGenParams",
    "cell_joint",
    "chebyshev",
    "derived_x_given_not_z",
    "enumerate_omega",
    "expected_info_gain",
    "generate_world",
    "map_entropy",
    "marginal_destruction_prob",
    "plan_path",
    "record_deployment",
    "relaxed_itp_trigger_update",
    "run_deployment",
    "run_monte_carlo",
    "run_trial",
    "simulate_traversal",
    "update_no_trigger",
    "update_trigger",
]
