"""Scenario orchestration: sequential deployments, trials, and Monte Carlo runs.

One trial draws a ground-truth world, starts from the configured prior maps,
and runs M deployments; each deployment plans a path, simulates the
traversal, and applies the matching belief update (survival or trigger).
Entropy is recorded before the first deployment and after every one, so a
trace has M + 1 rows.

Seed discipline: every random draw descends from the trial seed through
numpy SeedSequence spawning (world, then one child per deployment for the
simulator, then one per deployment for the random planner). Trial seeds are
derived from the master seed the same way. Results are therefore bit-stable
for a given configuration, and trials are independent of each other and safe
to run concurrently.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .belief import BeliefState, update_no_trigger, update_trigger
from .grid import Cell, GridDims, Path
from .likelihood import enumerate_omega
from .metrics import EntropyTrace, record_deployment
from .planner import (
    ALGORITHMS,
    RELAXED_BNITP,
    RELAXED_ITP,
    PlannerConfig,
    plan_path,
    relaxed_itp_trigger_update,
)
from .world import GroundTruth, SensorParams, WorldGenParams, generate_world, simulate_traversal


class ConfigError(ValueError):
    """A configuration value is missing, malformed, or out of range."""


@dataclass(frozen=True)
class ScenarioConfig:
    dims: GridDims
    world_gen: WorldGenParams
    sensor: SensorParams
    planner: PlannerConfig
    num_agents: int
    num_trials: int
    prior_z: float
    prior_x: float
    prior_kappa: float
    master_seed: int
    name: str = "scenario"

    def __post_init__(self) -> None:
        if self.num_agents < 1:
            raise ConfigError(f"num_agents must be at least 1, got {self.num_agents}")
        if self.num_trials < 1:
            raise ConfigError(f"num_trials must be at least 1, got {self.num_trials}")
        for label, value in (
            ("prior_z", self.prior_z),
            ("prior_x", self.prior_x),
            ("prior_kappa", self.prior_kappa),
        ):
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{label} must be in [0, 1], got {value}")
        if not self.dims.contains(self.planner.base):
            raise ConfigError(
                f"planner.base {tuple(self.planner.base)} is outside the "
                f"{self.dims.width}x{self.dims.height} grid"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "scenario",
            "name": self.name,
            "dims": {"width": self.dims.width, "height": self.dims.height},
            "world_gen": dataclasses.asdict(self.world_gen),
            "sensor": dataclasses.asdict(self.sensor),
            "planner": {
                "budget_l": self.planner.budget_l,
                "base": {"col": self.planner.base.col, "row": self.planner.base.row},
                "algorithm": self.planner.algorithm,
            },
            "num_agents": self.num_agents,
            "num_trials": self.num_trials,
            "prior_z": self.prior_z,
            "prior_x": self.prior_x,
            "prior_kappa": self.prior_kappa,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        kind = data.get("kind", "scenario")
        if kind != "scenario":
            raise ConfigError(f"kind: expected 'scenario', got {kind!r}")
        dims_d = _require_section(data, "dims")
        world_d = _require_section(data, "world_gen")
        sensor_d = _require_section(data, "sensor")
        planner_d = _require_section(data, "planner")
        dims = GridDims(
            _require_int(dims_d, "width", "dims", minimum=1),
            _require_int(dims_d, "height", "dims", minimum=1),
        )
        world_gen = WorldGenParams(
            p_hazard=_require_prob(world_d, "p_hazard", "world_gen"),
            kappa_true=_require_prob(world_d, "kappa_true", "world_gen"),
            p_target_free=_require_prob(world_d, "p_target_free", "world_gen"),
            seed=int(world_d.get("seed", 0) or 0),
        )
        sensor = SensorParams(
            p_lethal=_require_prob(sensor_d, "p_lethal", "sensor"),
            p_malfunction=_require_prob(sensor_d, "p_malfunction", "sensor"),
            target_tpr=_require_prob(sensor_d, "target_tpr", "sensor"),
            target_fpr=_require_prob(sensor_d, "target_fpr", "sensor"),
        )
        base_d = _require_section(planner_d, "base", parent="planner")
        algorithm = planner_d.get("algorithm", "kappa_bnitp")
        if algorithm not in ALGORITHMS:
            raise ConfigError(
                f"planner.algorithm: unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}"
            )
        budget = _require_int(planner_d, "budget_l", "planner", minimum=2)
        planner = PlannerConfig(
            budget_l=budget,
            base=Cell(
                _require_int(base_d, "col", "planner.base", minimum=0),
                _require_int(base_d, "row", "planner.base", minimum=0),
            ),
            algorithm=algorithm,
        )
        try:
            return cls(
                dims=dims,
                world_gen=world_gen,
                sensor=sensor,
                planner=planner,
                num_agents=_require_int(data, "num_agents", minimum=1),
                num_trials=_require_int(data, "num_trials", minimum=1),
                prior_z=_require_prob(data, "prior_z"),
                prior_x=_require_prob(data, "prior_x"),
                prior_kappa=_require_prob(data, "prior_kappa"),
                master_seed=_require_int(data, "master_seed"),
                name=str(data.get("name", "scenario")),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _path_name(key: str, parent: str | None) -> str:
    return f"{parent}.{key}" if parent else key


def _require_section(data: dict[str, Any], key: str, parent: str | None = None) -> dict[str, Any]:
    if key not in data or not isinstance(data[key], dict):
        raise ConfigError(f"{_path_name(key, parent)}: missing or not a table/object")
    return data[key]


def _require_int(
    data: dict[str, Any], key: str, parent: str | None = None, minimum: int | None = None
) -> int:
    name = _path_name(key, parent)
    if key not in data:
        raise ConfigError(f"{name}: missing required integer")
    try:
        value = int(data[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected an integer, got {data[key]!r}") from exc
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name}: must be at least {minimum}, got {value}")
    return value


def _require_prob(data: dict[str, Any], key: str, parent: str | None = None) -> float:
    name = _path_name(key, parent)
    if key not in data:
        raise ConfigError(f"{name}: missing required probability")
    try:
        value = float(data[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected a number, got {data[key]!r}") from exc
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name}: must be in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class DeploymentRecord:
    path: Path
    triggered: bool
    has_readings: bool


@dataclass
class TrialResult:
    trace: EntropyTrace
    final_belief: BeliefState
    ground_truth: GroundTruth
    deployments: list[DeploymentRecord] = field(default_factory=list)


@dataclass
class MonteCarloResult:
    trials: list[TrialResult]
    trial_seeds: list[int]
    mean_h_z: np.ndarray
    mean_h_x: np.ndarray
    mean_h_total: np.ndarray
    std_h_total: np.ndarray


def initial_belief(cfg: ScenarioConfig) -> BeliefState:
    """Prior maps for a trial; the relaxed planners forget any co-occurrence prior."""
    belief = BeliefState.from_scalar_priors(cfg.dims, cfg.prior_z, cfg.prior_x, cfg.prior_kappa)
    if cfg.planner.algorithm in (RELAXED_BNITP, RELAXED_ITP):
        belief = belief.project_independent()
    return belief


def run_deployment(
    belief: BeliefState,
    world: GroundTruth,
    cfg: ScenarioConfig,
    m: int,
    sim_rng: int | np.random.Generator,
    planner_rng: np.random.Generator | None = None,
) -> tuple[BeliefState, DeploymentRecord]:
    """Plan, traverse, and update once; returns the posterior and a log entry."""
    path = plan_path(belief, cfg.planner, cfg.sensor, rng=planner_rng)
    outcome = simulate_traversal(world, path, cfg.sensor, sim_rng)
    if outcome.triggered:
        table = enumerate_omega(belief, path, cfg.sensor)
        if cfg.planner.algorithm == RELAXED_ITP:
            new_belief = relaxed_itp_trigger_update(belief, path, cfg.sensor, table)
        else:
            new_belief = update_trigger(belief, path, cfg.sensor, table)
    else:
        new_belief = update_no_trigger(belief, path, outcome.readings, cfg.sensor)
    record = DeploymentRecord(
        path=path, triggered=outcome.triggered, has_readings=outcome.readings is not None
    )
    return new_belief, record


def run_trial(cfg: ScenarioConfig, trial_seed: int) -> TrialResult:
    """One full trial: world draw, M sequential deployments, entropy trace."""
    root = np.random.SeedSequence(trial_seed)
    world_ss, sim_root, planner_root = root.spawn(3)
    world_seed = int(world_ss.generate_state(1, np.uint64)[0])
    world = generate_world(cfg.dims, dataclasses.replace(cfg.world_gen, seed=world_seed))

    belief = initial_belief(cfg)
    trace = EntropyTrace(scenario=cfg.name, planner=cfg.planner.algorithm, seed=trial_seed)
    record_deployment(trace, 0, belief)

    sim_seeds = sim_root.spawn(cfg.num_agents)
    planner_seeds = planner_root.spawn(cfg.num_agents)
    deployments: list[DeploymentRecord] = []
    for m in range(1, cfg.num_agents + 1):
        belief, record = run_deployment(
            belief,
            world,
            cfg,
            m,
            np.random.default_rng(sim_seeds[m - 1]),
            np.random.default_rng(planner_seeds[m - 1]),
        )
        record_deployment(trace, m, belief)
        deployments.append(record)
    return TrialResult(
        trace=trace, final_belief=belief, ground_truth=world, deployments=deployments
    )


def derive_trial_seeds(master_seed: int, num_trials: int) -> list[int]:
    """Stable per-trial seeds spawned from the master seed."""
    root = np.random.SeedSequence(master_seed)
    return [int(child.generate_state(1, np.uint64)[0]) for child in root.spawn(num_trials)]


def run_monte_carlo(cfg: ScenarioConfig) -> MonteCarloResult:
    """Run the configured number of independent trials and aggregate entropy.

    Trials run sequentially here, but each one depends only on its own seed,
    so a caller may distribute them and reassemble results in seed order.
    """
    seeds = derive_trial_seeds(cfg.master_seed, cfg.num_trials)
    trials = [run_trial(cfg, seed) for seed in seeds]
    h_z = np.array([[row.h_z for row in t.trace.rows] for t in trials])
    h_x = np.array([[row.h_x for row in t.trace.rows] for t in trials])
    h_total = np.array([[row.h_total for row in t.trace.rows] for t in trials])
    return MonteCarloResult(
        trials=trials,
        trial_seeds=seeds,
        mean_h_z=h_z.mean(axis=0),
        mean_h_x=h_x.mean(axis=0),
        mean_h_total=h_total.mean(axis=0),
        std_h_total=h_total.std(axis=0),
    )
