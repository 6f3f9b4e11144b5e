import numpy as np
import pytest

from pathsense import BeliefState, Cell, GridDims, PlannerConfig, ScenarioConfig
from pathsense import SensorParams, WorldGenParams


def coherent_belief(dims: GridDims, rng: np.random.Generator) -> BeliefState:
    """Random maps whose target marginal is consistent with the conditionals."""
    z = rng.random((dims.height, dims.width))
    kappa = rng.random((dims.height, dims.width))
    x_free = rng.random((dims.height, dims.width))
    return BeliefState(dims, z, kappa * z + x_free * (1.0 - z), kappa)


def make_scenario(
    width=9,
    height=9,
    p_hazard=0.2,
    kappa_true=0.8,
    p_target_free=0.1,
    p_lethal=0.3,
    p_malfunction=0.05,
    target_tpr=0.95,
    target_fpr=0.05,
    budget_l=20,
    base=None,
    algorithm="kappa_bnitp",
    num_agents=5,
    num_trials=2,
    prior_z=0.5,
    prior_x=0.5,
    prior_kappa=0.5,
    master_seed=2024,
    name="test",
) -> ScenarioConfig:
    dims = GridDims(width, height)
    if base is None:
        base = Cell(width // 2, height // 2)
    return ScenarioConfig(
        dims=dims,
        world_gen=WorldGenParams(p_hazard, kappa_true, p_target_free, 0),
        sensor=SensorParams(p_lethal, p_malfunction, target_tpr, target_fpr),
        planner=PlannerConfig(budget_l=budget_l, base=base, algorithm=algorithm),
        num_agents=num_agents,
        num_trials=num_trials,
        prior_z=prior_z,
        prior_x=prior_x,
        prior_kappa=prior_kappa,
        master_seed=master_seed,
        name=name,
    )


@pytest.fixture
def sensor_default() -> SensorParams:
    return SensorParams(p_lethal=0.9, p_malfunction=0.05, target_tpr=0.95, target_fpr=0.05)
