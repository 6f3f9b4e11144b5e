import json

import numpy as np
import pytest

from pathsense import (
    Cell,
    GridDims,
    GroundTruth,
    Path,
    SensorParams,
    WorldGenParams,
    generate_world,
    simulate_traversal,
)


def test_degenerate_probabilities_fill_world():
    world = generate_world(GridDims(2, 2), WorldGenParams(1.0, 1.0, 0.0, seed=5))
    assert world.hazard.all()
    assert world.target.all()


def test_degenerate_probabilities_empty_world():
    world = generate_world(GridDims(2, 2), WorldGenParams(0.0, 1.0, 0.0, seed=5))
    assert not world.hazard.any()
    assert not world.target.any()


def test_generation_deterministic_per_seed():
    gen = WorldGenParams(0.3, 0.7, 0.1, seed=77)
    a = generate_world(GridDims(4, 3), gen)
    b = generate_world(GridDims(4, 3), gen)
    assert np.array_equal(a.hazard, b.hazard)
    assert np.array_equal(a.target, b.target)
    c = generate_world(GridDims(4, 3), WorldGenParams(0.3, 0.7, 0.1, seed=78))
    assert not (np.array_equal(a.hazard, c.hazard) and np.array_equal(a.target, c.target))


def test_kappa_frequency_matches_generator():
    # Empirical P(target | hazard) over 10000 seeded worlds.
    hazard_cells = 0
    target_given_hazard = 0
    for seed in range(10000):
        world = generate_world(GridDims(9, 9), WorldGenParams(0.2, 0.8, 0.1, seed=seed))
        hazard_cells += int(world.hazard.sum())
        target_given_hazard += int((world.hazard & world.target).sum())
    freq = target_given_hazard / hazard_cells
    assert abs(freq - 0.8) <= 0.02


def test_certain_destruction_at_first_hazard():
    world = generate_world(GridDims(2, 1), WorldGenParams(1.0, 1.0, 0.0, seed=1))
    sensor = SensorParams(p_lethal=1.0, p_malfunction=0.0, target_tpr=1.0, target_fpr=0.0)
    outcome = simulate_traversal(world, Path((Cell(0, 0), Cell(1, 0))), sensor, 3)
    assert outcome.triggered
    assert outcome.destruction_index == 0
    assert outcome.readings is None


def test_noiseless_readings_equal_occupancy():
    world = generate_world(GridDims(3, 3), WorldGenParams(0.5, 0.9, 0.2, seed=11))
    sensor = SensorParams(p_lethal=0.0, p_malfunction=0.0, target_tpr=1.0, target_fpr=0.0)
    path = Path((Cell(0, 0), Cell(1, 1), Cell(2, 2), Cell(1, 1)))
    outcome = simulate_traversal(world, path, sensor, 9)
    assert not outcome.triggered
    expected = tuple(int(world.has_target(c)) for c in path.cells)
    assert outcome.readings == expected


def test_traversal_deterministic_per_seed():
    world = generate_world(GridDims(3, 3), WorldGenParams(0.4, 0.5, 0.1, seed=2))
    sensor = SensorParams(0.5, 0.1, 0.8, 0.2)
    path = Path((Cell(0, 0), Cell(1, 0), Cell(2, 0)))
    a = simulate_traversal(world, path, sensor, 123)
    b = simulate_traversal(world, path, sensor, 123)
    assert a == b


def test_malfunction_trigger_rate_closed_form():
    # Three hazard-free cells at 5% malfunction: P(trigger) = 1 - 0.95**3.
    world = generate_world(GridDims(3, 1), WorldGenParams(0.0, 0.0, 0.0, seed=0))
    sensor = SensorParams(p_lethal=0.9, p_malfunction=0.05, target_tpr=0.9, target_fpr=0.1)
    path = Path((Cell(0, 0), Cell(1, 0), Cell(2, 0)))
    triggers = sum(
        simulate_traversal(world, path, sensor, seed).triggered for seed in range(10000)
    )
    assert abs(triggers / 10000 - 0.142625) <= 0.01


def test_trigger_rate_matches_survival_product_3sigma():
    world = generate_world(GridDims(3, 2), WorldGenParams(0.5, 0.5, 0.1, seed=21))
    sensor = SensorParams(0.35, 0.08, 0.9, 0.1)
    path = Path((Cell(0, 0), Cell(1, 0), Cell(2, 0), Cell(2, 1), Cell(1, 1)))
    p_trig = 1.0
    for cell in path.cells:
        p_trig *= 1.0 - (sensor.p_lethal if world.has_hazard(cell) else sensor.p_malfunction)
    p_trig = 1.0 - p_trig
    n = 20000
    triggers = sum(simulate_traversal(world, path, sensor, seed).triggered for seed in range(n))
    sigma = (p_trig * (1.0 - p_trig) / n) ** 0.5
    assert abs(triggers / n - p_trig) <= 3.0 * sigma


def test_destruction_index_is_single_and_hides_readings():
    world = generate_world(GridDims(3, 1), WorldGenParams(1.0, 0.5, 0.1, seed=4))
    sensor = SensorParams(0.5, 0.0, 0.9, 0.1)
    path = Path((Cell(0, 0), Cell(1, 0), Cell(2, 0)))
    for seed in range(200):
        outcome = simulate_traversal(world, path, sensor, seed)
        if outcome.triggered:
            assert outcome.readings is None
            assert 0 <= outcome.destruction_index < len(path.cells)
        else:
            assert outcome.destruction_index is None
            assert len(outcome.readings) == len(path.cells)


def test_invalid_path_rejected():
    world = generate_world(GridDims(2, 2), WorldGenParams(0.1, 0.5, 0.1, seed=0))
    sensor = SensorParams(0.5, 0.05, 0.9, 0.1)
    with pytest.raises(ValueError):
        simulate_traversal(world, Path((Cell(0, 0), Cell(5, 5)), ), sensor, 1)
    with pytest.raises(ValueError):
        simulate_traversal(world, Path((Cell(0, 0), Cell(0, 0), Cell(1, 1), Cell(0, 1))), sensor, 1)
        simulate_traversal(world, Path(()), sensor, 1)
    with pytest.raises(ValueError):
        simulate_traversal(world, Path((Cell(0, 0), Cell(2, 0))), sensor, 1)


def test_param_validation():
    with pytest.raises(ValueError):
        WorldGenParams(1.2, 0.5, 0.1)
    with pytest.raises(ValueError):
        SensorParams(0.5, -0.1, 0.9, 0.1)
    with pytest.raises(ValueError):
        GridDims(0, 3)


def test_ground_truth_json_roundtrip():
    world = generate_world(GridDims(4, 2), WorldGenParams(0.4, 0.6, 0.2, seed=9))
    blob = json.dumps(world.to_json_dict())
    back = GroundTruth.from_json_dict(json.loads(blob))
    assert back.dims == world.dims
    assert np.array_equal(back.hazard, world.hazard)
    assert np.array_equal(back.target, world.target)
    assert back.gen_params == world.gen_params
