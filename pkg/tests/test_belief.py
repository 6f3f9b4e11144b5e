import itertools
import json

import numpy as np
import pytest

from pathsense import (
    BeliefState,
    Cell,
    CellBelief,
    GridDims,
    Path,
    SensorParams,
    cell_joint,
    derived_x_given_not_z,
    enumerate_omega,
    update_no_trigger,
    update_trigger,
)
from pathsense.oracle import enumerate_posteriors_trigger

from conftest import coherent_belief


def uniform_belief(width, height, z=0.5, x=0.5, kappa=0.5):
    return BeliefState.from_scalar_priors(GridDims(width, height), z, x, kappa)


# ---------------------------------------------------------------- cell joint

def test_cell_joint_deterministic_chain():
    cell = CellBelief(z=1.0, x=1.0, kappa=1.0)
    sensor = SensorParams(1.0, 0.0, 1.0, 0.0)
    for z, x, d, y in itertools.product((0, 1), repeat=4):
        expected = 1.0 if (z, x, d, y) == (1, 1, 1, 1) else 0.0
        assert cell_joint(z, x, d, y, cell, sensor) == expected


def test_cell_joint_full_symmetry_sixteenth():
    cell = CellBelief(0.5, 0.5, 0.5)
    sensor = SensorParams(0.5, 0.5, 0.5, 0.5)
    for assign in itertools.product((0, 1), repeat=4):
        assert cell_joint(*assign, cell, sensor) == pytest.approx(1.0 / 16.0)


def test_cell_joint_hand_product():
    cell = CellBelief(z=0.3, x=0.3 * 0.8 + 0.7 * 0.1, kappa=0.8)
    sensor = SensorParams(p_lethal=0.6, p_malfunction=0.05, target_tpr=0.95, target_fpr=0.05)
    assert cell_joint(1, 1, 0, 1, cell, sensor) == pytest.approx(0.3 * 0.8 * 0.4 * 0.95, abs=1e-12)


def test_cell_joint_sums_to_one():
    rng = np.random.default_rng(0)
    for _ in range(50):
        z, kappa, x_free = rng.random(3)
        cell = CellBelief(z, kappa * z + x_free * (1 - z), kappa)
        sensor = SensorParams(*(float(v) for v in rng.random(4)))
        total = sum(
            cell_joint(*assign, cell, sensor) for assign in itertools.product((0, 1), repeat=4)
        )
        assert total == pytest.approx(1.0, abs=1e-12)


# ------------------------------------------------------- derived conditional

def test_derived_independence():
    assert derived_x_given_not_z(CellBelief(0.5, 0.5, 0.5)) == pytest.approx(0.5)


def test_derived_total_probability_inversion():
    assert derived_x_given_not_z(CellBelief(0.5, 0.45, 0.8)) == pytest.approx(0.1, abs=1e-12)


def test_derived_clamps_to_zero():
    assert derived_x_given_not_z(CellBelief(0.2, 0.1, 1.0)) == 0.0


def test_derived_z_one_returns_x():
    assert derived_x_given_not_z(CellBelief(1.0, 0.37, 0.9)) == 0.37


def test_derived_always_in_unit_interval():
    rng = np.random.default_rng(8)
    for _ in range(500):
        value = derived_x_given_not_z(CellBelief(*(float(v) for v in rng.random(3))))
        assert 0.0 <= value <= 1.0


# --------------------------------------------------------- survived updates

def test_no_trigger_perfect_positive_reading_pins_target():
    belief = uniform_belief(1, 1)
    sensor = SensorParams(p_lethal=0.3, p_malfunction=0.0, target_tpr=1.0, target_fpr=0.0)
    new = update_no_trigger(belief, Path((Cell(0, 0),)), (1,), sensor)
    assert new.x_map[0, 0] == pytest.approx(1.0)


def test_no_trigger_survival_bayes_hand_value():
    # Survival only: y carries nothing when tpr == fpr, kappa independent.
    belief = uniform_belief(1, 1)
    sensor = SensorParams(p_lethal=0.9, p_malfunction=0.05, target_tpr=0.5, target_fpr=0.5)
    new = update_no_trigger(belief, Path((Cell(0, 0),)), (1,), sensor)
    assert new.z_map[0, 0] == pytest.approx(0.0952381, abs=1e-6)


def test_no_trigger_uninformative_observation_is_identity():
    belief = uniform_belief(2, 2, z=0.3, x=0.6, kappa=0.6)
    sensor = SensorParams(p_lethal=0.2, p_malfunction=0.2, target_tpr=0.5, target_fpr=0.5)
    path = Path((Cell(0, 0), Cell(1, 1)))
    new = update_no_trigger(belief, path, (1, 0), sensor)
    assert np.allclose(new.z_map, belief.z_map, atol=1e-12)
    assert np.allclose(new.x_map, belief.x_map, atol=1e-12)
    assert np.allclose(new.kappa_map, belief.kappa_map, atol=1e-12)


def test_no_trigger_changes_only_visited_cells():
    rng = np.random.default_rng(5)
    belief = coherent_belief(GridDims(4, 4), rng)
    sensor = SensorParams(0.4, 0.05, 0.9, 0.1)
    path = Path((Cell(0, 0), Cell(1, 1)))
    new = update_no_trigger(belief, path, (1, 0), sensor)
    mask = np.ones((4, 4), dtype=bool)
    for c in path.cells:
        mask[c.row, c.col] = False
    assert np.array_equal(new.z_map[mask], belief.z_map[mask])
    assert np.array_equal(new.x_map[mask], belief.x_map[mask])
    assert np.array_equal(new.kappa_map[mask], belief.kappa_map[mask])


def test_no_trigger_input_belief_untouched():
    belief = uniform_belief(2, 2)
    snapshot = belief.copy()
    sensor = SensorParams(0.4, 0.05, 0.9, 0.1)
    update_no_trigger(belief, Path((Cell(0, 0),)), (1,), sensor)
    assert np.array_equal(belief.z_map, snapshot.z_map)
    assert np.array_equal(belief.x_map, snapshot.x_map)


def test_no_trigger_reading_length_mismatch_rejected():
    belief = uniform_belief(2, 2)
    sensor = SensorParams(0.4, 0.05, 0.9, 0.1)
    with pytest.raises(ValueError):
        update_no_trigger(belief, Path((Cell(0, 0), Cell(1, 0))), (1,), sensor)


def test_no_trigger_repeated_cell_equals_joint_conditioning():
    # Sequential two-visit update must match conditioning on both visits at once.
    belief = uniform_belief(1, 1, z=0.4, x=0.5, kappa=0.7)
    sensor = SensorParams(0.5, 0.1, 0.9, 0.2)
    path = Path((Cell(0, 0), Cell(0, 0)))
    new = update_no_trigger(belief, path, (1, 0), sensor)

    z, x, kappa = belief.cell(Cell(0, 0))
    x_free = derived_x_given_not_z(CellBelief(z, x, kappa))
    joint = {
        (1, 1): z * kappa,
        (1, 0): z * (1 - kappa),
        (0, 1): (1 - z) * x_free,
        (0, 0): (1 - z) * (1 - x_free),
    }
    weights = {}
    for (zz, xx), prior in joint.items():
        surv = (1 - sensor.p_lethal if zz else 1 - sensor.p_malfunction) ** 2
        p_hit = sensor.target_tpr if xx else sensor.target_fpr
        weights[(zz, xx)] = prior * surv * p_hit * (1 - p_hit)
    total = sum(weights.values())
    z_ref = (weights[(1, 1)] + weights[(1, 0)]) / total
    x_ref = (weights[(1, 1)] + weights[(0, 1)]) / total
    kappa_ref = weights[(1, 1)] / (weights[(1, 1)] + weights[(1, 0)])
    assert new.z_map[0, 0] == pytest.approx(z_ref, abs=1e-12)
    assert new.x_map[0, 0] == pytest.approx(x_ref, abs=1e-12)
    assert new.kappa_map[0, 0] == pytest.approx(kappa_ref, abs=1e-12)


# --------------------------------------------------------- triggered updates

def test_trigger_single_cell_bayes_hand_value():
    belief = uniform_belief(1, 1)
    sensor = SensorParams(0.9, 0.05, 0.95, 0.05)
    path = Path((Cell(0, 0),))
    new = update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor))
    assert new.z_map[0, 0] == pytest.approx(0.947368, abs=1e-6)


def test_trigger_uninformative_when_rates_match():
    belief = uniform_belief(1, 1, z=0.31, x=0.5, kappa=0.5)
    sensor = SensorParams(0.4, 0.4, 0.9, 0.1)
    path = Path((Cell(0, 0),))
    new = update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor))
    assert new.z_map[0, 0] == pytest.approx(0.31, abs=1e-12)


def test_trigger_two_cell_path_matches_enumeration():
    belief = uniform_belief(2, 1)
    sensor = SensorParams(0.9, 0.05, 0.95, 0.05)
    path = Path((Cell(0, 0), Cell(1, 0)))
    new = update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor))
    reference = enumerate_posteriors_trigger(belief, path, sensor)
    for cell in path.cells:
        z_ref, x_ref, kappa_ref = reference[cell]
        got = new.cell(cell)
        assert got.z == pytest.approx(z_ref, abs=1e-9)
        assert got.x == pytest.approx(x_ref, abs=1e-9)
        assert got.kappa == pytest.approx(kappa_ref, abs=1e-9)
    # frozen value from the enumeration: 0.9475 / (0.9475 + 0.50125)
    assert new.z_map[0, 0] == pytest.approx(0.6540120793787748, abs=1e-12)


def test_trigger_leaves_kappa_unchanged():
    rng = np.random.default_rng(17)
    belief = coherent_belief(GridDims(3, 3), rng)
    sensor = SensorParams(0.6, 0.1, 0.9, 0.1)
    path = Path((Cell(0, 0), Cell(1, 1), Cell(2, 2), Cell(1, 1)))
    new = update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor))
    assert np.array_equal(new.kappa_map, belief.kappa_map)


def test_trigger_changes_only_visited_cells():
    rng = np.random.default_rng(23)
    belief = coherent_belief(GridDims(4, 4), rng)
    sensor = SensorParams(0.6, 0.1, 0.9, 0.1)
    path = Path((Cell(2, 2), Cell(3, 3)))
    new = update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor))
    mask = np.ones((4, 4), dtype=bool)
    for c in path.cells:
        mask[c.row, c.col] = False
    assert np.array_equal(new.z_map[mask], belief.z_map[mask])
    assert np.array_equal(new.x_map[mask], belief.x_map[mask])


def test_trigger_table_path_mismatch_rejected():
    belief = uniform_belief(2, 1)
    sensor = SensorParams(0.9, 0.05, 0.95, 0.05)
    table = enumerate_omega(belief, Path((Cell(0, 0),)), sensor)
    with pytest.raises(ValueError):
        update_trigger(belief, Path((Cell(0, 0), Cell(1, 0))), sensor, table)


def test_trigger_impossible_observation_keeps_priors():
    belief = uniform_belief(1, 1, z=0.4)
    sensor = SensorParams(0.0, 0.0, 0.9, 0.1)
    path = Path((Cell(0, 0),))
    new = update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor))
    assert new.z_map[0, 0] == pytest.approx(0.4)


def test_posteriors_stay_normalized_on_random_instances():
    rng = np.random.default_rng(29)
    for _ in range(60):
        dims = GridDims(int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        belief = BeliefState(
            dims,
            rng.random((dims.height, dims.width)),
            rng.random((dims.height, dims.width)),
            rng.random((dims.height, dims.width)),
        )
        sensor = SensorParams(*(float(v) for v in rng.random(4)))
        start = Cell(int(rng.integers(dims.width)), int(rng.integers(dims.height)))
        cells = [start]
        for _ in range(int(rng.integers(0, 4))):
            prev = cells[-1]
            nxt = Cell(
                int(np.clip(prev.col + rng.integers(-1, 2), 0, dims.width - 1)),
                int(np.clip(prev.row + rng.integers(-1, 2), 0, dims.height - 1)),
            )
            cells.append(nxt)
        path = Path(tuple(cells))
        readings = tuple(int(v) for v in rng.integers(0, 2, size=len(cells)))
        for updated in (
            update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor)),
            update_no_trigger(belief, path, readings, sensor),
        ):
            for arr in (updated.z_map, updated.x_map, updated.kappa_map):
                assert np.all(arr >= 0.0) and np.all(arr <= 1.0)


def test_kappa_edge_removal_reduction():
    # With kappa == x the joint updates must equal inference that never ties
    # targets to hazards: survival Bayes on z, reading Bayes on x.
    rng = np.random.default_rng(31)
    z0, x0 = 0.42, 0.63
    belief = uniform_belief(1, 1, z=z0, x=x0, kappa=x0)
    sensor = SensorParams(0.7, 0.1, 0.9, 0.2)
    path = Path((Cell(0, 0),))

    new = update_no_trigger(belief, path, (1,), sensor)
    z_ref = z0 * 0.3 / (z0 * 0.3 + (1 - z0) * 0.9)
    x_ref = x0 * 0.9 / (x0 * 0.9 + (1 - x0) * 0.2)
    assert new.z_map[0, 0] == pytest.approx(z_ref, abs=1e-12)
    assert new.x_map[0, 0] == pytest.approx(x_ref, abs=1e-12)

    new = update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor))
    z_ref = z0 * 0.7 / (z0 * 0.7 + (1 - z0) * 0.1)
    assert new.z_map[0, 0] == pytest.approx(z_ref, abs=1e-12)
    assert new.x_map[0, 0] == pytest.approx(x0, abs=1e-12)


def test_independence_is_preserved_by_both_updates():
    rng = np.random.default_rng(37)
    dims = GridDims(3, 2)
    z = rng.random((2, 3))
    x = rng.random((2, 3))
    belief = BeliefState(dims, z, x.copy(), x.copy())
    sensor = SensorParams(0.5, 0.06, 0.9, 0.15)
    path = Path((Cell(0, 0), Cell(1, 1), Cell(2, 1), Cell(1, 1)))

    survived = update_no_trigger(belief, path, (1, 0, 1, 1), sensor)
    assert np.allclose(survived.kappa_map, survived.x_map, atol=1e-12)
    tripped = update_trigger(belief, path, sensor, enumerate_omega(belief, path, sensor))
    assert np.allclose(tripped.kappa_map, tripped.x_map, atol=1e-12)
    assert np.allclose(tripped.x_map, belief.x_map, atol=1e-12)


def test_belief_json_roundtrip():
    rng = np.random.default_rng(41)
    belief = coherent_belief(GridDims(3, 2), rng)
    blob = json.dumps(belief.to_json_dict())
    back = BeliefState.from_json_dict(json.loads(blob))
    assert back.dims == belief.dims
    assert np.array_equal(back.z_map, belief.z_map)
    assert np.array_equal(back.x_map, belief.x_map)
    assert np.array_equal(back.kappa_map, belief.kappa_map)


def test_belief_state_validation():
    with pytest.raises(ValueError):
        BeliefState(GridDims(2, 2), np.full((2, 2), 1.5), np.full((2, 2), 0.5), np.full((2, 2), 0.5))
    with pytest.raises(ValueError):
        BeliefState(GridDims(2, 2), np.full((3, 2), 0.5), np.full((2, 2), 0.5), np.full((2, 2), 0.5))
