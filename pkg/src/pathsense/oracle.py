"""Exhaustive-enumeration reference posteriors for small instances.

This module recomputes what the factored update rules are supposed to
produce, by brute force: it enumerates every joint hazard/target assignment
over the distinct visited cells and, for the trigger case, every per-visit
destruction vector, then conditions directly on the observed outcome. Cost is
exponential in path length and distinct cells, so instances are capped, but
the computation shares nothing with the incremental update code paths beyond
the sensor model definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .belief import BeliefState, update_no_trigger, update_trigger
from .grid import Cell, GridDims, Path
from .likelihood import enumerate_omega
from .planner import random_feasible_path
from .world import SensorParams

TOLERANCE = 1e-9


def _prior_joint(belief: BeliefState, cell: Cell) -> dict[tuple[int, int], float]:
    """Prior P(z, x) of one cell from the tracked triple.

    The no-hazard target rate is recovered by total probability and clamped,
    the same convention the tracked maps use, but written independently here.
    """
    z, x, kappa = belief.cell(cell)
    if z >= 1.0:
        x_free = x
    else:
        x_free = min(1.0, max(0.0, (x - kappa * z) / (1.0 - z)))
    return {
        (1, 1): z * kappa,
        (1, 0): z * (1.0 - kappa),
        (0, 1): (1.0 - z) * x_free,
        (0, 0): (1.0 - z) * (1.0 - x_free),
    }


def _posteriors_by_enumeration(
    belief: BeliefState,
    path: Path,
    sensor: SensorParams,
    likelihood_of_assignment,
) -> dict[Cell, tuple[float, float, float]]:
    """Marginalize an arbitrary per-assignment likelihood over the visited cells."""
    cells = path.distinct_cells()
    priors = [_prior_joint(belief, c) for c in cells]
    total = 0.0
    mass_z1 = np.zeros(len(cells))
    mass_x1 = np.zeros(len(cells))
    mass_z1x1 = np.zeros(len(cells))
    for assignment in product((0, 1), repeat=2 * len(cells)):
        zs = assignment[::2]
        xs = assignment[1::2]
        prior = 1.0
        for i in range(len(cells)):
            prior *= priors[i][(zs[i], xs[i])]
        if prior == 0.0:
            continue
        weight = prior * likelihood_of_assignment(dict(zip(cells, zs)), dict(zip(cells, xs)))
        total += weight
        for i in range(len(cells)):
            if zs[i]:
                mass_z1[i] += weight
                if xs[i]:
                    mass_z1x1[i] += weight
            if xs[i]:
                mass_x1[i] += weight
    out: dict[Cell, tuple[float, float, float]] = {}
    for i, c in enumerate(cells):
        z_prior, x_prior, kappa_prior = belief.cell(c)
        z_post = mass_z1[i] / total if total > 0.0 else z_prior
        x_post = mass_x1[i] / total if total > 0.0 else x_prior
        kappa_post = mass_z1x1[i] / mass_z1[i] if mass_z1[i] > 0.0 else kappa_prior
        out[c] = (z_post, x_post, kappa_post)
    return out


def enumerate_posteriors_trigger(
    belief: BeliefState, path: Path, sensor: SensorParams
) -> dict[Cell, tuple[float, float, float]]:
    """Reference posteriors given only that the path sensor tripped.

    For each hazard assignment the trigger likelihood is summed explicitly
    over every destruction vector with at least one destruction, each visit
    being an independent trial given its cell's hazard state.
    """

    def likelihood(z_of: dict[Cell, int], x_of: dict[Cell, int]) -> float:
        like = 0.0
        for deltas in product((0, 1), repeat=len(path.cells)):
            if not any(deltas):
                continue
            term = 1.0
            for k, cell in enumerate(path.cells):
                p_destroy = sensor.p_lethal if z_of[cell] else sensor.p_malfunction
                term *= p_destroy if deltas[k] else 1.0 - p_destroy
            like += term
        return like

    return _posteriors_by_enumeration(belief, path, sensor, likelihood)


def enumerate_posteriors_no_trigger(
    belief: BeliefState, path: Path, readings, sensor: SensorParams
) -> dict[Cell, tuple[float, float, float]]:
    """Reference posteriors given full survival plus the per-visit readings."""

    def likelihood(z_of: dict[Cell, int], x_of: dict[Cell, int]) -> float:
        term = 1.0
        for cell, y in zip(path.cells, readings):
            p_survive = 1.0 - (sensor.p_lethal if z_of[cell] else sensor.p_malfunction)
            p_hit = sensor.target_tpr if x_of[cell] else sensor.target_fpr
            term *= p_survive * (p_hit if y else 1.0 - p_hit)
        return term

    return _posteriors_by_enumeration(belief, path, sensor, likelihood)


@dataclass(frozen=True)
class OracleReport:
    instances: int
    max_abs_error: float

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= TOLERANCE


def _random_instance(rng: np.random.Generator, dims_cap: tuple[int, int], max_path_len: int):
    dims = GridDims(int(rng.integers(1, dims_cap[0] + 1)), int(rng.integers(1, dims_cap[1] + 1)))
    base = Cell(int(rng.integers(dims.width)), int(rng.integers(dims.height)))
    length = int(rng.integers(1, max_path_len + 1))
    path = random_feasible_path(dims, base, length, rng)
    shape = (dims.height, dims.width)
    belief = BeliefState(dims, rng.random(shape), rng.random(shape), rng.random(shape))
    sensor = SensorParams(*(float(v) for v in rng.random(4)))
    return belief, path, sensor


def run_oracle_check(
    num_instances: int,
    seed: int,
    dims_cap: tuple[int, int] = (3, 3),
    max_path_len: int = 4,
    inject_error: float = 0.0,
) -> OracleReport:
    """Compare the update rules against enumeration on random instances.

    Each instance draws a grid, an anchored random path, belief maps, and
    sensor rates, then checks both the trigger and the survival update.
    ``inject_error`` perturbs the production posteriors before comparison and
    exists purely as a negative-control hook.
    """
    if dims_cap[0] > 3 or dims_cap[1] > 3:
        raise ValueError(f"oracle instances are capped at 3x3 grids, got {dims_cap}")
    if max_path_len > 4:
        raise ValueError(f"oracle paths are capped at 4 positions, got {max_path_len}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_instances):
        belief, path, sensor = _random_instance(rng, dims_cap, max_path_len)

        table = enumerate_omega(belief, path, sensor)
        updated = update_trigger(belief, path, sensor, table)
        reference = enumerate_posteriors_trigger(belief, path, sensor)
        worst = max(worst, _max_deviation(updated, reference, inject_error))

        readings = tuple(int(v) for v in rng.integers(0, 2, size=len(path.cells)))
        updated = update_no_trigger(belief, path, readings, sensor)
        reference = enumerate_posteriors_no_trigger(belief, path, readings, sensor)
        worst = max(worst, _max_deviation(updated, reference, inject_error))
    return OracleReport(instances=num_instances, max_abs_error=worst)


def _max_deviation(
    updated: BeliefState,
    reference: dict[Cell, tuple[float, float, float]],
    inject_error: float,
) -> float:
    worst = 0.0
    for cell, (z_ref, x_ref, kappa_ref) in reference.items():
        got = updated.cell(cell)
        worst = max(
            worst,
            abs(got.z + inject_error - z_ref),
            abs(got.x - x_ref),
            abs(got.kappa - kappa_ref),
        )
    return worst
