"""Ground-truth generation and stochastic traversal of a path.

The world generator draws per-cell hazard and target occupancy with a
configurable hazard-target co-occurrence rate. The traversal simulator walks a
path position by position: each visit is an independent destruction trial
(lethality on hazard cells, malfunction otherwise), and a surviving agent
reports one noisy target reading per visited position.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from .grid import Cell, GridDims, Path


def _check_prob(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class WorldGenParams:
    """Parameters for drawing a ground-truth world.

    ``kappa_true`` is P(target | hazard); ``p_target_free`` is the companion
    conditional P(target | no hazard), needed to complete the generator.
    """

    p_hazard: float
    kappa_true: float
    p_target_free: float
    seed: int = 0

    def __post_init__(self) -> None:
        _check_prob(self.p_hazard, "p_hazard")
        _check_prob(self.kappa_true, "kappa_true")
        _check_prob(self.p_target_free, "p_target_free")


@dataclass(frozen=True)
class SensorParams:
    """Conditional probabilities of the destruction and target sensors.

    p_lethal       P(destroyed | hazard) per cell visit (the lethality knob)
    p_malfunction  P(destroyed | no hazard) per cell visit
    target_tpr     P(reading = 1 | target)
    target_fpr     P(reading = 1 | no target)
    """

    p_lethal: float
    p_malfunction: float
    target_tpr: float
    target_fpr: float

    def __post_init__(self) -> None:
        _check_prob(self.p_lethal, "p_lethal")
        _check_prob(self.p_malfunction, "p_malfunction")
        _check_prob(self.target_tpr, "target_tpr")
        _check_prob(self.target_fpr, "target_fpr")


@dataclass(frozen=True)
class GroundTruth:
    dims: GridDims
    hazard: np.ndarray  # bool, shape (height, width)
    target: np.ndarray  # bool, shape (height, width)
    gen_params: WorldGenParams

    def has_hazard(self, cell: Cell) -> bool:
        return bool(self.hazard[cell.row, cell.col])

    def has_target(self, cell: Cell) -> bool:
        return bool(self.target[cell.row, cell.col])

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "dims": {"width": self.dims.width, "height": self.dims.height},
            "hazard": [bool(v) for v in self.hazard.reshape(-1)],
            "target": [bool(v) for v in self.target.reshape(-1)],
            "gen_params": asdict(self.gen_params),
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "GroundTruth":
        dims = GridDims(int(data["dims"]["width"]), int(data["dims"]["height"]))
        shape = (dims.height, dims.width)
        hazard = np.asarray(data["hazard"], dtype=bool).reshape(shape)
        target = np.asarray(data["target"], dtype=bool).reshape(shape)
        return cls(dims, hazard, target, WorldGenParams(**data["gen_params"]))


@dataclass(frozen=True)
class TraversalOutcome:
    """Observable result of one traversal.

    ``readings`` is present exactly when the path sensor did not trip.
    ``destruction_index`` is simulator-internal bookkeeping (where the agent
    actually died); belief and planner code must never read it.
    """

    triggered: bool
    readings: tuple[int, ...] | None
    destruction_index: int | None

    def __post_init__(self) -> None:
        if self.triggered and self.readings is not None:
            raise ValueError("readings must be absent when the path sensor tripped")
        if not self.triggered and self.readings is None:
            raise ValueError("readings must be present when the agent survived")


def generate_world(dims: GridDims, gen: WorldGenParams) -> GroundTruth:
    """Draw a ground-truth world; deterministic for a given seed.

    Hazards are independent Bernoulli(p_hazard) per cell; targets are Bernoulli
    with rate kappa_true on hazard cells and p_target_free elsewhere.
    """
    rng = np.random.default_rng(gen.seed)
    shape = (dims.height, dims.width)
    u_hazard = rng.random(shape)
    u_target = rng.random(shape)
    hazard = u_hazard < gen.p_hazard
    target = u_target < np.where(hazard, gen.kappa_true, gen.p_target_free)
    return GroundTruth(dims, hazard, target, gen)


def simulate_traversal(
    world: GroundTruth,
    path: Path,
    sensor: SensorParams,
    rng_seed: int | np.random.Generator,
) -> TraversalOutcome:
    """Walk a path through the world and report the observable outcome.

    Each position is a fresh destruction trial, repeated cells included. The
    first destruction trips the path sensor and ends the walk; a full survival
    yields one target reading per visited position.
    """
    path.validate(world.dims)
    rng = np.random.default_rng(rng_seed)
    for k, cell in enumerate(path.cells):
        p_destroy = sensor.p_lethal if world.has_hazard(cell) else sensor.p_malfunction
        if rng.random() < p_destroy:
            return TraversalOutcome(triggered=True, readings=None, destruction_index=k)
    readings = []
    for cell in path.cells:
        p_hit = sensor.target_tpr if world.has_target(cell) else sensor.target_fpr
        readings.append(1 if rng.random() < p_hit else 0)
    return TraversalOutcome(triggered=False, readings=tuple(readings), destruction_index=None)
