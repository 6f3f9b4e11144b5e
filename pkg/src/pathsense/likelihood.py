"""Destruction-hypothesis enumeration for a tripped path sensor.

A trigger means the agent was destroyed at exactly one path position. The
hypothesis space therefore has one entry per position j, weighted by the
probability of surviving every earlier position and being destroyed at j,
with each per-visit destruction probability marginalized over the current
hazard belief. Vectors with more than one destruction are physically
impossible for a single agent and are never materialized; the all-survival
vector has trigger likelihood zero and is omitted as well.
"""

from __future__ import annotations

from dataclasses import dataclass

from .belief import BeliefState, CellBelief
from .grid import Path
from .world import SensorParams


def marginal_destruction_prob(cell: CellBelief, sensor: SensorParams) -> float:
    """P(destroyed on one visit), marginalized over the cell's hazard belief."""
    return cell.z * sensor.p_lethal + (1.0 - cell.z) * sensor.p_malfunction


@dataclass(frozen=True)
class OmegaLikelihoods:
    """One (destruction position, weight) pair per path position.

    Weights are likelihoods, not a distribution; their sum equals the total
    marginal trigger probability 1 - prod_i (1 - P(destroyed at visit i)).
    """

    path: Path
    hypotheses: tuple[tuple[int, float], ...]

    @property
    def total_trigger_probability(self) -> float:
        return float(sum(w for _, w in self.hypotheses))


def enumerate_omega(belief: BeliefState, path: Path, sensor: SensorParams) -> OmegaLikelihoods:
    """Build the per-position destruction hypotheses for a path.

    weight(j) = prod_{i<j} (1 - P(destroyed at i)) * P(destroyed at j),
    evaluated against the current belief. Repeated cells contribute one
    hypothesis per visit instance; mapping instances back to physical cells
    is the belief module's concern.
    """
    if not path.cells:
        raise ValueError("cannot enumerate hypotheses for an empty path")
    path.validate(belief.dims)
    hypotheses = []
    survive_prefix = 1.0
    for j, cell in enumerate(path.cells):
        p_destroy = marginal_destruction_prob(belief.cell(cell), sensor)
        hypotheses.append((j, survive_prefix * p_destroy))
        survive_prefix *= 1.0 - p_destroy
    return OmegaLikelihoods(path=path, hypotheses=tuple(hypotheses))
