"""Shannon entropy of belief maps and per-deployment trace bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .belief import BeliefState


def bernoulli_entropy(p) -> np.ndarray:
    """Elementwise entropy -p*ln(p) - (1-p)*ln(1-p) in nats, with 0*ln(0) = 0."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    q = 1.0 - p
    return -(p * np.log(np.where(p > 0.0, p, 1.0)) + q * np.log(np.where(q > 0.0, q, 1.0)))


def map_entropy(prob_map) -> float:
    """Total entropy of a probability map, treating cells as independent."""
    return float(np.sum(bernoulli_entropy(prob_map)))


@dataclass(frozen=True)
class EntropyRow:
    deployment: int
    h_z: float
    h_x: float
    h_total: float


@dataclass
class EntropyTrace:
    """Entropy of the belief maps after each deployment of one trial.

    Row 0 holds the prior belief's entropy; row m the state after the m-th
    deployment. h_total is h_z + h_x; the co-occurrence map is tracked by the
    belief but excluded here so traces are comparable across planners that
    lack such a map (map_entropy(belief.kappa_map) remains available).
    """

    scenario: str
    planner: str
    seed: int
    rows: list[EntropyRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


def record_deployment(trace: EntropyTrace, m: int, belief: BeliefState) -> EntropyTrace:
    """Append the entropy of ``belief`` as row ``m``; rows must stay in order."""
    if m != len(trace.rows):
        raise ValueError(f"expected deployment index {len(trace.rows)}, got {m}")
    h_z = map_entropy(belief.z_map)
    h_x = map_entropy(belief.x_map)
    trace.rows.append(EntropyRow(deployment=m, h_z=h_z, h_x=h_x, h_total=h_z + h_x))
    return trace
