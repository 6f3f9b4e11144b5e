"""Per-cell belief maps and the posterior update rules.

For every cell the belief tracks three probabilities: the hazard marginal
P(Z=1), the target marginal P(X=1), and the hazard-target co-occurrence
probability kappa = P(X=1 | Z=1). Together with the derived complement
P(X=1 | Z=0) these determine the full per-cell joint over (Z, X).

Two update paths condition the maps on one traversal's evidence:

* no trigger: the agent survived every position and reported one target
  reading per visit. Survival and reading are conditioned jointly, cell by
  cell; repeated visits of a cell are applied sequentially, each visit
  starting from the posterior left by the previous one.

* trigger: the path sensor tripped and nothing else is known. The destruction
  site is unknown, so the update marginalizes over the single-destruction
  hypothesis space: under "destroyed at position j" the agent survived every
  earlier position and never reached the later ones, which therefore
  contribute no evidence. Summed over hypotheses this telescopes into the
  exact trigger likelihood given one cell's hazard state,

      P(trigger | Z_c = z) = 1 - s(z)^n_c * prod_{c' != c} E[s(Z_c')^n_c'],

  where s(z) is the per-visit survival probability and n_c the visit count of
  cell c. Visit instances of the same physical cell share that cell's hazard
  variable, which is what the expectation of the survival *power* captures.
  The trigger carries no target information beyond the hazard coupling, so
  kappa is unchanged and the target marginal moves only through the hazard
  posterior.

Updates are pure: they return a new BeliefState and never modify the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np

from .grid import Cell, GridDims, Path
from .world import SensorParams


class CellBelief(NamedTuple):
    """The tracked probability triple of one cell."""

    z: float
    x: float
    kappa: float


def derived_x_given_not_z(cell: CellBelief) -> float:
    """P(target | no hazard) implied by the tracked triple, clamped to [0, 1].

    Total probability gives (x - kappa*z) / (1 - z); the algebraically equal
    form below evaluates to exactly x when kappa == x, which keeps a belief
    with an independence prior exactly independent. Defined as x when z = 1.
    """
    if cell.z >= 1.0:
        return cell.x
    value = cell.x + cell.z * (cell.x - cell.kappa) / (1.0 - cell.z)
    return min(1.0, max(0.0, value))


def cell_joint(z: int, x: int, delta: int, y: int, cell: CellBelief, sensor: SensorParams) -> float:
    """Joint probability P(z)P(x|z)P(delta|z)P(y|x) of one cell's variables."""
    p_z = cell.z if z else 1.0 - cell.z
    if z:
        p_x = cell.kappa if x else 1.0 - cell.kappa
        p_d = sensor.p_lethal if delta else 1.0 - sensor.p_lethal
    else:
        x_free = derived_x_given_not_z(cell)
        p_x = x_free if x else 1.0 - x_free
        p_d = sensor.p_malfunction if delta else 1.0 - sensor.p_malfunction
    if x:
        p_y = sensor.target_tpr if y else 1.0 - sensor.target_tpr
    else:
        p_y = sensor.target_fpr if y else 1.0 - sensor.target_fpr
    return p_z * p_x * p_d * p_y


@dataclass
class BeliefState:
    """Value-type container of the three per-cell probability maps."""

    dims: GridDims
    z_map: np.ndarray
    x_map: np.ndarray
    kappa_map: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.dims.height, self.dims.width)
        for name in ("z_map", "x_map", "kappa_map"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            if np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")
            setattr(self, name, arr)

    @classmethod
    def from_scalar_priors(
        cls, dims: GridDims, prior_z: float, prior_x: float, prior_kappa: float
    ) -> "BeliefState":
        shape = (dims.height, dims.width)
        return cls(
            dims,
            np.full(shape, float(prior_z)),
            np.full(shape, float(prior_x)),
            np.full(shape, float(prior_kappa)),
        )

    def cell(self, c: Cell) -> CellBelief:
        return CellBelief(
            float(self.z_map[c.row, c.col]),
            float(self.x_map[c.row, c.col]),
            float(self.kappa_map[c.row, c.col]),
        )

    def copy(self) -> "BeliefState":
        return BeliefState(self.dims, self.z_map.copy(), self.x_map.copy(), self.kappa_map.copy())

    def project_independent(self) -> "BeliefState":
        """Copy with the co-occurrence map pinned to the target map (kappa = x).

        This forgets any hazard-target coupling: with kappa == x the derived
        P(x | no hazard) equals x as well, so downstream inference treats the
        two variables as independent.
        """
        return BeliefState(self.dims, self.z_map.copy(), self.x_map.copy(), self.x_map.copy())

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "dims": {"width": self.dims.width, "height": self.dims.height},
            "z_map": [float(v) for v in self.z_map.reshape(-1)],
            "x_map": [float(v) for v in self.x_map.reshape(-1)],
            "kappa_map": [float(v) for v in self.kappa_map.reshape(-1)],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "BeliefState":
        dims = GridDims(int(data["dims"]["width"]), int(data["dims"]["height"]))
        shape = (dims.height, dims.width)
        return cls(
            dims,
            np.asarray(data["z_map"], dtype=float).reshape(shape),
            np.asarray(data["x_map"], dtype=float).reshape(shape),
            np.asarray(data["kappa_map"], dtype=float).reshape(shape),
        )


def _clamp01(value: float) -> float:
    return min(1.0, max(0.0, value))


def update_no_trigger(
    belief: BeliefState, path: Path, readings: tuple[int, ...] | list[int], sensor: SensorParams
) -> BeliefState:
    """Condition the maps on a fully survived traversal with its readings.

    Each visited position contributes joint evidence (survived this visit,
    read y here). All three posteriors of a visit are computed from the same
    pre-visit triple; repeated cells are updated visit by visit.
    """
    path.validate(belief.dims)
    if len(readings) != len(path.cells):
        raise ValueError(
            f"got {len(readings)} readings for a path of length {len(path.cells)}"
        )
    new = belief.copy()
    s_haz = 1.0 - sensor.p_lethal
    s_free = 1.0 - sensor.p_malfunction
    for cell, y in zip(path.cells, readings):
        z, x, kappa = new.cell(cell)
        x_free = derived_x_given_not_z(CellBelief(z, x, kappa))
        p_y_x1 = sensor.target_tpr if y else 1.0 - sensor.target_tpr
        p_y_x0 = sensor.target_fpr if y else 1.0 - sensor.target_fpr

        # Hazard: survival plus the reading, with the target summed out.
        n_haz = z * s_haz * (kappa * p_y_x1 + (1.0 - kappa) * p_y_x0)
        n_free = (1.0 - z) * s_free * (x_free * p_y_x1 + (1.0 - x_free) * p_y_x0)
        if n_haz + n_free > 0.0:
            new.z_map[cell.row, cell.col] = _clamp01(n_haz / (n_haz + n_free))

        # Target: the reading plus survival, with the hazard summed out.
        m_tgt = p_y_x1 * (kappa * s_haz * z + x_free * s_free * (1.0 - z))
        m_not = p_y_x0 * ((1.0 - kappa) * s_haz * z + (1.0 - x_free) * s_free * (1.0 - z))
        if m_tgt + m_not > 0.0:
            new.x_map[cell.row, cell.col] = _clamp01(m_tgt / (m_tgt + m_not))

        # Co-occurrence: Bayes on the reading within the hazard slice; the
        # shared survival and hazard-prior factors cancel in the ratio.
        k_num = kappa * p_y_x1
        k_den = k_num + (1.0 - kappa) * p_y_x0
        if k_den > 0.0:
            new.kappa_map[cell.row, cell.col] = _clamp01(k_num / k_den)
    return new


def _leave_one_out_product(values: np.ndarray) -> np.ndarray:
    """out[i] = product of values[j] for j != i, stable when entries are 0."""
    n = values.shape[0]
    if n == 1:
        return np.ones(1)
    forward = np.cumprod(values)
    backward = np.cumprod(values[::-1])
    prefix = np.concatenate(([1.0], forward[:-1]))
    suffix = np.concatenate((backward[-2::-1], [1.0]))
    return prefix * suffix


def trigger_cell_posteriors(
    z: np.ndarray,
    x: np.ndarray,
    kappa: np.ndarray,
    x_free: np.ndarray,
    counts: np.ndarray,
    sensor: SensorParams,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Exact hazard/target posteriors given a tripped path sensor.

    Inputs are aligned arrays over the distinct visited cells; counts[i] is
    how many times cell i is visited. Returns (z_new, x_new, p_trigger) where
    p_trigger is the exact prior probability of the trigger. Cells whose
    evidence is impossible under the belief (zero total likelihood) are left
    at their priors.
    """
    s_haz = 1.0 - sensor.p_lethal
    s_free = 1.0 - sensor.p_malfunction
    surv_haz = s_haz ** counts
    surv_free = s_free ** counts
    surv_marg = z * surv_haz + (1.0 - z) * surv_free
    others = _leave_one_out_product(surv_marg)
    like_haz = 1.0 - surv_haz * others
    like_free = 1.0 - surv_free * others
    den = z * like_haz + (1.0 - z) * like_free
    ok = den > 0.0
    safe_den = np.where(ok, den, 1.0)
    z_new = np.where(ok, z * like_haz / safe_den, z)
    x_new = np.where(
        ok,
        (kappa * z * like_haz + x_free * (1.0 - z) * like_free) / safe_den,
        x,
    )
    p_trigger = 1.0 - float(np.prod(surv_marg))
    return np.clip(z_new, 0.0, 1.0), np.clip(x_new, 0.0, 1.0), p_trigger


def _cell_arrays(belief: BeliefState, cells: list[Cell]) -> tuple[np.ndarray, ...]:
    z = np.array([belief.z_map[c.row, c.col] for c in cells])
    x = np.array([belief.x_map[c.row, c.col] for c in cells])
    kappa = np.array([belief.kappa_map[c.row, c.col] for c in cells])
    x_free = np.array(
        [derived_x_given_not_z(CellBelief(z[i], x[i], kappa[i])) for i in range(len(cells))]
    )
    return z, x, kappa, x_free


def update_trigger(belief: BeliefState, path: Path, sensor: SensorParams, likelihood_table) -> BeliefState:
    """Condition the maps on a tripped path sensor.

    ``likelihood_table`` must be the destruction-hypothesis table built for
    this path (see likelihood.enumerate_omega); it fixes the hypothesis space.
    All posteriors are computed from the pre-update maps. The co-occurrence
    map is unchanged: the trigger observes only destruction, which is
    conditionally independent of the target given the hazard.
    """
    path.validate(belief.dims)
    if likelihood_table.path != path:
        raise ValueError("likelihood table was built for a different path")
    cells = path.distinct_cells()
    counts_map = path.visit_counts()
    counts = np.array([counts_map[c] for c in cells], dtype=float)
    z, x, kappa, x_free = _cell_arrays(belief, cells)
    z_new, x_new, _ = trigger_cell_posteriors(z, x, kappa, x_free, counts, sensor)
    new = belief.copy()
    for i, c in enumerate(cells):
        new.z_map[c.row, c.col] = z_new[i]
        new.x_map[c.row, c.col] = x_new[i]
    return new
