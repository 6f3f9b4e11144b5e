"""Information-gain path planning over the belief maps.

plan_path grows a base-anchored walk one step at a time. Every feasible next
step (the in-bounds 8-neighbors, then staying put) is scored by the expected
entropy drop of the hazard and target maps for the walk built so far plus
that step, and the argmax is appended; ties go to the earliest candidate in
row-major order with "stay" last. A step is feasible only if the base is
still reachable within the remaining budget, so every planned path returns
home.

The expected gain of a visit sequence mixes two outcome branches: the path
sensor trips (posterior via the exact trigger update) or the agent survives
and reads one target value per visit. Given full survival the evidence
factorizes per distinct cell, and a cell's reading sequence matters only
through its hit count, so the survive branch is enumerated exactly for any
path length at O(visits) cost per cell.

Step-selection modes:

* kappa_bnitp: scores and updates use the full tracked belief, including the
  hazard-target co-occurrence map.
* relaxed_bnitp: identical machinery on an independence-projected view of the
  belief (co-occurrence map pinned to the target map), which removes the
  hazard-target coupling from inference.
* relaxed_itp: the survive branch matches relaxed_bnitp, but the trigger
  branch keeps one hypothetical hazard map per possible destruction position
  and blends them by their relative marginal probability, instead of the
  joint-normalized update.
* random: uniformly random feasible steps (requires an rng).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .belief import (
    BeliefState,
    CellBelief,
    derived_x_given_not_z,
    trigger_cell_posteriors,
)
from .grid import Cell, GridDims, Path, chebyshev, step_candidates
from .metrics import bernoulli_entropy
from .world import SensorParams

KAPPA_BNITP = "kappa_bnitp"
RELAXED_BNITP = "relaxed_bnitp"
RELAXED_ITP = "relaxed_itp"
RANDOM = "random"
ALGORITHMS = (KAPPA_BNITP, RELAXED_BNITP, RELAXED_ITP, RANDOM)


@dataclass(frozen=True)
class PlannerConfig:
    budget_l: int
    base: Cell
    algorithm: str = KAPPA_BNITP

    def __post_init__(self) -> None:
        if self.budget_l < 2:
            raise ValueError(f"budget_l must be at least 2, got {self.budget_l}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")


@lru_cache(maxsize=None)
def _comb_table(n_max: int) -> np.ndarray:
    """Pascal's triangle as floats: table[n, m] = C(n, m)."""
    table = np.zeros((n_max + 1, n_max + 1))
    table[:, 0] = 1.0
    for n in range(1, n_max + 1):
        table[n, 1 : n + 1] = table[n - 1, :n] + table[n - 1, 1 : n + 1]
    return table


def _survive_expected_drop(
    z: np.ndarray,
    x: np.ndarray,
    kappa: np.ndarray,
    x_free: np.ndarray,
    counts: np.ndarray,
    sensor: SensorParams,
) -> float:
    """Expected entropy drop of the survive branch, exact per distinct cell.

    Conditioned on full survival the cells decouple, and within a cell the
    reading sequence enters only through the number of positive readings m,
    so the outcome space per cell is m = 0..n with binomial multiplicity.
    """
    s_haz = 1.0 - sensor.p_lethal
    s_free = 1.0 - sensor.p_malfunction
    n_int = counts.astype(int)
    n_max = int(n_int.max())
    hits = np.arange(n_max + 1)
    valid = hits[None, :] <= n_int[:, None]
    misses = np.where(valid, n_int[:, None] - hits[None, :], 0)

    like_tgt = sensor.target_tpr ** hits[None, :] * (1.0 - sensor.target_tpr) ** misses
    like_not = sensor.target_fpr ** hits[None, :] * (1.0 - sensor.target_fpr) ** misses

    surv_haz = s_haz ** counts
    surv_free = s_free ** counts
    # Prior joint over (hazard, target) per cell.
    p_hz_tg = z * kappa
    p_hz_no = z * (1.0 - kappa)
    p_fr_tg = (1.0 - z) * x_free
    p_fr_no = (1.0 - z) * (1.0 - x_free)

    mass_haz = surv_haz[:, None] * (p_hz_tg[:, None] * like_tgt + p_hz_no[:, None] * like_not)
    mass_free = surv_free[:, None] * (p_fr_tg[:, None] * like_tgt + p_fr_no[:, None] * like_not)
    mass = mass_haz + mass_free
    mass_tgt = (surv_haz * p_hz_tg + surv_free * p_fr_tg)[:, None] * like_tgt

    positive = mass > 0.0
    safe = np.where(positive, mass, 1.0)
    z_post = np.where(positive, mass_haz / safe, z[:, None])
    x_post = np.where(positive, mass_tgt / safe, x[:, None])

    survive_total = z * surv_haz + (1.0 - z) * surv_free
    cell_ok = survive_total > 0.0
    weights = _comb_table(n_max)[n_int] * mass / np.where(cell_ok, survive_total, 1.0)[:, None]

    h_prior = bernoulli_entropy(z) + bernoulli_entropy(x)
    drop = h_prior[:, None] - bernoulli_entropy(z_post) - bernoulli_entropy(x_post)
    per_cell = np.where(valid & positive, weights * drop, 0.0).sum(axis=1)
    return float(np.where(cell_ok, per_cell, 0.0).sum())


def _joint_gain(
    z: np.ndarray,
    x: np.ndarray,
    kappa: np.ndarray,
    x_free: np.ndarray,
    counts: np.ndarray,
    sensor: SensorParams,
) -> float:
    """Two-branch expected entropy drop for a visit-count profile."""
    z_trig, x_trig, p_trigger = trigger_cell_posteriors(z, x, kappa, x_free, counts, sensor)
    h_prior = bernoulli_entropy(z) + bernoulli_entropy(x)
    drop_trigger = float(
        np.sum(h_prior - bernoulli_entropy(z_trig) - bernoulli_entropy(x_trig))
    )
    drop_survive = _survive_expected_drop(z, x, kappa, x_free, counts, sensor)
    return p_trigger * drop_trigger + (1.0 - p_trigger) * drop_survive


def expected_info_gain(belief: BeliefState, path: Path, sensor: SensorParams) -> float:
    """Expected entropy drop (nats) of the hazard plus target maps for a path.

    Exact expectation over both sensor branches under the current belief;
    nonnegative up to floating-point noise whenever the belief triple is
    self-consistent (x == kappa*z + x_free*(1-z), i.e. no clamping applied).
    """
    path.validate(belief.dims)
    cells = path.distinct_cells()
    counts_map = path.visit_counts()
    counts = np.array([counts_map[c] for c in cells], dtype=float)
    z, x, kappa, x_free = _belief_arrays(belief, cells)
    return _joint_gain(z, x, kappa, x_free, counts, sensor)


def _belief_arrays(belief: BeliefState, cells: list[Cell]) -> tuple[np.ndarray, ...]:
    z = np.array([belief.z_map[c.row, c.col] for c in cells])
    x = np.array([belief.x_map[c.row, c.col] for c in cells])
    kappa = np.array([belief.kappa_map[c.row, c.col] for c in cells])
    x_free = np.array(
        [derived_x_given_not_z(CellBelief(z[i], x[i], kappa[i])) for i in range(len(cells))]
    )
    return z, x, kappa, x_free


class _CellRegistry:
    """Per-cell prior scalars plus a cache of survive-branch drops by count.

    Cells are registered on first sight with visit count 0; zero-count rows
    are exactly inert in every product and sum, so registering a candidate
    that is never committed does not change any score.
    """

    def __init__(self, belief: BeliefState, sensor: SensorParams):
        self._belief = belief
        self.sensor = sensor
        self._index: dict[Cell, int] = {}
        self.z: list[float] = []
        self.x: list[float] = []
        self.kappa: list[float] = []
        self.x_free: list[float] = []
        self.counts: list[int] = []
        self.survive_sum = 0.0
        self._drop_cache: dict[tuple[int, int], float] = {}

    def ensure(self, cell: Cell) -> int:
        idx = self._index.get(cell)
        if idx is None:
            idx = len(self.z)
            self._index[cell] = idx
            triple = self._belief.cell(cell)
            self.z.append(triple.z)
            self.x.append(triple.x)
            self.kappa.append(triple.kappa)
            self.x_free.append(derived_x_given_not_z(triple))
            self.counts.append(0)
        return idx

    def survive_drop(self, idx: int, count: int) -> float:
        """Expected survive-branch drop of one cell after ``count`` visits."""
        if count == 0:
            return 0.0
        key = (idx, count)
        cached = self._drop_cache.get(key)
        if cached is None:
            cached = _survive_expected_drop(
                np.array([self.z[idx]]),
                np.array([self.x[idx]]),
                np.array([self.kappa[idx]]),
                np.array([self.x_free[idx]]),
                np.array([float(count)]),
                self.sensor,
            )
            self._drop_cache[key] = cached
        return cached

    def commit(self, cell: Cell) -> None:
        idx = self.ensure(cell)
        old = self.counts[idx]
        self.counts[idx] = old + 1
        self.survive_sum += self.survive_drop(idx, old + 1) - self.survive_drop(idx, old)


class _JointGainScorer:
    """Scores all candidate steps of one planning step in a single batch."""

    def __init__(self, belief: BeliefState, sensor: SensorParams):
        self._reg = _CellRegistry(belief, sensor)

    def commit(self, cell: Cell) -> None:
        self._reg.commit(cell)

    def step_gains(self, candidates: list[Cell]) -> np.ndarray:
        reg = self._reg
        bump = np.array([reg.ensure(c) for c in candidates])
        z = np.asarray(reg.z)
        x = np.asarray(reg.x)
        kappa = np.asarray(reg.kappa)
        x_free = np.asarray(reg.x_free)
        counts = np.asarray(reg.counts, dtype=float)
        sensor = reg.sensor

        s_haz = 1.0 - sensor.p_lethal
        s_free = 1.0 - sensor.p_malfunction
        surv_haz = s_haz ** counts
        surv_free = s_free ** counts
        num_cands = len(candidates)
        rows = np.arange(num_cands)
        surv_haz_b = np.tile(surv_haz, (num_cands, 1))
        surv_free_b = np.tile(surv_free, (num_cands, 1))
        surv_haz_b[rows, bump] *= s_haz
        surv_free_b[rows, bump] *= s_free

        marg = z * surv_haz_b + (1.0 - z) * surv_free_b
        forward = np.cumprod(marg, axis=1)
        backward = np.cumprod(marg[:, ::-1], axis=1)[:, ::-1]
        ones = np.ones((num_cands, 1))
        others = np.concatenate((ones, forward[:, :-1]), axis=1) * np.concatenate(
            (backward[:, 1:], ones), axis=1
        )
        like_haz = 1.0 - surv_haz_b * others
        like_free = 1.0 - surv_free_b * others
        den = z * like_haz + (1.0 - z) * like_free
        ok = den > 0.0
        safe = np.where(ok, den, 1.0)
        z_trig = np.clip(np.where(ok, z * like_haz / safe, z), 0.0, 1.0)
        x_trig = np.clip(
            np.where(ok, (kappa * z * like_haz + x_free * (1.0 - z) * like_free) / safe, x),
            0.0,
            1.0,
        )
        h_prior = bernoulli_entropy(z) + bernoulli_entropy(x)
        drop_trigger = (
            h_prior[None, :] - bernoulli_entropy(z_trig) - bernoulli_entropy(x_trig)
        ).sum(axis=1)
        p_trigger = 1.0 - forward[:, -1]

        drop_survive = np.empty(num_cands)
        for k, idx in enumerate(bump):
            idx = int(idx)
            n = reg.counts[idx]
            drop_survive[k] = (
                reg.survive_sum - reg.survive_drop(idx, n) + reg.survive_drop(idx, n + 1)
            )
        return p_trigger * drop_trigger + (1.0 - p_trigger) * drop_survive


def _mixed_trigger_z(
    z: np.ndarray,
    visit_index: np.ndarray,
    weights: np.ndarray,
    sensor: SensorParams,
) -> np.ndarray:
    """Hazard posteriors from per-universe blending.

    One universe per path position j assumes destruction exactly there: cells
    get survival evidence for their visits before j, destruction evidence at
    j, and nothing afterwards. Universe posteriors are blended with the
    normalized hypothesis weights. ``visit_index[k]`` maps path position k to
    its row in ``z``.
    """
    total = float(weights.sum())
    if total <= 0.0:
        return z.copy()
    rel = weights / total
    num_visits = visit_index.shape[0]
    num_cells = z.shape[0]
    onehot = np.zeros((num_visits, num_cells))
    onehot[np.arange(num_visits), visit_index] = 1.0
    before = np.cumsum(onehot, axis=0) - onehot
    s_haz = 1.0 - sensor.p_lethal
    s_free = 1.0 - sensor.p_malfunction
    mass_haz = z[None, :] * s_haz ** before * np.where(onehot > 0, sensor.p_lethal, 1.0)
    mass_free = (1.0 - z)[None, :] * s_free ** before * np.where(
        onehot > 0, sensor.p_malfunction, 1.0
    )
    den = mass_haz + mass_free
    ok = den > 0.0
    z_universe = np.where(ok, mass_haz / np.where(ok, den, 1.0), z[None, :])
    return np.clip((rel[:, None] * z_universe).sum(axis=0), 0.0, 1.0)


def relaxed_itp_trigger_update(
    belief: BeliefState, path: Path, sensor: SensorParams, likelihood_table
) -> BeliefState:
    """Trigger update by per-universe blending of hazard maps.

    Uses the hypothesis weights from ``likelihood_table``. The target and
    co-occurrence maps are unchanged: this baseline draws no target
    information from a trigger.
    """
    path.validate(belief.dims)
    if likelihood_table.path != path:
        raise ValueError("likelihood table was built for a different path")
    cells = path.distinct_cells()
    index = {c: i for i, c in enumerate(cells)}
    visit_index = np.array([index[c] for c in path.cells], dtype=int)
    weights = np.array([w for _, w in likelihood_table.hypotheses])
    z = np.array([belief.z_map[c.row, c.col] for c in cells])
    z_new = _mixed_trigger_z(z, visit_index, weights, sensor)
    new = belief.copy()
    for i, c in enumerate(cells):
        new.z_map[c.row, c.col] = z_new[i]
    return new


class _MixingGainScorer:
    """Candidate scoring with the per-universe trigger branch.

    The survive branch matches the joint scorer (on the independence view the
    two coincide); the trigger branch blends per-universe hazard maps and its
    branch probability is the marginal product over visits, matching the
    hypothesis weights it blends with.
    """

    def __init__(self, belief: BeliefState, sensor: SensorParams):
        self._reg = _CellRegistry(belief, sensor)
        self._visits: list[int] = []

    def commit(self, cell: Cell) -> None:
        self._visits.append(self._reg.ensure(cell))
        self._reg.commit(cell)

    def step_gains(self, candidates: list[Cell]) -> np.ndarray:
        reg = self._reg
        bump = [reg.ensure(c) for c in candidates]
        z = np.asarray(reg.z)
        h_prior_z = bernoulli_entropy(z)
        sensor = reg.sensor
        p_destroy = z * sensor.p_lethal + (1.0 - z) * sensor.p_malfunction
        gains = np.empty(len(candidates))
        for k, idx in enumerate(bump):
            visit_index = np.array(self._visits + [idx], dtype=int)
            per_visit = p_destroy[visit_index]
            survive_prefix = np.concatenate(([1.0], np.cumprod(1.0 - per_visit)[:-1]))
            weights = survive_prefix * per_visit
            p_trigger = 1.0 - float(np.prod(1.0 - per_visit))

            z_mixed = _mixed_trigger_z(z, visit_index, weights, sensor)
            drop_trigger = float(np.sum(h_prior_z - bernoulli_entropy(z_mixed)))

            n = reg.counts[idx]
            drop_survive = (
                reg.survive_sum - reg.survive_drop(idx, n) + reg.survive_drop(idx, n + 1)
            )
            gains[k] = p_trigger * drop_trigger + (1.0 - p_trigger) * drop_survive
        return gains


def feasible_steps(current: Cell, base: Cell, dims: GridDims, remaining: int) -> list[Cell]:
    """Next-step candidates from which the base stays reachable in time."""
    return [v for v in step_candidates(current, dims) if chebyshev(v, base) <= remaining - 1]


def plan_path(
    belief: BeliefState,
    cfg: PlannerConfig,
    sensor: SensorParams,
    rng: np.random.Generator | None = None,
) -> Path:
    """Build the next deployment path under ``cfg``.

    Deterministic for the three informed algorithms; ``random`` requires an
    rng. The result always starts and ends at the base, is 9-connected, and
    has length exactly cfg.budget_l.
    """
    dims = belief.dims
    if not dims.contains(cfg.base):
        raise ValueError(f"base station {cfg.base} is outside the {dims.width}x{dims.height} grid")
    if cfg.algorithm == RANDOM and rng is None:
        raise ValueError("the random planner needs an rng")

    scorer: _JointGainScorer | _MixingGainScorer | None = None
    if cfg.algorithm in (KAPPA_BNITP, RELAXED_BNITP):
        view = belief if cfg.algorithm == KAPPA_BNITP else belief.project_independent()
        scorer = _JointGainScorer(view, sensor)
    elif cfg.algorithm == RELAXED_ITP:
        scorer = _MixingGainScorer(belief.project_independent(), sensor)

    cells = [cfg.base]
    if scorer is not None:
        scorer.commit(cfg.base)
    while len(cells) < cfg.budget_l:
        remaining = cfg.budget_l - len(cells)
        candidates = feasible_steps(cells[-1], cfg.base, dims, remaining)
        if cfg.algorithm == RANDOM:
            nxt = candidates[int(rng.integers(len(candidates)))]
        else:
            gains = scorer.step_gains(candidates)
            nxt = candidates[int(np.argmax(gains))]
        cells.append(nxt)
        if scorer is not None:
            scorer.commit(nxt)
    return Path(tuple(cells))


def random_feasible_path(
    dims: GridDims, base: Cell, length: int, rng: np.random.Generator
) -> Path:
    """Uniform random walk of exactly ``length`` cells, anchored at the base."""
    if length < 1:
        raise ValueError("path length must be at least 1")
    cells = [base]
    while len(cells) < length:
        remaining = length - len(cells)
        candidates = feasible_steps(cells[-1], base, dims, remaining)
        cells.append(candidates[int(rng.integers(len(candidates)))])
    return Path(tuple(cells))
