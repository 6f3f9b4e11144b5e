"""Result persistence: delimited traces, JSON summaries, and rendered figures.

All delimited output is written atomically (temp file plus rename) with
full-precision floats via repr, so reruns of the same configuration produce
byte-identical files. Figures are rendered headlessly next to the data they
summarize.
"""

from __future__ import annotations

import json
import os
from pathlib import Path as FsPath
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiment import MonteCarloResult
from .metrics import EntropyTrace

TRACE_HEADER = "deployment,h_z,h_x,h_total"
COMBINED_HEADER = "lethality,planner,trial,deployment,h_z,h_x,h_total"


def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write_text(path: FsPath, text: str) -> None:
    path = FsPath(path)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    with open(tmp, "w", newline="\n") as handle:
        handle.write(text)
    os.replace(tmp, path)


def write_json(path: FsPath, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def trace_csv_text(trace: EntropyTrace) -> str:
    lines = [TRACE_HEADER]
    for row in trace.rows:
        lines.append(f"{row.deployment},{_fmt(row.h_z)},{_fmt(row.h_x)},{_fmt(row.h_total)}")
    return "\n".join(lines) + "\n"


def mean_trace_csv_text(result: MonteCarloResult) -> str:
    lines = [TRACE_HEADER]
    for m in range(len(result.mean_h_total)):
        lines.append(
            f"{m},{_fmt(result.mean_h_z[m])},{_fmt(result.mean_h_x[m])},"
            f"{_fmt(result.mean_h_total[m])}"
        )
    return "\n".join(lines) + "\n"


def combined_csv_text(rows: Iterable[tuple[float, str, int, int, float, float, float]]) -> str:
    lines = [COMBINED_HEADER]
    for lethality, planner, trial, deployment, h_z, h_x, h_total in rows:
        lines.append(
            f"{_fmt(lethality)},{planner},{trial},{deployment},"
            f"{_fmt(h_z)},{_fmt(h_x)},{_fmt(h_total)}"
        )
    return "\n".join(lines) + "\n"


def combined_rows_for(result: MonteCarloResult, lethality: float, planner: str):
    """Long-format rows (one per trial per deployment) for one sweep grid point."""
    rows = []
    for trial_idx, trial in enumerate(result.trials):
        for row in trial.trace.rows:
            rows.append(
                (lethality, planner, trial_idx, row.deployment, row.h_z, row.h_x, row.h_total)
            )
    return rows


def aggregate_dict(result: MonteCarloResult) -> dict:
    return {
        "deployments": list(range(len(result.mean_h_total))),
        "mean_h_z": [float(v) for v in result.mean_h_z],
        "mean_h_x": [float(v) for v in result.mean_h_x],
        "mean_h_total": [float(v) for v in result.mean_h_total],
        "std_h_total": [float(v) for v in result.std_h_total],
        "trial_seeds": [int(s) for s in result.trial_seeds],
    }


def render_run_figure(result: MonteCarloResult, out_path: FsPath, title: str) -> None:
    """Mean total entropy per deployment with a one-sigma band."""
    mean = result.mean_h_total
    std = result.std_h_total
    deployments = range(len(mean))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(deployments, mean, color="tab:blue", label="mean")
    ax.fill_between(deployments, mean - std, mean + std, color="tab:blue", alpha=0.2, label="±1 std")
    ax.set_xlabel("deployment")
    ax.set_ylabel("entropy (nats)")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


_PLANNER_COLORS = {
    "kappa_bnitp": "tab:blue",
    "relaxed_bnitp": "tab:orange",
    "relaxed_itp": "tab:green",
    "random": "tab:gray",
}


def render_sweep_figures(
    curves: dict[tuple[float, str], Sequence[float]],
    lethality_values: Sequence[float],
    planners: Sequence[str],
    out_dir: FsPath,
) -> list[FsPath]:
    """One comparison figure per lethality, plus a combined panel figure.

    ``curves`` maps (lethality, planner) to the mean total-entropy curve.
    """
    out_dir = FsPath(out_dir)
    written: list[FsPath] = []
    for lethality in lethality_values:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        _plot_point(ax, curves, lethality, planners)
        ax.set_title(f"lethality {lethality:.0%}")
        ax.legend()
        fig.tight_layout()
        out_path = out_dir / f"entropy_l{round(lethality * 100):03d}.png"
        fig.savefig(out_path, dpi=120)
        plt.close(fig)
        written.append(out_path)

    ncols = min(3, len(lethality_values))
    nrows = (len(lethality_values) + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(5.0 * ncols, 3.5 * nrows), squeeze=False)
    for idx, lethality in enumerate(lethality_values):
        ax = axes[idx // ncols][idx % ncols]
        _plot_point(ax, curves, lethality, planners)
        ax.set_title(f"lethality {lethality:.0%}")
        if idx == 0:
            ax.legend()
    for idx in range(len(lethality_values), nrows * ncols):
        axes[idx // ncols][idx % ncols].axis("off")
    fig.tight_layout()
    grid_path = out_dir / "entropy_all.png"
    fig.savefig(grid_path, dpi=120)
    plt.close(fig)
    written.append(grid_path)
    return written


def _plot_point(ax, curves, lethality: float, planners: Sequence[str]) -> None:
    for planner in planners:
        curve = curves[(lethality, planner)]
        ax.plot(
            range(len(curve)),
            curve,
            label=planner,
            color=_PLANNER_COLORS.get(planner),
        )
    ax.set_xlabel("deployment")
    ax.set_ylabel("entropy (nats)")
