"""Command-line front end: run scenarios, sweep lethality grids, verify updates.

Exit codes: 0 on success, 1 for configuration or input problems, 2 for
runtime failures. All outputs are deterministic for a given configuration and
seed, except the manifest timestamp.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import sys
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Any, Sequence

from . import __version__, experiment, oracle, report
from .experiment import ConfigError, MonteCarloResult, ScenarioConfig
from .planner import ALGORITHMS

PARTIAL_MARKER = "INCOMPLETE"


@dataclass(frozen=True)
class SweepSpec:
    """A lethality-by-planner grid around one base scenario."""

    base_scenario: ScenarioConfig
    lethality_values: tuple[float, ...]
    planners: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.lethality_values:
            raise ConfigError("lethality_values: must be non-empty")
        for value in self.lethality_values:
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"lethality_values: {value} is outside [0, 1]")
        if not self.planners:
            raise ConfigError("planners: must be non-empty")
        for planner in self.planners:
            if planner not in ALGORITHMS:
                raise ConfigError(
                    f"planners: unknown algorithm {planner!r}, expected one of {ALGORITHMS}"
                )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SweepSpec":
        if data.get("kind") != "sweep":
            raise ConfigError(f"kind: expected 'sweep', got {data.get('kind')!r}")
        if "base_scenario" not in data or not isinstance(data["base_scenario"], dict):
            raise ConfigError("base_scenario: missing or not a table/object")
        base = dict(data["base_scenario"])
        base.setdefault("kind", "scenario")
        scenario = ScenarioConfig.from_dict(base)
        values = data.get("lethality_values")
        if not isinstance(values, (list, tuple)):
            raise ConfigError("lethality_values: missing or not a list")
        planners = data.get("planners")
        if not isinstance(planners, (list, tuple)):
            raise ConfigError("planners: missing or not a list")
        return cls(
            base_scenario=scenario,
            lethality_values=tuple(float(v) for v in values),
            planners=tuple(str(p) for p in planners),
        )


def load_config_file(path: str) -> dict[str, Any]:
    file_path = FsPath(path)
    if not file_path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = file_path.read_text()
    if file_path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            return tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


def _apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    if getattr(args, "trials", None) is not None:
        cfg = dataclasses.replace(cfg, num_trials=args.trials)
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if getattr(args, "planner", None) is not None:
        cfg = dataclasses.replace(
            cfg, planner=dataclasses.replace(cfg.planner, algorithm=args.planner)
        )
    return cfg


def _manifest(command: str, cfg_dict: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    return {
        "command": command,
        "config": cfg_dict,
        "version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        **extra,
    }


def _prepare_out_dir(out: str) -> FsPath:
    out_dir = FsPath(out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory is not writable: {out} ({exc})") from exc
    return out_dir


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(ScenarioConfig.from_dict(load_config_file(args.config)), args)
    out_dir = _prepare_out_dir(args.out)
    marker = out_dir / PARTIAL_MARKER
    marker.write_text("run in progress\n")

    result = experiment.run_monte_carlo(cfg)
    for idx, trial in enumerate(result.trials):
        report.atomic_write_text(
            out_dir / f"trace_trial{idx:03d}.csv", report.trace_csv_text(trial.trace)
        )
    report.write_json(out_dir / "aggregate.json", report.aggregate_dict(result))
    report.write_json(
        out_dir / "manifest.json",
        _manifest("run", cfg.to_dict(), {"trial_seeds": result.trial_seeds}),
    )
    if not args.no_plot:
        report.render_run_figure(
            result, out_dir / "entropy_mean.png", f"{cfg.name}: {cfg.planner.algorithm}"
        )
    marker.unlink()
    print(f"wrote {cfg.num_trials} trace(s) to {out_dir}")
    return 0


def _sweep_grid_config(spec: SweepSpec, lethality: float, planner: str) -> ScenarioConfig:
    base = spec.base_scenario
    return dataclasses.replace(
        base,
        sensor=dataclasses.replace(base.sensor, p_lethal=lethality),
        planner=dataclasses.replace(base.planner, algorithm=planner),
        name=f"{base.name}_l{round(lethality * 100):03d}_{planner}",
    )


def run_grid_point(cfg: ScenarioConfig) -> MonteCarloResult:
    """One sweep grid point; separated out so tests can instrument failures."""
    return experiment.run_monte_carlo(cfg)


def _cmd_sweep(args: argparse.Namespace) -> int:
    data = load_config_file(args.config)
    spec = SweepSpec.from_dict(data)
    base = _apply_overrides(spec.base_scenario, args)
    planners = (args.planner,) if args.planner else spec.planners
    spec = SweepSpec(
        base_scenario=base, lethality_values=spec.lethality_values, planners=planners
    )
    out_dir = _prepare_out_dir(args.out)
    marker = out_dir / PARTIAL_MARKER
    marker.write_text("sweep in progress\n")

    combined_rows = []
    curves: dict[tuple[float, str], list[float]] = {}
    for lethality in spec.lethality_values:
        for planner in spec.planners:
            cfg = _sweep_grid_config(spec, lethality, planner)
            result = run_grid_point(cfg)
            stem = f"trace_{planner}_l{round(lethality * 100):03d}"
            report.atomic_write_text(
                out_dir / f"{stem}.csv", report.mean_trace_csv_text(result)
            )
            combined_rows.extend(report.combined_rows_for(result, lethality, planner))
            curves[(lethality, planner)] = [float(v) for v in result.mean_h_total]
    report.atomic_write_text(
        out_dir / "sweep_combined.csv", report.combined_csv_text(combined_rows)
    )
    report.write_json(
        out_dir / "manifest.json",
        _manifest(
            "sweep",
            spec.base_scenario.to_dict(),
            {
                "lethality_values": list(spec.lethality_values),
                "planners": list(spec.planners),
            },
        ),
    )
    if not args.no_plot:
        report.render_sweep_figures(curves, spec.lethality_values, spec.planners, out_dir)
    marker.unlink()
    print(
        f"wrote {len(spec.lethality_values) * len(spec.planners)} trace file(s) "
        f"and sweep_combined.csv to {out_dir}"
    )
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    cfg = ScenarioConfig.from_dict(load_config_file(args.config))
    if cfg.dims.width > 3 or cfg.dims.height > 3:
        raise ConfigError(
            f"oracle verification needs a grid of at most 3x3 cells, "
            f"got {cfg.dims.width}x{cfg.dims.height}"
        )
    if cfg.planner.budget_l > 4:
        raise ConfigError(
            f"oracle verification needs a path budget of at most 4, got {cfg.planner.budget_l}"
        )
    seed = args.seed if args.seed is not None else cfg.master_seed
    rep = oracle.run_oracle_check(
        num_instances=args.instances,
        seed=seed,
        dims_cap=(cfg.dims.width, cfg.dims.height),
        max_path_len=cfg.planner.budget_l,
        inject_error=1e-6 if args.inject_error else 0.0,
    )
    print(
        f"oracle check: {rep.instances} instances, "
        f"max abs deviation {rep.max_abs_error:.3e} (tolerance {oracle.TOLERANCE:.0e})"
    )
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathsense",
        description=(
            "Belief updating and information-gain path planning for grid worlds "
            "sensed through trip-wire style path sensors."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and write entropy traces")
    run_p.add_argument("config", help="scenario config file (.json or .toml)")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--trials", type=int, help="override num_trials")
    run_p.add_argument("--seed", type=int, help="override master_seed")
    run_p.add_argument("--planner", choices=ALGORITHMS, help="override planner algorithm")
    run_p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a lethality-by-planner grid")
    sweep_p.add_argument("config", help="sweep spec file (.json or .toml)")
    sweep_p.add_argument("--out", required=True, help="output directory")
    sweep_p.add_argument("--trials", type=int, help="override num_trials")
    sweep_p.add_argument("--seed", type=int, help="override master_seed")
    sweep_p.add_argument("--planner", choices=ALGORITHMS, help="restrict to one planner")
    sweep_p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    sweep_p.set_defaults(func=_cmd_sweep)

    oracle_p = sub.add_parser(
        "oracle", help="verify the update rules against exhaustive enumeration"
    )
    oracle_p.add_argument("config", help="scenario config file (grid <= 3x3, budget <= 4)")
    oracle_p.add_argument("--instances", type=int, default=100, help="random instances to check")
    oracle_p.add_argument("--seed", type=int, help="override the instance seed")
    oracle_p.add_argument("--inject-error", action="store_true", help=argparse.SUPPRESS)
    oracle_p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
