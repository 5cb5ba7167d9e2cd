"""Command-line experiment runner.

Each subcommand loads a config file, runs one experiment, and writes a
CSV table, a rendered PNG figure, and a JSON manifest (config hash,
seed, tool version, produced files) into the output directory.  On
failure all partially written artifacts are removed and the exit status
is nonzero.

Flags can also be set through environment variables with the
``CRBLAB_`` prefix (``CRBLAB_OUT``, ``CRBLAB_SEED``, ``CRBLAB_THREADS``,
``CRBLAB_SNR_DB``); explicit flags win over the environment.
"""

from __future__ import annotations

import argparse
import csv
import importlib.metadata
import importlib.resources
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import montecarlo, plotting, qstats, sweep_analysis
from .config import ExperimentConfig, load_config
from .errors import ConfigError, CrbLabError
from .geometry import rayleigh_limit
from .plateau_approx import compare_mgmt, u_p_gradient, u_p_gradient_check

try:
    VERSION = importlib.metadata.version("crblab")
except importlib.metadata.PackageNotFoundError:  # running from a checkout
    VERSION = "0+unknown"

UP_CHECK_RATIOS = (0.5, 1.0, 2.0)
UP_CHECK_ORDERS = (0, 1, 2, 3)


def _env_default(name: str, fallback):
    return os.environ.get(f"CRBLAB_{name}", fallback)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crblab",
        description="Bound sweeps, turning points and resolution experiments "
        "for distributed arrays",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("crb-sweep", "average bound versus separation, both calibration modes"),
        ("turning-point", "declining fit, plateau flatness and turning point"),
        ("qstats", "geometry phase-sum statistics over a separation grid"),
        ("approx-check", "exact versus approximate offset penalty"),
        ("up-check", "gradient bounds of the u_p coefficient family"),
        ("mc-rmse", "Monte-Carlo RMSE and resolution probability"),
    ]:
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", required=True, help="config file or bundled name")
        cmd.add_argument(
            "--out", default=_env_default("OUT", "."), help="output directory"
        )
        cmd.add_argument(
            "--seed",
            type=int,
            default=_env_default("SEED", None),
            help="override the master seed",
        )
        cmd.add_argument(
            "--threads",
            type=int,
            default=int(_env_default("THREADS", 1)),
            help="worker cap for trial-parallel commands",
        )
        cmd.add_argument(
            "--snr-db",
            default=_env_default("SNR_DB", None),
            help="comma-separated SNR list overriding the scenario",
        )
    return parser


def resolve_config(name: str) -> Path:
    """Accept a path, or the name of a bundled config (with or without .cfg)."""
    path = Path(name)
    if path.exists():
        return path
    stem = name if name.endswith(".cfg") else f"{name}.cfg"
    bundled = importlib.resources.files("crblab") / "configs" / stem
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"config {name!r} is neither a file nor a bundled config")


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = int(args.seed)
    if args.snr_db:
        snrs = tuple(float(p) for p in str(args.snr_db).replace(",", " ").split())
        if not snrs:
            raise ConfigError("--snr-db must list at least one value")
        updates["snr_db_list"] = snrs
    if not updates:
        return config
    import dataclasses

    return dataclasses.replace(config, **updates)


class ArtifactWriter:
    """Tracks written files so a failed run leaves no partial output."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.paths: list[Path] = []

    def target(self, filename: str) -> Path:
        path = self.out_dir / filename
        self.paths.append(path)
        return path

    def write_csv(self, filename: str, header: list[str], rows) -> Path:
        path = self.target(filename)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
        return path

    def write_manifest(self, command: str, config: ExperimentConfig) -> Path:
        path = self.target(f"{command.replace('-', '_')}_manifest.json")
        manifest = {
            "command": command,
            "tool": "crblab",
            "version": VERSION,
            "config_path": str(config.path),
            "config_sha256": config.sha256,
            "seed": config.seed,
            "outputs": [p.name for p in self.paths if p != path],
        }
        path.write_text(json.dumps(manifest, indent=2) + "\n")
        return path

    def cleanup(self) -> None:
        for path in self.paths:
            try:
                path.unlink(missing_ok=True)
            except OSError:
                pass


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def run_crb_sweep(config: ExperimentConfig, writer: ArtifactWriter, args) -> None:
    rows, records = [], []
    for n_sources in config.l_list:
        for snr, noise in zip(config.snr_db_list, config.noise_powers):
            template = config.template_scenario(n_sources, noise_power=noise)
            trace = sweep_analysis.crb_sweep(
                config.geometry,
                template,
                config.min_norm_sep,
                config.max_norm_sep,
                config.points_per_decade,
                mode="both",
            )
            records.append((f"L={n_sources} snr={snr:g}dB", trace))
            gaps = max(n_sources - 1, 1)
            for i, norm in enumerate(trace.norm_sep):
                flags = [
                    m for m in ("fully", "partly") if trace.singular[m][i]
                ]
                fc = trace.values["fully"][i]
                pc = trace.values["partly"][i]
                rows.append(
                    [
                        n_sources,
                        _fmt(snr),
                        _fmt(norm * trace.omega_limit * gaps),
                        _fmt(norm),
                        _fmt(10 * np.log10(fc)) if np.isfinite(fc) else "",
                        _fmt(10 * np.log10(pc)) if np.isfinite(pc) else "",
                        "+".join(flags),
                    ]
                )
    writer.write_csv(
        "crb_sweep.csv",
        ["L", "snr_db", "delta_omega", "norm_sep", "crb_fc_db", "crb_pc_db", "singular_flag"],
        rows,
    )
    plotting.save_sweep_figure(records, writer.target("crb_sweep.png"))


def run_turning_point(config: ExperimentConfig, writer: ArtifactWriter, args) -> None:
    rows = []
    figure_payload = None
    for n_sources in config.l_list:
        for snr, noise in zip(config.snr_db_list, config.noise_powers):
            template = config.template_scenario(n_sources, noise_power=noise)
            trace = sweep_analysis.crb_sweep(
                config.geometry,
                template,
                config.min_norm_sep,
                config.max_norm_sep,
                config.points_per_decade,
                mode="both",
            )
            reports = [
                sweep_analysis.detect_turning_point(trace, mode)
                for mode in config.modes
            ]
            if figure_payload is None:
                figure_payload = (trace, reports)
            for report in reports:
                rows.append(
                    [
                        n_sources,
                        _fmt(snr),
                        report.mode,
                        _fmt(report.fitted_declining_slope),
                        _fmt(report.slope_residual),
                        _fmt(report.plateau_flatness),
                        _fmt(report.detected_turning_point),
                        _fmt(report.analytic_omega),
                        _fmt(report.ratio),
                        int(report.clamped),
                    ]
                )
    writer.write_csv(
        "turning_point.csv",
        [
            "L",
            "snr_db",
            "mode",
            "declining_slope",
            "slope_residual",
            "plateau_flatness",
            "turning_point",
            "analytic_omega",
            "ratio",
            "clamped",
        ],
        rows,
    )
    trace, reports = figure_payload
    plotting.save_turning_figure(trace, reports, writer.target("turning_point.png"))


def run_qstats(config: ExperimentConfig, writer: ArtifactWriter, args) -> None:
    omega = rayleigh_limit(config.geometry)
    norm_grid = sweep_analysis.log_grid(
        config.min_norm_sep, config.max_norm_sep, config.points_per_decade
    )
    trace = qstats.q_trace(config.geometry, norm_grid * omega)
    rows = [
        [
            _fmt(dw),
            _fmt(norm),
            _fmt(q0.real),
            _fmt(q0.imag),
            _fmt(abs(q0)),
            _fmt(abs(q1)),
            _fmt(abs(q2)),
            _fmt(expected),
        ]
        for dw, norm, q0, q1, q2, expected in zip(
            trace.delta_grid,
            trace.norm_grid,
            trace.q0,
            trace.q1,
            trace.q2,
            trace.expected_abs_q0,
        )
    ]
    writer.write_csv(
        "qstats.csv",
        [
            "delta_omega",
            "delta_omega_over_Omega",
            "re_q0",
            "im_q0",
            "abs_q0",
            "abs_q1",
            "abs_q2",
            "expected_abs_q0",
        ],
        rows,
    )
    plotting.save_qstats_figure(trace, writer.target("qstats.png"))


def run_approx_check(config: ExperimentConfig, writer: ArtifactWriter, args) -> None:
    omega = rayleigh_limit(config.geometry)
    template = config.template_scenario(2, snapshots=1)
    norm_grid = sweep_analysis.log_grid(
        config.min_norm_sep, config.max_norm_sep, config.points_per_decade
    )
    cmp = compare_mgmt(config.geometry, template, norm_grid * omega)
    rows = [
        [_fmt(norm), _fmt(exact), _fmt(approx), _fmt(rel)]
        for norm, exact, approx, rel in zip(
            cmp.norm_grid, cmp.exact, cmp.approx, cmp.rel_error
        )
    ]
    writer.write_csv(
        "approx_check.csv",
        ["delta_omega_over_Omega", "exact_mgmt11", "approx_mgmt11", "rel_error"],
        rows,
    )
    plotting.save_approx_figure(cmp, writer.target("approx_check.png"))


def run_up_check(config: ExperimentConfig, writer: ArtifactWriter, args) -> None:
    mu_grid = np.logspace(-2, 2, 400)
    rows, curves = [], []
    for p in UP_CHECK_ORDERS:
        for s_tilde in UP_CHECK_RATIOS:
            max_abs, tail = u_p_gradient_check(s_tilde, p, mu_grid)
            rows.append(
                [
                    p,
                    _fmt(s_tilde),
                    _fmt(mu_grid[0]),
                    _fmt(mu_grid[-1]),
                    _fmt(max_abs),
                    _fmt(tail),
                    int(max_abs <= 1.0),
                ]
            )
            curves.append(
                (
                    f"p={p} ratio={s_tilde:g}",
                    np.abs(u_p_gradient(mu_grid, s_tilde, p)),
                )
            )
    writer.write_csv(
        "up_check.csv",
        ["p", "s_tilde", "mu_min", "mu_max", "max_abs_gradient", "tail_gradient", "bound_ok"],
        rows,
    )
    plotting.save_up_figure(mu_grid, curves, writer.target("up_check.png"))


def run_mc_rmse(config: ExperimentConfig, writer: ArtifactWriter, args) -> None:
    omega = rayleigh_limit(config.geometry)
    n_sources = 2
    template = config.template_scenario(n_sources)
    separations = np.array(config.separations_norm) * omega * (n_sources - 1)
    results, rows = [], []
    for estimator in config.estimators:
        mode = montecarlo.ESTIMATORS[estimator][1]
        result = montecarlo.mc_experiment(
            config.geometry,
            template,
            estimator,
            separations,
            trials=config.trials,
            seed=config.seed,
            threshold_db=config.thresholds_db[mode],
            grid_points=config.grid_points,
            grid_span_norm=config.grid_span_norm,
            threads=max(1, args.threads),
        )
        results.append(result)
        for norm, rmse, prob, capped in zip(
            result.norm_separations,
            result.rmse,
            result.prob_resolved,
            result.n_capped,
        ):
            rows.append(
                [
                    _fmt(norm),
                    _fmt(20 * np.log10(rmse)) if rmse > 0 else "",
                    _fmt(prob),
                    int(capped),
                    estimator,
                    result.calibration_mode,
                ]
            )
    writer.write_csv(
        "mc_rmse.csv",
        ["delta_omega_over_Omega", "rmse_db", "prob_resolve", "n_capped", "estimator", "mode"],
        rows,
    )
    plotting.save_mc_figure(results, writer.target("mc_rmse.png"))


COMMANDS = {
    "crb-sweep": run_crb_sweep,
    "turning-point": run_turning_point,
    "qstats": run_qstats,
    "approx-check": run_approx_check,
    "up-check": run_up_check,
    "mc-rmse": run_mc_rmse,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out)
    writer = None
    try:
        config = _apply_overrides(load_config(resolve_config(args.config)), args)
        out_dir.mkdir(parents=True, exist_ok=True)
        writer = ArtifactWriter(out_dir)
        COMMANDS[args.command](config, writer, args)
        writer.write_manifest(args.command, config)
    except ConfigError as exc:
        if writer is not None:
            writer.cleanup()
        print(f"crblab: config error: {exc}", file=sys.stderr)
        return 2
    except CrbLabError as exc:
        if writer is not None:
            writer.cleanup()
        print(f"crblab: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
