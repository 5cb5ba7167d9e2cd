"""Experiment configuration files.

Plain INI-style text with four sections: ``[geometry]``, ``[scenario]``,
``[sweep]`` and ``[mc]``.  Angles are written in degrees and spacings in
wavelengths here, and converted to the package units (radians, meters)
at parse time; unknown sections or keys are rejected so typos fail
loudly instead of silently falling back to defaults.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import ArrayGeometry, build_uniform_distributed_geometry
from .montecarlo import DEFAULT_SPAN_NORM, DEFAULT_THRESHOLD_DB
from .signal import (
    SourceScenario,
    angle_to_frequency,
    default_amplitudes,
    uniform_frequencies,
    varied_amplitudes,
)

_GEOMETRY_KEYS = {
    "k",
    "elements_per_subarray",
    "element_spacing_wavelengths",
    "interval_i",
    "wavelength_m",
    "positions_m",
    "partition",
}
_SCENARIO_KEYS = {
    "theta_min_deg",
    "theta_max_deg",
    "omega_list",
    "amplitude_mode",
    "snr_db",
    "snapshots",
}
_SWEEP_KEYS = {
    "l_list",
    "modes",
    "min_norm_sep",
    "max_norm_sep",
    "points_per_decade",
}
_MC_KEYS = {
    "trials",
    "estimators",
    "separations_norm",
    "threshold_db_fc",
    "threshold_db_pc",
    "seed",
    "grid_points",
    "grid_span_norm",
}
_SECTIONS = {
    "geometry": _GEOMETRY_KEYS,
    "scenario": _SCENARIO_KEYS,
    "sweep": _SWEEP_KEYS,
    "mc": _MC_KEYS,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed, validated experiment description."""

    geometry: ArrayGeometry
    theta_min: float
    theta_max: float | None
    omega_list: np.ndarray | None
    amplitude_mode: str
    snr_db_list: tuple[float, ...]
    snapshots: int
    l_list: tuple[int, ...]
    modes: tuple[str, ...]
    min_norm_sep: float
    max_norm_sep: float
    points_per_decade: int
    trials: int
    estimators: tuple[str, ...]
    separations_norm: tuple[float, ...]
    thresholds_db: dict[str, float]
    seed: int
    grid_points: int
    grid_span_norm: float
    path: Path
    sha256: str = field(repr=False, default="")

    @property
    def noise_powers(self) -> tuple[float, ...]:
        return tuple(10.0 ** (-snr / 10.0) for snr in self.snr_db_list)

    def template_scenario(
        self, n_sources: int, noise_power: float | None = None, snapshots: int | None = None
    ) -> SourceScenario:
        """Scenario template for sweep-style operations.

        When no explicit frequency list is configured, the sources sit
        at the minimum direction with a placeholder spacing; sweep and
        Monte-Carlo operations re-place all but the first source anyway.
        """
        wavelength = self.geometry.wavelength
        if self.omega_list is not None:
            freqs = self.omega_list
            if freqs.size != n_sources:
                raise ConfigError(
                    f"omega_list holds {freqs.size} entries, expected {n_sources}"
                )
        elif self.theta_max is not None and n_sources > 1:
            freqs = uniform_frequencies(
                self.theta_min, self.theta_max, n_sources, wavelength
            )
        else:
            base = angle_to_frequency(self.theta_min, wavelength)
            freqs = base + np.arange(n_sources) * 1e-3
        if noise_power is None:
            noise_power = self.noise_powers[0]
        snapshots = self.snapshots if snapshots is None else snapshots
        if self.amplitude_mode == "varied":
            # deterministic per-snapshot coefficients drawn from the seed
            amplitudes = varied_amplitudes(n_sources, snapshots, self.seed)
            mode = "fixed"
        else:
            amplitudes = default_amplitudes(n_sources)
            mode = self.amplitude_mode
        return SourceScenario(
            frequencies=freqs,
            amplitudes=amplitudes,
            noise_power=noise_power,
            snapshots=snapshots,
            amplitude_mode=mode,
        )


def _floats(raw: str, section: str, key: str) -> list[float]:
    try:
        return [float(part) for part in raw.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: expected numbers, got {raw!r}") from exc


def _ints(raw: str, section: str, key: str) -> list[int]:
    values = _floats(raw, section, key)
    if any(v != int(v) for v in values):
        raise ConfigError(f"[{section}] {key}: expected integers, got {raw!r}")
    return [int(v) for v in values]


def _scalar(values: list, section: str, key: str):
    if len(values) != 1:
        raise ConfigError(f"[{section}] {key}: expected a single value")
    return values[0]


def _build_geometry(section: configparser.SectionProxy) -> ArrayGeometry:
    wavelength = _scalar(
        _floats(section.get("wavelength_m", "1.0"), "geometry", "wavelength_m"),
        "geometry",
        "wavelength_m",
    )
    if wavelength <= 0:
        raise ConfigError(f"[geometry] wavelength_m must be positive, got {wavelength}")
    if "positions_m" in section:
        if "partition" not in section:
            raise ConfigError("[geometry] positions_m requires a partition list")
        positions = _floats(section["positions_m"], "geometry", "positions_m")
        sizes = _ints(section["partition"], "geometry", "partition")
        if any(s < 1 for s in sizes):
            raise ConfigError("[geometry] partition sizes must be >= 1")
        bounds, cursor = [], 0
        for size in sizes:
            bounds.append((cursor, cursor + size))
            cursor += size
        if cursor != len(positions):
            raise ConfigError(
                f"[geometry] partition covers {cursor} elements, "
                f"positions_m lists {len(positions)}"
            )
        return ArrayGeometry(np.array(positions), tuple(bounds), wavelength)
    for key in ("k", "elements_per_subarray", "element_spacing_wavelengths", "interval_i"):
        if key not in section:
            raise ConfigError(f"[geometry] missing key {key}")
    k = _scalar(_ints(section["k"], "geometry", "k"), "geometry", "k")
    per = _scalar(
        _ints(section["elements_per_subarray"], "geometry", "elements_per_subarray"),
        "geometry",
        "elements_per_subarray",
    )
    spacing_wl = _scalar(
        _floats(
            section["element_spacing_wavelengths"],
            "geometry",
            "element_spacing_wavelengths",
        ),
        "geometry",
        "element_spacing_wavelengths",
    )
    interval = _scalar(
        _floats(section["interval_i"], "geometry", "interval_i"),
        "geometry",
        "interval_i",
    )
    return build_uniform_distributed_geometry(
        n_subarrays=k,
        elements_per_subarray=per,
        element_spacing=spacing_wl * wavelength,
        interval=interval,
        wavelength=wavelength,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate one experiment configuration file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(raw.decode("utf-8"), source=str(path))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}] in {path}")
        for key in parser[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    if "geometry" not in parser:
        raise ConfigError(f"config {path} is missing the [geometry] section")

    geometry = _build_geometry(parser["geometry"])

    scen = parser["scenario"] if "scenario" in parser else {}

    def scen_get(key, default):
        return scen.get(key, default) if hasattr(scen, "get") else default

    theta_min_deg = _scalar(
        _floats(scen_get("theta_min_deg", "1.2"), "scenario", "theta_min_deg"),
        "scenario",
        "theta_min_deg",
    )
    theta_max_raw = scen_get("theta_max_deg", None)
    theta_max_deg = (
        _scalar(_floats(theta_max_raw, "scenario", "theta_max_deg"), "scenario", "theta_max_deg")
        if theta_max_raw is not None
        else None
    )
    for name, value in (("theta_min_deg", theta_min_deg), ("theta_max_deg", theta_max_deg)):
        if value is not None and not -90.0 < value < 90.0:
            raise ConfigError(f"[scenario] {name} must lie inside (-90, 90) degrees")
    omega_raw = scen_get("omega_list", None)
    omega_list = (
        np.array(_floats(omega_raw, "scenario", "omega_list"))
        if omega_raw is not None
        else None
    )
    amplitude_mode = scen_get("amplitude_mode", "fixed")
    if amplitude_mode not in ("fixed", "gaussian", "varied"):
        raise ConfigError(
            "[scenario] amplitude_mode must be fixed, gaussian or varied, "
            f"got {amplitude_mode!r}"
        )
    snr_db_list = tuple(_floats(scen_get("snr_db", "20"), "scenario", "snr_db"))
    if not snr_db_list or any(not np.isfinite(v) for v in snr_db_list):
        raise ConfigError("[scenario] snr_db must list finite values")
    snapshots = _scalar(
        _ints(scen_get("snapshots", "1"), "scenario", "snapshots"),
        "scenario",
        "snapshots",
    )
    if snapshots < 1:
        raise ConfigError(f"[scenario] snapshots must be >= 1, got {snapshots}")

    sweep = parser["sweep"] if "sweep" in parser else {}

    def sweep_get(key, default):
        return sweep.get(key, default) if hasattr(sweep, "get") else default

    l_list = tuple(_ints(sweep_get("l_list", "2"), "sweep", "l_list"))
    if any(l < 1 for l in l_list):
        raise ConfigError("[sweep] l_list entries must be >= 1")
    modes = tuple(
        part.strip()
        for part in sweep_get("modes", "fully, partly").replace(",", " ").split()
    )
    for mode in modes:
        if mode not in ("fully", "partly"):
            raise ConfigError(f"[sweep] unknown mode {mode!r}")
    min_norm_sep = _scalar(
        _floats(sweep_get("min_norm_sep", "0.01"), "sweep", "min_norm_sep"),
        "sweep",
        "min_norm_sep",
    )
    max_norm_sep = _scalar(
        _floats(sweep_get("max_norm_sep", "10"), "sweep", "max_norm_sep"),
        "sweep",
        "max_norm_sep",
    )
    if not 0 < min_norm_sep < max_norm_sep:
        raise ConfigError("[sweep] needs 0 < min_norm_sep < max_norm_sep")
    points_per_decade = _scalar(
        _ints(sweep_get("points_per_decade", "60"), "sweep", "points_per_decade"),
        "sweep",
        "points_per_decade",
    )
    if points_per_decade < 4:
        raise ConfigError("[sweep] points_per_decade must be >= 4")

    mc = parser["mc"] if "mc" in parser else {}

    def mc_get(key, default):
        return mc.get(key, default) if hasattr(mc, "get") else default

    trials = _scalar(_ints(mc_get("trials", "300"), "mc", "trials"), "mc", "trials")
    if trials < 1:
        raise ConfigError(f"[mc] trials must be >= 1, got {trials}")
    estimators = tuple(
        part.strip()
        for part in mc_get("estimators", "music, rare").replace(",", " ").split()
    )
    for est in estimators:
        if est not in ("music", "rare"):
            raise ConfigError(f"[mc] unknown estimator {est!r}")
    separations_norm = tuple(
        _floats(mc_get("separations_norm", "0.05 0.1 0.2 0.5 1 2 5"), "mc", "separations_norm")
    )
    if any(s <= 0 for s in separations_norm):
        raise ConfigError("[mc] separations_norm entries must be positive")
    thresholds_db = {
        "fully": _scalar(
            _floats(
                mc_get("threshold_db_fc", str(DEFAULT_THRESHOLD_DB["fully"])),
                "mc",
                "threshold_db_fc",
            ),
            "mc",
            "threshold_db_fc",
        ),
        "partly": _scalar(
            _floats(
                mc_get("threshold_db_pc", str(DEFAULT_THRESHOLD_DB["partly"])),
                "mc",
                "threshold_db_pc",
            ),
            "mc",
            "threshold_db_pc",
        ),
    }
    seed = _scalar(_ints(mc_get("seed", "12345"), "mc", "seed"), "mc", "seed")
    grid_points = _scalar(
        _ints(mc_get("grid_points", "10000"), "mc", "grid_points"), "mc", "grid_points"
    )
    if grid_points < 100:
        raise ConfigError("[mc] grid_points must be >= 100")
    grid_span_norm = _scalar(
        _floats(mc_get("grid_span_norm", str(DEFAULT_SPAN_NORM)), "mc", "grid_span_norm"),
        "mc",
        "grid_span_norm",
    )
    if grid_span_norm <= 0:
        raise ConfigError("[mc] grid_span_norm must be positive")

    return ExperimentConfig(
        geometry=geometry,
        theta_min=np.deg2rad(theta_min_deg),
        theta_max=np.deg2rad(theta_max_deg) if theta_max_deg is not None else None,
        omega_list=omega_list,
        amplitude_mode=amplitude_mode,
        snr_db_list=snr_db_list,
        snapshots=snapshots,
        l_list=l_list,
        modes=modes,
        min_norm_sep=min_norm_sep,
        max_norm_sep=max_norm_sep,
        points_per_decade=points_per_decade,
        trials=trials,
        estimators=estimators,
        separations_norm=separations_norm,
        thresholds_db=thresholds_db,
        seed=seed,
        grid_points=grid_points,
        grid_span_norm=grid_span_norm,
        path=path,
        sha256=hashlib.sha256(raw).hexdigest(),
    )
