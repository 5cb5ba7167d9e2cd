"""Steering vectors, angle/frequency conversions, and snapshot synthesis.

The measurement model is ``y(t) = A(omega) s(t) + n(t)`` with unit-modulus
steering entries ``exp(1j * omega * position)`` and circular complex white
noise.  Spatial frequency ``omega = 2*pi*sin(theta)/wavelength`` is the
quantity the rest of the package estimates and bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ScenarioError
from .geometry import ArrayGeometry

#: Default deterministic source coefficient (unit amplitude, fixed phase).
DEFAULT_AMPLITUDE = np.exp(1j * np.pi / 5)


def default_amplitudes(n_sources: int) -> np.ndarray:
    """Unit-amplitude coefficients with distinct phases, ``exp(1j*l*pi/5)``.

    Identical phases are a degenerate special case: the leading Fisher
    term for closely spaced sources becomes rank deficient and the bound
    declines faster than the generic polynomial rate.  Spreading the
    phases keeps the scenario generic while matching the single-source
    reference phase.
    """
    return np.exp(1j * np.pi / 5 * np.arange(1, n_sources + 1))


def varied_amplitudes(n_sources: int, snapshots: int, seed: int = 0) -> np.ndarray:
    """Deterministic unit-modulus coefficients varying per snapshot.

    One snapshot constrains at most two directions of the frequency
    information for closely spaced sources, so with three or more
    sources the generic polynomial decline of the bound only appears
    once the coefficients change across snapshots.  The phases are drawn
    once from a fixed sub-stream, so the matrix is reproducible.
    """
    rng = make_rng(seed, n_sources, snapshots)
    return np.exp(2j * np.pi * rng.random((n_sources, snapshots)))


@dataclass(frozen=True)
class SourceScenario:
    """Sources, coefficients, noise level and snapshot count.

    ``amplitude_mode`` is ``"fixed"`` (deterministic coefficients) or
    ``"gaussian"`` (standard circular complex Gaussian coefficients drawn
    per snapshot; ``amplitudes`` is then ignored).  Fixed coefficients
    may be one value per source, repeated every snapshot, or a full
    per-source-per-snapshot matrix of shape (sources, snapshots).
    """

    frequencies: np.ndarray
    amplitudes: np.ndarray
    noise_power: float
    snapshots: int = 1
    amplitude_mode: str = "fixed"

    def __post_init__(self):
        freqs = np.atleast_1d(np.array(self.frequencies, dtype=float))
        amps = np.atleast_1d(np.array(self.amplitudes, dtype=complex))
        freqs.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "amplitudes", amps)

        if freqs.size < 1:
            raise ScenarioError("at least one source is required")
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ScenarioError("source frequencies must be strictly increasing")
        if amps.shape not in ((freqs.size,), (freqs.size, self.snapshots)):
            raise ScenarioError(
                f"amplitudes of shape {amps.shape} do not fit {freqs.size} "
                f"sources and {self.snapshots} snapshots"
            )
        if self.noise_power < 0:
            raise ScenarioError(f"noise power must be >= 0, got {self.noise_power}")
        if self.snapshots < 1:
            raise ScenarioError(f"snapshot count must be >= 1, got {self.snapshots}")
        if self.amplitude_mode not in ("fixed", "gaussian"):
            raise ScenarioError(f"unknown amplitude mode {self.amplitude_mode!r}")

    @property
    def n_sources(self) -> int:
        return self.frequencies.size

    @property
    def delta_omega(self) -> float:
        """Maximum frequency separation, last minus first source."""
        return float(self.frequencies[-1] - self.frequencies[0])


@dataclass(frozen=True)
class SnapshotSet:
    """Complex measurements, one column per snapshot, plus the seed used."""

    data: np.ndarray
    seed: int | tuple[int, ...]

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]


def check_identifiable(geometry: ArrayGeometry, scenario: SourceScenario) -> None:
    """Sources must be identifiable by every subarray: L < min |N_k|."""
    smallest = int(geometry.subarray_sizes.min())
    if scenario.n_sources >= smallest:
        raise ScenarioError(
            f"{scenario.n_sources} sources are not identifiable with a "
            f"smallest subarray of {smallest} elements"
        )


def angle_to_frequency(theta: float, wavelength: float) -> float:
    """Spatial frequency of a direction: ``2*pi*sin(theta)/wavelength``."""
    if not abs(theta) < np.pi / 2:
        raise ScenarioError(f"direction {theta} rad outside (-pi/2, pi/2)")
    return 2.0 * np.pi * np.sin(theta) / wavelength


def frequency_separation(theta1: float, theta2: float, wavelength: float) -> float:
    """Frequency separation of two directions via the half-angle product form.

    Equals ``angle_to_frequency(theta2) - angle_to_frequency(theta1)``;
    the product form makes the separate roles of the angle difference and
    of the common angle explicit.
    """
    for theta in (theta1, theta2):
        if not abs(theta) < np.pi / 2:
            raise ScenarioError(f"direction {theta} rad outside (-pi/2, pi/2)")
    return (
        4.0
        * np.pi
        / wavelength
        * np.sin((theta2 - theta1) / 2.0)
        * np.cos((theta1 + theta2) / 2.0)
    )


def uniform_frequencies(
    theta_min: float, theta_max: float, n_sources: int, wavelength: float
) -> np.ndarray:
    """Frequencies of sources placed uniformly in angle between two bounds."""
    if n_sources == 1:
        return np.array([angle_to_frequency(theta_min, wavelength)])
    thetas = theta_min + np.arange(n_sources) * (theta_max - theta_min) / (
        n_sources - 1
    )
    return np.array([angle_to_frequency(t, wavelength) for t in thetas])


def steering_vector(geometry: ArrayGeometry, omega: float) -> np.ndarray:
    """Unit-modulus array response ``exp(1j * omega * positions)``."""
    return np.exp(1j * omega * geometry.element_positions)


def steering_matrix(geometry: ArrayGeometry, omegas: np.ndarray) -> np.ndarray:
    """N x L matrix of steering vectors, one column per source."""
    omegas = np.atleast_1d(omegas)
    return np.exp(1j * np.outer(geometry.element_positions, omegas))


def steering_derivative(geometry: ArrayGeometry, omega: float) -> np.ndarray:
    """Derivative of the steering vector w.r.t. omega: ``1j*pos*exp(...)``."""
    pos = geometry.element_positions
    return 1j * pos * np.exp(1j * omega * pos)


def make_rng(*seed_parts: int) -> np.random.Generator:
    """Deterministic sub-stream for a (seed, counter...) tuple.

    All randomness in the package flows through this so that trials can
    run in any order (or concurrently) and still reproduce bit-identical
    results.
    """
    return np.random.default_rng([int(p) & 0xFFFFFFFF for p in seed_parts])


def signal_matrix(
    scenario: SourceScenario, rng: np.random.Generator | None = None
) -> np.ndarray:
    """L x T matrix of source coefficients for one synthesis run."""
    shape = (scenario.n_sources, scenario.snapshots)
    if scenario.amplitude_mode == "fixed":
        if scenario.amplitudes.ndim == 2:
            return scenario.amplitudes
        return np.tile(scenario.amplitudes[:, None], (1, scenario.snapshots))
    if rng is None:
        raise ScenarioError("gaussian coefficients need a random generator")
    draw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return draw / np.sqrt(2.0)


def synthesize_snapshots(
    geometry: ArrayGeometry, scenario: SourceScenario, seed: int | tuple[int, ...]
) -> SnapshotSet:
    """Draw one deterministic snapshot set ``y = A s + n``.

    Noise is circular complex Gaussian with per-entry variance equal to
    the scenario noise power (variance split evenly between real and
    imaginary parts).  ``seed`` may be a single integer or a
    (master, counter...) tuple for derived sub-streams.
    """
    check_identifiable(geometry, scenario)
    rng = make_rng(*seed) if isinstance(seed, tuple) else make_rng(seed)
    a = steering_matrix(geometry, scenario.frequencies)
    s = signal_matrix(scenario, rng)
    y = a @ s
    if scenario.noise_power > 0:
        shape = (geometry.n_elements, scenario.snapshots)
        noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        y = y + np.sqrt(scenario.noise_power / 2.0) * noise
    return SnapshotSet(y, seed)
