"""Geometry-weighted exponential sums and their concentration bounds.

The quantities ``Q_i(dw) = sum(pos^i * exp(1j*dw*pos)) / sum(pos^i)`` for
``i = 0, 1, 2`` capture how a frequency separation ``dw`` interacts with
the element layout: near zero separation they stay close to 1, and once
``dw`` exceeds the resolution limit the phases wrap the whole unit circle
and the sums concentrate around 0.  That collapse is what flattens the
bound-versus-separation curve, so both the exact values and the
probabilistic bounds on them are exposed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError
from .geometry import ArrayGeometry, aperture, rayleigh_limit


@dataclass(frozen=True)
class QTrace:
    """Sampled Q statistics over a separation grid, ready for CSV export."""

    delta_grid: np.ndarray
    norm_grid: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    expected_abs_q0: np.ndarray


def _weighted_phase_mean(
    positions: np.ndarray, delta_omega, order: int
) -> complex | np.ndarray:
    if order < 0:
        raise ScenarioError(f"order must be a nonnegative integer, got {order}")
    weights = positions**order
    denom = weights.sum()
    if denom <= 0:
        raise ScenarioError(
            f"order-{order} position weights sum to zero for this geometry"
        )
    delta = np.asarray(delta_omega, dtype=float)
    phases = np.exp(1j * np.multiply.outer(delta, positions))
    value = (phases * weights).sum(axis=-1) / denom
    return complex(value) if value.ndim == 0 else value


def q_global(geometry: ArrayGeometry, delta_omega, order: int):
    """Whole-array Q statistic; accepts a scalar or a grid of separations."""
    return _weighted_phase_mean(geometry.element_positions, delta_omega, order)


def q_subarray(geometry: ArrayGeometry, delta_omega, order: int, k: int):
    """Q statistic of subarray k (1-based)."""
    return _weighted_phase_mean(geometry.subarray_positions(k), delta_omega, order)


def expected_q0_magnitude(delta_omega, aperture_m: float):
    """Magnitude of the mean Q0 under uniformly scattered positions.

    Positions uniform on [0, D] give ``|sin(x)/x|`` with
    ``x = delta_omega * D / 2``; the removable singularity at zero is
    filled with 1.
    """
    if aperture_m <= 0:
        raise ScenarioError(f"aperture must be positive, got {aperture_m}")
    x = np.asarray(delta_omega, dtype=float) * aperture_m / 2.0
    value = np.abs(np.sinc(x / np.pi))
    return float(value) if value.ndim == 0 else value


def hoeffding_bound_q0(
    t: float, delta_omega: float, aperture_m: float, n_elements: int
) -> tuple[float, float]:
    """Concentration bound on |Q0| for uniformly scattered positions.

    For any ``t > 0`` and separations at or beyond the resolution limit,
    returns ``(threshold, probability_bound)`` such that
    ``P(|Q0| >= threshold) <= probability_bound`` with
    ``probability_bound = 4*exp(-n*t^2/2)``.  The threshold combines the
    means of the real and imaginary parts with the Hoeffding deviation t.
    """
    if t <= 0:
        raise ScenarioError(f"deviation parameter t must be positive, got {t}")
    if aperture_m <= 0:
        raise ScenarioError(f"aperture must be positive, got {aperture_m}")
    if n_elements < 1:
        raise ScenarioError(f"element count must be >= 1, got {n_elements}")
    x = delta_omega * aperture_m
    if x < 2.0 * np.pi * (1.0 - 1e-12):
        raise ScenarioError(
            "separation below the resolution limit: the concentration bound "
            f"requires delta_omega * aperture >= 2*pi, got {x:.6g}"
        )
    cos_mean = np.sin(x) / x
    sin_mean = (1.0 - np.cos(x)) / x
    t1 = max(abs(t + cos_mean), abs(-t + cos_mean))
    t2 = abs(t + sin_mean)
    threshold = float(np.hypot(t1, t2))
    bound = float(4.0 * np.exp(-n_elements * t * t / 2.0))
    return threshold, bound


def q0_derivative_bound(geometry: ArrayGeometry, delta_omega: float) -> float:
    """Exact magnitude of dQ0/d(delta_omega): mean position times |Q1|."""
    mean_pos = float(geometry.element_positions.mean())
    return mean_pos * float(np.abs(q_global(geometry, delta_omega, 1)))


def q_trace(geometry: ArrayGeometry, delta_grid: np.ndarray) -> QTrace:
    """Evaluate Q0, Q1, Q2 and the scattered-position reference on a grid."""
    delta_grid = np.asarray(delta_grid, dtype=float)
    omega = rayleigh_limit(geometry)
    return QTrace(
        delta_grid=delta_grid,
        norm_grid=delta_grid / omega,
        q0=np.asarray(q_global(geometry, delta_grid, 0)),
        q1=np.asarray(q_global(geometry, delta_grid, 1)),
        q2=np.asarray(q_global(geometry, delta_grid, 2)),
        expected_abs_q0=expected_q0_magnitude(delta_grid, aperture(geometry)),
    )
