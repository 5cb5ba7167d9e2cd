"""Closed forms behind the plateau of the bound-versus-separation curve.

Two kinds of results live here for the two-source case.  First, exact
rewrites: the projector and the frequency information block F expressed
through the Q statistics (identities, checked to floating precision).
Second, the approximation chain for the partly calibrated penalty term
``M G^{-1} M^T``: a per-subarray closed form for M, a diagonal-plus-
rank-structure inverse for G, and the ``u_p`` coefficient family whose
flat gradient makes the penalty insensitive to the separation once the
sources are resolvable.  A comparison harness scores the approximation
against the exact penalty over a separation grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crb import _guarded_inverse, fim_blocks
from .errors import ScenarioError, SingularModelError
from .geometry import ArrayGeometry, rayleigh_limit
from .qstats import q_global, q_subarray
from .signal import SourceScenario, steering_matrix

#: Where the gradient tail of u_p is probed.
TAIL_MU = 1e6


@dataclass(frozen=True)
class ApproxComparison:
    """Exact vs approximate penalty entry (1,1) over a separation grid."""

    delta_grid: np.ndarray
    norm_grid: np.ndarray
    exact: np.ndarray
    approx: np.ndarray
    rel_error: np.ndarray


def _require_two_sources(scenario: SourceScenario) -> None:
    if scenario.n_sources != 2:
        raise ScenarioError("this closed form is derived for exactly two sources")
    if scenario.amplitude_mode != "fixed":
        raise ScenarioError("this closed form needs deterministic coefficients")


def projection_complement_via_q(
    geometry: ArrayGeometry, omega0: float, delta_omega: float
) -> np.ndarray:
    """Two-source projector written through Q0 instead of a matrix inverse."""
    n = geometry.n_elements
    q0 = q_global(geometry, delta_omega, 0)
    denom = 1.0 - abs(q0) ** 2
    if denom < 1e-10:
        raise SingularModelError(
            "sources coincide: |Q0| is 1 and the projector degenerates",
            condition=np.inf,
        )
    a = steering_matrix(geometry, np.array([omega0, omega0 + delta_omega]))
    c_q = np.array([[0.0, q0], [np.conj(q0), 0.0]])
    return np.eye(n, dtype=complex) - a @ (np.eye(2) - c_q) @ a.conj().T / (n * denom)


def fim_f_via_q(geometry: ArrayGeometry, scenario: SourceScenario) -> np.ndarray:
    """Frequency information block F as a function of Q0, Q1, Q2.

    An exact identity with the assembled F for two sources and one
    snapshot, not an approximation.
    """
    _require_two_sources(scenario)
    if scenario.snapshots != 1:
        raise ScenarioError("the Q form of F is single-snapshot")

    pos = geometry.element_positions
    n = geometry.n_elements
    dw = scenario.delta_omega
    q0 = q_global(geometry, dw, 0)
    q1 = q_global(geometry, dw, 1)
    q2 = q_global(geometry, dw, 2)
    denom = 1.0 - abs(q0) ** 2
    if denom < 1e-10:
        raise SingularModelError("sources coincide: |Q0| is 1", condition=np.inf)
    gamma0 = pos.sum() ** 2 / (n * denom)

    f1 = pos.dot(pos) * np.array([[1.0, q2], [np.conj(q2), 1.0]])
    f2 = -gamma0 * np.array(
        [
            [1.0 + abs(q1) ** 2, 2.0 * q1],
            [2.0 * np.conj(q1), 1.0 + abs(q1) ** 2],
        ]
    )
    f3 = gamma0 * np.array(
        [
            [
                q0 * np.conj(q1) + np.conj(q0) * q1,
                np.conj(q0) * q1 * q1 + q0,
            ],
            [
                q0 * np.conj(q1) * np.conj(q1) + np.conj(q0),
                q0 * np.conj(q1) + np.conj(q0) * q1,
            ],
        ]
    )
    s1, s2 = scenario.amplitudes
    s_mat = np.array(
        [
            [abs(s1) ** 2, np.conj(s1) * s2],
            [np.conj(s2) * s1, abs(s2) ** 2],
        ]
    )
    return np.real((f1 + f2 + f3) * s_mat)


def u_p(mu, s_tilde: float, p: int):
    """Coefficient family ``(-2)^p mu^(p+2) / (1/s + s*mu^2)^(p+1)``."""
    if s_tilde <= 0:
        raise ScenarioError(f"amplitude ratio must be positive, got {s_tilde}")
    if p < 0:
        raise ScenarioError(f"order p must be nonnegative, got {p}")
    mu = np.asarray(mu, dtype=float)
    value = (-2.0) ** p * mu ** (p + 2) / (1.0 / s_tilde + s_tilde * mu**2) ** (p + 1)
    return float(value) if value.ndim == 0 else value


def u_p_gradient(mu, s_tilde: float, p: int):
    """Closed-form derivative of u_p with respect to mu."""
    if s_tilde <= 0:
        raise ScenarioError(f"amplitude ratio must be positive, got {s_tilde}")
    mu = np.asarray(mu, dtype=float)
    x = mu * s_tilde
    value = (-2.0) ** p * ((p + 2) / x - p * x) / (1.0 / x + x) ** (p + 2)
    return float(value) if value.ndim == 0 else value


def u_p_gradient_check(
    s_tilde: float, p: int, mu_grid: np.ndarray
) -> tuple[float, float]:
    """Largest |u_p'| over the grid and the residual gradient far out.

    The tail is probed at ``mu = 1e6`` regardless of the grid so the
    decay claim is checked at a fixed reference point.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    if mu_grid.size == 0 or np.any(mu_grid == 0):
        raise ScenarioError("mu grid must be nonempty and avoid zero")
    max_abs = float(np.max(np.abs(u_p_gradient(mu_grid, s_tilde, p))))
    tail = float(abs(u_p_gradient(TAIL_MU, s_tilde, p)))
    return max_abs, tail


def subarray_mean_offsets(geometry: ArrayGeometry) -> np.ndarray:
    """Size-weighted centered subarray means ``|N_k| (mean_k - mean)``.

    Summed over all subarrays these cancel exactly; the entries for
    k >= 2 are the geometry factors of the approximate M.
    """
    mean_all = geometry.element_positions.mean()
    return np.array(
        [
            geometry.subarray_positions(k).size
            * (geometry.subarray_positions(k).mean() - mean_all)
            for k in range(1, geometry.n_subarrays + 1)
        ]
    )


def _check_approx_inputs(
    geometry: ArrayGeometry, scenario: SourceScenario
) -> tuple[float, float, complex, complex]:
    _require_two_sources(scenario)
    omega0 = float(scenario.frequencies[0])
    if abs(omega0) < 1e-9:
        raise ScenarioError(
            "reference frequency too close to broadside: the approximate M "
            "divides by the first source frequency"
        )
    s1, s2 = scenario.amplitudes
    if abs(s1) == 0 or abs(s2) == 0:
        raise ScenarioError("source coefficients must be nonzero")
    mu = 1.0 + scenario.delta_omega / omega0
    return omega0, mu, s1, s2


def approx_m_hat(geometry: ArrayGeometry, scenario: SourceScenario) -> np.ndarray:
    """Per-subarray closed-form approximation of the coupling block M."""
    omega0, mu, s1, s2 = _check_approx_inputs(geometry, scenario)
    gammas = subarray_mean_offsets(geometry)
    dw = scenario.delta_omega
    cross = abs(s1 * s2)
    columns = []
    for k in range(2, geometry.n_subarrays + 1):
        s0 = np.real(np.conj(s1) * s2 * q_subarray(geometry, dw, 0, k)) / cross
        columns.append(
            gammas[k - 1]
            * omega0
            * np.array(
                [
                    abs(s1) ** 2 + cross * s0 * mu,
                    cross * s0 + abs(s2) ** 2 * mu,
                ]
            )
        )
    if not columns:
        return np.zeros((2, 0))
    return np.column_stack(columns)


def _single_snapshot_parts(geometry: ArrayGeometry, scenario: SourceScenario):
    if scenario.snapshots != 1:
        raise ScenarioError("the penalty approximations are single-snapshot")
    blocks = fim_blocks(geometry, scenario)
    a = steering_matrix(geometry, scenario.frequencies)
    return a, blocks.d_snapshots[0], blocks.h_snapshots[0], blocks


def m_tilde(geometry: ArrayGeometry, scenario: SourceScenario) -> np.ndarray:
    """Coupling block with the projector replaced by its |Q0| -> 0 limit."""
    a, d, h, _ = _single_snapshot_parts(geometry, scenario)
    n = geometry.n_elements
    return np.real(d.conj().T @ h - d.conj().T @ a @ (a.conj().T @ h) / n)


def g_tilde(geometry: ArrayGeometry, scenario: SourceScenario) -> np.ndarray:
    """Offset block with the projector replaced by its |Q0| -> 0 limit."""
    a, _, h, _ = _single_snapshot_parts(geometry, scenario)
    n = geometry.n_elements
    out = np.real(h.conj().T @ h - h.conj().T @ a @ (a.conj().T @ h) / n)
    return (out + out.T) / 2.0


def approx_g_inverse(geometry: ArrayGeometry, scenario: SourceScenario) -> np.ndarray:
    """Diagonal-plus-rank-structure approximation of the inverse offset block."""
    _require_two_sources(scenario)
    a, _, h, _ = _single_snapshot_parts(geometry, scenario)
    if h.shape[1] == 0:
        return np.zeros((0, 0))
    n = geometry.n_elements
    b_diag = np.real(np.einsum("nk,nk->k", np.conj(h), h))
    if np.any(b_diag <= 0):
        raise ScenarioError("offset block diagonal must be positive")
    b_cols = (a.conj().T @ h) / np.sqrt(n)
    overlap = np.real(b_cols.conj().T @ b_cols)
    return np.diag(1.0 / b_diag) + overlap / np.outer(b_diag, b_diag)


def approx_mgmt(geometry: ArrayGeometry, scenario: SourceScenario) -> np.ndarray:
    """Approximate penalty ``M_hat G_hat^{-1} M_hat^T``."""
    m_hat = approx_m_hat(geometry, scenario)
    if m_hat.shape[1] == 0:
        return np.zeros((2, 2))
    g_inv = approx_g_inverse(geometry, scenario)
    return m_hat @ g_inv @ m_hat.T


def exact_mgmt(geometry: ArrayGeometry, scenario: SourceScenario) -> np.ndarray:
    """Exact penalty ``M G^{-1} M^T`` from the assembled blocks."""
    blocks = fim_blocks(geometry, scenario)
    if blocks.g.size == 0:
        return np.zeros((scenario.n_sources, scenario.n_sources))
    g_inv, _ = _guarded_inverse(blocks.g, "offset information block")
    return blocks.m @ g_inv @ blocks.m.T


def compare_mgmt(
    geometry: ArrayGeometry,
    base_scenario: SourceScenario,
    delta_grid: np.ndarray,
) -> ApproxComparison:
    """Score the approximate penalty entry (1,1) against the exact one."""
    _require_two_sources(base_scenario)
    delta_grid = np.asarray(delta_grid, dtype=float)
    omega0 = float(base_scenario.frequencies[0])
    exact = np.empty_like(delta_grid)
    approx = np.empty_like(delta_grid)
    for i, dw in enumerate(delta_grid):
        scenario = SourceScenario(
            frequencies=np.array([omega0, omega0 + dw]),
            amplitudes=base_scenario.amplitudes,
            noise_power=base_scenario.noise_power,
            snapshots=1,
        )
        exact[i] = exact_mgmt(geometry, scenario)[0, 0]
        approx[i] = approx_mgmt(geometry, scenario)[0, 0]
    rel_error = np.abs(approx - exact) / np.abs(exact)
    return ApproxComparison(
        delta_grid=delta_grid,
        norm_grid=delta_grid / rayleigh_limit(geometry),
        exact=exact,
        approx=approx,
        rel_error=rel_error,
    )


def g1_entry_closed(geometry: ArrayGeometry, scenario: SourceScenario) -> float:
    """Entry (1,1) of ``M_hat G_hat_1 M_hat^T`` in per-subarray closed form."""
    _, mu, s1, s2 = _check_approx_inputs(geometry, scenario)
    s_tilde = abs(s2 / s1)
    gammas = subarray_mean_offsets(geometry)
    sizes = geometry.subarray_sizes
    dw = scenario.delta_omega
    total = 0.0
    for k in range(2, geometry.n_subarrays + 1):
        s0 = np.real(
            np.conj(s1) * s2 * q_subarray(geometry, dw, 0, k)
        ) / abs(s1 * s2)
        denom = 1.0 / s_tilde + s_tilde * mu**2 + 2.0 * s0 * mu
        total += (
            gammas[k - 1] ** 2
            / sizes[k - 1]
            * (1.0 - s_tilde * (1.0 - s0**2) * mu**2 / denom)
        )
    return abs(s1) ** 2 * total


def g1_entry_truncated(geometry: ArrayGeometry, scenario: SourceScenario) -> float:
    """Entry (1,1) of the first penalty part with the order-3 expansion.

    The expansion coefficients are frozen at the resolution limit,
    ``mu_bar = 1 + Omega/omega0``, so the truncated value is an explicit
    polynomial in the per-subarray correlation s0.
    """
    omega0, _, s1, s2 = _check_approx_inputs(geometry, scenario)
    s_tilde = abs(s2 / s1)
    mu_bar = 1.0 + rayleigh_limit(geometry) / omega0
    u_bar = [u_p(mu_bar, s_tilde, p) for p in range(4)]
    v = np.array(
        [
            1.0 - s_tilde * u_bar[0],
            -s_tilde * u_bar[1],
            -s_tilde * u_bar[2] + s_tilde * u_bar[0],
            -s_tilde * u_bar[3] + s_tilde * u_bar[1],
            s_tilde * u_bar[2],
            s_tilde * u_bar[3],
        ]
    )
    gammas = subarray_mean_offsets(geometry)
    sizes = geometry.subarray_sizes
    dw = scenario.delta_omega
    total = 0.0
    for k in range(2, geometry.n_subarrays + 1):
        s0 = np.real(
            np.conj(s1) * s2 * q_subarray(geometry, dw, 0, k)
        ) / abs(s1 * s2)
        total += gammas[k - 1] ** 2 / sizes[k - 1] * np.polyval(v[::-1], s0)
    return abs(s1) ** 2 * total
