"""Exact Cramer-Rao bounds for fully and partly calibrated arrays.

For a deterministic-coefficient model the Fisher information of the
frequencies splits into three real blocks: the frequency block F, the
frequency/offset coupling M, and the offset block G.  With all element
positions known the bound is ``(sigma^2/2) * F^{-1}``; with unknown
inter-subarray offsets the offsets are nuisance parameters and the bound
becomes ``(sigma^2/2) * (F - M G^{-1} M^T)^{-1}``.

Multi-snapshot blocks are the sums of the single-snapshot ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError, SingularModelError
from .geometry import ArrayGeometry
from .signal import (
    SourceScenario,
    check_identifiable,
    signal_matrix,
    steering_derivative,
    steering_matrix,
)

#: Condition-number guard for every inversion in this module.  Beyond it
#: the model is treated as singular rather than returning garbage.
CONDITION_LIMIT = 1e12


def projection_complement(a: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the complement of the columns of ``a``."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.shape[0] < a.shape[1]:
        raise SingularModelError(
            f"cannot project out {a.shape[1]} columns in dimension {a.shape[0]}"
        )
    singulars = np.linalg.svd(a, compute_uv=False)
    condition = np.inf if singulars[-1] == 0 else float(singulars[0] / singulars[-1])
    if condition > CONDITION_LIMIT:
        raise SingularModelError("steering matrix is rank deficient", condition)
    q, _ = np.linalg.qr(a)
    return np.eye(a.shape[0], dtype=complex) - q @ q.conj().T


def _guarded_inverse(mat: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    """Inverse of a symmetric positive-definite matrix with a condition guard.

    The information matrices handled here are nonnegative by
    construction, so a nonpositive eigenvalue means precision is gone
    and the model is treated as singular.
    """
    if mat.size == 0:
        return mat.reshape(mat.shape), 1.0
    eigvals = np.linalg.eigvalsh(mat)
    smallest = float(eigvals[0])
    condition = np.inf if smallest <= 0 else float(eigvals[-1]) / smallest
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularModelError(f"{what} is singular", condition)
    return np.linalg.inv(mat), condition


@dataclass(frozen=True)
class FimBlocks:
    """Fisher-information blocks and their per-snapshot ingredients."""

    f: np.ndarray
    m: np.ndarray
    g: np.ndarray
    pi_perp: np.ndarray
    d_snapshots: tuple[np.ndarray, ...]
    h_snapshots: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class CrbReport:
    """Bound matrix for one scenario plus derived scalar summaries."""

    crb_matrix: np.ndarray
    average_crb: float
    lee_srl: float | None
    smith_srl: float | None
    calibration_mode: str
    conditioning: dict[str, float]


def _offset_jacobian(
    geometry: ArrayGeometry, a: np.ndarray, omegas: np.ndarray, s_col: np.ndarray
) -> np.ndarray:
    """N x (K-1) derivative of the noiseless mean w.r.t. the offsets.

    Column k-2 is supported on subarray k only (k = 2..K); the first
    subarray block stays zero because its offset is the fixed reference.
    """
    n, k_total = geometry.n_elements, geometry.n_subarrays
    h = np.zeros((n, k_total - 1), dtype=complex)
    weighted = a * (1j * omegas * s_col)[None, :]
    block = weighted.sum(axis=1)
    for k in range(2, k_total + 1):
        idx = geometry.subarray_indices(k)
        h[idx, k - 2] = block[idx]
    return h


def fim_blocks(geometry: ArrayGeometry, scenario: SourceScenario) -> FimBlocks:
    """Assemble F, M, G for a scenario with deterministic coefficients."""
    if scenario.amplitude_mode != "fixed":
        raise ScenarioError("Fisher blocks require deterministic coefficients")
    check_identifiable(geometry, scenario)

    omegas = scenario.frequencies
    n_src = scenario.n_sources
    a = steering_matrix(geometry, omegas)
    pi = projection_complement(a)
    derivs = np.column_stack(
        [steering_derivative(geometry, w) for w in omegas]
    )
    s = signal_matrix(scenario)

    k_total = geometry.n_subarrays
    f = np.zeros((n_src, n_src))
    m = np.zeros((n_src, k_total - 1))
    g = np.zeros((k_total - 1, k_total - 1))
    d_list = []
    h_list = []
    for t in range(scenario.snapshots):
        d_t = derivs * s[:, t][None, :]
        h_t = _offset_jacobian(geometry, a, omegas, s[:, t])
        pd = pi @ d_t
        ph = pi @ h_t
        f += np.real(d_t.conj().T @ pd)
        m += np.real(d_t.conj().T @ ph)
        g += np.real(h_t.conj().T @ ph)
        d_list.append(d_t)
        h_list.append(h_t)

    f = (f + f.T) / 2.0
    g = (g + g.T) / 2.0
    return FimBlocks(f, m, g, pi, tuple(d_list), tuple(h_list))


def _finish_report(
    crb: np.ndarray, mode: str, conditioning: dict[str, float]
) -> CrbReport:
    crb = (crb + crb.T) / 2.0
    diag = np.diag(crb)
    lee = smith = None
    if crb.shape[0] == 2:
        lee = lee_srl(crb)
        smith = smith_srl(crb)
    return CrbReport(
        crb_matrix=crb,
        average_crb=float(diag.mean()),
        lee_srl=lee,
        smith_srl=smith,
        calibration_mode=mode,
        conditioning=conditioning,
    )


def crb_fc_from_blocks(blocks: FimBlocks, noise_power: float) -> CrbReport:
    inv, condition = _guarded_inverse(blocks.f, "frequency information block")
    return _finish_report(
        (noise_power / 2.0) * inv, "fully", {"fim": condition}
    )


def crb_pc_from_blocks(blocks: FimBlocks, noise_power: float) -> CrbReport:
    if blocks.g.size == 0:
        # no unknown offsets: partly calibrated degenerates to fully
        inv, condition = _guarded_inverse(blocks.f, "frequency information block")
        return _finish_report(
            (noise_power / 2.0) * inv, "partly", {"fim": condition}
        )
    g_inv, g_condition = _guarded_inverse(blocks.g, "offset information block")
    schur = blocks.f - blocks.m @ g_inv @ blocks.m.T
    schur = (schur + schur.T) / 2.0
    inv, condition = _guarded_inverse(schur, "offset-marginalized information")
    return _finish_report(
        (noise_power / 2.0) * inv,
        "partly",
        {"fim": condition, "offset_block": g_condition},
    )


def crb_fc(geometry: ArrayGeometry, scenario: SourceScenario) -> CrbReport:
    """Bound with all element positions known."""
    return crb_fc_from_blocks(fim_blocks(geometry, scenario), scenario.noise_power)


def crb_pc(geometry: ArrayGeometry, scenario: SourceScenario) -> CrbReport:
    """Bound with unknown inter-subarray offsets marginalized out."""
    return crb_pc_from_blocks(fim_blocks(geometry, scenario), scenario.noise_power)


def average_crb(report: CrbReport) -> float:
    """Mean of the per-source bound diagonal."""
    return float(np.diag(report.crb_matrix).mean())


def smith_srl(crb_matrix: np.ndarray) -> float:
    """Standard deviation of the separation estimate, ``sqrt(u^T C u)``.

    Single-evaluation form; the separation-consistent fixed point lives
    in the sweep module.
    """
    crb_matrix = np.asarray(crb_matrix, dtype=float)
    if crb_matrix.shape != (2, 2):
        raise ScenarioError("separation criterion is defined for two sources")
    u = np.array([1.0, -1.0])
    return float(np.sqrt(u @ crb_matrix @ u))


def lee_srl(crb_matrix: np.ndarray) -> float:
    """Twice the worse per-source standard deviation."""
    crb_matrix = np.asarray(crb_matrix, dtype=float)
    if crb_matrix.shape != (2, 2):
        raise ScenarioError("separation criterion is defined for two sources")
    return float(2.0 * np.sqrt(np.diag(crb_matrix).max()))
