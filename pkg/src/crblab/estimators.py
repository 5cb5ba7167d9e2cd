"""Subspace direction finding: MUSIC and spectral rank-reduction.

Both estimators search a frequency grid for minima of a null spectrum
built from the sample-covariance eigenspace.  MUSIC assumes every
element position is known and projects the full steering vector onto
the noise subspace.  The rank-reduction variant assumes only the
intra-subarray layout: its test matrix stacks per-subarray steering
blocks referenced to each subarray's own first element, and the
statistic is the smallest eigenvalue of the projected block matrix, so
unknown inter-subarray offsets are absorbed into the block weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError
from .geometry import ArrayGeometry
from .signal import SnapshotSet

#: Default number of search-grid points.
GRID_POINTS = 10_000


@dataclass(frozen=True)
class SubspaceDecomposition:
    """Sample covariance eigenstructure, eigenvalues descending."""

    covariance: np.ndarray
    eigenvalues: np.ndarray
    signal_basis: np.ndarray
    noise_basis: np.ndarray


def sample_covariance(snapshots: SnapshotSet | np.ndarray) -> np.ndarray:
    """Hermitian sample covariance ``Y Y^H / T``."""
    y = np.asarray(getattr(snapshots, "data", snapshots), dtype=complex)
    if y.ndim != 2 or y.shape[1] < 1:
        raise EstimationError("snapshot set must be a nonempty N x T matrix")
    cov = y @ y.conj().T / y.shape[1]
    return (cov + cov.conj().T) / 2.0


def subspace_decomposition(cov: np.ndarray, n_sources: int) -> SubspaceDecomposition:
    """Split the covariance eigenspace into signal and noise parts."""
    cov = np.asarray(cov, dtype=complex)
    if n_sources >= cov.shape[0]:
        raise EstimationError(
            f"{n_sources} sources leave no noise subspace in dimension {cov.shape[0]}"
        )
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    return SubspaceDecomposition(
        covariance=cov,
        eigenvalues=eigvals,
        signal_basis=eigvecs[:, :n_sources],
        noise_basis=eigvecs[:, n_sources:],
    )


def search_grid(center: float, span: float, n_points: int = GRID_POINTS) -> np.ndarray:
    """Uniform frequency grid of the given span centered on a frequency."""
    if span <= 0 or n_points < 3:
        raise EstimationError("search grid needs positive span and >= 3 points")
    return np.linspace(center - span / 2.0, center + span / 2.0, n_points)


def steering_manifold(geometry: ArrayGeometry, grid: np.ndarray) -> np.ndarray:
    """N x G matrix of steering vectors over the search grid.

    Trial loops should compute this once and pass it to the estimators:
    it only depends on the geometry and the grid.
    """
    return np.exp(1j * np.outer(geometry.element_positions, grid))


def _refine_minimum(grid: np.ndarray, null: np.ndarray, idx: int) -> float:
    """Parabolic vertex through a minimum and its two neighbors."""
    step = grid[1] - grid[0]
    left, mid, right = null[idx - 1], null[idx], null[idx + 1]
    curvature = left - 2.0 * mid + right
    if curvature <= 0:
        return float(grid[idx])
    shift = 0.5 * (left - right) / curvature
    return float(grid[idx] + np.clip(shift, -1.0, 1.0) * step)


def _pick_minima(grid: np.ndarray, null: np.ndarray, n_sources: int) -> np.ndarray:
    interior = np.flatnonzero(
        (null[1:-1] < null[:-2]) & (null[1:-1] < null[2:])
    ) + 1
    if interior.size < n_sources:
        raise EstimationError(
            f"found {interior.size} spectrum minima, need {n_sources}"
        )
    deepest = interior[np.argsort(null[interior])][:n_sources]
    return np.sort([_refine_minimum(grid, null, i) for i in deepest])


def music_null_spectrum(
    geometry: ArrayGeometry,
    decomposition: SubspaceDecomposition,
    grid: np.ndarray,
    manifold: np.ndarray | None = None,
) -> np.ndarray:
    """Noise-subspace power of the full steering vector per grid point."""
    if manifold is None:
        manifold = steering_manifold(geometry, grid)
    signal_part = decomposition.signal_basis.conj().T @ manifold
    null = geometry.n_elements - np.sum(np.abs(signal_part) ** 2, axis=0)
    return np.maximum(null, 0.0)


def music_estimate(
    geometry: ArrayGeometry,
    cov: np.ndarray,
    n_sources: int,
    grid: np.ndarray,
    manifold: np.ndarray | None = None,
) -> np.ndarray:
    """Frequencies of the deepest MUSIC null minima, refined and sorted."""
    decomposition = subspace_decomposition(cov, n_sources)
    null = music_null_spectrum(geometry, decomposition, grid, manifold)
    return _pick_minima(grid, null, n_sources)


def rare_null_spectrum(
    geometry: ArrayGeometry,
    decomposition: SubspaceDecomposition,
    grid: np.ndarray,
    manifold: np.ndarray | None = None,
) -> np.ndarray:
    """Smallest eigenvalue of the block test matrix per grid point.

    Blocks are unit-normalized so the test matrix is the identity minus
    a rank-L Gram matrix; the smallest eigenvalue is then one minus the
    largest Gram eigenvalue, closed-form for one or two sources.
    """
    if manifold is None:
        manifold = steering_manifold(geometry, grid)
    e_s = decomposition.signal_basis
    n_src = e_s.shape[1]
    k_total = geometry.n_subarrays
    projected = np.empty((k_total, n_src, grid.size), dtype=complex)
    for k in range(1, k_total + 1):
        idx = geometry.subarray_indices(k)
        offset_phase = np.exp(-1j * geometry.inter_subarray_offsets[k - 1] * grid)
        block = manifold[idx] * (offset_phase / np.sqrt(idx.size))[None, :]
        projected[k - 1] = e_s[idx].conj().T @ block

    if n_src == 1:
        gram_max = np.sum(np.abs(projected[:, 0, :]) ** 2, axis=0)
    elif n_src == 2:
        gaa = np.sum(np.abs(projected[:, 0, :]) ** 2, axis=0)
        gbb = np.sum(np.abs(projected[:, 1, :]) ** 2, axis=0)
        gab = np.sum(projected[:, 0, :] * np.conj(projected[:, 1, :]), axis=0)
        half_gap = np.sqrt(((gaa - gbb) / 2.0) ** 2 + np.abs(gab) ** 2)
        gram_max = (gaa + gbb) / 2.0 + half_gap
    else:
        gram = np.einsum("klg,kmg->glm", projected, np.conj(projected))
        gram_max = np.linalg.eigvalsh(gram)[:, -1]
    return np.maximum(1.0 - gram_max, 0.0)


def spectral_rare_estimate(
    geometry: ArrayGeometry,
    cov: np.ndarray,
    n_sources: int,
    grid: np.ndarray,
    manifold: np.ndarray | None = None,
) -> np.ndarray:
    """Frequencies of the deepest rank-reduction minima, refined and sorted."""
    if n_sources >= int(geometry.subarray_sizes.min()):
        raise EstimationError(
            "sources must be identifiable by the smallest subarray"
        )
    decomposition = subspace_decomposition(cov, n_sources)
    null = rare_null_spectrum(geometry, decomposition, grid, manifold)
    return _pick_minima(grid, null, n_sources)
