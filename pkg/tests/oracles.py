"""Independent finite-difference Fisher-information oracles.

These rebuild the bound from nothing but the noiseless mean of the
measurement model: numerical derivatives w.r.t. the frequencies (and,
for the partly calibrated case, w.r.t. rigid subarray shifts), exact
linear derivatives w.r.t. the source coefficients, then a Schur
complement onto the frequency block.  No steering-derivative formulas
or projector algebra are shared with the code under test.
"""

import numpy as np

from crblab.geometry import ArrayGeometry
from crblab.signal import SourceScenario, signal_matrix


def _mean_vector(
    geometry: ArrayGeometry,
    freqs: np.ndarray,
    s_mat: np.ndarray,
    subarray_shift: np.ndarray,
) -> np.ndarray:
    pos = geometry.element_positions.copy()
    for k in range(2, 2 + subarray_shift.size):
        pos[geometry.subarray_indices(k)] += subarray_shift[k - 2]
    a = np.exp(1j * np.outer(pos, freqs))
    return (a @ s_mat).ravel()


def fd_crb(
    geometry: ArrayGeometry,
    scenario: SourceScenario,
    partly: bool,
    step: float = 1e-7,
) -> np.ndarray:
    """Frequency-block bound via a finite-difference joint FIM."""
    freqs = np.asarray(scenario.frequencies, dtype=float)
    n_src = freqs.size
    s_mat = signal_matrix(scenario)
    n_shift = geometry.n_subarrays - 1 if partly else 0
    zero = np.zeros(max(n_shift, 1))

    columns = []
    for l in range(n_src):
        up, down = freqs.copy(), freqs.copy()
        up[l] += step
        down[l] -= step
        columns.append(
            (
                _mean_vector(geometry, up, s_mat, zero[:n_shift])
                - _mean_vector(geometry, down, s_mat, zero[:n_shift])
            )
            / (2 * step)
        )
    for k in range(n_shift):
        up, down = np.zeros(n_shift), np.zeros(n_shift)
        up[k] += step
        down[k] -= step
        columns.append(
            (
                _mean_vector(geometry, freqs, s_mat, up)
                - _mean_vector(geometry, freqs, s_mat, down)
            )
            / (2 * step)
        )
    base = np.exp(1j * np.outer(geometry.element_positions, freqs))
    for t in range(scenario.snapshots):
        for l in range(n_src):
            unit = np.zeros((n_src, scenario.snapshots), dtype=complex)
            unit[l, t] = 1.0
            columns.append((base @ unit).ravel())
        for l in range(n_src):
            unit = np.zeros((n_src, scenario.snapshots), dtype=complex)
            unit[l, t] = 1j
            columns.append((base @ unit).ravel())

    jac = np.column_stack(columns)
    fim = (2.0 / scenario.noise_power) * np.real(jac.conj().T @ jac)
    freq_block = fim[:n_src, :n_src]
    if fim.shape[0] > n_src:
        cross = fim[:n_src, n_src:]
        nuisance = fim[n_src:, n_src:]
        freq_block = freq_block - cross @ np.linalg.solve(nuisance, cross.T)
    return np.linalg.inv(freq_block)
