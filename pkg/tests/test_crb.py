import numpy as np
import pytest

from crblab import (
    ScenarioError,
    SingularModelError,
    SourceScenario,
    average_crb,
    build_uniform_distributed_geometry,
    crb_fc,
    crb_pc,
    fim_blocks,
    lee_srl,
    projection_complement,
    random_distributed_geometry,
    smith_srl,
)
from crblab.geometry import ArrayGeometry
from crblab.signal import default_amplitudes, varied_amplitudes

from oracles import fd_crb


@pytest.fixture(scope="module")
def small_geometry():
    return build_uniform_distributed_geometry(3, 4, 0.5, 4, 1.0)


def two_source_scenario(sep, noise_power=0.01, snapshots=1):
    return SourceScenario(
        np.array([0.13, 0.13 + sep]),
        default_amplitudes(2),
        noise_power,
        snapshots,
    )


def test_projection_complement_all_ones():
    ones = np.ones((4, 1))
    pi = projection_complement(ones)
    assert np.allclose(pi, np.eye(4) - 0.25 * np.ones((4, 4)))


def test_projection_complement_properties(small_geometry):
    rng = np.random.default_rng(5)
    a = rng.standard_normal((12, 3)) + 1j * rng.standard_normal((12, 3))
    pi = projection_complement(a)
    assert np.max(np.abs(pi @ pi - pi)) < 1e-10
    assert np.max(np.abs(pi - pi.conj().T)) < 1e-10
    assert np.linalg.norm(pi @ a) < 1e-10 * np.linalg.norm(a)


def test_projection_complement_rank_deficiency():
    col = np.exp(1j * np.arange(6))[:, None]
    with pytest.raises(SingularModelError) as err:
        projection_complement(np.hstack([col, col]))
    assert err.value.condition > 1e12


def test_single_source_closed_form(small_geometry):
    sc = SourceScenario(np.array([0.3]), np.array([1.0 + 0j]), 0.02)
    blocks = fim_blocks(small_geometry, sc)
    pos = small_geometry.element_positions
    expected = pos @ pos - pos.sum() ** 2 / pos.size
    assert blocks.f[0, 0] == pytest.approx(expected, rel=1e-12)
    report = crb_fc(small_geometry, sc)
    assert report.crb_matrix[0, 0] == pytest.approx(0.02 / (2 * expected), rel=1e-12)


def test_fim_block_shapes_and_symmetry(small_geometry):
    sc = two_source_scenario(0.2)
    blocks = fim_blocks(small_geometry, sc)
    k = small_geometry.n_subarrays
    assert blocks.f.shape == (2, 2)
    assert blocks.m.shape == (2, k - 1)
    assert blocks.g.shape == (k - 1, k - 1)
    assert np.allclose(blocks.f, blocks.f.T)
    assert np.allclose(blocks.g, blocks.g.T)
    assert np.min(np.linalg.eigvalsh(blocks.g)) >= -1e-10
    # first-subarray rows of the offset jacobian stay zero
    h = blocks.h_snapshots[0]
    assert np.allclose(h[small_geometry.subarray_indices(1), :], 0.0)


def test_offset_information_scalar_for_two_subarrays():
    g = build_uniform_distributed_geometry(2, 4, 0.5, 4, 1.0)
    blocks = fim_blocks(g, two_source_scenario(0.3))
    assert blocks.g.shape == (1, 1)
    assert blocks.g[0, 0] >= 0.0


def test_crb_against_fd_oracle(small_geometry):
    sc = two_source_scenario(0.25)
    mine_fc = crb_fc(small_geometry, sc).crb_matrix
    mine_pc = crb_pc(small_geometry, sc).crb_matrix
    oracle_fc = fd_crb(small_geometry, sc, partly=False)
    oracle_pc = fd_crb(small_geometry, sc, partly=True)
    assert np.max(np.abs(mine_fc - oracle_fc)) / np.max(np.abs(oracle_fc)) < 1e-3
    assert np.max(np.abs(mine_pc - oracle_pc)) / np.max(np.abs(oracle_pc)) < 1e-3


def test_noise_scale_equivariance(small_geometry):
    lo = crb_fc(small_geometry, two_source_scenario(0.2, noise_power=0.01))
    hi = crb_fc(small_geometry, two_source_scenario(0.2, noise_power=0.02))
    assert np.allclose(hi.crb_matrix, 2.0 * lo.crb_matrix, rtol=1e-12)


def test_noise_factorization_over_decades(small_geometry):
    ratios = []
    for noise in (0.01, 1.0, 100.0):
        report = crb_pc(small_geometry, two_source_scenario(0.2, noise_power=noise))
        ratios.append(report.crb_matrix / noise)
    assert np.max(np.abs(ratios[0] - ratios[1])) / np.max(np.abs(ratios[0])) < 1e-10
    assert np.max(np.abs(ratios[0] - ratios[2])) / np.max(np.abs(ratios[0])) < 1e-10


def test_multi_snapshot_additivity(small_geometry):
    single = fim_blocks(small_geometry, two_source_scenario(0.2, snapshots=1))
    multi = fim_blocks(small_geometry, two_source_scenario(0.2, snapshots=5))
    assert np.allclose(multi.f, 5 * single.f, rtol=1e-10)
    assert np.allclose(multi.m, 5 * single.m, rtol=1e-10)
    assert np.allclose(multi.g, 5 * single.g, rtol=1e-10)


def test_partly_dominates_fully(small_geometry):
    fc = crb_fc(small_geometry, two_source_scenario(0.3))
    pc = crb_pc(small_geometry, two_source_scenario(0.3))
    assert np.min(np.linalg.eigvalsh(pc.crb_matrix - fc.crb_matrix)) >= -1e-10


def test_psd_ordering_randomized_suite():
    rng = np.random.default_rng(17)
    for _ in range(40):
        g = random_distributed_geometry(3, 4, 30.0, rng)
        omega = 2 * np.pi / g.element_positions[-1]
        sep = rng.uniform(0.5, 8.0) * omega
        base = rng.uniform(0.05, 0.3)
        sc = SourceScenario(
            np.array([base, base + sep]),
            np.exp(2j * np.pi * rng.random(2)),
            1.0,
        )
        fc = crb_fc(g, sc)
        pc = crb_pc(g, sc)
        assert np.min(np.linalg.eigvalsh(pc.crb_matrix - fc.crb_matrix)) >= -1e-10


def test_single_subarray_degenerates_to_fully():
    g = ArrayGeometry(np.arange(8) * 0.5, ((0, 8),), 1.0)
    sc = two_source_scenario(0.5)
    fc = crb_fc(g, sc)
    pc = crb_pc(g, sc)
    assert np.allclose(fc.crb_matrix, pc.crb_matrix)
    assert pc.calibration_mode == "partly"


def test_coincident_sources_rejected(small_geometry):
    sc = SourceScenario(
        np.array([0.13, 0.13 + 1e-13]), default_amplitudes(2), 0.01
    )
    with pytest.raises(SingularModelError):
        crb_fc(small_geometry, sc)


def test_gaussian_amplitudes_rejected(small_geometry):
    sc = SourceScenario(
        np.array([0.1, 0.2]), np.ones(2), 0.01, amplitude_mode="gaussian"
    )
    with pytest.raises(ScenarioError, match="deterministic"):
        fim_blocks(small_geometry, sc)


def test_average_crb_values(small_geometry):
    report = crb_fc(small_geometry, two_source_scenario(0.3))
    assert average_crb(report) == pytest.approx(
        np.diag(report.crb_matrix).mean()
    )
    assert report.average_crb == average_crb(report)


def test_smith_srl_examples():
    assert smith_srl(np.diag([3.0, 3.0])) == pytest.approx(np.sqrt(6.0))
    assert smith_srl(np.full((2, 2), 2.0)) == pytest.approx(0.0, abs=1e-12)
    assert smith_srl(np.array([[4.0, 1.0], [1.0, 16.0]])) == pytest.approx(
        np.sqrt(18.0)
    )
    with pytest.raises(ScenarioError):
        smith_srl(np.eye(3))


def test_lee_srl_examples():
    assert lee_srl(np.diag([4.0, 16.0])) == pytest.approx(8.0)
    assert lee_srl(np.diag([3.0, 3.0])) == pytest.approx(2 * np.sqrt(3.0))
    rng = np.random.default_rng(2)
    for _ in range(50):
        root = rng.standard_normal((2, 2))
        mat = root @ root.T + np.diag(rng.uniform(0.1, 1.0, 2))
        if mat[0, 1] >= 0:
            assert lee_srl(mat) >= smith_srl(mat)


def test_report_carries_criteria_for_two_sources(small_geometry):
    report = crb_fc(small_geometry, two_source_scenario(0.3))
    assert report.lee_srl is not None and report.smith_srl is not None
    sc3 = SourceScenario(
        np.array([0.1, 0.2, 0.3]), varied_amplitudes(3, 2), 0.01, 2
    )
    report3 = crb_fc(small_geometry, sc3)
    assert report3.lee_srl is None and report3.smith_srl is None
    assert average_crb(report3) == pytest.approx(
        np.diag(report3.crb_matrix).mean()
    )
