import numpy as np
import pytest

from crblab import (
    ArrayGeometry,
    GeometryError,
    aperture,
    build_uniform_distributed_geometry,
    random_distributed_geometry,
    rayleigh_limit,
)


def reference_geometry():
    return build_uniform_distributed_geometry(10, 10, 0.5, 50, 1.0)


def test_reference_array_dimensions():
    g = reference_geometry()
    assert g.n_elements == 100
    assert g.n_subarrays == 10
    assert aperture(g) == pytest.approx(454.5)


def test_two_subarray_construction():
    g = build_uniform_distributed_geometry(2, 2, 0.5, 1, 1.0)
    assert np.allclose(g.element_positions, [0.0, 0.5, 1.0, 1.5])


def test_overlap_rejected_with_pair_named():
    with pytest.raises(GeometryError, match="subarrays 1 and 2 overlap"):
        build_uniform_distributed_geometry(2, 3, 1.0, 1, 1.0)


def test_offsets_match_first_elements():
    g = reference_geometry()
    assert np.allclose(g.inter_subarray_offsets, 50.0 * np.arange(10))
    assert g.inter_subarray_offsets[0] == 0.0


def test_aperture_examples():
    assert aperture(ArrayGeometry(np.array([0.0, 0.5]), ((0, 2),), 1.0)) == 0.5
    single = ArrayGeometry(np.arange(10) * 0.5, ((0, 10),), 1.0)
    assert aperture(single) == 4.5


def test_rayleigh_limit_values():
    g = reference_geometry()
    omega = rayleigh_limit(g)
    assert omega == pytest.approx(2 * np.pi / 454.5)
    assert omega == pytest.approx(0.014, abs=2e-4)
    flat = ArrayGeometry(np.array([0.0, 2 * np.pi]), ((0, 2),), 1.0)
    assert rayleigh_limit(flat) == pytest.approx(1.0)
    half = ArrayGeometry(np.array([0.0, np.pi]), ((0, 2),), 1.0)
    assert rayleigh_limit(half) == pytest.approx(2.0)


def test_rayleigh_times_aperture_is_two_pi():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = random_distributed_geometry(4, 3, 50.0, rng)
        assert rayleigh_limit(g) * aperture(g) == pytest.approx(2 * np.pi, abs=1e-12)


def test_invariants_on_constructed_geometries():
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = random_distributed_geometry(5, 4, 100.0, rng)
        pos = g.element_positions
        assert pos[0] == 0.0
        assert np.all(np.diff(pos) > 0)
        assert aperture(g) == pos.max() - pos.min()
        joined = np.concatenate([g.subarray_indices(k) for k in range(1, 6)])
        assert np.array_equal(joined, np.arange(g.n_elements))


def test_validation_errors():
    with pytest.raises(GeometryError, match="first element"):
        ArrayGeometry(np.array([1.0, 2.0]), ((0, 2),), 1.0)
    with pytest.raises(GeometryError, match="strictly increasing"):
        ArrayGeometry(np.array([0.0, 2.0, 1.0]), ((0, 3),), 1.0)
    with pytest.raises(GeometryError, match="non-contiguous"):
        ArrayGeometry(np.array([0.0, 1.0, 2.0]), ((0, 1), (2, 3)), 1.0)
    with pytest.raises(GeometryError, match="partition covers"):
        ArrayGeometry(np.array([0.0, 1.0, 2.0]), ((0, 2),), 1.0)
    with pytest.raises(GeometryError, match="wavelength"):
        ArrayGeometry(np.array([0.0, 1.0]), ((0, 2),), 0.0)
    with pytest.raises(GeometryError):
        build_uniform_distributed_geometry(1, 4, 0.5, 10, 1.0)


def test_geometry_is_immutable():
    g = reference_geometry()
    with pytest.raises((ValueError, AttributeError)):
        g.element_positions[0] = 5.0
