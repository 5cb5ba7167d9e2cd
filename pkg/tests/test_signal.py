import numpy as np
import pytest

from crblab import (
    ScenarioError,
    SourceScenario,
    angle_to_frequency,
    build_uniform_distributed_geometry,
    frequency_separation,
    steering_derivative,
    steering_vector,
    synthesize_snapshots,
)
from crblab.geometry import ArrayGeometry
from crblab.signal import default_amplitudes, uniform_frequencies, varied_amplitudes


@pytest.fixture(scope="module")
def geometry():
    return build_uniform_distributed_geometry(3, 4, 0.5, 5, 1.0)


def test_angle_to_frequency_examples():
    assert angle_to_frequency(0.0, 1.0) == 0.0
    theta = np.deg2rad(1.2)
    assert angle_to_frequency(theta, 1.0) == pytest.approx(
        2 * np.pi * np.sin(theta), abs=1e-12
    )
    assert angle_to_frequency(theta, 1.0) == pytest.approx(0.13159, abs=1e-5)
    with pytest.raises(ScenarioError):
        angle_to_frequency(np.pi / 2, 1.0)


def test_frequency_separation_matches_difference():
    rng = np.random.default_rng(0)
    thetas = rng.uniform(-np.pi / 2 * 0.99, np.pi / 2 * 0.99, (1000, 2))
    for t1, t2 in thetas:
        direct = angle_to_frequency(t2, 1.5) - angle_to_frequency(t1, 1.5)
        assert frequency_separation(t1, t2, 1.5) == pytest.approx(direct, abs=1e-12)


def test_frequency_separation_symmetry_and_zero():
    assert frequency_separation(0.3, 0.3, 1.0) == 0.0
    a = frequency_separation(np.deg2rad(1.2), np.deg2rad(2.2), 1.0)
    b = frequency_separation(np.deg2rad(-2.2), np.deg2rad(-1.2), 1.0)
    assert a == pytest.approx(b, abs=1e-13)
    assert a == pytest.approx(0.10961, abs=1e-5)


def test_steering_vector_examples(geometry):
    assert np.allclose(steering_vector(geometry, 0.0), 1.0)
    v = steering_vector(geometry, 0.777)
    assert np.allclose(np.abs(v), 1.0)
    two = ArrayGeometry(np.array([0.0, 0.5]), ((0, 2),), 1.0)
    assert np.allclose(steering_vector(two, 2 * np.pi), [1.0, -1.0])


def test_steering_exponential_additivity(geometry):
    w1, w2 = 0.31, 1.7
    combined = steering_vector(geometry, w1 + w2)
    product = steering_vector(geometry, w1) * steering_vector(geometry, w2)
    assert np.max(np.abs(combined - product)) < 1e-12


def test_steering_derivative_against_finite_difference(geometry):
    rng = np.random.default_rng(7)
    step = 1e-6
    for omega in rng.uniform(-2.0, 2.0, 5):
        exact = steering_derivative(geometry, omega)
        approx = (
            steering_vector(geometry, omega + step)
            - steering_vector(geometry, omega - step)
        ) / (2 * step)
        scale = np.abs(exact).max()
        assert np.max(np.abs(exact - approx)) / scale < 1e-6
    assert steering_derivative(geometry, 0.5)[0] == 0.0
    assert np.allclose(
        steering_derivative(geometry, 0.0), 1j * geometry.element_positions
    )


def test_scenario_validation():
    with pytest.raises(ScenarioError, match="strictly increasing"):
        SourceScenario(np.array([0.2, 0.1]), np.ones(2), 1.0)
    with pytest.raises(ScenarioError, match="amplitudes"):
        SourceScenario(np.array([0.1, 0.2]), np.ones(3), 1.0)
    with pytest.raises(ScenarioError, match="noise"):
        SourceScenario(np.array([0.1]), np.ones(1), -1.0)
    with pytest.raises(ScenarioError, match="amplitude mode"):
        SourceScenario(np.array([0.1]), np.ones(1), 1.0, amplitude_mode="bogus")
    matrix = SourceScenario(np.array([0.1, 0.2]), np.ones((2, 5)), 1.0, snapshots=5)
    assert matrix.amplitudes.shape == (2, 5)


def test_uniform_frequencies_placement():
    freqs = uniform_frequencies(np.deg2rad(1.2), np.deg2rad(3.2), 3, 1.0)
    assert freqs.size == 3
    mid = angle_to_frequency(np.deg2rad(2.2), 1.0)
    assert freqs[1] == pytest.approx(mid, abs=1e-12)


def test_noiseless_synthesis_is_pure_steering(geometry):
    omega = 0.4
    sc = SourceScenario(np.array([omega]), np.array([1.0 + 0j]), 0.0, snapshots=3)
    snap = synthesize_snapshots(geometry, sc, seed=1)
    expected = steering_vector(geometry, omega)
    for t in range(3):
        assert np.allclose(snap.data[:, t], expected)


def test_noise_variance_matches_power(geometry):
    sc = SourceScenario(
        np.array([0.4]), np.array([0.0 + 0j]), noise_power=2.5, snapshots=1000
    )
    snap = synthesize_snapshots(geometry, sc, seed=3)
    sample_var = np.mean(np.abs(snap.data) ** 2)
    assert sample_var == pytest.approx(2.5, rel=0.03)


def test_synthesis_determinism(geometry):
    sc = SourceScenario(np.array([0.4, 0.5]), np.ones(2), 0.1, snapshots=4)
    a = synthesize_snapshots(geometry, sc, seed=99)
    b = synthesize_snapshots(geometry, sc, seed=99)
    assert np.array_equal(a.data, b.data)
    c = synthesize_snapshots(geometry, sc, seed=(99, 1))
    assert not np.array_equal(a.data, c.data)


def test_identifiability_enforced(geometry):
    # smallest subarray has 4 elements: 4 sources are too many
    sc = SourceScenario(np.arange(1, 5) * 0.1, np.ones(4), 0.1)
    with pytest.raises(ScenarioError, match="identifiable"):
        synthesize_snapshots(geometry, sc, seed=0)


def test_default_and_varied_amplitudes():
    amps = default_amplitudes(3)
    assert np.allclose(np.abs(amps), 1.0)
    assert amps[0] == pytest.approx(np.exp(1j * np.pi / 5))
    varied = varied_amplitudes(3, 4, seed=2)
    assert varied.shape == (3, 4)
    assert np.allclose(np.abs(varied), 1.0)
    assert np.array_equal(varied, varied_amplitudes(3, 4, seed=2))
