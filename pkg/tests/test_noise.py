import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiabatic_sensing import noise, qcore
from adiabatic_sensing.errors import ParameterError


def test_spec_validation():
    with pytest.raises(ParameterError):
        noise.NoiseSpec("pink")
    with pytest.raises(ParameterError):
        noise.NoiseSpec("ou", -1.0)
    with pytest.raises(ParameterError):
        noise.NoiseSpec("ou", 0.1, 0.0)
    with pytest.raises(ParameterError):
        noise.NoiseSpec("ou", 0.1, 1.0, "bath")


def test_zero_sigma_is_zero():
    tr = noise.sample_trajectory(noise.NoiseSpec("ou", 0.0, 10.0), 50, 0.5)
    assert np.all(tr.values == 0)


def test_dt_guard():
    with pytest.raises(ParameterError):
        noise.sample_trajectory(noise.NoiseSpec("ou", 0.1, 10.0), 10, 2.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_reproducible_streams(seed, stream):
    spec = noise.NoiseSpec("ou", 0.3, 5.0, seed=seed)
    a = noise.sample_trajectory(spec, 20, 0.5, stream).values
    b = noise.sample_trajectory(spec, 20, 0.5, stream).values
    assert np.array_equal(a, b)
    batch = noise.sample_batch(spec, 20, 0.5, [stream, stream + 1])
    assert np.array_equal(batch[0], a)


def test_ou_statistics():
    sigma, tau_c, dt = 0.2, 10.0, 1.0
    v = noise.sample_batch(noise.NoiseSpec("ou", sigma, tau_c, seed=4), 40, dt, np.arange(10_000))
    for j in (0, 17, 39):
        assert np.var(v[:, j]) == pytest.approx(sigma**2, rel=0.03)
    lag = int(tau_c / dt)
    ac = np.mean(v[:, 5] * v[:, 5 + lag])
    assert ac == pytest.approx(sigma**2 / np.e, rel=0.05)


def test_stationary_mean():
    v = noise.sample_trajectory(noise.NoiseSpec("ou", 0.1, 1.0, seed=2), 20_000, 0.1).values
    assert abs(v.mean()) < 5 * 0.1 * np.sqrt(2 * 1.0 / 20_000)


def test_static_gaussian_constant():
    tr = noise.sample_trajectory(noise.NoiseSpec("static_gaussian", 0.1, seed=1), 10, 1.0, 3)
    assert np.all(tr.values == tr.values[0])


def test_apply_noise_splits_on_grid():
    tl = noise.apply_noise([("free", 0.3), ("y", 0.0), ("gate", 1.7), ("free", 0.25)], 1.0)
    assert tl.kinds == ("free", "y", "gate", "gate", "free")
    np.testing.assert_allclose(tl.durations, [0.3, 0, 0.7, 1.0, 0.25])
    np.testing.assert_array_equal(tl.grid_index, [0, -1, 0, 1, 2])
    np.testing.assert_allclose(tl.detuning(np.array([1.0, 2.0, 3.0])), [1, 0, 1, 2, 3])


def test_apply_noise_window_mismatch():
    with pytest.raises(ParameterError):
        noise.apply_noise([("free", 5.0)], 1.0, grid_size=3)


def test_zero_trajectory_identical_to_noiseless():
    from adiabatic_sensing.dd import build_cycle
    from adiabatic_sensing.model import ground_state
    from adiabatic_sensing.protocol import conditional_coherence
    c = build_cycle(1, 0.08, 1.57)
    psi = ground_state(0.03, 1).ground
    f0 = conditional_coherence(psi, c, 5, 0.03, 1, 1.5)
    fz = conditional_coherence(psi, c, 5, 0.03, 1, 1.5, noise_values=np.zeros(70), noise_dt=0.5)
    assert abs(f0 - fz) < 1e-12


def test_static_detuning_phase_on_bare_sensor():
    d, T = 0.037, 12.0
    H = d * qcore.SIGMA_Z
    plus = np.array([1, 1]) / np.sqrt(2)
    out = qcore.evolve(H, T, plus)
    rel = np.angle(out[0] / out[1])
    assert np.angle(np.exp(-2j * d * T)) == pytest.approx(rel, abs=1e-12)
    phase = noise.integrated_phase(np.full(13, d), 1.0, T)
    assert 2 * phase == pytest.approx(2 * d * T)


def test_static_gaussian_contrast_decay():
    sigma, T = 0.1, 5.0
    v = noise.sample_batch(noise.NoiseSpec("static_gaussian", sigma, seed=9), T, 1.0, np.arange(10_000))
    assert noise.plain_ramsey_contrast(v, 1.0, T) == pytest.approx(np.exp(-2 * sigma**2 * T**2), rel=0.03)


def test_leakage_second_order_in_sigma():
    v = noise.sample_batch(noise.NoiseSpec("ou", 1.0, 10.0, seed=5), 21, 1.0, np.arange(2000))
    l1 = noise.sensor_leakage(0.02, 1.0, 0.05 * v, 1.0, 20).mean()
    l2 = noise.sensor_leakage(0.02, 1.0, 0.10 * v, 1.0, 20).mean()
    assert 3.5 <= l2 / l1 <= 4.5


def test_integrated_phase_bounds():
    with pytest.raises(ParameterError):
        noise.integrated_phase(np.ones(3), 1.0, 3.5)
    assert noise.integrated_phase(np.ones(4), 1.0, 3.5) == pytest.approx(3.5)
