import csv
import io
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiabatic_sensing import protocol as pr
from adiabatic_sensing import qcore
from adiabatic_sensing.dd import build_cycle, gate_duration
from adiabatic_sensing.errors import ParameterError
from adiabatic_sensing.model import SensorParams, ground_state
from adiabatic_sensing.noise import NoiseSpec

P = SensorParams(b0=0.02)


def test_no_coupling_gives_unit_coherence():
    c = build_cycle(1, 0.1, gate_duration(0.02, 1))
    f = pr.conditional_coherence(ground_state(0.03, 1).state(0.2), c, 7, 0.03, 1.0, 0.0)
    assert f == pytest.approx(1.0, abs=1e-14)


def test_ideal_coherence_closed_form():
    frame = ground_state(0.03, 1)
    f = pr._ideal_coherence(frame, 0.0, 1.5, 40.0)
    phi = 2 * 1.5 * np.cos(frame.theta) * 40
    assert abs(f) == pytest.approx(1, abs=1e-15)
    assert f == pytest.approx(np.exp(-1j * phi))


def test_product_matches_oracle_n3():
    cfg = pr.RamseyConfig(params=SensorParams(b0=0.03), N=3, T_s=3.2, tau=0.1, model="dd_numeric")
    a = pr.ramsey_run(cfg, [0.0, 0.004])
    b = pr.full_oracle(cfg, [0.0, 0.004])
    np.testing.assert_allclose(a.expectation, b.expectation, atol=1e-10)


def test_ideal_scan_closed_form():
    scan = np.linspace(0, 0.1, 51)
    curve = pr.ramsey_run(pr.RamseyConfig(params=P, N=1, T_s=40.0), scan)
    b = 0.02 + scan
    expected = (1 + np.cos(2 * 1.5 * b / np.hypot(1, b) * 40)) / 2
    np.testing.assert_allclose(curve.expectation, expected, atol=1e-12)
    assert np.ptp(curve.expectation) > 0.9


def test_variance_is_binomial():
    curve = pr.ramsey_run(pr.RamseyConfig(params=P, N=2, T_s=40.0, model="dd_numeric"), np.linspace(0, 0.01, 5))
    np.testing.assert_allclose(curve.variance, curve.expectation * (1 - curve.expectation), atol=1e-12)


def test_dd_tracks_ideal_signal():
    scan = np.linspace(0, 0.1, 101)
    ideal = pr.ramsey_run(pr.RamseyConfig(params=P, T_s=40.0), scan)
    ddn = pr.ramsey_run(pr.RamseyConfig(params=P, T_s=40.0, tau=0.08, model="dd_numeric"), scan)
    assert np.max(np.abs(ideal.expectation - ddn.expectation)) <= 0.05


def test_imperfect_prep_slope_at_odd_k():
    p = SensorParams(b0=0.03)
    Ts = pr.optimal_interrogation(1.5, 1, 0.03)
    scan = np.linspace(-1e-4, 1e-4, 5)
    s_id = np.gradient(pr.ramsey_run(pr.RamseyConfig(params=p, T_s=Ts), scan).expectation, scan)[2]
    s_ip = np.gradient(pr.ramsey_run(pr.RamseyConfig(params=p, T_s=Ts, model="imperfect_prep",
                                                      prep_error=0.05), scan).expectation, scan)[2]
    assert abs(s_ip) == pytest.approx(abs(s_id), rel=1e-6)


def test_signal_is_one_at_zero_time():
    for model in ("ideal", "dd_numeric", "imperfect_prep", "cp_map"):
        cfg = pr.RamseyConfig(params=P, N=3, T_s=0.0, model=model, prep_error=0.1 if model == "imperfect_prep" else 0)
        assert pr.ramsey_run(cfg).expectation[0] == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.45), st.floats(0, 10), st.integers(1, 8), st.floats(-0.2, 0.2))
def test_imperfect_prep_magnitude(delta, Ts, N, b):
    frame = ground_state(b, 1.0)
    phi = 2 * 1.5 * np.cos(frame.theta) * Ts
    total = pr._ideal_coherence(frame, delta, 1.5, Ts) ** N
    assert abs(total) == pytest.approx(abs((1 - delta) * np.exp(1j * phi) + delta * np.exp(-1j * phi)) ** N)
    assert abs(total) <= 1 + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(pr.MODELS), st.integers(1, 6), st.floats(-0.05, 0.05), st.floats(0, 0.3))
def test_signal_bounds(model, N, db, delta):
    cfg = pr.RamseyConfig(params=SensorParams(b0=0.02, delta_b=db), N=N, T_s=3.2, tau=0.1, model=model,
                          prep_error=delta if model in ("imperfect_prep", "dd_numeric") else 0.0)
    e = pr.ramsey_run(cfg).expectation[0]
    assert 0 <= e <= 1


def test_oracle_closed_form_n1():
    cfg = pr.RamseyConfig(params=P, N=1, T_s=40.0)
    o = pr.full_oracle(cfg, [0.0, 0.01])
    b = 0.02 + np.array([0.0, 0.01])
    np.testing.assert_allclose(o.expectation, (1 + np.cos(3 * b / np.hypot(1, b) * 40)) / 2, atol=1e-10)


def test_oracle_n4_dd():
    cfg = pr.RamseyConfig(params=SensorParams(b0=0.03), N=4, T_s=1.6, tau=0.1, model="dd_numeric", prep_error=0.02)
    np.testing.assert_allclose(pr.ramsey_run(cfg, [0.0, 0.01]).expectation,
                               pr.full_oracle(cfg, [0.0, 0.01]).expectation, atol=1e-10)


@pytest.mark.parametrize("target", ["sensors", "probe", "both"])
def test_oracle_n2_noisy(target):
    ns = NoiseSpec("ou", 0.2, 5.0, target, seed=11)
    cfg = pr.RamseyConfig(params=SensorParams(b0=0.03), N=2, T_s=1.6, tau=0.1, model="dd_numeric",
                          noise=ns, noise_dt=0.25, trajectories=3)
    a = pr.ramsey_run(cfg, [0.0, 0.01])
    b = pr.full_oracle(cfg, [0.0, 0.01])
    np.testing.assert_allclose(a.expectation, b.expectation, atol=1e-10)
    quiet = pr.ramsey_run(replace(cfg, noise=NoiseSpec()), [0.0, 0.01])
    assert np.max(np.abs(a.expectation - quiet.expectation)) > 1e-6


def test_probe_noise_on_ideal_model_matches_oracle():
    ns = NoiseSpec("static_gaussian", 0.1, target="probe", seed=1)
    cfg = pr.RamseyConfig(params=P, N=2, T_s=5.0, noise=ns, trajectories=4)
    np.testing.assert_allclose(pr.ramsey_run(cfg).expectation, pr.full_oracle(cfg).expectation, atol=1e-10)


def test_cp_map_limits():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = A @ A.conj().T
    rho /= np.trace(rho)
    U = qcore.expm_hermitian(0.7 * qcore.SIGMA_Z, 1.0)
    np.testing.assert_allclose(pr.cp_map_apply(rho, 0.0, U), U @ rho @ U.conj().T, atol=1e-15)
    np.testing.assert_allclose(pr.cp_map_apply(rho, 1.0, U), qcore.SIGMA_Z @ rho @ qcore.SIGMA_Z, atol=1e-15)
    out = pr.cp_map_apply(rho, 0.2, U)
    phi = 2 * 0.7
    assert out[0, 1] == pytest.approx(((1 - 0.2) * np.exp(-1j * phi) - 0.2) * rho[0, 1])
    assert np.trace(out) == pytest.approx(1.0, abs=1e-15)
    qcore.as_density(out)
    with pytest.raises(ParameterError):
        pr.cp_map_apply(rho, 1.5, U)


def test_cp_model_uses_analytic_bound():
    cfg = pr.RamseyConfig(params=SensorParams(b0=0.03), T_s=40.0, tau=0.08, model="cp_map")
    assert 0 < pr.cp_delta_prime(cfg, 0.03) < 0.01
    assert pr.cp_delta_prime(replace(cfg, delta_prime=0.3), 0.03) == 0.3


def test_optimal_interrogation():
    assert pr.optimal_interrogation(1, 1, np.pi) == pytest.approx(1)
    assert pr.optimal_interrogation(1.5, 1, 0.02) == pytest.approx(104.72, abs=0.01)
    assert pr.optimal_interrogation(1.5, 1, 0.02, 3) == pytest.approx(3 * pr.optimal_interrogation(1.5, 1, 0.02))
    for bad in (dict(k=2), dict(k=0), dict(k=-1)):
        with pytest.raises(ParameterError):
            pr.optimal_interrogation(1.5, 1, 0.02, **bad)
    with pytest.raises(ParameterError):
        pr.optimal_interrogation(1.5, 1, 0.0)


def test_aligned_tau():
    tau = pr.aligned_tau(104.72, 0.08)
    n = 104.72 / (4 * tau)
    assert abs(n - round(n)) < 1e-9 and abs(tau - 0.08) < 0.001


def test_config_errors():
    with pytest.raises(ParameterError):
        pr.RamseyConfig(params=P, T_s=40.1, model="dd_numeric")
    with pytest.raises(ParameterError):
        pr.RamseyConfig(params=P, prep_error=0.5)
    with pytest.raises(ParameterError):
        pr.RamseyConfig(params=P, model="magic")
    with pytest.raises(ParameterError):
        pr.RamseyConfig(params=P, noise=NoiseSpec("ou", 0.1, 10.0, "sensors"))
    with pytest.raises(ParameterError):
        pr.full_oracle(pr.RamseyConfig(params=P, N=7))
    with pytest.raises(ParameterError):
        pr.full_oracle(pr.RamseyConfig(params=P, model="cp_map"))


def test_curve_rows_and_metadata():
    curve = pr.ramsey_run(pr.RamseyConfig(params=P, N=2, T_s=40.0), [0.0, 0.01])
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(pr.CSV_COLUMNS)
    w.writerows(curve.rows())
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["scan_value", "expectation", "variance", "model", "N", "T_s", "tau", "seed"]
    assert rows[1][3] == "ideal" and rows[1][4] == "2"
    assert curve.metadata["amplified_phase"] == pytest.approx(2 * 2 * 1.5 * 0.02 / np.hypot(1, 0.02) * 40)


def test_scan_over_T_s():
    curve = pr.ramsey_run(pr.RamseyConfig(params=P), [0.0, 10.0, 20.0], scan_param="T_s")
    np.testing.assert_allclose(curve.T_s, [0, 10, 20])
    assert curve.expectation[0] == pytest.approx(1)
