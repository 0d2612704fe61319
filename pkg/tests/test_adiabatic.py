import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from adiabatic_sensing import adiabatic
from adiabatic_sensing.errors import InvariantError, ParameterError
from adiabatic_sensing.model import ground_state


def test_closed_form_limit_c_equals_one():
    b, eps = 0.5, 0.01
    T = adiabatic.adiabatic_time(eps, 1e9, b, b)
    assert T == pytest.approx((1 - 1 / np.sqrt(2)) / (4 * b * eps), rel=1e-9)


def test_closed_form_reference_value():
    assert adiabatic.adiabatic_time(0.01, 10, 1, 0.02) == pytest.approx(0.247425, abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 0.4), st.floats(1.5, 50), st.floats(0.01, 1.0))
def test_doubling_epsilon_halves_time(eps, lam0, b):
    T1 = adiabatic.adiabatic_time(eps, lam0, 1.0, b)
    assert adiabatic.adiabatic_time(2 * eps, lam0, 1.0, b) == pytest.approx(T1 / 2, rel=1e-12)


@pytest.mark.parametrize("b", [0.02, 0.3, 2.0])
def test_closed_form_equals_integral_of_condition(b):
    eps, lam0, h = 0.01, 10.0, 1.0
    # constant eps: |lam_dot| = 4 eps (lam^2 + b^2)^{3/2} / b
    integral, _ = integrate.quad(lambda l: b / (4 * eps * (l * l + b * b) ** 1.5), h, lam0)
    assert adiabatic.adiabatic_time(eps, lam0, h, b) == pytest.approx(integral, rel=1e-3)


def test_zero_field_uses_quadrature():
    assert adiabatic.adiabatic_time(0.01, 10, 1, 0.0) == 0.0
    assert adiabatic.adiabatic_time(0.01, 10, 1, 1e-9) == pytest.approx(0.0, abs=1e-5)


@pytest.mark.parametrize("args", [(0, 10, 1, 0.1), (1.0, 10, 1, 0.1), (0.01, 1, 1, 0.1), (0.01, 10, 0, 0.1)])
def test_adiabatic_time_rejects(args):
    with pytest.raises(ParameterError):
        adiabatic.adiabatic_time(*args)


def test_epsilon_zero_rate():
    assert adiabatic.instantaneous_epsilon(2.0, 0.0, 0.1) == 0


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3))
def test_matrix_element_against_eigensolver(lam, b):
    H = np.array([[b, lam], [lam, -b]])
    w, v = np.linalg.eigh(H)
    numeric = abs(v[:, 1] @ np.array([[0, 1], [1, 0]]) @ v[:, 0])
    assert adiabatic.transition_element(lam, b) == pytest.approx(numeric, abs=1e-10)
    assert numeric == pytest.approx(abs(b) / np.hypot(lam, b), abs=1e-10)


def test_linear_schedule_midpoint():
    s = adiabatic.make_schedule("linear", 10, 1, 0.02, duration=1.0)
    assert s.lam(0.5) == pytest.approx(5.5)
    assert s.lam(0.0) == 10 and s.lam(1.0) == 1


def test_local_schedule_properties():
    s = adiabatic.make_schedule("local_adiabatic", 10, 1, 0.02, epsilon_a=0.01)
    assert s.duration == pytest.approx(adiabatic.adiabatic_time(0.01, 10, 1, 0.02), rel=1e-3)
    assert s.lam(0.0) == pytest.approx(10) and s.lam(s.duration) == pytest.approx(1)
    assert np.all(np.diff(s.lam_grid) <= 0)
    t = np.linspace(0, s.duration, 501)[5:-5]
    eps = adiabatic.instantaneous_epsilon(s.lam(t), s.lam_dot(t), 0.02)
    np.testing.assert_allclose(eps, 0.01, rtol=1e-2)


@pytest.mark.parametrize("kwargs", [
    dict(kind="linear", duration=None), dict(kind="local_adiabatic", epsilon_a=None),
    dict(kind="local_adiabatic", epsilon_a=0.01, b=0.0), dict(kind="spline", duration=1.0),
])
def test_make_schedule_errors(kwargs):
    args = dict(lambda0=10, h=1, b=0.02)
    args.update(kwargs)
    with pytest.raises(ParameterError):
        adiabatic.make_schedule(**args)


def test_frozen_schedule_keeps_ground_state():
    s = adiabatic.make_schedule("linear", 1, 1, 0.3, duration=0.0)
    g = ground_state(0.3, 1).ground
    assert adiabatic.sweep(s, 0.3, initial_state=g).ground_fidelity == pytest.approx(1, abs=1e-14)


def test_step_size_guard():
    s = adiabatic.make_schedule("linear", 10, 1, 0.02, duration=1.0)
    with pytest.raises(ParameterError):
        adiabatic.sweep(s, 0.02, dt=0.02)


def test_gap_floor_guard():
    # ramp ending below the nominal end value violates the 2h floor
    s = adiabatic.SweepSchedule("linear", 10.0, 1.0, 1.0)
    bad = adiabatic.SweepSchedule("local_adiabatic", 10.0, 1.0, 1.0, 0.01,
                                  np.array([0, 0.5, 1.0]), np.array([10.0, 0.2, 1.0]))
    adiabatic.sweep(s, 0.02)
    with pytest.raises(InvariantError):
        adiabatic.sweep(bad, 0.02)


def test_reference_sweep_fidelity_and_convergence():
    s = adiabatic.make_schedule("local_adiabatic", 10, 1, 0.02, epsilon_a=0.01)
    r1 = adiabatic.sweep(s, 0.02, dt=1e-3)
    r2 = adiabatic.sweep(s, 0.02, dt=5e-4)
    assert r1.ground_fidelity >= 0.99
    assert abs(r1.ground_fidelity - r2.ground_fidelity) < 1e-6
    assert abs(np.linalg.norm(r1.final_state) - 1) < 1e-10
    assert 0 <= r1.lz_estimate <= 1
    assert r1.min_gap == pytest.approx(2 * np.hypot(1, 0.02), rel=1e-6)


def test_fidelity_monotone_over_epsilon_ladder():
    fids = []
    for eps in [0.08, 0.04, 0.02, 0.01, 0.005]:
        s = adiabatic.make_schedule("local_adiabatic", 10, 1, 0.02, epsilon_a=eps)
        fids.append(adiabatic.sweep(s, 0.02, dt=1e-3).ground_fidelity)
    assert all(b >= a - 1e-12 for a, b in zip(fids, fids[1:])), fids
