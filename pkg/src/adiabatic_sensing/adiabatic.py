"""
Adiabatic preparation of the parameter-encoding ground state.

The drive lambda(t) on sigma_x is lowered from lambda0 to h while the
sensor starts in |-x> = (|0> - |1>)/sqrt(2), the ground state of the
strongly driven Hamiltonian. Two schedules are offered: a linear ramp and
a local-adiabatic ramp that keeps the instantaneous adiabaticity

    eps(t) = |lambda'(t)| |<e|sx|g>| / (E_e - E_g)^2

constant, which integrates to the closed-form preparation time returned by
:func:`adiabatic_time`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import qcore
from .errors import InvariantError, ParameterError
from .model import ground_state

MINUS_X = np.array([1, -1], dtype=complex) / np.sqrt(2)


def _dt_dlambda(lam, b, epsilon_a):
    # time spent per unit drive on a constant-eps schedule
    return abs(b) / (4.0 * epsilon_a * (lam * lam + b * b) ** 1.5)


def adiabatic_time(epsilon_a: float, lambda0: float, h: float, b: float) -> float:
    """Preparation time of the constant-adiabaticity sweep lambda0 -> h.

    Uses (4 |b| eps)^-1 [A/sqrt(1+A^2) - c/sqrt(1+c^2)] with A = lambda0/b,
    c = h/b. For b = 0 the closed form is singular, and the integral of the
    adiabatic condition is evaluated by quadrature instead.
    """
    if not 0 < epsilon_a < 1:
        raise ParameterError("epsilon_a must lie in (0, 1)")
    if not lambda0 > h > 0:
        raise ParameterError("require lambda0 > h > 0")
    if b == 0:
        value, _ = integrate.quad(_dt_dlambda, h, lambda0, args=(b, epsilon_a))
        return float(value)
    b = abs(b)
    A = lambda0 / b
    c = h / b
    return float((A / np.sqrt(1 + A * A) - c / np.sqrt(1 + c * c)) / (4 * b * epsilon_a))


def transition_element(lam, b):
    """|<e|sx|g>| from the instantaneous eigenstates of b sz + lam sx."""
    lam = np.asarray(lam, dtype=float)
    theta = np.arctan2(lam, b)
    g = np.stack([-np.sin(theta / 2), np.cos(theta / 2)])
    e = np.stack([np.cos(theta / 2), np.sin(theta / 2)])
    # sx swaps components
    return np.abs(e[0] * g[1] + e[1] * g[0])


def instantaneous_epsilon(lam, lam_dot, b):
    lam = np.asarray(lam, dtype=float)
    gap = 2 * np.hypot(lam, b)
    if np.any(gap <= 0):
        raise ParameterError("closed gap: b and lambda both zero")
    return np.abs(lam_dot) * transition_element(lam, b) / gap**2


@dataclass(frozen=True)
class SweepSchedule:
    """Monotone drive ramp lambda(t) on [0, duration].

    Local-adiabatic schedules are tabulated: ``t_grid`` and ``lam_grid``
    hold the time/drive pairs and lambda(t) is interpolated linearly.
    """

    kind: str
    lambda_start: float
    lambda_end: float
    duration: float
    epsilon_a: float | None = None
    t_grid: np.ndarray = field(default=None, repr=False)
    lam_grid: np.ndarray = field(default=None, repr=False)

    def lam(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            if self.duration == 0:
                return np.full_like(t, self.lambda_end)
            frac = np.clip(t / self.duration, 0.0, 1.0)
            return self.lambda_start - (self.lambda_start - self.lambda_end) * frac
        return np.interp(t, self.t_grid, self.lam_grid)

    def lam_dot(self, t):
        """Numerical ramp rate from the schedule itself."""
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            if self.duration == 0:
                return np.zeros_like(t)
            return np.full_like(t, -(self.lambda_start - self.lambda_end) / self.duration)
        rate = np.gradient(self.lam_grid, self.t_grid)
        return np.interp(t, self.t_grid, rate)


def make_schedule(
    kind: str,
    lambda0: float,
    h: float,
    b: float,
    epsilon_a: float | None = None,
    duration: float | None = None,
    n_grid: int = 4001,
) -> SweepSchedule:
    """Build a linear or local-adiabatic ramp from ``lambda0`` down to ``h``."""
    if lambda0 < h or h <= 0:
        raise ParameterError("require lambda0 >= h > 0")
    if kind == "linear":
        if duration is None or duration < 0:
            raise ParameterError("linear schedule needs a non-negative duration")
        if duration == 0 and lambda0 != h:
            raise ParameterError("zero-duration schedule requires lambda0 == h")
        return SweepSchedule("linear", lambda0, h, float(duration), epsilon_a)
    if kind == "local_adiabatic":
        if epsilon_a is None or not 0 < epsilon_a < 1:
            raise ParameterError("local_adiabatic schedule needs 0 < epsilon_a < 1")
        if b == 0:
            raise ParameterError("local_adiabatic schedule is undefined at b = 0")
        if lambda0 == h:
            raise ParameterError("local_adiabatic schedule needs lambda0 > h")
        lam = np.linspace(lambda0, h, n_grid)
        # integrate dt/dlambda along the decreasing drive
        rate = _dt_dlambda(lam, b, epsilon_a)
        t = integrate.cumulative_simpson(rate, x=-lam, initial=0.0)
        return SweepSchedule("local_adiabatic", lambda0, h, float(t[-1]), epsilon_a, t, lam)
    raise ParameterError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class SweepResult:
    final_state: np.ndarray
    ground_fidelity: float
    epsilon_times: np.ndarray
    epsilon_trace: np.ndarray
    lz_estimate: float
    min_gap: float
    gap_slope: float


def landau_zener_estimate(schedule: SweepSchedule, b: float, n_samples: int = 2001):
    """1 - exp(-T_a Delta / v) with Delta the minimum gap on the ramp and v the
    rate of change of the gap at that point."""
    t = np.linspace(0.0, schedule.duration, n_samples)
    lam = schedule.lam(t)
    gap = 2 * np.hypot(lam, b)
    i = int(np.argmin(gap))
    w = gap[i] / 2
    v = abs(2 * lam[i] * schedule.lam_dot(t[i]) / w) if w > 0 else 0.0
    if v == 0 or schedule.duration == 0:
        return 1.0, float(gap[i]), float(v)
    return float(1 - np.exp(-schedule.duration * gap[i] / v)), float(gap[i]), float(v)


def sweep(
    schedule: SweepSchedule,
    b: float,
    dt: float = 1e-3,
    initial_state: np.ndarray | None = None,
    n_trace: int = 201,
) -> SweepResult:
    """Propagate a single sensor through ``schedule``.

    Each step uses the exact 2x2 exponential of b sz + lambda(t_mid) sx.
    """
    if dt <= 0:
        raise ParameterError("dt must be positive")
    w_max = np.hypot(max(schedule.lambda_start, schedule.lambda_end), b)
    if w_max * dt >= 0.1:
        raise ParameterError(f"step too coarse: max(omega)*dt = {w_max * dt:.3g} >= 0.1")
    psi = MINUS_X.copy() if initial_state is None else qcore.ket(initial_state)

    n_steps = int(np.ceil(schedule.duration / dt)) if schedule.duration > 0 else 0
    if n_steps:
        edges = np.linspace(0.0, schedule.duration, n_steps + 1)
        mids = 0.5 * (edges[1:] + edges[:-1])
        lam = schedule.lam(mids)
        h_end = schedule.lambda_end
        if b != 0 and h_end > 0 and np.any(2 * np.hypot(lam, b) < 2 * h_end * (1 - 1e-12)):
            raise InvariantError("gap fell below 2h during the sweep")
        steps = qcore.su2_exp(lam, 0.0, b, np.diff(edges))
        for U in steps:
            psi = U @ psi
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > 1e-10:
        raise InvariantError(f"sweep lost unitarity (norm {norm!r})")

    frame = ground_state(b, schedule.lambda_end)
    fidelity = float(min(1.0, abs(np.vdot(frame.ground, psi)) ** 2))
    t_trace = np.linspace(0.0, schedule.duration, n_trace)
    lam_trace = schedule.lam(t_trace)
    eps = instantaneous_epsilon(lam_trace, schedule.lam_dot(t_trace), b) if b != 0 else np.zeros(n_trace)
    lz, gap, slope = landau_zener_estimate(schedule, b)
    return SweepResult(psi, fidelity, t_trace, eps, lz, gap, slope)
