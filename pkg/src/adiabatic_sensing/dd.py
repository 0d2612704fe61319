"""
Dynamical-decoupling cycles that turn the sensor-probe coupling into a
state-dependent field on the probe.

A cycle interleaves interaction segments of length ``tau`` with decoupling
gates. A gate ``U`` is the free evolution of the sensor under
b sz + h sx for tau_d = pi / (2 omega(b0, h)), i.e. a dressed-frame phase
flip; ``U_dagger`` is the same evolution sandwiched between two ideal
instantaneous sigma_y pulses. The coupling is off during gates.

By default the sigma_x drive h is switched off during interaction segments
(the field b obviously stays on), so the sensor only evolves under its
dressed Hamiltonian while a gate is being realised. Passing
``drive_during_interaction=True`` keeps the drive on throughout.

Layouts for the first-order cycle::

    equal      [tau, U, tau, U+, tau, U+, tau, U]
    symmetric  [tau/2, U, tau, U+, tau, U+, tau, U, tau/2]

The second-order cycle repeats the same four-gate pattern with a whole
first-order cycle in place of each interaction segment, giving 20 gates
per 16 tau of interaction time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .errors import ParameterError
from .model import ground_state, omega

FREE = "free"
GATE_U = "U"
GATE_UDAG = "U_dagger"
LAYOUTS = ("symmetric", "equal")


@dataclass(frozen=True)
class DDGate:
    kind: str
    duration: float


@dataclass(frozen=True)
class DDCycle:
    """Compiled decoupling cycle.

    ``timeline`` is a tuple of ``(kind, duration)`` records with kind one of
    ``"free"`` (coupling on), ``"U"`` or ``"U_dagger"``.
    """

    order: int
    tau: float
    tau_d: float
    layout: str
    timeline: tuple = field(repr=False)

    @property
    def gate_count(self) -> int:
        return sum(1 for kind, _ in self.timeline if kind != FREE)

    @property
    def interaction_time(self) -> float:
        return float(sum(d for kind, d in self.timeline if kind == FREE))

    @property
    def duration(self) -> float:
        return float(sum(d for _, d in self.timeline))

    @property
    def realization_factor(self) -> float:
        """Wall-clock time per unit of interaction time."""
        return self.duration / self.interaction_time

    def records(self) -> list[dict]:
        return [{"segment": kind, "duration": d} for kind, d in self.timeline]

    def steps(self):
        """Primitive steps: ("free", d), ("gate", d) and ("y", 0.0) pulses."""
        out = []
        for kind, d in self.timeline:
            if kind == FREE:
                out.append(("free", d))
            elif kind == GATE_U:
                out.append(("gate", d))
            else:
                out.extend([("y", 0.0), ("gate", d), ("y", 0.0)])
        return out


def gate_duration(b0: float, h: float) -> float:
    return float(np.pi / (2 * omega(b0, h)))


def gate_unitary(b: float, b0: float, h: float) -> np.ndarray:
    """U gate in the computational basis: free evolution for tau_d(b0, h) under the true field b."""
    H = b * qcore.SIGMA_Z + h * qcore.SIGMA_X
    return qcore.expm_hermitian(H, gate_duration(b0, h))


def decoupling_gate(b: float, b0: float, h: float):
    """The U gate in the dressed basis {|G>, |E>} of ``b`` and its phase error.

    Returns
    -------
    gate : ndarray
        diag(1, exp(-i (pi + delta_z))) after removing the global phase.
    delta_z : float
        2 omega(b, h) tau_d - pi.
    """
    frame = ground_state(b, h)
    U = gate_unitary(b, b0, h)
    D = frame.basis.conj().T @ U @ frame.basis
    gate = D * (abs(D[0, 0]) / D[0, 0])
    delta_z = 2 * frame.omega * gate_duration(b0, h) - np.pi
    return gate, float(delta_z)


def delta_z_approx(b0: float, delta_b: float, h: float) -> float:
    """Small-offset gate phase error pi (2 b0 db + db^2) / (2 (h^2 + b0^2))."""
    return float(np.pi * (2 * b0 * delta_b + delta_b**2) / (2 * (h * h + b0 * b0)))


def _first_order(tau: float, tau_d: float, layout: str) -> list:
    if layout == "equal":
        return [
            (FREE, tau), (GATE_U, tau_d), (FREE, tau), (GATE_UDAG, tau_d),
            (FREE, tau), (GATE_UDAG, tau_d), (FREE, tau), (GATE_U, tau_d),
        ]
    return [
        (FREE, tau / 2), (GATE_U, tau_d), (FREE, tau), (GATE_UDAG, tau_d),
        (FREE, tau), (GATE_UDAG, tau_d), (FREE, tau), (GATE_U, tau_d), (FREE, tau / 2),
    ]


def build_cycle(order: int, tau: float, tau_d: float, layout: str = "symmetric") -> DDCycle:
    if order not in (1, 2):
        raise ParameterError(f"unsupported decoupling order {order!r}")
    if not tau > 0:
        raise ParameterError("tau must be positive")
    if tau_d < 0:
        raise ParameterError("tau_d must be non-negative")
    if layout not in LAYOUTS:
        raise ParameterError(f"layout must be one of {LAYOUTS}")
    base = _first_order(tau, tau_d, layout)
    if order == 1:
        return DDCycle(1, tau, tau_d, layout, tuple(base))
    meta = []
    for gate in (GATE_U, GATE_UDAG, GATE_UDAG, GATE_U):
        meta.extend(base)
        meta.append((gate, tau_d))
    return DDCycle(2, tau, tau_d, layout, tuple(meta))


@dataclass(frozen=True)
class EffectiveInteraction:
    zz: float
    a_x: float
    a_y: float
    delta_x: float
    delta_z: float
    delta_prime_bound: float
    zero_signal: bool = False


def effective_interaction_analytic(gamma: float, theta: float, delta_z: float, tau: float) -> EffectiveInteraction:
    """Averaged coupling of a first-order cycle from the two-term BCH estimate.

    a_x = gamma sin(theta) sin^2(delta_z/2) comes from the imperfect sign flip,
    a_y = -gamma^2 tau cos(theta) sin(theta) cos^2(delta_z/2) / 2 from the
    second-order correction. The dephasing weight bound is
    delta_x^2 / (gamma cos(theta))^2; it is NaN (with ``zero_signal`` set)
    when cos(theta) = 0.
    """
    c, s = np.cos(theta), np.sin(theta)
    zz = gamma * c
    a_x = gamma * s * np.sin(delta_z / 2) ** 2
    a_y = -0.5 * gamma**2 * tau * c * s * np.cos(delta_z / 2) ** 2
    delta_x = float(np.hypot(a_x, a_y))
    zero = abs(c) < 1e-12
    bound = float("nan") if zero else delta_x**2 / zz**2
    return EffectiveInteraction(float(zz), float(a_x), float(a_y), delta_x, float(delta_z), bound, zero)


def second_order_term(gamma: float, theta: float, delta_z: float, tau: float, layout: str) -> float:
    """Coefficient of the sy~ (x) 1 term that the compiled cycle generates at O(tau).

    Obtained from the second-order Magnus term of the toggling-frame
    Hamiltonian for the layouts built here; it vanishes for the
    time-symmetric layout.
    """
    if layout == "symmetric":
        return 0.0
    if layout != "equal":
        raise ParameterError(f"layout must be one of {LAYOUTS}")
    return float(gamma**2 * tau * np.cos(theta) * np.sin(theta) * np.cos(delta_z / 2) ** 2)


def step_fields(kind: str, b: float, h: float, gamma: float, s: int, drive_during_interaction: bool):
    """(hx, hz) of the sensor Hamiltonian hx sx + hz sz for probe eigenvalue s."""
    if kind == "free":
        return (h if drive_during_interaction else 0.0), b - s * gamma
    if kind == "gate":
        return h, b
    raise ParameterError(f"no Hamiltonian for step kind {kind!r}")


def cycle_unitary_full(
    cycle: DDCycle, gamma: float, b: float, h: float, drive_during_interaction: bool = False
) -> np.ndarray:
    """4x4 propagator of one cycle on (sensor, probe), built step by step."""
    X = qcore.build_operator([(0, "x")], 2)
    Z = qcore.build_operator([(0, "z")], 2)
    ZZ = qcore.build_operator([(0, "z"), (1, "z")], 2)
    Y = qcore.build_operator([(0, "y")], 2)
    U = np.eye(4, dtype=complex)
    for kind, d in cycle.steps():
        if kind == "y":
            U = Y @ U
            continue
        if kind == "free":
            H = b * Z - gamma * ZZ + (h * X if drive_during_interaction else 0)
        else:
            H = b * Z + h * X
        U = qcore.expm_hermitian(H, d) @ U
    return U


@dataclass(frozen=True)
class CycleAudit:
    coefficients: dict
    zz: float
    residual: float
    residual_probe: float
    analytic: EffectiveInteraction
    second_order: float
    generator: np.ndarray = field(repr=False)


def dressed_coefficients(H: np.ndarray, b: float, h: float) -> dict:
    """Expand a (sensor, probe) operator in {1, sx~, sy~, sz~} (x) {1, sz}."""
    frame = ground_state(b, h)
    P = np.kron(frame.basis, qcore.SIGMA_I)
    Hd = P.conj().T @ H @ P
    out = {}
    for na, a in zip("Ixyz", (qcore.SIGMA_I, qcore.SIGMA_X, qcore.SIGMA_Y, qcore.SIGMA_Z)):
        for nb, p in zip("Iz", (qcore.SIGMA_I, qcore.SIGMA_Z)):
            out[na + nb] = float(np.trace(np.kron(a, p) @ Hd).real / 4)
    return out


def audit_cycle(
    cycle: DDCycle,
    gamma: float,
    b: float,
    b0: float,
    h: float,
    drive_during_interaction: bool = False,
) -> CycleAudit:
    """Compare the exact cycle generator against the averaged coupling.

    The generator is normalised by the interaction time of the cycle, so its
    sz~ (x) sz coefficient is directly comparable to gamma cos(theta).
    ``residual`` is the norm of every term transverse to the dressed axis
    (sx~ and sy~ with either probe factor), ``residual_probe`` keeps only
    the two that act on the probe.
    """
    U = cycle_unitary_full(cycle, gamma, b, h, drive_during_interaction)
    H = qcore.effective_generator(U, cycle.interaction_time)
    coeffs = dressed_coefficients(H, b, h)
    frame = ground_state(b, h)
    _, delta_z = decoupling_gate(b, b0, h)
    analytic = effective_interaction_analytic(gamma, frame.theta, delta_z, cycle.tau)
    residual = float(np.sqrt(sum(coeffs[k] ** 2 for k in ("xI", "xz", "yI", "yz"))))
    residual_probe = float(np.hypot(coeffs["xz"], coeffs["yz"]))
    second = second_order_term(gamma, frame.theta, delta_z, cycle.tau, cycle.layout) if cycle.order == 1 else float("nan")
    return CycleAudit(coeffs, coeffs["zz"], residual, residual_probe, analytic, second, H)
