"""
Ramsey interrogation of the probe qubit.

The probe starts in (|0> + |1>)/sqrt(2); after the interrogation a second
pi/2 rotation maps its coherence onto P = |0><0|. Every probe-side operator
in the dynamics is diagonal in the probe basis, so each sensor evolves
under one of two conditional Hamiltonians (probe in |0> or |1>) and the
probe coherence is the product of the per-sensor overlaps

    f_k = <psi_k| U_minus^+ U_plus |psi_k>,     <P> = (1 + Re prod_k f_k) / 2.

:func:`ramsey_run` uses this factorised form; :func:`full_oracle`
propagates the whole (N + 1)-qubit register and serves as its check.

Phase convention: a sensor in |G> imprints the relative phase
phi = 2 gamma cos(theta) T_s on the probe, so the noiseless ideal signal is
(1 + cos(N phi)) / 2. The amplified phase reported in metadata is
2 b_a T_s.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import qcore
from .dd import DDCycle, build_cycle, decoupling_gate, effective_interaction_analytic, gate_duration, step_fields
from .errors import InvariantError, ParameterError
from .model import SensorParams, amplified_field, ground_state
from .noise import NoiseSpec, apply_noise, integrated_phase, sample_batch

MODELS = ("ideal", "dd_numeric", "cp_map", "imperfect_prep")
PHASE_CONVENTION = "physical: probe phase = 2 * b_a * T_s"
MAX_ORACLE_SENSORS = 6


@dataclass(frozen=True)
class RamseyConfig:
    """Everything needed to simulate one Ramsey signal.

    ``T_s`` is the effective interrogation (coupling-on) time; with a
    decoupling cycle the wall-clock time is ``T_s`` times the cycle's
    realisation factor.
    """

    params: SensorParams = field(default_factory=SensorParams)
    N: int = 1
    T_s: float = 40.0
    tau: float = 0.08
    order: int = 1
    layout: str = "symmetric"
    drive_during_interaction: bool = False
    model: str = "ideal"
    prep_error: float = 0.0
    delta_prime: float | None = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    noise_dt: float | None = None
    trajectories: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterError(f"model must be one of {MODELS}")
        if self.N < 1:
            raise ParameterError("N must be >= 1")
        if self.T_s < 0:
            raise ParameterError("T_s must be non-negative")
        if not 0 <= self.prep_error < 0.5:
            raise ParameterError("prep_error must lie in [0, 0.5)")
        if self.delta_prime is not None and not 0 <= self.delta_prime <= 1:
            raise ParameterError("delta_prime must lie in [0, 1]")
        if self.trajectories < 1:
            raise ParameterError("trajectories must be >= 1")
        if self.noise.on_sensors and self.model != "dd_numeric":
            raise ParameterError("sensor noise is only modelled with model='dd_numeric'")
        if self.model == "dd_numeric":
            self.n_cycles  # validates T_s against the cycle span

    @property
    def cycle(self) -> DDCycle:
        return build_cycle(self.order, self.tau, gate_duration(self.params.b0, self.params.h), self.layout)

    @property
    def n_cycles(self) -> int:
        span = self.cycle.interaction_time
        n = self.T_s / span
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ParameterError(f"T_s={self.T_s} is not a multiple of the cycle span {span}")
        return int(round(n))

    @property
    def realization_time(self) -> float:
        """Wall-clock duration of the interrogation."""
        if self.model == "dd_numeric":
            return self.n_cycles * self.cycle.duration
        return self.T_s

    @property
    def dt_noise(self) -> float:
        return self.noise_dt if self.noise_dt is not None else self.noise.default_dt()

    def with_params(self, **changes) -> "RamseyConfig":
        return replace(self, params=replace(self.params, **changes))


@dataclass
class SignalCurve:
    scan_param: str
    scan_values: np.ndarray
    expectation: np.ndarray
    variance: np.ndarray
    coherence: np.ndarray
    model: str
    N: int
    T_s: np.ndarray
    tau: float
    seed: int
    metadata: dict = field(default_factory=dict)

    @property
    def contrast(self) -> np.ndarray:
        return np.abs(self.coherence)

    def rows(self):
        for x, p, v, ts in zip(self.scan_values, self.expectation, self.variance, self.T_s):
            yield [repr(float(x)), repr(float(p)), repr(float(v)), self.model, str(self.N),
                   repr(float(ts)), repr(float(self.tau)), str(self.seed)]


CSV_COLUMNS = ["scan_value", "expectation", "variance", "model", "N", "T_s", "tau", "seed"]


def optimal_interrogation(gamma: float, h: float, b: float, k: int = 1) -> float:
    """Interrogation time with (gamma/h) b T_s = k pi, k odd."""
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ParameterError("k must be an odd positive integer")
    if b == 0:
        raise ParameterError("no finite optimal interrogation time at b = 0")
    return float(k * np.pi * h / (gamma * abs(b)))


def aligned_tau(T_s: float, tau: float, order: int = 1) -> float:
    """Closest interval to ``tau`` for which T_s holds a whole number of cycles."""
    span = 4 * tau if order == 1 else 16 * tau
    n = max(1, int(round(T_s / span)))
    return T_s / (n * (4 if order == 1 else 16))


def cp_map_apply(rho: np.ndarray, delta_prime: float, U_z: np.ndarray) -> np.ndarray:
    """(1 - d) U rho U^+ + d sz rho sz."""
    if not 0 <= delta_prime <= 1:
        raise ParameterError("delta_prime must lie in [0, 1]")
    rho = np.asarray(rho, dtype=complex)
    U_z = qcore.as_unitary(U_z)
    return (1 - delta_prime) * U_z @ rho @ U_z.conj().T + delta_prime * qcore.SIGMA_Z @ rho @ qcore.SIGMA_Z


def cp_delta_prime(config: RamseyConfig, b: float) -> float:
    if config.delta_prime is not None:
        return config.delta_prime
    p = config.params
    _, delta_z = decoupling_gate(b, p.b0, p.h)
    eff = effective_interaction_analytic(p.gamma, ground_state(b, p.h).theta, delta_z, config.tau)
    if eff.zero_signal:
        raise ParameterError("cos(theta) = 0: dephasing weight undefined")
    return float(min(1.0, eff.delta_prime_bound))


def _conditional_cycle(cycle: DDCycle, b: float, h: float, gamma: float, s: int, drive: bool) -> np.ndarray:
    U = np.eye(2, dtype=complex)
    for kind, d in cycle.steps():
        if kind == "y":
            U = qcore.SIGMA_Y @ U
        else:
            hx, hz = step_fields(kind, b, h, gamma, s, drive)
            U = qcore.su2_exp(hx, 0.0, hz, d) @ U
    return U


def _propagate_branch(psi, tl, det, b, h, gamma, s, drive):
    """Batched sensor propagation along a noisy timeline for probe eigenvalue s."""
    for j, (kind, d) in enumerate(zip(tl.kinds, tl.durations)):
        if kind == "y":
            psi = psi @ qcore.SIGMA_Y.T
            continue
        hx, hz = step_fields(kind, b, h, gamma, s, drive)
        U = qcore.su2_exp(hx, 0.0, hz + det[..., j], d)
        psi = np.einsum("...ij,...j->...i", U, psi)
    return psi


def conditional_coherence(
    sensor_state: np.ndarray,
    cycle: DDCycle,
    n_cycles: int,
    b: float,
    h: float,
    gamma: float,
    drive_during_interaction: bool = False,
    noise_values: np.ndarray | None = None,
    noise_dt: float | None = None,
):
    """Per-sensor probe-coherence factor f = <psi| U_minus^+ U_plus |psi>.

    Without noise a complex scalar is returned. ``noise_values`` (shape
    ``(..., n_grid)``) adds delta(t) sz to the sensor on every step and the
    result carries the leading batch axes.
    """
    psi = qcore.ket(sensor_state)
    if noise_values is None:
        out = []
        for s in (+1, -1):
            C = _conditional_cycle(cycle, b, h, gamma, s, drive_during_interaction)
            out.append(np.linalg.matrix_power(C, n_cycles) @ psi)
        return complex(np.vdot(out[1], out[0]))
    steps = cycle.steps() * n_cycles
    values = np.asarray(noise_values)
    tl = apply_noise(steps, noise_dt, grid_size=values.shape[-1])
    det = tl.detuning(values)
    batch = values.shape[:-1]
    start = np.broadcast_to(psi, batch + (2,)).astype(complex)
    plus = _propagate_branch(start, tl, det, b, h, gamma, +1, drive_during_interaction)
    minus = _propagate_branch(start, tl, det, b, h, gamma, -1, drive_during_interaction)
    return np.einsum("...i,...i->...", minus.conj(), plus)


def _ideal_coherence(frame, prep_error: float, gamma: float, T_s: float) -> complex:
    phi = 2 * gamma * np.cos(frame.theta) * T_s
    return complex((1 - prep_error) * np.exp(-1j * phi) + prep_error * np.exp(1j * phi))


def _cp_coherence(config: RamseyConfig, b: float) -> complex:
    # the map describes one interrogation; a zero-length one applies nothing
    if config.T_s == 0:
        return 1.0 + 0j
    frame = ground_state(b, config.params.h)
    dp = cp_delta_prime(config, b)
    U_z = qcore.expm_hermitian(config.params.gamma * np.cos(frame.theta) * qcore.SIGMA_Z, config.T_s)
    rho = qcore.projector(qcore.ry(np.pi / 2) @ qcore.KET0)
    for _ in range(config.N):
        rho = cp_map_apply(rho, dp, U_z)
    # f such that <P> = (1 + Re f) / 2, i.e. f = 2 rho_10
    return complex(2 * rho[1, 0])


def noise_streams(config: RamseyConfig) -> tuple[np.ndarray, np.ndarray]:
    """Stream ids for (sensors, probe): trajectory m, sensor k -> m (N + 1) + k."""
    m = np.arange(config.trajectories)[:, None]
    ids = m * (config.N + 1) + np.arange(config.N + 1)[None, :]
    return ids[:, : config.N], ids[:, config.N]


def draw_noise(config: RamseyConfig):
    """Noise samples shared by every scan point and by the full oracle.

    Returns ``(sensor_values, probe_values)`` with shapes
    (trajectories, N, n_grid) and (trajectories, n_grid); entries are None
    where the noise does not act.
    """
    if not config.noise.active:
        return None, None
    # a little slack so the last piece never falls off the grid
    duration = config.realization_time + config.dt_noise
    s_ids, p_ids = noise_streams(config)
    sensors = sample_batch(config.noise, duration, config.dt_noise, s_ids) if config.noise.on_sensors else None
    probe = sample_batch(config.noise, duration, config.dt_noise, p_ids) if config.noise.on_probe else None
    return sensors, probe


def _coherence_at(config: RamseyConfig, sensor_noise, probe_noise) -> np.ndarray:
    """Total probe coherence per trajectory (or a single value when noiseless)."""
    p = config.params
    b = p.b
    frame = ground_state(b, p.h)
    if config.model == "cp_map":
        total = np.array([_cp_coherence(config, b)])
    elif config.model in ("ideal", "imperfect_prep"):
        total = np.array([_ideal_coherence(frame, config.prep_error, p.gamma, config.T_s) ** config.N])
    else:
        state = frame.state(config.prep_error)
        if sensor_noise is None:
            f = conditional_coherence(state, config.cycle, config.n_cycles, b, p.h, p.gamma,
                                      config.drive_during_interaction)
            total = np.array([f**config.N])
        else:
            f = conditional_coherence(state, config.cycle, config.n_cycles, b, p.h, p.gamma,
                                      config.drive_during_interaction, sensor_noise, config.dt_noise)
            total = np.prod(f, axis=-1)
    if probe_noise is not None:
        phase = integrated_phase(probe_noise, config.dt_noise, config.realization_time)
        total = total * np.exp(-2j * phase)
    return total


def _scan_configs(config: RamseyConfig, scan_param: str, values):
    for x in values:
        if scan_param == "delta_b":
            yield config.with_params(delta_b=float(x))
        elif scan_param == "T_s":
            yield replace(config, T_s=float(x))
        else:
            raise ParameterError(f"cannot scan {scan_param!r}")


def _curve(config, scan_param, values, totals, metadata) -> SignalCurve:
    values = np.asarray(values, dtype=float)
    expectation = np.array([np.mean((1 + t.real) / 2) for t in totals])
    coherence = np.array([np.mean(t) for t in totals])
    if np.any(expectation < -1e-12) or np.any(expectation > 1 + 1e-12):
        raise InvariantError("Ramsey expectation left [0, 1]")
    expectation = np.clip(expectation, 0.0, 1.0)
    T_s = values if scan_param == "T_s" else np.full(values.shape, config.T_s)
    return SignalCurve(scan_param, values, expectation, expectation * (1 - expectation), coherence,
                       config.model, config.N, T_s, config.tau, config.noise.seed, metadata)


def _metadata(config: RamseyConfig) -> dict:
    p = config.params
    b_a, eta = amplified_field(config.N, p.gamma, p.b, p.h)
    return {
        "phase_convention": PHASE_CONVENTION,
        "amplified_phase": 2 * b_a * config.T_s,
        "eta": eta,
        "realization_time": config.realization_time,
    }


def ramsey_run(config: RamseyConfig, scan_values=None, scan_param: str = "delta_b") -> SignalCurve:
    """Probe signal <P> over a scan of ``delta_b`` (default) or ``T_s``.

    Noisy runs average over ``config.trajectories`` trajectories; the same
    trajectories are reused at every scan point.
    """
    if scan_values is None:
        scan_values = [config.params.delta_b if scan_param == "delta_b" else config.T_s]
    totals = []
    for cfg in _scan_configs(config, scan_param, scan_values):
        sensor_noise, probe_noise = draw_noise(cfg)
        totals.append(_coherence_at(cfg, sensor_noise, probe_noise))
    return _curve(config, scan_param, scan_values, totals, _metadata(config))


# ---------------------------------------------------------------------------
# full-register oracle


def _oracle_operators(N: int):
    n = N + 1
    X = [qcore.embed(qcore.SIGMA_X, k, n) for k in range(N)]
    Z = [qcore.embed(qcore.SIGMA_Z, k, n) for k in range(N)]
    Y = qcore.kron(*([qcore.SIGMA_Y] * N + [qcore.SIGMA_I]))
    Zp = qcore.embed(qcore.SIGMA_Z, N, n)
    ZZ = sum(Z[k] @ Zp for k in range(N))
    return X, Z, Y, Zp, ZZ


def _oracle_hamiltonian(kind, config, ops, det_s=None, det_p=0.0):
    X, Z, _, Zp, ZZ = ops
    p = config.params
    N = config.N
    H = np.zeros_like(ZZ)
    for k in range(N):
        d = 0.0 if det_s is None else det_s[k]
        if kind == "free":
            H = H + (p.b + d) * Z[k] + (p.h * X[k] if config.drive_during_interaction else 0)
        else:
            H = H + (p.b + d) * Z[k] + p.h * X[k]
    if kind == "free":
        H = H - p.gamma * ZZ
    return H + det_p * Zp


def _readout(psi: np.ndarray, N: int) -> float:
    R = qcore.embed(qcore.ry(-np.pi / 2), N, N + 1)
    psi = R @ psi
    amps = psi.reshape(2**N, 2)
    return float(np.sum(np.abs(amps[:, 0]) ** 2))


def full_oracle(config: RamseyConfig, scan_values=None, scan_param: str = "delta_b") -> SignalCurve:
    """Brute-force (N + 1)-qubit propagation; same timeline and noise as :func:`ramsey_run`."""
    if config.N > MAX_ORACLE_SENSORS:
        raise ParameterError(f"full oracle limited to N <= {MAX_ORACLE_SENSORS}")
    if config.model == "cp_map":
        raise ParameterError("cp_map acts on the probe alone; no register-level oracle")
    if scan_values is None:
        scan_values = [config.params.delta_b if scan_param == "delta_b" else config.T_s]
    N = config.N
    ops = _oracle_operators(N)
    totals = []
    for cfg in _scan_configs(config, scan_param, scan_values):
        p = cfg.params
        frame = ground_state(p.b, p.h)
        psi0 = qcore.kron(*([frame.state(cfg.prep_error)[:, None]] * N + [(qcore.ry(np.pi / 2) @ qcore.KET0)[:, None]]))[:, 0]
        sensor_noise, probe_noise = draw_noise(cfg)
        n_traj = 1 if sensor_noise is None and probe_noise is None else cfg.trajectories
        shots = []
        for m in range(n_traj):
            if cfg.model in ("ideal", "imperfect_prep"):
                Zt = sum(qcore.embed(frame.sigma_z(), k, N + 1) for k in range(N)) @ ops[3]
                H = p.gamma * np.cos(frame.theta) * Zt
                if probe_noise is not None:
                    # constant-coupling part commutes with probe noise
                    phase = integrated_phase(probe_noise[m], cfg.dt_noise, cfg.T_s)
                    psi = qcore.expm_hermitian(ops[3], phase) @ qcore.evolve(H, cfg.T_s, psi0)
                else:
                    psi = qcore.evolve(H, cfg.T_s, psi0)
            elif sensor_noise is None and probe_noise is None:
                U = np.eye(2 ** (N + 1), dtype=complex)
                for kind, d in cfg.cycle.steps():
                    U = (ops[2] if kind == "y" else qcore.expm_hermitian(_oracle_hamiltonian(kind, cfg, ops), d)) @ U
                psi = np.linalg.matrix_power(U, cfg.n_cycles) @ psi0
            else:
                tl = apply_noise(cfg.cycle.steps() * cfg.n_cycles, cfg.dt_noise)
                ds = None if sensor_noise is None else tl.detuning(sensor_noise[m])
                dp = np.zeros(len(tl.kinds)) if probe_noise is None else tl.detuning(probe_noise[m])
                psi = psi0
                for j, (kind, d) in enumerate(zip(tl.kinds, tl.durations)):
                    if kind == "y":
                        psi = ops[2] @ psi
                        continue
                    H = _oracle_hamiltonian(kind, cfg, ops, None if ds is None else ds[:, j], dp[j])
                    psi = qcore.evolve(H, d, psi)
            shots.append(_readout(psi, N))
        P = np.array(shots)
        # store as equivalent coherence so _curve can average uniformly
        totals.append(2 * P - 1 + 0j)
    return _curve(config, scan_param, scan_values, totals, _metadata(config))
