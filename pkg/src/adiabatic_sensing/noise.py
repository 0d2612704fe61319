"""
Classical parallel phase noise delta(t) sigma_z.

Trajectories are piecewise constant on a uniform grid. The
Ornstein-Uhlenbeck kind uses the exact discretisation

    x[n+1] = x[n] exp(-dt/tau_c) + sigma sqrt(1 - exp(-2 dt/tau_c)) xi[n]

with the first sample drawn from the stationary distribution. Every
trajectory owns a random stream keyed by (seed, stream_id), so ensembles
are reproducible regardless of how they are split across workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from . import qcore
from .errors import ParameterError
from .model import ground_state

KINDS = ("none", "ou", "static_gaussian")
TARGETS = ("sensors", "probe", "both")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    sigma: float = 0.0
    tau_c: float = 10.0
    target: str = "sensors"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"noise kind must be one of {KINDS}")
        if self.target not in TARGETS:
            raise ParameterError(f"noise target must be one of {TARGETS}")
        if self.sigma < 0:
            raise ParameterError("sigma must be non-negative")
        if self.kind == "ou" and not self.tau_c > 0:
            raise ParameterError("tau_c must be positive for OU noise")

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.sigma > 0

    @property
    def on_sensors(self) -> bool:
        return self.active and self.target in ("sensors", "both")

    @property
    def on_probe(self) -> bool:
        return self.active and self.target in ("probe", "both")

    def default_dt(self) -> float:
        return self.tau_c / 10 if self.kind == "ou" else 1.0


@dataclass(frozen=True)
class NoiseTrajectory:
    times: np.ndarray
    values: np.ndarray
    seed: int
    stream_id: int

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else float("inf")

    @property
    def end(self) -> float:
        return float(self.times[-1] + self.dt) if self.times.size > 1 else float("inf")


def _generator(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream_id)])


def _n_grid(duration: float, dt: float) -> int:
    return max(1, int(np.ceil(duration / dt - 1e-9)))


def _sample_values(spec: NoiseSpec, n: int, dt: float, stream_id: int) -> np.ndarray:
    if not spec.active:
        return np.zeros(n)
    rng = _generator(spec.seed, stream_id)
    if spec.kind == "static_gaussian":
        return np.full(n, spec.sigma * rng.standard_normal())
    a = np.exp(-dt / spec.tau_c)
    kicks = rng.standard_normal(n)
    kicks[1:] *= spec.sigma * np.sqrt(1 - a * a)
    kicks[0] *= spec.sigma
    return signal.lfilter([1.0], [1.0, -a], kicks)


def _check_dt(spec: NoiseSpec, dt: float):
    if dt <= 0:
        raise ParameterError("dt must be positive")
    if spec.active and spec.kind == "ou" and dt > spec.tau_c / 10 * (1 + 1e-12):
        raise ParameterError(f"dt={dt} too coarse for tau_c={spec.tau_c} (need dt <= tau_c/10)")


def sample_trajectory(spec: NoiseSpec, duration: float, dt: float, stream_id: int = 0) -> NoiseTrajectory:
    _check_dt(spec, dt)
    n = _n_grid(duration, dt)
    return NoiseTrajectory(np.arange(n) * dt, _sample_values(spec, n, dt, stream_id), spec.seed, stream_id)


def sample_batch(spec: NoiseSpec, duration: float, dt: float, stream_ids) -> np.ndarray:
    """Values of many trajectories, shape (len(stream_ids), n_grid)."""
    _check_dt(spec, dt)
    stream_ids = np.asarray(stream_ids, dtype=np.int64)
    n = _n_grid(duration, dt)
    if not spec.active:
        return np.zeros(stream_ids.shape + (n,))
    if spec.kind == "static_gaussian":
        draws = [spec.sigma * _generator(spec.seed, s).standard_normal() for s in stream_ids.ravel()]
        return np.repeat(np.reshape(draws, stream_ids.shape)[..., None], n, axis=-1)
    a = np.exp(-dt / spec.tau_c)
    kicks = np.stack([_generator(spec.seed, s).standard_normal(n) for s in stream_ids.ravel()])
    kicks[:, 1:] *= spec.sigma * np.sqrt(1 - a * a)
    kicks[:, 0] *= spec.sigma
    x = signal.lfilter([1.0], [1.0, -a], kicks, axis=-1)
    return x.reshape(stream_ids.shape + (n,))


@dataclass(frozen=True)
class NoisyTimeline:
    """Primitive steps split at noise-grid boundaries.

    ``kinds`` and ``durations`` describe each piece; ``grid_index`` maps a
    piece to the noise sample acting on it (-1 for instantaneous pulses).
    """

    kinds: tuple
    durations: np.ndarray
    grid_index: np.ndarray

    @property
    def duration(self) -> float:
        return float(self.durations.sum())

    def detuning(self, values: np.ndarray) -> np.ndarray:
        """Noise value for every piece; ``values`` may carry leading batch axes."""
        idx = np.clip(self.grid_index, 0, None)
        out = np.asarray(values)[..., idx]
        return np.where(self.grid_index >= 0, out, 0.0)


def apply_noise(steps, dt: float, grid_size: int | None = None) -> NoisyTimeline:
    """Split ``steps`` so every piece sees a single noise sample.

    ``steps`` is a sequence of ``(kind, duration)`` pairs; zero-length
    entries (instantaneous pulses) are kept as they are. Noise is attached to
    every finite piece, gates included.
    """
    if dt <= 0:
        raise ParameterError("dt must be positive")
    kinds, durs, idx = [], [], []
    t = 0.0
    for kind, d in steps:
        if d == 0:
            kinds.append(kind)
            durs.append(0.0)
            idx.append(-1)
            continue
        end = t + d
        while end - t > 1e-13:
            cell = int(np.floor(t / dt + 1e-9))
            stop = min(end, (cell + 1) * dt)
            if stop - t <= 1e-13:
                cell += 1
                stop = min(end, (cell + 1) * dt)
            kinds.append(kind)
            durs.append(stop - t)
            idx.append(cell)
            t = stop
    idx = np.asarray(idx, dtype=np.int64)
    if grid_size is not None and idx.size and idx.max() >= grid_size:
        raise ParameterError(
            f"noise trajectory covers {grid_size * dt:.6g} but the evolution lasts {t:.6g}"
        )
    return NoisyTimeline(tuple(kinds), np.asarray(durs), idx)


def integrated_phase(values: np.ndarray, dt: float, duration: float) -> np.ndarray:
    """Integral of delta(t) over [0, duration] for piecewise-constant samples."""
    values = np.asarray(values)
    full = int(np.floor(duration / dt + 1e-9))
    if full > values.shape[-1] or (full == values.shape[-1] and duration - full * dt > 1e-12):
        raise ParameterError("trajectory shorter than requested duration")
    acc = values[..., :full].sum(axis=-1) * dt
    rest = duration - full * dt
    if rest > 1e-12:
        acc = acc + values[..., full] * rest
    return acc


def plain_ramsey_contrast(values: np.ndarray, dt: float, duration: float) -> float:
    """Ensemble contrast |<exp(-2i int delta)>| of a bare sensor Ramsey run."""
    phase = integrated_phase(values, dt, duration)
    return float(abs(np.mean(np.exp(-2j * phase))))


def sensor_leakage(b: float, h: float, values: np.ndarray, dt: float, duration: float) -> np.ndarray:
    """Population outside |G(b, h)> after idling under (b + delta) sz + h sx.

    Returns one value per trajectory (leading axes of ``values``).
    """
    frame = ground_state(b, h)
    tl = apply_noise([("idle", duration)], dt, grid_size=np.shape(values)[-1])
    det = tl.detuning(values)
    batch = det.shape[:-1]
    psi = np.broadcast_to(frame.ground, batch + (2,)).astype(complex)
    for j, d in enumerate(tl.durations):
        U = qcore.su2_exp(h, 0.0, b + det[..., j], d)
        psi = np.einsum("...ij,...j->...i", U, psi)
    overlap = np.einsum("i,...i->...", frame.ground.conj(), psi)
    return 1 - np.abs(overlap) ** 2
