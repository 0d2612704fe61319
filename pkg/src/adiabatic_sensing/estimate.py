"""
Sensitivity, standard-quantum-limit comparison, scaling fits and the
entanglement diagnostic.

Sensitivity follows the slope/variance estimator

    delta_b = sqrt(Var P) / |d<P>/db| * sqrt(T),

with T = T_a + T_s (realisation factor) the wall-clock time of one run.

Phase convention: the closed form is quoted as

    delta_b ~ (1/N) (h/gamma) sqrt(T_a + T_s (1 + tau_d/tau)) / T_s,

which corresponds to a probe phase b_a T_s. The simulated probe picks up the
relative phase 2 b_a T_s (the two probe branches rotate in opposite
senses), which halves the sensitivity. ``convention="physical"`` applies that
factor so formula and simulation can be compared like for like;
``convention="quoted"`` returns the expression as written.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import qcore
from .adiabatic import adiabatic_time
from .dd import cycle_unitary_full
from .errors import ParameterError
from .model import ground_state
from .protocol import RamseyConfig, SignalCurve, ramsey_run

CONVENTIONS = ("quoted", "physical")
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def _convention_factor(convention: str) -> float:
    if convention not in CONVENTIONS:
        raise ParameterError(f"convention must be one of {CONVENTIONS}")
    return 1.0 if convention == "quoted" else 0.5


@dataclass(frozen=True)
class SensitivityReport:
    delta_b: float
    slope: float
    total_time: float
    T_a: float
    T_s: float
    tau_d: float
    tau: float
    N: int
    working_point: float
    expectation: float
    variance: float
    sql_total_time: float
    sql_interrogation_time: float
    enhancement: float
    infinite: bool = False

    FIELDS = (
        "delta_b", "slope", "total_time", "T_a", "T_s", "tau_d", "tau", "N", "working_point",
        "expectation", "variance", "sql_total_time", "sql_interrogation_time", "enhancement", "infinite",
    )

    def row(self) -> list[str]:
        d = asdict(self)
        return [repr(d[k]) if isinstance(d[k], float) else str(d[k]) for k in self.FIELDS]

    def to_csv(self, path, header: dict | None = None):
        with open(path, "w", newline="") as fh:
            for k, v in (header or {}).items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.FIELDS)
            w.writerow(self.row())


class SQLReport(NamedTuple):
    sql_total_time: float
    sql_interrogation_time: float
    enhancement: float


def sensitivity_closed_form(N, h, gamma, T_a, T_s, tau_d, tau, convention: str = "quoted") -> float:
    """Heisenberg-scaling closed form; see module docstring for ``convention``."""
    T = T_a + T_s * (1 + tau_d / tau)
    return float(_convention_factor(convention) * (h / gamma) * np.sqrt(T) / (N * T_s))


def sql_and_enhancement(N, T, T_s, h, gamma, convention: str = "quoted") -> SQLReport:
    """SQL over the total time, SQL over the interrogation time, and the
    ratio of the closed-form sensitivity to the former."""
    if min(N, T, T_s, h, gamma) <= 0:
        raise ParameterError("inputs must be positive")
    sql_T = 1 / np.sqrt(N * T)
    sql_s = 1 / np.sqrt(N * T_s)
    enh = _convention_factor(convention) * h / (np.sqrt(N) * gamma) * T / T_s
    return SQLReport(float(sql_T), float(sql_s), float(enh))


def _pick_index(x, slope, sens, working_point) -> int:
    if working_point == "max_slope":
        return int(np.argmax(np.abs(slope)))
    if working_point == "best":
        finite = np.isfinite(sens)
        if not finite.any():
            return int(np.argmax(np.abs(slope)))
        return int(np.nanargmin(np.where(finite, sens, np.nan)))
    if isinstance(working_point, str):
        raise ParameterError(f"unknown working point {working_point!r}")
    i = int(np.argmin(np.abs(x - float(working_point))))
    if abs(x[i] - float(working_point)) > 1e-9 * max(1.0, abs(float(working_point))):
        raise ParameterError("working point is not a scan value")
    return i


def sensitivity_from_curve(
    curve: SignalCurve,
    T: float,
    working_point="max_slope",
    components: tuple | None = None,
) -> SensitivityReport:
    """delta_b at a working point of a Delta-b scan.

    ``working_point`` is a scan value, ``"max_slope"`` (fringe node) or
    ``"best"`` (smallest delta_b over the scan). ``components`` is
    ``(T_a, T_s, tau_d, tau)`` and only feeds the report. A vanishing slope
    yields ``delta_b = inf`` with ``infinite`` set.
    """
    if curve.scan_param != "delta_b":
        raise ParameterError("sensitivity needs a scan over delta_b")
    x = np.asarray(curve.scan_values, dtype=float)
    if x.size < 5:
        raise ParameterError("need at least 5 scan points for a centred slope")
    if not T > 0:
        raise ParameterError("total time must be positive")
    slope = np.gradient(curve.expectation, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        sens = np.sqrt(curve.variance) * np.sqrt(T) / np.abs(slope)
    sens[0] = sens[-1] = np.inf  # one-sided differences at the edges
    i = _pick_index(x, slope, sens, working_point)
    T_a, T_s, tau_d, tau = components if components is not None else (0.0, float(curve.T_s[i]), 0.0, curve.tau)
    # finite differences of a flat point leave round-off of order eps / step
    zero = abs(slope[i]) <= 1e-9 * max(float(np.max(np.abs(slope))), 1e-300)
    value = float("inf") if zero else float(np.sqrt(curve.variance[i]) * np.sqrt(T) / abs(slope[i]))
    sql = sql_and_enhancement(curve.N, T, T_s, 1.0, 1.0)
    return SensitivityReport(
        delta_b=value, slope=float(slope[i]), total_time=float(T), T_a=float(T_a), T_s=float(T_s),
        tau_d=float(tau_d), tau=float(tau), N=curve.N, working_point=float(x[i]),
        expectation=float(curve.expectation[i]), variance=float(curve.variance[i]),
        sql_total_time=sql.sql_total_time, sql_interrogation_time=sql.sql_interrogation_time,
        enhancement=value / sql.sql_total_time, infinite=bool(zero),
    )


def scaling_fit(points) -> tuple[float, float, float]:
    """Least-squares log(delta_b) = exponent log(N) + intercept; returns (exponent, intercept, r^2)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ParameterError("need at least 4 (N, delta_b) points")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ParameterError("N and delta_b must be positive and finite")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def negativity(rho: np.ndarray) -> float:
    """Sum of |negative eigenvalues| of the partial transpose of a 2-qubit state."""
    rho = qcore.as_density(rho)
    if rho.shape != (4, 4):
        raise ParameterError("negativity is defined here for 2-qubit states")
    ev = np.linalg.eigvalsh(qcore.partial_transpose(rho, [1]))
    return float(-ev[ev < 0].sum())


# ---------------------------------------------------------------------------
# pipeline helpers


def total_time(config: RamseyConfig, epsilon_a: float = 0.01) -> tuple[float, float]:
    """(T, T_a) for one run: preparation plus the decoupled interrogation."""
    p = config.params
    T_a = adiabatic_time(epsilon_a, p.lambda0, p.h, p.b0)
    cycle = config.cycle
    if cycle.order == 1:
        return T_a + config.T_s * (1 + cycle.tau_d / cycle.tau), T_a
    return T_a + config.T_s * cycle.realization_factor, T_a


def fringe_period(config: RamseyConfig) -> float:
    """Delta-b period of the ideal N-sensor fringe near b0."""
    p = config.params
    return float(np.pi * np.hypot(p.h, p.b0) / (config.N * p.gamma * config.T_s))


def scan_sensitivity(
    config: RamseyConfig,
    n_points: int = 401,
    working_point="best",
    epsilon_a: float = 0.01,
    width: float | None = None,
) -> tuple[SensitivityReport, SignalCurve]:
    """Scan one fringe period around the configured offset and report delta_b."""
    width = fringe_period(config) if width is None else width
    centre = config.params.delta_b
    scan = centre + np.linspace(-width / 2, width / 2, n_points)
    curve = ramsey_run(config, scan)
    T, T_a = total_time(config, epsilon_a)
    comps = (T_a, config.T_s, config.cycle.tau_d, config.tau)
    return sensitivity_from_curve(curve, T, working_point, comps), curve


def pair_negativity_free(b: float, h: float, gamma: float, t: float) -> float:
    """Negativity of |G> (x) |+> after time t under b sz + h sx - gamma sz sz (no decoupling)."""
    frame = ground_state(b, h)
    H = (np.kron(b * qcore.SIGMA_Z + h * qcore.SIGMA_X, qcore.SIGMA_I)
         - gamma * np.kron(qcore.SIGMA_Z, qcore.SIGMA_Z))
    psi = qcore.evolve(H, t, np.kron(frame.ground, PLUS))
    return negativity(qcore.projector(psi))


def pair_negativity_dd(config: RamseyConfig) -> float:
    """Negativity of one sensor and the probe after the decoupled interrogation."""
    p = config.params
    frame = ground_state(p.b, p.h)
    U = cycle_unitary_full(config.cycle, p.gamma, p.b, p.h, config.drive_during_interaction)
    psi = np.linalg.matrix_power(U, config.n_cycles) @ np.kron(frame.state(config.prep_error), PLUS)
    return negativity(qcore.projector(psi))


__all__ = [
    "CONVENTIONS", "SensitivityReport", "SQLReport", "sensitivity_closed_form", "sql_and_enhancement",
    "sensitivity_from_curve", "scaling_fit", "negativity", "total_time", "fringe_period",
    "scan_sensitivity", "pair_negativity_free", "pair_negativity_dd",
]
