"""
Physical model: driven two-level sensors, their dressed frame and the
sensor-probe interaction.

Everything is expressed in units of the final drive amplitude ``h``
(hbar = 1, times in 1/h).

Dressed-basis convention
------------------------
With cos(theta) = b/omega and sin(theta) = h/omega,

    |G> = -sin(theta/2)|0> + cos(theta/2)|1>      (energy -omega)
    |E> =  cos(theta/2)|0> + sin(theta/2)|1>      (energy +omega)

For this choice sigma_z = -cos(theta) sz~ - sin(theta) sx~ with
sz~ = |G><G| - |E><E| and sx~ = |G><E| + |E><G|, so that

    -gamma sz (x) sz = gamma cos(theta) sz~ (x) sz + gamma sin(theta) sx~ (x) sz

holds literally, signs included.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import ParameterError


@dataclass(frozen=True)
class SensorParams:
    """Physical parameters of one protocol run (units of h).

    Attributes
    ----------
    b0 : float
        Known bias field.
    delta_b : float
        Offset to be estimated; the true field is ``b0 + delta_b``.
    h : float
        Final drive amplitude.
    gamma : float
        Probe-sensor coupling (identical for every sensor).
    lambda0 : float
        Initial drive amplitude of the adiabatic sweep.
    """

    b0: float = 0.02
    delta_b: float = 0.0
    h: float = 1.0
    gamma: float = 1.5
    lambda0: float = 10.0

    def __post_init__(self):
        if not self.h > 0:
            raise ParameterError("h must be positive")
        if not self.gamma > 0:
            raise ParameterError("gamma must be positive")
        if self.lambda0 < self.h:
            raise ParameterError("lambda0 must be >= h")
        if abs(self.b) >= self.lambda0:
            raise ParameterError("|b0 + delta_b| must be smaller than lambda0")
        if self.lambda0 < 10 * abs(self.b):
            warnings.warn(
                "lambda0 < 10|b|: initial state is a poor approximation of the ground state",
                stacklevel=2,
            )

    @property
    def b(self) -> float:
        return self.b0 + self.delta_b

    def with_delta_b(self, delta_b: float) -> "SensorParams":
        return SensorParams(self.b0, delta_b, self.h, self.gamma, self.lambda0)


@dataclass(frozen=True)
class DressedFrame:
    omega: float
    theta: float
    ground: np.ndarray
    excited: np.ndarray

    @property
    def basis(self) -> np.ndarray:
        """Columns |G>, |E> in the computational basis."""
        return np.column_stack([self.ground, self.excited])

    def sigma_z(self) -> np.ndarray:
        return qcore.projector(self.ground) - qcore.projector(self.excited)

    def sigma_x(self) -> np.ndarray:
        return np.outer(self.ground, self.excited.conj()) + np.outer(self.excited, self.ground.conj())

    def sigma_y(self) -> np.ndarray:
        return -1j * np.outer(self.ground, self.excited.conj()) + 1j * np.outer(
            self.excited, self.ground.conj()
        )

    def state(self, prep_error: float = 0.0) -> np.ndarray:
        """sqrt(1 - delta)|G> + sqrt(delta)|E>."""
        if not 0 <= prep_error < 1:
            raise ParameterError("prep_error must lie in [0, 1)")
        return np.sqrt(1 - prep_error) * self.ground + np.sqrt(prep_error) * self.excited


def omega(b: float, h: float) -> float:
    if not h > 0:
        raise ParameterError("h must be positive")
    return float(np.hypot(h, b))


def ground_state(b: float, h: float) -> DressedFrame:
    """Dressed frame of ``b sz + h sx``."""
    w = omega(b, h)
    theta = float(np.arctan2(h, b))
    g = np.array([-np.sin(theta / 2), np.cos(theta / 2)], dtype=complex)
    e = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
    return DressedFrame(w, theta, g, e)


def sensor_hamiltonian(b: float, lam: float) -> np.ndarray:
    return b * qcore.SIGMA_Z + lam * qcore.SIGMA_X


def interaction_hamiltonian(gamma: float) -> np.ndarray:
    """-gamma sz (x) sz on (sensor, probe)."""
    return qcore.build_operator([(0, "z"), (1, "z")], 2, -gamma)


def pair_decomposition(gamma: float, frame: DressedFrame):
    """Split the sensor-probe coupling into its dressed-basis components.

    Returns
    -------
    zz_coeff : float
        gamma cos(theta), multiplying sz~ (x) sz.
    xz_coeff : float
        gamma sin(theta), multiplying sx~ (x) sz.
    H_pair : ndarray
        The 4x4 coupling -gamma sz (x) sz.
    """
    zz = gamma * np.cos(frame.theta)
    xz = gamma * np.sin(frame.theta)
    return float(zz), float(xz), interaction_hamiltonian(gamma)


def amplified_field(N: int, gamma: float, b: float, h: float) -> tuple[float, float]:
    """Effective probe field b_a and amplification factor eta = N gamma / omega."""
    if N < 1:
        raise ParameterError("N must be >= 1")
    eta = N * gamma / omega(b, h)
    return eta * b, eta
