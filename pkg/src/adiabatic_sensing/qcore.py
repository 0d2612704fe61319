"""
Dense linear algebra for few-qubit registers.

States and operators are plain complex numpy arrays. The helpers in this
module validate them against the usual invariants (normalisation,
hermiticity, unitarity, positivity) and provide the handful of primitives
the simulator is built on: Pauli-string construction, propagation under a
constant Hamiltonian, extraction of an effective generator from a unitary,
partial trace and partial transpose.

Qubit 0 is always the leftmost tensor factor.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as la

from .errors import ParameterError

NORM_TOL = 1e-12
HERM_TOL = 1e-12
UNITARY_TOL = 1e-10
DENSITY_TOL = 1e-10

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI = {"I": SIGMA_I, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


def n_qubits_of(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ParameterError(f"dimension {dim} is not a power of two")
    return n


def ket(amplitudes: Sequence[complex], normalize: bool = True) -> np.ndarray:
    """Return a state vector, normalised unless ``normalize`` is False."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    n_qubits_of(psi.size)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ParameterError("zero vector is not a state")
    if normalize:
        return psi / norm
    if abs(norm - 1) > NORM_TOL:
        raise ParameterError(f"ket not normalised (norm={norm!r})")
    return psi


def as_hermitian(H: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ParameterError(f"operator must be square, got shape {H.shape}")
    if np.max(np.abs(H - H.conj().T), initial=0.0) > tol * max(1.0, np.max(np.abs(H))):
        raise ParameterError("operator is not Hermitian")
    return H


def as_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ParameterError(f"operator must be square, got shape {U.shape}")
    err = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if err > tol:
        raise ParameterError(f"operator is not unitary (|U'U - I|_F = {err:.3e})")
    return U


def as_density(rho: np.ndarray, tol: float = DENSITY_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ParameterError(f"density matrix must be square, got {rho.shape}")
    n_qubits_of(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ParameterError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise ParameterError(f"density matrix trace is {np.trace(rho).real!r}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ParameterError("density matrix has negative eigenvalues")
    return rho


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def build_operator(
    pauli_string: Iterable[tuple[int, str]], n_qubits: int, coefficient: float = 1.0
) -> np.ndarray:
    """Tensor product of single-qubit Paulis, identity on unlisted qubits.

    Parameters
    ----------
    pauli_string : iterable of (qubit index, axis)
        Axis is one of ``"x"``, ``"y"``, ``"z"`` or ``"I"``.
    n_qubits : int
        Register size.
    coefficient : float
        Real prefactor.
    """
    factors = [SIGMA_I] * n_qubits
    seen = set()
    for index, axis in pauli_string:
        if not 0 <= index < n_qubits:
            raise ParameterError(f"qubit index {index} out of range for {n_qubits} qubits")
        if index in seen:
            raise ParameterError(f"duplicate qubit index {index}")
        if axis not in PAULI:
            raise ParameterError(f"unknown Pauli axis {axis!r}")
        seen.add(index)
        factors[index] = PAULI[axis]
    return float(coefficient) * kron(*factors)


def embed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Place a single-qubit operator on ``qubit`` of an n-qubit register."""
    factors = [SIGMA_I] * n_qubits
    factors[qubit] = op
    return kron(*factors)


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) through the eigendecomposition of H."""
    H = as_hermitian(H)
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(H: np.ndarray, t: float, psi: np.ndarray) -> np.ndarray:
    """Propagate ``psi`` for time ``t`` under the constant Hamiltonian ``H``."""
    if t < 0:
        raise ParameterError("evolution time must be non-negative")
    psi = np.asarray(psi, dtype=complex)
    if t == 0:
        as_hermitian(H)
        return psi.copy()
    return expm_hermitian(H, t) @ psi


def su2_exp(hx, hy, hz, t):
    """Batched exp(-i t (hx X + hy Y + hz Z)) in closed form.

    Arguments broadcast against each other; the result has shape
    ``broadcast_shape + (2, 2)``.
    """
    hx, hy, hz, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (hx, hy, hz, t)))
    n = np.sqrt(hx * hx + hy * hy + hz * hz)
    c = np.cos(n * t)
    # sin(n t)/n -> t as n -> 0
    safe = np.where(n > 0, n, 1.0)
    s = np.where(n > 0, np.sin(n * t) / safe, t)
    U = np.empty(hx.shape + (2, 2), dtype=complex)
    U[..., 0, 0] = c - 1j * s * hz
    U[..., 1, 1] = c + 1j * s * hz
    U[..., 0, 1] = -1j * s * (hx - 1j * hy)
    U[..., 1, 0] = -1j * s * (hx + 1j * hy)
    return U


def effective_generator(U: np.ndarray, T: float, branch_tol: float = 1e-6) -> np.ndarray:
    """Hermitian H with exp(-i H T) = U, principal branch.

    Raises
    ------
    ParameterError
        If an eigenphase of ``U`` sits within ``branch_tol`` of +-pi, where the
        principal logarithm is ambiguous. Shorten ``T`` in that case.
    """
    if T <= 0:
        raise ParameterError("T must be positive")
    U = as_unitary(U)
    # complex Schur form of a normal matrix is diagonal with unitary Z
    D, Z = la.schur(U, output="complex")
    phases = np.angle(np.diag(D))
    if np.any(np.pi - np.abs(phases) < branch_tol):
        raise ParameterError("eigenphase at +-pi: generator branch is ambiguous")
    H = (Z * (-phases / T)) @ Z.conj().T
    return 0.5 * (H + H.conj().T)


def _check_keep(keep, n: int) -> list[int]:
    keep = [int(k) for k in keep]
    if len(set(keep)) != len(keep):
        raise ParameterError(f"duplicate indices in keep {keep}")
    keep = sorted(keep)
    if not keep:
        raise ParameterError("keep must be non-empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ParameterError(f"keep indices {keep} invalid for {n} qubits")
    return keep


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the qubits listed in ``keep`` (order kept ascending)."""
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits_of(rho.shape[0])
    keep = _check_keep(keep, n)
    traced = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    # trace pairs from the highest index down so axis numbers stay valid
    for q in sorted(traced, reverse=True):
        nq = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + nq)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def partial_transpose(rho: np.ndarray, qubits: Iterable[int]) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits_of(rho.shape[0])
    qubits = _check_keep(qubits, n)
    t = rho.reshape([2] * (2 * n))
    axes = list(range(2 * n))
    for q in qubits:
        axes[q], axes[q + n] = axes[q + n], axes[q]
    return t.transpose(axes).reshape(rho.shape)


def ry(angle: float) -> np.ndarray:
    """Single-qubit rotation exp(-i angle Y / 2)."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)
