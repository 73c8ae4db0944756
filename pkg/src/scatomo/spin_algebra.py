"""Pauli algebra for the probe spin (2x2) and the probe-target pair (4x4).

Conventions used throughout the package:

* Two-spin basis order is |uu>, |ud>, |du>, |dd> with the probe spin as the
  first tensor factor and the target spin second (``np.kron(probe, target)``).
* "Up" is +z in the lab frame. Other axes enter only through ``pauli_dot``.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
IDENTITY4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in (IDENTITY2, IDENTITY4, *PAULI):
    _m.setflags(write=False)


def unit_direction(n, tol: float = TOL) -> np.ndarray:
    """Validate a spin axis and return it as a float array of shape (3,)."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise ValueError(f"direction must be a finite 3-vector, got {n!r}")
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"direction must have unit norm, |n| = {norm!r}")
    return n


def bloch_vector(v, tol: float = TOL) -> np.ndarray:
    """Validate a Bloch vector (|v| <= 1) and return it as a float array."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"Bloch vector must be a finite 3-vector, got {v!r}")
    norm = np.linalg.norm(v)
    if norm > 1.0 + tol:
        raise ValueError(f"Bloch vector lies outside the unit ball, |v| = {norm!r}")
    return v


def normalized(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError(f"cannot normalize {n!r}")
    return n / norm


def pauli_dot(n) -> np.ndarray:
    """Return n . sigma for a unit vector n."""
    n = unit_direction(n)
    return n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z


def spin_projector(n) -> np.ndarray:
    """|n><n| = (1 + n . sigma)/2, the pure spin state polarized along n."""
    return 0.5 * (IDENTITY2 + pauli_dot(n))


def bloch_to_density(v) -> np.ndarray:
    v = bloch_vector(v)
    return 0.5 * (IDENTITY2 + v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z)


def density_to_bloch(rho, tol: float = TOL) -> np.ndarray:
    """Bloch vector v_j = Tr(rho sigma_j) of a Hermitian unit-trace 2x2 matrix.

    Positivity is not checked here; the returned vector is validated as a Bloch
    vector, so a non-positive input with |v| > 1 raises.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"density matrix must be 2x2, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho)!r}, expected 1")
    v = np.array([np.trace(rho @ s).real for s in PAULI])
    return bloch_vector(v, tol=tol)


def heisenberg_coupling() -> np.ndarray:
    """sigma_X . sigma_A = sum_j sigma_j (x) sigma_j on the probe-target space."""
    return sum(np.kron(s, s) for s in PAULI)


def singlet_triplet_projectors() -> tuple[np.ndarray, np.ndarray]:
    """Projectors (P1, P3) onto the spin singlet and triplet subspaces."""
    h = heisenberg_coupling()
    return (IDENTITY4 - h) / 4, (3 * IDENTITY4 + h) / 4


def partial_trace_target(op) -> np.ndarray:
    """Trace out the target (second) factor of a 4x4 probe (x) target operator."""
    op = np.asarray(op).reshape(2, 2, 2, 2)
    return np.einsum("iaja->ij", op)


def spin_frame(n) -> np.ndarray:
    """Unitary whose columns are the spin states parallel and antiparallel to n.

    For n = +z this is the identity. The phase of each column is fixed so that
    the first nonzero component of the "up" column is real and positive.
    """
    n = unit_direction(n)
    if n[2] > -1.0 + 1e-15:
        # |up_n> = (cos(t/2), e^{i phi} sin(t/2)), |down_n> = (-e^{-i phi} sin(t/2), cos(t/2))
        c = np.sqrt(0.5 * (1.0 + n[2]))
        s = (n[0] + 1j * n[1]) / (2.0 * c)
        return np.array([[c, -np.conj(s)], [s, c]], dtype=complex)
    return np.array([[0, 1], [1, 0]], dtype=complex)
