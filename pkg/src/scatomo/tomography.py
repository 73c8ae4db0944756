"""Linear-inversion tomography schemes built from scattering probabilities.

Every scheme is a set of three measurement configurations whose probabilities
are affine in the Bloch vector: ``probs = matrix @ (frame @ v) + offset``. The
rows of ``frame`` are the orthonormal lab-frame axes whose components the
matrix columns address.

Available schemes:

* frame scheme: fixed incident spin ``n_i``, detection along an orthonormal
  frame ``(n_1, n_i x n_1, n_i)`` (transmission) or along its negative
  (reflection), one fixed momentum.
* parallel scheme: detector aligned with the incident spin (anti-aligned for
  reflection), three orthogonal incident axes, one fixed momentum. Each
  probability isolates one Bloch component.
* momentum scheme: fixed perpendicular ``n_i``, ``n_f``; reflection and
  transmission at ``kappa1`` plus transmission at ``kappa2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scattering import (
    MeasurementSetup,
    as_channel,
    check_kappa,
    coefficients,
    probability_row,
    transmission_coefficients,
)
from .spin_algebra import bloch_vector, unit_direction

ORTHO_TOL = 1e-10
MAX_CONDITION = 1e12
KAPPA_GAP_TOL = 1e-9


class DegenerateSchemeError(ValueError):
    """The scheme's probabilities do not determine the Bloch vector."""


@dataclass(frozen=True)
class SchemeMatrix:
    matrix: np.ndarray
    offset: np.ndarray
    frame: np.ndarray
    setups: tuple[MeasurementSetup, ...]
    provenance: dict = field(default_factory=dict)

    def forward(self, v) -> np.ndarray:
        """Exact probabilities of the three configurations for Bloch vector v."""
        v = np.asarray(v, dtype=float)
        return self.matrix @ (self.frame @ v) + self.offset

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @property
    def inverse_determinant(self) -> float:
        """det of the probability-to-components map (the matrix inverse)."""
        return 1.0 / float(np.linalg.det(self.matrix))


@dataclass(frozen=True)
class ReconstructionResult:
    v_raw: np.ndarray
    v_clipped: np.ndarray
    condition_number: float
    was_clipped: bool
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "v_raw": [float(x) for x in self.v_raw],
            "v_clipped": [float(x) for x in self.v_clipped],
            "condition_number": float(self.condition_number),
            "was_clipped": bool(self.was_clipped),
            "provenance": self.provenance,
        }


def clip_to_ball(v_raw) -> tuple[np.ndarray, bool]:
    """Radially project onto the unit ball."""
    v_raw = np.asarray(v_raw, dtype=float)
    norm = np.linalg.norm(v_raw)
    if norm > 1.0:
        return v_raw / norm, True
    return v_raw.copy(), False


def _check_orthogonal(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if abs(float(a @ b)) > ORTHO_TOL:
        raise ValueError(f"{what} must be orthogonal, dot product = {float(a @ b)!r}")


def _scheme_from_setups(setups, frame, provenance) -> SchemeMatrix:
    rows, offsets = zip(*(probability_row(s) for s in setups))
    matrix = np.array(rows) @ frame.T
    return SchemeMatrix(
        matrix=matrix,
        offset=np.array(offsets),
        frame=frame,
        setups=tuple(setups),
        provenance=provenance,
    )


def strategy1_frame_scheme(n_i, n_1, kappa: float, channel: str = "t") -> SchemeMatrix:
    """Fixed incident spin, three detector orientations, one momentum."""
    n_i = unit_direction(n_i, tol=ORTHO_TOL)
    n_1 = unit_direction(n_1, tol=ORTHO_TOL)
    _check_orthogonal(n_i, n_1, "n_1 and n_i")
    kappa = check_kappa(kappa)
    channel = as_channel(channel)
    frame = np.array([n_1, np.cross(n_i, n_1), n_i])
    sign = 1.0 if channel == "t" else -1.0
    setups = [MeasurementSetup(n_i, sign * n_a, kappa, channel) for n_a in frame]
    return _scheme_from_setups(
        setups,
        frame,
        {"strategy": "frame", "channel": channel, "kappa": kappa,
         "n_i": n_i.tolist(), "detectors": [list(s.n_f) for s in setups]},
    )


def strategy1_parallel_scheme(directions, kappa: float, channel: str = "t") -> SchemeMatrix:
    """Detector parallel (t) or antiparallel (r) to each of three orthogonal n_i."""
    frame = _orthonormal_triple(directions)
    kappa = check_kappa(kappa)
    channel = as_channel(channel)
    sign = 1.0 if channel == "t" else -1.0
    setups = [MeasurementSetup(n, sign * n, kappa, channel) for n in frame]
    return _scheme_from_setups(
        setups,
        frame,
        {"strategy": "parallel", "channel": channel, "kappa": kappa,
         "directions": frame.tolist()},
    )


def strategy2_scheme(n_i, n_f, kappa1: float, kappa2: float) -> SchemeMatrix:
    """Fixed perpendicular orientations; rows P^r(k1), P^t(k1), P^t(k2).

    Components are taken along ``(n_f, n_i, n_f x n_i)``.
    """
    n_i = unit_direction(n_i, tol=ORTHO_TOL)
    n_f = unit_direction(n_f, tol=ORTHO_TOL)
    _check_orthogonal(n_i, n_f, "n_f and n_i")
    kappa1 = check_kappa(kappa1)
    kappa2 = check_kappa(kappa2)
    provenance = {"strategy": "momentum", "kappa1": kappa1, "kappa2": kappa2,
                  "n_i": n_i.tolist(), "n_f": n_f.tolist()}
    if abs(kappa1 - kappa2) <= KAPPA_GAP_TOL * max(kappa1, kappa2):
        raise DegenerateSchemeError(
            f"scheme degenerate: momentum scheme needs kappa1 != kappa2 ({provenance})"
        )
    frame = np.array([n_f, n_i, np.cross(n_f, n_i)])
    setups = [
        MeasurementSetup(n_i, n_f, kappa1, "r"),
        MeasurementSetup(n_i, n_f, kappa1, "t"),
        MeasurementSetup(n_i, n_f, kappa2, "t"),
    ]
    return _scheme_from_setups(setups, frame, provenance)


def invert_scheme(scheme: SchemeMatrix, probs) -> ReconstructionResult:
    """Solve ``matrix @ components + offset = probs`` and map back to the lab frame."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (3,):
        raise ValueError(f"expected three probabilities, got shape {probs.shape}")
    cond = scheme.condition_number
    if not np.isfinite(cond) or cond >= MAX_CONDITION:
        raise DegenerateSchemeError(
            f"scheme degenerate (condition number {cond:.3g}): {scheme.provenance}"
        )
    components = np.linalg.solve(scheme.matrix, probs - scheme.offset)
    v_raw = scheme.frame.T @ components
    v_clipped, was_clipped = clip_to_ball(v_raw)
    return ReconstructionResult(v_raw, v_clipped, cond, was_clipped, scheme.provenance)


def strategy1_parallel_component(p: float, omega: float, channel: str = "t") -> float:
    """Bloch component along n_i from one parallel-scheme probability.

    Transmission (detector along n_i) and reflection (detector along -n_i).
    """
    w = float(omega)
    if not (np.isfinite(w) and w > 0.0):
        raise ValueError(f"omega must be finite and positive, got {omega!r}")
    if as_channel(channel) == "t":
        return (p * (1 + w**2) * (1 + 9 * w**2) - (1 + 5 * w**2)) / (4 * w**2)
    co = coefficients(w, "r")
    return float((co.a - co.a_prime - p) / (2 * co.b))


def _orthonormal_triple(directions) -> np.ndarray:
    frame = np.array([unit_direction(d, tol=ORTHO_TOL) for d in directions])
    if frame.shape != (3, 3):
        raise ValueError("expected exactly three directions")
    for i in range(3):
        for j in range(i + 1, 3):
            _check_orthogonal(frame[i], frame[j], f"directions {i} and {j}")
    return frame


def reconstruct_parallel(directions, probs, omega: float, channel: str = "t") -> ReconstructionResult:
    """Assemble v from three parallel-scheme probabilities along orthogonal axes."""
    frame = _orthonormal_triple(directions)
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (3,):
        raise ValueError(f"expected three probabilities, got shape {probs.shape}")
    components = np.array([strategy1_parallel_component(p, omega, channel) for p in probs])
    v_raw = frame.T @ components
    v_clipped, was_clipped = clip_to_ball(v_raw)
    provenance = {"strategy": "parallel", "channel": as_channel(channel),
                  "kappa": 1.0 / float(omega), "directions": frame.tolist()}
    return ReconstructionResult(v_raw, v_clipped, 1.0, was_clipped, provenance)


@dataclass(frozen=True)
class RankReport:
    rank: int
    singular_values: np.ndarray
    column_ratio: float
    matrix: np.ndarray


def strategy2_transmission_only_matrix(kappas) -> np.ndarray:
    """Rows (3 b_t, b_t, c_t) at each momentum; columns (v_f, v_i, v_perp)."""
    kappas = np.array([check_kappa(k) for k in kappas])
    co = transmission_coefficients(1.0 / kappas)
    return np.column_stack([3 * co.b, co.b, co.c])


def strategy2_transmission_only_rank(kappa1: float, kappa2: float, kappa3: float) -> RankReport:
    """Numerical rank of the transmission-only momentum scheme (always 2)."""
    m = strategy2_transmission_only_matrix([kappa1, kappa2, kappa3])
    s = np.linalg.svd(m, compute_uv=False)
    rank = int(np.sum(s > s[0] * 1e-10))
    ratio = float(np.mean(m[:, 0] / m[:, 1]))
    return RankReport(rank=rank, singular_values=s, column_ratio=ratio, matrix=m)


def reconstruct(scheme: SchemeMatrix, probs) -> ReconstructionResult:
    """Invert any scheme; the parallel scheme uses its closed-form components."""
    if scheme.provenance.get("strategy") == "parallel":
        prov = scheme.provenance
        return reconstruct_parallel(prov["directions"], probs, 1.0 / prov["kappa"], prov["channel"])
    return invert_scheme(scheme, probs)


def exact_probabilities(scheme: SchemeMatrix, v) -> np.ndarray:
    return scheme.forward(bloch_vector(v))


STRATEGIES = ("frame", "parallel", "momentum")


def build_scheme(strategy: str, kappa: float, kappa2: float | None = None, channel: str = "t",
                 n_i=(0.0, 0.0, 1.0), n_f=(1.0, 0.0, 0.0)) -> SchemeMatrix:
    """Build a scheme by name from one perpendicular pair of axes.

    ``n_f`` plays the role of ``n_1`` for the frame scheme; the parallel scheme
    uses the triad ``(n_f, n_i x n_f, n_i)``. ``kappa2`` and the momentum
    scheme go together; ``channel`` is ignored by the momentum scheme.
    """
    if strategy == "frame":
        return strategy1_frame_scheme(n_i, n_f, kappa, channel)
    if strategy == "parallel":
        n_i = unit_direction(n_i, tol=ORTHO_TOL)
        n_f = unit_direction(n_f, tol=ORTHO_TOL)
        _check_orthogonal(n_i, n_f, "n_f and n_i")
        return strategy1_parallel_scheme([n_f, np.cross(n_i, n_f), n_i], kappa, channel)
    if strategy == "momentum":
        if kappa2 is None:
            raise ValueError("the momentum scheme needs kappa2")
        return strategy2_scheme(n_i, n_f, kappa, kappa2)
    raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
