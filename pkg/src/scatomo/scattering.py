"""Scattering of a spin-1/2 probe off a fixed spin-1/2 target.

The probe meets the target through the contact interaction
``g (sigma_X . sigma_A) delta(x)``. Momenta are dimensionless,
``kappa = hbar^2 k / (m g)``, and the interaction strength seen by the probe is
``omega = 1 / kappa``.

Two independent routes to the scattering probabilities are provided:

* ``probability_closed_form`` evaluates the polynomial-in-orientation formula
  with the coefficients (a, a', b, c) of each channel. This is the production
  path and is vectorized over ``omega``.
* ``probability_trace`` builds the 4x4 operators T and R and evaluates
  ``Tr{|f><f| S (|i><i| (x) rho_A) S^dag}`` directly. It is kept as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .spin_algebra import (
    IDENTITY2,
    IDENTITY4,
    bloch_vector,
    partial_trace_target,
    singlet_triplet_projectors,
    spin_frame,
    spin_projector,
    unit_direction,
)

Channel = Literal["t", "r"]

PROB_TOL = 1e-12
IMAG_TOL = 1e-10

_CHANNEL_ALIASES = {
    "t": "t",
    "transmission": "t",
    "transmitted": "t",
    "r": "r",
    "reflection": "r",
    "reflected": "r",
}


def as_channel(channel: str) -> Channel:
    try:
        return _CHANNEL_ALIASES[str(channel).lower()]
    except KeyError:
        raise ValueError(f"unknown channel {channel!r}; use 't' or 'r'") from None


def check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not np.isfinite(kappa) or kappa <= 0.0:
        raise ValueError(f"kappa must be finite and positive, got {kappa!r}")
    return kappa


def omega(kappa):
    """Interaction strength ``omega = 1/kappa``. Accepts scalars or arrays."""
    k = np.asarray(kappa, dtype=float)
    if not np.all(np.isfinite(k)) or np.any(k <= 0.0):
        raise ValueError(f"kappa must be finite and positive, got {kappa!r}")
    w = 1.0 / k
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True)
class ChannelAmplitudes:
    """Singlet (1) and triplet (3) transmission/reflection amplitudes."""

    t1: complex
    r1: complex
    t3: complex
    r3: complex


def channel_amplitudes(omega: float) -> ChannelAmplitudes:
    w = float(omega)
    if not w > 0.0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    return ChannelAmplitudes(
        t1=1 / (1 - 3j * w),
        r1=3j * w / (1 - 3j * w),
        t3=1 / (1 + 1j * w),
        r3=-1j * w / (1 + 1j * w),
    )


def reflection_operator(omega: float) -> np.ndarray:
    amp = channel_amplitudes(omega)
    p1, p3 = singlet_triplet_projectors()
    return amp.r1 * p1 + amp.r3 * p3


def transmission_operator(omega: float) -> np.ndarray:
    return IDENTITY4 + reflection_operator(omega)


@dataclass(frozen=True)
class ProbabilityCoefficients:
    """Coefficients of one channel's probability at a given omega.

    ``P = a + a_prime (n_f.n_i) + b * [orientation term] + c v.(n_f x n_i)``
    where the orientation term is ``3 n_f.v + n_i.v`` for transmission and
    ``n_f.v - n_i.v`` for reflection. Fields may be arrays when omega is.
    """

    a: float
    a_prime: float
    b: float
    c: float
    channel: Channel


def _denominator(w):
    return (1 + w**2) * (1 + 9 * w**2)


def transmission_coefficients(omega) -> ProbabilityCoefficients:
    w = np.asarray(omega, dtype=float)
    d = _denominator(w)
    return ProbabilityCoefficients(
        a=(1 + 7 * w**2) / (2 * d),
        a_prime=(1 + 3 * w**2) / (2 * d),
        b=w**2 / d,
        c=-w / d,
        channel="t",
    )


def reflection_coefficients(omega) -> ProbabilityCoefficients:
    w = np.asarray(omega, dtype=float)
    d = _denominator(w)
    return ProbabilityCoefficients(
        a=3 * w**2 * (1 + 3 * w**2) / (2 * d),
        a_prime=-(w**2) * (1 - 9 * w**2) / (2 * d),
        b=w**2 / d,
        c=3 * w**3 / d,
        channel="r",
    )


def coefficients(omega, channel: str) -> ProbabilityCoefficients:
    if as_channel(channel) == "t":
        return transmission_coefficients(omega)
    return reflection_coefficients(omega)


@dataclass(frozen=True)
class MeasurementSetup:
    """Probe prepared along ``n_i``, detected along ``n_f`` in one channel."""

    n_i: tuple[float, float, float]
    n_f: tuple[float, float, float]
    kappa: float
    channel: Channel

    def __post_init__(self):
        object.__setattr__(self, "n_i", tuple(unit_direction(self.n_i, tol=1e-10)))
        object.__setattr__(self, "n_f", tuple(unit_direction(self.n_f, tol=1e-10)))
        object.__setattr__(self, "kappa", check_kappa(self.kappa))
        object.__setattr__(self, "channel", as_channel(self.channel))

    @property
    def omega(self) -> float:
        return 1.0 / self.kappa

    def with_channel(self, channel: str) -> "MeasurementSetup":
        return MeasurementSetup(self.n_i, self.n_f, self.kappa, channel)

    def flipped(self) -> "MeasurementSetup":
        """Same preparation and channel, detector turned to ``-n_f``."""
        return MeasurementSetup(self.n_i, tuple(-np.asarray(self.n_f)), self.kappa, self.channel)


def probability_row(setup: MeasurementSetup) -> tuple[np.ndarray, float]:
    """Affine form of the closed-form probability: ``P = row . v + offset``."""
    n_i = np.asarray(setup.n_i)
    n_f = np.asarray(setup.n_f)
    co = coefficients(setup.omega, setup.channel)
    if setup.channel == "t":
        direction = 3 * n_f + n_i
    else:
        direction = n_f - n_i
    row = co.b * direction + co.c * np.cross(n_f, n_i)
    offset = co.a + co.a_prime * float(n_f @ n_i)
    return np.asarray(row, dtype=float), float(offset)


def _checked_probability(p: float) -> float:
    if p < -PROB_TOL or p > 1 + PROB_TOL:
        raise ArithmeticError(f"probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def probability_closed_form(setup: MeasurementSetup, v) -> float:
    v = bloch_vector(v)
    row, offset = probability_row(setup)
    return _checked_probability(float(row @ v) + offset)


def probability_trace(setup: MeasurementSetup, rho_a) -> float:
    rho_a = np.asarray(rho_a, dtype=complex)
    w = setup.omega
    s = transmission_operator(w) if setup.channel == "t" else reflection_operator(w)
    prepared = np.kron(spin_projector(setup.n_i), rho_a)
    detector = np.kron(spin_projector(setup.n_f), IDENTITY2)
    p = np.trace(detector @ s @ prepared @ s.conj().T)
    if abs(p.imag) > IMAG_TOL:
        raise ArithmeticError(f"probability has imaginary part {p.imag!r}")
    return _checked_probability(float(p.real))


OUTCOMES = (("t", +1), ("t", -1), ("r", +1), ("r", -1))
"""Exclusive outcomes of one probe: (channel, spin sign along n_f)."""


def outcome_probabilities(n_i, n_f, kappa: float, v) -> np.ndarray:
    """Probabilities of the four exclusive outcomes, ordered as ``OUTCOMES``."""
    base = MeasurementSetup(n_i, n_f, kappa, "t")
    probs = []
    for channel, sign in OUTCOMES:
        setup = base.with_channel(channel)
        probs.append(probability_closed_form(setup if sign > 0 else setup.flipped(), v))
    return np.array(probs)


def probe_state_after_transmission(rho_a, omega: float, n_i) -> tuple[np.ndarray, float]:
    """Probe spin state after transmission, in the basis aligned with ``n_i``.

    Returns ``(rho_x, norm)`` where ``rho_x = Tr_A{T (|up><up| (x) rho_A) T^dag}``
    is unnormalized and ``norm = Tr rho_x`` is the total transmission
    probability. ``rho_a`` is given in the lab basis; ``rho_x`` is expressed in
    the (up, down) basis along ``n_i``, with up = ``n_i``. Multiplying
    ``rho_x`` by ``1 + omega**2`` (that is, dividing by ``|t3|^2``) gives the
    form in which rho_A's up-up element enters with unit weight.
    """
    w = float(omega)
    if not w > 0.0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    u = spin_frame(n_i)
    rho = u.conj().T @ np.asarray(rho_a, dtype=complex) @ u
    up_up, up_dn, dn_up, dn_dn = rho[0, 0], rho[0, 1], rho[1, 0], rho[1, 1]
    scale = 1 / (1 + w**2)
    rho_x = scale * np.array(
        [
            [up_up + (1 + w**2) / (1 + 9 * w**2) * dn_dn, 2j * w / (1 + 3j * w) * up_dn],
            [-2j * w / (1 - 3j * w) * dn_up, 4 * w**2 / (1 + 9 * w**2) * dn_dn],
        ]
    )
    return rho_x, float(np.trace(rho_x).real)


def probe_state_after_transmission_trace(rho_a, omega: float, n_i) -> np.ndarray:
    """Operator-level version of ``probe_state_after_transmission`` (oracle)."""
    u = spin_frame(n_i)
    t = transmission_operator(omega)
    up = np.outer(u[:, 0], u[:, 0].conj())
    out = partial_trace_target(t @ np.kron(up, np.asarray(rho_a, dtype=complex)) @ t.conj().T)
    return u.conj().T @ out @ u
