"""Finite-shot simulation of the scattering experiments.

Each physical setup (incident spin, detector axis, momentum) sends ``shots``
probes; every probe ends in one of four exclusive outcomes (transmitted or
reflected, spin along +n_f or -n_f), so counts are multinomial. Empirical
frequencies are fed to the same linear inversion used for exact data.

Randomness: every replica draws from its own Philox stream keyed by
``SeedSequence(seed, spawn_key=(..., replica))``, so results are bitwise
reproducible and independent of how replicas are distributed over workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .scattering import OUTCOMES, outcome_probabilities
from .spin_algebra import bloch_vector
from .tomography import ReconstructionResult, SchemeMatrix, build_scheme, reconstruct

DEFAULT_SHOTS = 10_000
DEFAULT_REPLICAS = 200


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def sample_ball(n: int, seed: int, radius: float = 1.0) -> np.ndarray:
    """``n`` points uniform in the ball of the given radius."""
    rng = make_rng(seed, 2**31 - 1)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * radius * rng.uniform(size=(n, 1)) ** (1 / 3)


@dataclass(frozen=True)
class ExperimentPlan:
    strategy: str
    kappa: float
    kappa2: float | None = None
    channel: str = "t"
    n_i: tuple = (0.0, 0.0, 1.0)
    n_f: tuple = (1.0, 0.0, 0.0)
    shots: int | None = DEFAULT_SHOTS
    replicas: int = DEFAULT_REPLICAS
    seed: int = 0

    def __post_init__(self):
        if self.shots is not None and (int(self.shots) != self.shots or self.shots < 1):
            raise ValueError(f"shots must be a positive integer, got {self.shots!r}")
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise ValueError(f"replicas must be a positive integer, got {self.replicas!r}")

    def scheme(self) -> SchemeMatrix:
        return build_scheme(self.strategy, self.kappa, self.kappa2, self.channel, self.n_i, self.n_f)


def physical_setups(scheme: SchemeMatrix):
    """Distinct (n_i, n_f, kappa) experiments and, per scheme row, where to read it.

    Returns ``(experiments, readout)`` with ``readout[row] = (experiment index,
    outcome index)``. Rows that differ only in channel share one experiment.
    """
    experiments: list[tuple] = []
    readout = []
    for s in scheme.setups:
        key = (s.n_i, s.n_f, s.kappa)
        if key not in experiments:
            experiments.append(key)
        readout.append((experiments.index(key), OUTCOMES.index((s.channel, +1))))
    return experiments, readout


def experiment_probabilities(experiments, v_true) -> np.ndarray:
    """Outcome probabilities, shape ``(len(experiments), 4)``, columns as ``OUTCOMES``."""
    v_true = bloch_vector(v_true)
    probs = np.array([outcome_probabilities(n_i, n_f, k, v_true) for n_i, n_f, k in experiments])
    return probs / probs.sum(axis=1, keepdims=True)


def sample_shots(experiments, v_true, shots: int, seed: int | np.random.Generator) -> np.ndarray:
    """Multinomial outcome counts, shape ``(len(experiments), 4)``, columns as ``OUTCOMES``."""
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    return rng.multinomial(int(shots), experiment_probabilities(experiments, v_true))


@dataclass(frozen=True)
class ErrorReport:
    mean_error: float
    std_error: float
    mean_trace_distance: float
    clip_rate: float
    replicas: int
    shots: int | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class MonteCarloResult:
    reconstructions: list[ReconstructionResult]
    errors: np.ndarray
    report: ErrorReport
    v_true: np.ndarray = field(repr=False, default=None)


def _replica(scheme, probs, readout, shots, seed, key):
    counts = make_rng(seed, *key).multinomial(shots, probs)
    freqs = np.array([counts[e, o] for e, o in readout]) / shots
    return reconstruct(scheme, freqs)


def _summarize(recs, v_true, shots) -> tuple[np.ndarray, ErrorReport]:
    errors = np.array([np.linalg.norm(r.v_clipped - v_true) for r in recs])
    report = ErrorReport(
        mean_error=float(errors.mean()),
        std_error=float(errors.std()),
        mean_trace_distance=float(errors.mean() / 2),
        clip_rate=float(np.mean([r.was_clipped for r in recs])),
        replicas=len(recs),
        shots=shots,
    )
    return errors, report


def estimate_and_reconstruct(plan: ExperimentPlan, v_true, workers: int = 1,
                             stream: tuple[int, ...] = ()) -> MonteCarloResult:
    """Run ``plan.replicas`` simulated experiments and reconstruct each.

    ``plan.shots=None`` uses the exact probabilities (one replica, zero noise).
    Errors are Euclidean Bloch distances of the clipped estimate.
    """
    v_true = bloch_vector(v_true)
    scheme = plan.scheme()
    if plan.shots is None:
        recs = [reconstruct(scheme, scheme.forward(v_true))]
    else:
        experiments, readout = physical_setups(scheme)
        probs = experiment_probabilities(experiments, v_true)

        def run(r):
            return _replica(scheme, probs, readout, int(plan.shots), plan.seed, (*stream, r))

        if workers <= 1:
            recs = [run(r) for r in range(plan.replicas)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                recs = list(pool.map(run, range(plan.replicas)))
    errors, report = _summarize(recs, v_true, plan.shots)
    return MonteCarloResult(recs, errors, report, v_true)


@dataclass(frozen=True)
class SweepRow:
    kappa: float
    mean_error: float
    std_error: float
    clip_rate: float


def error_vs_kappa_sweep(strategy: str, kappas, shots: int = DEFAULT_SHOTS,
                         replicas: int = DEFAULT_REPLICAS, states=16, seed: int = 0,
                         channel: str = "t", kappa2: float | None = None,
                         workers: int = 1) -> list[SweepRow]:
    """Mean reconstruction error per momentum, averaged over target states.

    ``states`` is either an array of Bloch vectors or a count of states drawn
    uniformly from the ball. The same random streams are reused at every
    momentum so that differences between rows reflect the scheme, not luck.
    """
    if isinstance(states, (int, np.integer)):
        states = sample_ball(int(states), seed)
    states = np.atleast_2d(np.asarray(states, dtype=float))
    rows = []
    for kappa in kappas:
        plan = ExperimentPlan(strategy, kappa, kappa2, channel, shots=shots,
                              replicas=replicas, seed=seed)
        results = [estimate_and_reconstruct(plan, v, workers=workers, stream=(s,))
                   for s, v in enumerate(states)]
        errors = np.concatenate([r.errors for r in results])
        clip_rate = float(np.mean([r.report.clip_rate for r in results]))
        rows.append(SweepRow(float(kappa), float(errors.mean()), float(errors.std()), clip_rate))
    return rows
