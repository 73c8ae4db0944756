"""Sensitivity figures of merit and their minimization over probe momenta.

A figure of merit is the volume factor (absolute inverse determinant) of the
linear map from measured probabilities to Bloch components. Minimizing it over
the incident momentum makes the reconstruction least sensitive to errors in
the probabilities.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize as _sopt

from .tomography import strategy1_frame_scheme

_Z = np.array([0.0, 0.0, 1.0])
_X = np.array([1.0, 0.0, 0.0])


def _positive(w):
    w = np.asarray(w, dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ValueError(f"omega must be finite and positive, got {w!r}")
    return w


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def det_Mt(omega):
    """Inverse determinant of the transmission frame scheme."""
    w = _positive(omega)
    return _scalar((1 + w**2) ** 3 * (1 + 9 * w**2) ** 2 / (4 * w**4))


def det_Mr(omega) -> float:
    """Inverse determinant of the reflection frame scheme, from the scheme itself."""
    w = float(_positive(omega))
    return abs(strategy1_frame_scheme(_Z, _X, 1.0 / w, "r").inverse_determinant)


def lambda_t(omega):
    """Gain of the transmission parallel scheme: d(n_i.v)/dP^t."""
    w = _positive(omega)
    return _scalar((1 + w**2) * (1 + 9 * w**2) / (4 * w**2))


def lambda_r(omega):
    """Gain of the reflection parallel scheme: |d(n_i.v)/dP^r|."""
    w = _positive(omega)
    return _scalar((1 + w**2) * (1 + 9 * w**2) / (2 * w**2))


def det_N(omega1, omega2):
    """Inverse determinant of the momentum scheme; has a pole at omega1 == omega2."""
    w1 = _positive(omega1)
    w2 = _positive(omega2)
    if np.any(w1 == w2):
        raise ValueError("det_N has a pole at omega1 == omega2")
    num = (1 + w1**2) ** 2 * (1 + 9 * w1**2) ** 2 * (1 + w2**2) * (1 + 9 * w2**2)
    return _scalar(-num / (4 * w1**3 * w2 * (w1 - w2)))


def abs_det_N_cuberoot(kappa1, kappa2):
    return _scalar(np.cbrt(np.abs(det_N(1.0 / np.asarray(kappa1, float), 1.0 / np.asarray(kappa2, float)))))


@dataclass(frozen=True)
class FigureOfMerit:
    kind: str
    func: Callable
    dim: int

    def __call__(self, *kappas):
        if len(kappas) != self.dim:
            raise TypeError(f"{self.kind} takes {self.dim} momentum argument(s)")
        return self.func(*kappas)


FIGURES = {
    "detMt": FigureOfMerit("detMt", lambda k: det_Mt(1.0 / k), 1),
    "detMr": FigureOfMerit("detMr", lambda k: det_Mr(1.0 / k), 1),
    "lambda_t": FigureOfMerit("lambda_t", lambda k: lambda_t(1.0 / k), 1),
    "lambda_r": FigureOfMerit("lambda_r", lambda k: lambda_r(1.0 / k), 1),
    "absDetN_cuberoot": FigureOfMerit("absDetN_cuberoot", abs_det_N_cuberoot, 2),
}


def figure_of_merit(kind: str) -> FigureOfMerit:
    try:
        return FIGURES[kind]
    except KeyError:
        raise ValueError(f"unknown figure of merit {kind!r}; choose from {sorted(FIGURES)}") from None


class NoInteriorMinimumError(RuntimeError):
    pass


@dataclass(frozen=True)
class Optimum:
    argmin: float | tuple[float, float]
    value: float
    bracket: tuple
    iterations: int
    grid_points: int


def _evaluate(f, points, workers: int) -> np.ndarray:
    # Ordered map; results do not depend on the worker count.
    if workers <= 1:
        return np.array([f(*p) if isinstance(p, tuple) else f(p) for p in points], dtype=float)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(lambda p: f(*p) if isinstance(p, tuple) else f(p), points)),
                        dtype=float)


def minimize_1d(f, kappa_range=(0.1, 100.0), n_grid: int = 128, xtol: float = 1e-12,
                workers: int = 1) -> Optimum:
    """Log-spaced grid scan, then golden-section refinement of the best cell."""
    if isinstance(f, str):
        f = figure_of_merit(f)
    lo, hi = map(float, kappa_range)
    if not (0 < lo < hi < np.inf):
        raise ValueError(f"invalid kappa range {kappa_range!r}")
    grid = np.geomspace(lo, hi, n_grid)
    values = _evaluate(f, list(grid), workers)
    i = int(np.argmin(values))
    if i == 0 or i == n_grid - 1:
        raise NoInteriorMinimumError(
            f"minimum on the boundary of [{lo}, {hi}] at kappa={grid[i]!r}; widen the range"
        )
    bracket = (grid[i - 1], grid[i], grid[i + 1])
    res = _sopt.minimize_scalar(
        lambda x: float(f(x)), bracket=bracket, method="golden", options={"xtol": xtol}
    )
    if not (bracket[0] < res.x < bracket[2]):
        raise NoInteriorMinimumError(f"refinement left the bracket {bracket}")
    x, iterations = _polish(f, float(res.x), bracket)
    return Optimum(argmin=x, value=float(f(x)), bracket=bracket,
                   iterations=int(res.nit) + iterations, grid_points=n_grid)


def _polish(f, x0: float, bracket) -> tuple[float, int]:
    # Golden section stalls at ~sqrt(eps) relative to the flat bottom; the
    # root of a central-difference slope is resolved much more sharply.
    h = 2e-6 * x0
    lo, hi = max(bracket[0], x0 - 5000 * h), min(bracket[2], x0 + 5000 * h)

    def slope(x):
        return float(f(x + h)) - float(f(x - h))

    if not slope(lo) < 0 < slope(hi):
        return x0, 0
    x, r = _sopt.brentq(slope, lo, hi, xtol=1e-14, full_output=True)
    return float(x), int(r.iterations)


def scan_2d(f, box, resolution: int, min_gap: float = 1e-3, workers: int = 1, spacing: str = "log"):
    """Evaluate f on a grid; cells with relative |k1 - k2| < min_gap are +inf."""
    (a1, b1), (a2, b2) = box
    space = np.geomspace if spacing == "log" else np.linspace
    k1 = space(a1, b1, resolution)
    k2 = space(a2, b2, resolution)
    pts = [(x, y) for x in k1 for y in k2]
    safe = [p for p in pts if abs(p[0] - p[1]) >= min_gap * max(p)]
    vals = dict(zip(safe, _evaluate(f, safe, workers)))
    grid = np.array([vals.get(p, np.inf) for p in pts]).reshape(resolution, resolution)
    return k1, k2, grid


def minimize_2d(f="absDetN_cuberoot", box=((0.2, 10.0), (0.2, 10.0)), resolution: int = 96,
                min_gap: float = 1e-3, workers: int = 1) -> Optimum:
    """Coarse log grid over the whole box, then Nelder-Mead from the best cell."""
    if isinstance(f, str):
        f = figure_of_merit(f)
    (a1, b1), (a2, b2) = box = tuple(tuple(map(float, side)) for side in box)
    if not (0 < a1 < b1 < np.inf and 0 < a2 < b2 < np.inf):
        raise ValueError(f"degenerate or invalid box {box!r}")
    k1, k2, grid = scan_2d(f, box, resolution, min_gap, workers)
    i, j = np.unravel_index(int(np.argmin(grid)), grid.shape)
    if i in (0, resolution - 1) or j in (0, resolution - 1):
        raise NoInteriorMinimumError(f"minimum on the boundary of {box!r}")

    def objective(logk):
        x, y = np.exp(logk)
        if not (a1 <= x <= b1 and a2 <= y <= b2) or abs(x - y) < min_gap * max(x, y):
            return np.inf
        return float(f(x, y))

    res = _sopt.minimize(objective, np.log([k1[i], k2[j]]), method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000})
    x, y = np.exp(res.x)
    return Optimum(argmin=(float(x), float(y)), value=float(res.fun), bracket=box,
                   iterations=int(res.nit), grid_points=resolution * resolution)


ANALYTIC_OPTIMA = {
    "detMt": (float(np.sqrt(1 + np.sqrt(217)) / 2), "sqrt(1+sqrt(217))/2"),
    "detMr": (float(np.sqrt((np.sqrt(33) - 3) / 2)), "sqrt((sqrt(33)-3)/2)"),
    "lambda_t": (float(np.sqrt(3)), "sqrt(3)"),
    "lambda_r": (float(np.sqrt(3)), "sqrt(3)"),
}
"""Stationary points from solving d/dk = 0 by hand (quadratics in omega^2)."""
