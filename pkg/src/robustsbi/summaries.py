"""Summary statistics, binding functions and (in)compatibility.

The benchmark summarises a series by its lag-0 and lag-1 sample
autocovariances (uncentred, normalised by ``T``), so the first component is
the second moment and the second the lag-1 product moment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .models import SvParams, simulate_ma1_batch


def autocov_summaries(ts, num_lags: int = 2) -> np.ndarray:
    """Sample autocovariances ``(1/T) sum_{i>j} x_i x_{i-j}`` for ``j < num_lags``.

    Accepts a single series of shape ``(T,)`` or a batch ``(n, T)``; the
    output has shape ``(num_lags,)`` or ``(n, num_lags)`` respectively.
    """
    x = np.asarray(ts, float)
    T = x.shape[-1]
    if num_lags < 1:
        raise ValueError("num_lags must be >= 1")
    if num_lags >= T:
        raise ValueError(f"series of length {T} too short for {num_lags} lags")
    out = np.empty(x.shape[:-1] + (num_lags,))
    for j in range(num_lags):
        out[..., j] = np.einsum("...i,...i->...", x[..., j:], x[..., : T - j]) / T
    return out


def binding_ma1(theta) -> np.ndarray:
    """Large-``T`` limit of the MA(1) summaries, ``(1 + theta^2, theta)``."""
    theta = float(np.ravel(theta)[0])
    if abs(theta) > 1.0:
        raise ValueError("MA(1) coefficient must satisfy |theta| <= 1")
    return np.array([1.0 + theta**2, theta])


def binding_star_sv(p: SvParams) -> np.ndarray:
    """Limit of the same summaries under the SV process.

    The lag-1 term vanishes because ``u_t`` is independent noise; the second
    moment is ``E exp(z_t)`` under the stationary log-normal law.
    """
    if p.kappa == 1.0:
        raise ZeroDivisionError("kappa = 1 has no stationary law")
    return np.array([math.exp(p.stationary_mean + p.stationary_var / 2.0), 0.0])


@dataclass(frozen=True)
class SummarySimulator:
    """Maps a batch of parameters to simulated summary vectors.

    ``simulate(thetas, rng)`` returns an ``(n, T)`` array of raw series and
    ``summarise`` reduces each row to a summary vector.  Calling the object
    composes the two.
    """

    simulate: Callable
    summarise: Callable
    dim: int

    def __call__(self, thetas, rng) -> np.ndarray:
        return self.summarise(self.simulate(thetas, rng))


def ma1_simulator(T: int = 100, num_lags: int = 2) -> SummarySimulator:
    return SummarySimulator(
        simulate=lambda thetas, rng: simulate_ma1_batch(thetas, T, rng),
        summarise=lambda x: autocov_summaries(x, num_lags),
        dim=num_lags,
    )


@dataclass(frozen=True)
class CompatibilityReport:
    epsilon_star: float
    theta_star: float
    distance_name: str


def theta_grid(lower: float = -1.0, upper: float = 1.0, intervals: int = 10_000) -> np.ndarray:
    """Uniform grid with ``intervals + 1`` points, endpoints included."""
    return np.linspace(lower, upper, intervals + 1)


def epsilon_star(b_star, binding: Callable, grid, distance: Callable, refine: bool = False) -> CompatibilityReport:
    """Minimum distance between ``b_star`` and the binding function over ``grid``.

    With ``refine=True`` a bounded scalar search polishes the grid minimiser
    inside its neighbouring cells; the refined point is kept only if it
    improves on the grid value.
    """
    grid = np.asarray(grid, float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    b_star = np.asarray(b_star, float)
    dists = np.array([distance(b_star, binding(t)) for t in grid])
    i = int(np.argmin(dists))
    theta, eps = float(grid[i]), float(dists[i])
    if refine and grid.size > 2:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        res = minimize_scalar(lambda t: distance(b_star, binding(t)), bounds=(lo, hi), method="bounded")
        if res.fun < eps:
            theta, eps = float(res.x), float(res.fun)
    return CompatibilityReport(eps, theta, getattr(distance, "__name__", "distance"))


def _quadratic_form_moments(theta: float, T: int) -> tuple[np.ndarray, np.ndarray]:
    L = np.zeros((T, T + 1))
    idx = np.arange(T)
    L[idx, idx + 1] = 1.0
    L[idx, idx] = theta
    lag = np.zeros((T, T))
    lag[idx[1:], idx[:-1]] = 0.5
    lag[idx[:-1], idx[1:]] = 0.5
    A0 = L.T @ L / T
    A1 = L.T @ lag @ L / T
    mean = np.array([np.trace(A0), np.trace(A1)])
    cov = 2.0 * np.array([[np.sum(A0 * A0), np.sum(A0 * A1)], [np.sum(A1 * A0), np.sum(A1 * A1)]])
    return mean, cov


@lru_cache(maxsize=8)
def _moment_polynomials(T: int) -> np.ndarray:
    # covariance entries are quartic in theta: five nodes pin them down exactly
    nodes = np.linspace(-1.0, 1.0, 5)
    covs = np.array([_quadratic_form_moments(t, T)[1].ravel() for t in nodes])
    return np.polyfit(nodes, covs, 4)


def ma1_summary_moments(theta, T: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Exact mean and covariance of the two MA(1) autocovariance summaries.

    Each summary is a quadratic form ``w' A w`` in the ``T + 1`` standard
    normal innovations, so the mean is ``tr(A)`` and the covariance of two
    forms is ``2 tr(A B)``.  The covariance is a quartic polynomial in
    ``theta`` whose coefficients are cached per ``T``.
    """
    theta = float(np.ravel(theta)[0])
    coeffs = _moment_polynomials(int(T))
    powers = theta ** np.arange(4, -1, -1)
    cov = (powers @ coeffs).reshape(2, 2)
    mean = np.array([1.0 + theta**2, theta * (T - 1) / T])
    return mean, 0.5 * (cov + cov.T)
