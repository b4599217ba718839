"""Benchmark data-generating processes and the parameter prior.

The assumed model is a Gaussian MA(1); the process that actually generated
the observations is a log-normal stochastic volatility (SV) model.  Both
simulators are pure functions of ``(params, T, rng)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .rng import RngStream, as_generator

# Parameters used to generate the observed benchmark series.
BENCHMARK_SV = (-0.76, 0.90, 0.36)
BENCHMARK_T = 100


@dataclass(frozen=True)
class SvParams:
    omega: float
    kappa: float
    sigma_v: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.omega, self.kappa, self.sigma_v)):
            raise ValueError("SV parameters must be finite")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not 0.0 < self.sigma_v < 1.0:
            raise ValueError(f"sigma_v must lie in (0, 1), got {self.sigma_v}")

    @property
    def stationary_mean(self) -> float:
        return self.omega / (1.0 - self.kappa)

    @property
    def stationary_var(self) -> float:
        return self.sigma_v**2 / (1.0 - self.kappa**2)


@dataclass(frozen=True)
class UniformPrior:
    """Independent uniform prior on a box.

    ``lower`` and ``upper`` are per-component bounds; the benchmark uses the
    scalar box ``[-1, 1]``.
    """

    lower: tuple[float, ...] = (-1.0,)
    upper: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-d and the same length")
        if not np.all(np.isfinite(lo) & np.isfinite(hi) & (hi > lo)):
            raise ValueError("uniform prior needs finite bounds with upper > lower")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, float), np.asarray(self.upper, float)

    def contains(self, theta) -> bool:
        theta = np.atleast_1d(np.asarray(theta, float))
        lo, hi = self.bounds
        return bool(np.all(np.isfinite(theta)) and np.all((theta >= lo) & (theta <= hi)))

    def logpdf(self, theta) -> float:
        if not self.contains(theta):
            return -math.inf
        lo, hi = self.bounds
        return float(-np.sum(np.log(hi - lo)))

    def sample(self, n: int, rng) -> np.ndarray:
        """``(n, dim)`` array of independent draws."""
        if n < 1:
            raise ValueError("n must be >= 1")
        lo, hi = self.bounds
        return lo + (hi - lo) * as_generator(rng).random((n, self.dim))

    def cdf(self, theta) -> np.ndarray:
        lo, hi = self.bounds
        return np.clip((np.asarray(theta, float) - lo) / (hi - lo), 0.0, 1.0)


def prior_sample(prior: UniformPrior, n: int, rng: RngStream) -> np.ndarray:
    return prior.sample(n, rng)


def prior_logpdf(prior: UniformPrior, theta) -> float:
    return prior.logpdf(theta)


def _check_ma1_theta(theta) -> np.ndarray:
    theta = np.asarray(theta, float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    if np.any(np.abs(theta) > 1.0):
        raise ValueError("MA(1) coefficient must satisfy |theta| <= 1")
    return theta


def simulate_ma1_batch(thetas, T: int, rng) -> np.ndarray:
    """Simulate one MA(1) series of length ``T`` per entry of ``thetas``.

    Returns an ``(n, T)`` array with ``y_t = w_t + theta * w_{t-1}`` and the
    pre-sample noise ``w_0`` drawn fresh, so every series is exactly
    stationary.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    thetas = _check_ma1_theta(np.ravel(thetas))
    w = as_generator(rng).standard_normal((thetas.size, T + 1))
    return w[:, 1:] + thetas[:, None] * w[:, :-1]


def simulate_ma1(theta, T: int, rng, noise=None) -> np.ndarray:
    """Single MA(1) series.

    ``noise`` optionally replaces the Gaussian innovations with a fixed
    sequence of length ``T + 1`` (``noise[0]`` is ``w_0``), which makes the
    output deterministic.
    """
    theta = float(_check_ma1_theta(np.ravel(theta))[0])
    if T < 2:
        raise ValueError("T must be >= 2")
    if noise is None:
        return simulate_ma1_batch([theta], T, rng)[0]
    w = np.asarray(noise, float)
    if w.shape != (T + 1,):
        raise ValueError(f"noise must have length T + 1 = {T + 1}")
    return w[1:] + theta * w[:-1]


def simulate_sv(p: SvParams, T: int, rng) -> np.ndarray:
    """Stochastic volatility series ``y_t = exp(z_t / 2) u_t``.

    The log-volatility follows ``z_t = omega + kappa z_{t-1} + sigma_v v_t``
    and starts from its stationary law, so no burn-in is needed.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    gen = as_generator(rng)
    z0 = gen.normal(p.stationary_mean, math.sqrt(p.stationary_var))
    v = gen.standard_normal(T)
    u = gen.standard_normal(T)
    z, _ = lfilter([1.0], [1.0, -p.kappa], p.omega + p.sigma_v * v, zi=[p.kappa * z0])
    return np.exp(z / 2.0) * u
