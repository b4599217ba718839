"""Generalised Bayes: Gibbs posteriors ``prior * exp(-w * loss)``.

Rejection ABC fits this form with the loss ``-log`` of the Monte Carlo
average of an ABC kernel over simulated discrepancies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import UniformPrior, simulate_ma1_batch
from .rng import as_generator
from .summaries import autocov_summaries


@dataclass(frozen=True)
class GibbsPosteriorSpec:
    prior: UniformPrior
    weight: float = 1.0
    loss: Callable | None = None

    def __post_init__(self):
        if not (math.isfinite(self.weight) and self.weight >= 0):
            raise ValueError("calibration weight must be finite and >= 0")


def abc_kernel(u, eps: float, kind: str = "uniform") -> np.ndarray:
    """Unnormalised ABC kernel: indicator ``u <= eps`` or ``exp(-u^2 / (2 eps^2))``."""
    u = np.asarray(u, float)
    if kind == "uniform":
        return (u <= eps).astype(float)
    if kind == "gaussian":
        return np.exp(-(u**2) / (2.0 * eps**2))
    raise ValueError(f"unknown kernel {kind!r}")


def _summary_distance(observed, num_lags=2):
    s_obs = autocov_summaries(observed, num_lags)
    return lambda sims: np.linalg.norm(autocov_summaries(sims, num_lags) - s_obs, axis=1)


def abc_mc_loss(observed, theta, N: int, kernel: str, eps: float, rng, distance: Callable | None = None, simulate=None) -> float:
    """``-log((1/N) sum_i K_eps(rho_i))`` from ``N`` simulations at ``theta``.

    ``distance(sims)`` maps an ``(N, T)`` batch to discrepancies; the default
    is the unscaled Euclidean distance between autocovariance summaries.
    Returns ``inf`` when every kernel weight is zero.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    observed = np.asarray(observed, float)
    distance = distance or _summary_distance(observed)
    simulate = simulate or (lambda th, T, gen: simulate_ma1_batch(np.full(N, th), T, gen))
    theta = float(np.ravel(theta)[0])
    rho = distance(simulate(theta, observed.size, as_generator(rng)))
    avg = float(np.mean(abc_kernel(rho, eps, kernel)))
    return math.inf if avg == 0.0 else -math.log(avg)


def gibbs_log_posterior(spec: GibbsPosteriorSpec, theta, loss_value: float) -> float:
    """Unnormalised ``-w * loss + log prior``; ``-inf`` for an infinite loss."""
    if math.isinf(loss_value) and loss_value > 0:
        return -math.inf
    logprior = spec.prior.logpdf(theta)
    if not math.isfinite(logprior):
        return -math.inf
    if spec.weight == 0:
        return logprior
    return -spec.weight * loss_value + logprior
