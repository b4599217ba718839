"""Posterior predictive checks and adjustment-parameter criticism."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import gaussian_kde, ks_2samp

from .rng import RngStream, as_generator
from .summaries import ma1_simulator


@dataclass
class PredictiveTable:
    thetas: np.ndarray
    summaries: np.ndarray
    observed: np.ndarray
    level: float = 0.95

    def __len__(self):
        return len(self.thetas)

    @property
    def intervals(self) -> np.ndarray:
        """``(d, 2)`` central predictive interval per summary."""
        if len(self) == 0:
            return np.full((self.observed.size, 2), np.nan)
        a = (1.0 - self.level) / 2.0
        return np.quantile(self.summaries, [a, 1.0 - a], axis=0).T

    @property
    def covered(self) -> np.ndarray:
        lo, hi = self.intervals.T
        return (self.observed >= lo) & (self.observed <= hi)


def posterior_predictive(chain, n_rep: int, rng: RngStream, observed, simulator=None) -> PredictiveTable:
    """Resample ``n_rep`` parameter draws and simulate one summary vector each.

    ``chain`` is a :class:`~robustsbi.synthetic.Chain` (its post-burn-in
    draws are used) or a plain array of parameter draws.
    """
    simulator = simulator or ma1_simulator(100)
    observed = np.asarray(observed, float)
    draws = np.asarray(getattr(chain, "theta", chain), float)
    if draws.ndim == 1:
        draws = draws[:, None]
    if n_rep == 0:
        return PredictiveTable(np.empty((0, draws.shape[1])), np.empty((0, observed.size)), observed)
    if len(draws) == 0:
        raise ValueError("no posterior draws to resample")
    gen = as_generator(rng)
    thetas = draws[gen.integers(0, len(draws), n_rep)]
    return PredictiveTable(thetas, np.asarray(simulator(thetas, gen)), observed)


def prior_posterior_shift(posterior_gamma, prior, rng: RngStream, n_prior: int = 10_000) -> float:
    """Two-sample KS statistic between posterior draws and fresh prior draws."""
    post = np.ravel(np.asarray(posterior_gamma, float))
    if post.size == 0:
        raise ValueError("posterior sample is empty")
    fresh = prior.sample(n_prior, as_generator(rng))
    return float(ks_2samp(post, fresh).statistic)


def posterior_mode(draws, lower=-1.0, upper=1.0, grid_size=2001) -> float:
    """Mode of a Gaussian KDE (Scott bandwidth) evaluated on a grid."""
    draws = np.ravel(draws)
    grid = np.linspace(lower, upper, grid_size)
    if np.ptp(draws) == 0:
        return float(draws[0])
    return float(grid[np.argmax(gaussian_kde(draws)(grid))])


def count_modes(draws, lower=-1.0, upper=1.0, grid_size=401, min_height=0.05) -> int:
    """Local maxima of the KDE above ``min_height`` times its peak."""
    draws = np.ravel(draws)
    if np.ptp(draws) == 0:
        return 1
    grid = np.linspace(lower, upper, grid_size)
    dens = gaussian_kde(draws)(grid)
    padded = np.concatenate([[-np.inf], dens, [-np.inf]])
    peaks = (padded[1:-1] > padded[:-2]) & (padded[1:-1] >= padded[2:])
    return int(np.sum(peaks & (dens >= min_height * dens.max())))
