"""Rejection ABC with post-hoc tolerance selection.

Every prior draw and its discrepancy are kept, so the accepted set can be
recomputed at any tolerance without further simulation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import discrepancies as disc
from .models import UniformPrior, simulate_ma1_batch
from .rng import RngStream
from .summaries import autocov_summaries

SUMMARY_DISCREPANCIES = ("euclidean",)
FULL_DATA_DISCREPANCIES = ("euclidean", "mmd", "kl", "wasserstein", "cvm")


@dataclass
class AbcConfig:
    """Settings for :func:`rejection_abc`.

    Exactly one of ``quantile`` and ``epsilon`` selects the tolerance; with
    neither, every draw is accepted.  ``mode`` is ``"summaries"`` (compare
    autocovariance summaries) or ``"full"`` (compare the raw series as
    samples).
    """

    num_sims: int = 100_000
    quantile: float | None = None
    epsilon: float | None = None
    discrepancy: str = "euclidean"
    mode: str = "summaries"
    num_lags: int = 2
    standardise: bool = True
    pilot_sims: int = 1_000
    kl_k: int = 1
    mmd_bandwidth: float | None = None
    block_size: int = 10_000

    def __post_init__(self):
        if self.num_sims < 1:
            raise ValueError("num_sims must be >= 1")
        if self.quantile is not None and self.epsilon is not None:
            raise ValueError("give either quantile or epsilon, not both")
        if self.quantile is not None and not 0 < self.quantile <= 1:
            raise ValueError("quantile must lie in (0, 1]")
        if self.epsilon is not None and not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")
        allowed = SUMMARY_DISCREPANCIES if self.mode == "summaries" else FULL_DATA_DISCREPANCIES
        if self.mode not in ("summaries", "full"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.discrepancy not in allowed:
            raise ValueError(f"discrepancy {self.discrepancy!r} not available in {self.mode!r} mode")
        if self.block_size < 1 or self.pilot_sims < 2:
            raise ValueError("block_size must be >= 1 and pilot_sims >= 2")


@dataclass
class AbcResult:
    thetas: np.ndarray
    discrepancies: np.ndarray
    epsilon: float
    warnings: list[str] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def accepted(self) -> np.ndarray:
        return self.discrepancies <= self.epsilon

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted))

    @property
    def accepted_thetas(self) -> np.ndarray:
        return self.thetas[self.accepted]

    def at(self, epsilon: float) -> "AbcResult":
        """Same simulations re-thresholded at a different tolerance."""
        warnings = [] if np.any(self.discrepancies <= epsilon) else [_no_accept_msg(epsilon)]
        return AbcResult(self.thetas, self.discrepancies, float(epsilon), warnings, dict(self.info))

    def at_quantile(self, q: float) -> "AbcResult":
        return self.at(tolerance_from_quantile(self.discrepancies, q))


def _no_accept_msg(eps):
    return f"no draws accepted at epsilon={eps:g}"


def tolerance_from_quantile(discrepancies, q: float) -> float:
    """Empirical ``q``-quantile with linear interpolation."""
    d = np.asarray(discrepancies, float)
    if d.size == 0:
        raise ValueError("discrepancy list is empty")
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    return float(np.quantile(d, q, method="linear"))


class _Comparator:
    """Discrepancy between the observed series and a batch of simulated series."""

    def __init__(self, cfg: AbcConfig, observed: np.ndarray, pilot: np.ndarray):
        self.cfg = cfg
        self.observed = observed
        self.info = {}
        if cfg.mode == "summaries":
            self.s_obs = autocov_summaries(observed, cfg.num_lags)
            if cfg.standardise:
                scale = autocov_summaries(pilot, cfg.num_lags).std(axis=0, ddof=1)
                scale[scale <= 0] = 1.0
            else:
                scale = np.ones(cfg.num_lags)
            self.scale = scale
            self.info["summary_scale"] = scale.tolist()
        elif cfg.discrepancy == "mmd":
            bw = cfg.mmd_bandwidth
            if bw is None:
                bw = disc.median_heuristic_bandwidth(np.concatenate([observed, pilot[0]]))
            self.bandwidth = bw
            self.info["mmd_bandwidth"] = bw

    def __call__(self, sims: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        if cfg.mode == "summaries":
            s = autocov_summaries(sims, cfg.num_lags)
            return np.linalg.norm((s - self.s_obs) / self.scale, axis=1)
        if cfg.discrepancy == "euclidean":
            return np.linalg.norm(sims - self.observed, axis=1)
        if cfg.discrepancy == "mmd":
            return disc.mmd2_unbiased_batch(self.observed, sims, self.bandwidth)
        if cfg.discrepancy == "kl":
            return np.array([disc.kl_knn(self.observed, x, cfg.kl_k) for x in sims])
        fn = disc.wasserstein_1d if cfg.discrepancy == "wasserstein" else disc.cvm
        return np.array([fn(self.observed, x) for x in sims])


def _ma1(thetas, T, rng):
    return simulate_ma1_batch(thetas[:, 0], T, rng)


def rejection_abc(cfg: AbcConfig, observed, prior: UniformPrior, rng: RngStream, simulate=_ma1) -> AbcResult:
    """Rejection ABC against an observed series.

    Draws are processed in blocks of ``cfg.block_size``; block ``b`` uses the
    sub-stream ``rng.child(1, b)`` for both its prior draws and simulations,
    so the output does not depend on how blocks are scheduled.  A pilot batch
    of prior-predictive simulations on ``rng.child(0)`` fixes the summary
    scales (or the MMD bandwidth) before any comparison.

    ``simulate(thetas, T, rng)`` must return an ``(n, T)`` array.
    """
    observed = np.asarray(observed, float)
    if observed.ndim != 1 or observed.size < 2:
        raise ValueError("observed must be a 1-d series of length >= 2")
    T = observed.size

    pilot_gen = rng.child(0).generator()
    pilot = simulate(prior.sample(cfg.pilot_sims, pilot_gen), T, pilot_gen)
    compare = _Comparator(cfg, observed, pilot)

    thetas = np.empty((cfg.num_sims, prior.dim))
    dists = np.empty(cfg.num_sims)
    for b, start in enumerate(range(0, cfg.num_sims, cfg.block_size)):
        stop = min(start + cfg.block_size, cfg.num_sims)
        gen = rng.child(1, b).generator()
        th = prior.sample(stop - start, gen)
        thetas[start:stop] = th
        dists[start:stop] = compare(simulate(th, T, gen))

    if cfg.quantile is not None:
        eps = tolerance_from_quantile(dists, cfg.quantile)
    elif cfg.epsilon is not None:
        eps = float(cfg.epsilon)
    else:
        eps = math.inf
    result = AbcResult(thetas, dists, eps, info=compare.info).at(eps)
    result.info = compare.info
    return result


@dataclass
class AcceptDecayCurve:
    epsilons: np.ndarray
    acceptance: np.ndarray
    linearity_deviation: float


def acceptance_decay(discrepancies, eps_grid) -> AcceptDecayCurve:
    """Acceptance probability at each tolerance and its departure from a line.

    The deviation is the largest absolute residual of a least-squares line
    fitted to ``(epsilon, acceptance)`` on the interior of the grid (the end
    points are dropped when at least four points are given).
    """
    eps = np.asarray(eps_grid, float)
    if eps.size == 0:
        raise ValueError("eps_grid must be nonempty")
    if np.any(np.diff(eps) < 0):
        raise ValueError("eps_grid must be ascending")
    d = np.sort(np.asarray(discrepancies, float))
    acc = np.searchsorted(d, eps, side="right") / d.size
    x, y = (eps[1:-1], acc[1:-1]) if eps.size >= 4 else (eps, acc)
    if x.size >= 2 and np.ptp(x) > 0:
        slope, intercept = np.polyfit(x, y, 1)
        dev = float(np.max(np.abs(y - (slope * x + intercept))))
    else:
        dev = 0.0
    return AcceptDecayCurve(eps, acc, dev)
