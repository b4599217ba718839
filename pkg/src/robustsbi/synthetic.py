"""Bayesian synthetic likelihood (BSL).

The likelihood of the observed summaries is replaced by a Gaussian whose
mean and covariance are estimated from ``m`` model simulations at each
proposed parameter, and the resulting noisy estimate drives a
pseudo-marginal random-walk Metropolis-Hastings chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular

from .models import UniformPrior
from .rng import RngStream
from .summaries import ma1_simulator

LOG_2PI = math.log(2.0 * math.pi)


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class MomentEstimate:
    mu: np.ndarray
    sigma: np.ndarray
    m: int

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.diag(self.sigma))


def estimate_moments(theta, m: int, rng, simulator=None) -> MomentEstimate:
    """Sample mean and unbiased covariance of ``m`` simulated summary vectors."""
    simulator = simulator or _default_simulator()
    theta = np.atleast_1d(np.asarray(theta, float))
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    s = np.asarray(simulator(np.repeat(theta[None, :], m, axis=0), gen), float)
    d = s.shape[1]
    if m < d + 2:
        raise ValueError(f"m={m} too small for {d} summaries; need m >= d + 2")
    mu = s.mean(axis=0)
    centred = s - mu
    sigma = centred.T @ centred / (m - 1)
    return MomentEstimate(mu, 0.5 * (sigma + sigma.T), m)


_DEFAULT = {}


def _default_simulator():
    if "ma1" not in _DEFAULT:
        _DEFAULT["ma1"] = ma1_simulator(100)
    return _DEFAULT["ma1"]


def _cholesky(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    d = cov.shape[0]
    base = np.trace(cov) / d
    if not base > 0 or not math.isfinite(base):
        raise SingularCovarianceError("covariance has non-positive trace")
    jitter = 1e-8
    while jitter <= 1e-4 * (1 + 1e-9):
        try:
            return np.linalg.cholesky(cov + jitter * base * np.eye(d))
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise SingularCovarianceError("covariance is singular even after jitter")


def mvn_logpdf(x, mean, cov) -> float:
    """Multivariate normal log-density with escalating diagonal jitter."""
    x, mean, cov = np.asarray(x, float), np.asarray(mean, float), np.asarray(cov, float)
    if x.shape != mean.shape or cov.shape != (x.size, x.size):
        raise ValueError("dimension mismatch between point, mean and covariance")
    chol = _cholesky(cov)
    z = solve_triangular(chol, x - mean, lower=True, check_finite=False)
    return float(-0.5 * (x.size * LOG_2PI + z @ z) - np.sum(np.log(np.diag(chol))))


def synthetic_loglik(s_obs, moments: MomentEstimate) -> float:
    return mvn_logpdf(s_obs, moments.mu, moments.sigma)


@dataclass
class Chain:
    """MCMC output.

    All ``iters`` states are stored; the first ``burn_in`` of them were
    produced while the proposal scale was still adapting and are excluded
    from :attr:`theta` and :attr:`gamma`.
    """

    thetas: np.ndarray
    logliks: np.ndarray
    accepted: np.ndarray
    burn_in: int
    proposal_scale: float
    gammas: np.ndarray | None = None

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted))

    @property
    def theta(self) -> np.ndarray:
        return self.thetas[self.burn_in :]

    @property
    def gamma(self) -> np.ndarray | None:
        return None if self.gammas is None else self.gammas[self.burn_in :]

    def __len__(self):
        return len(self.thetas)


def reflect(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Fold ``x`` back into ``[lower, upper]`` by repeated reflection."""
    width = upper - lower
    y = np.mod(x - lower, 2.0 * width)
    return lower + np.where(y > width, 2.0 * width - y, y)


def _adapt(scale: float, rate: float, lo: float = 0.0, hi: float = math.inf) -> float:
    if rate < 0.2:
        scale *= 0.8
    elif rate > 0.4:
        scale *= 1.25
    return min(max(scale, lo), hi)


def pseudo_marginal_chain(
    prior: UniformPrior,
    s_obs,
    iters: int,
    proposal_scale: float,
    rng: RngStream,
    moments_fn: Callable,
    loglik: Callable,
    theta0=None,
    gamma0=None,
    gamma_step: Callable | None = None,
    burn_in_frac: float = 0.2,
    adapt: bool = True,
    adapt_every: int = 100,
) -> Chain:
    """Shared engine for BSL and its robust variants.

    ``moments_fn(theta, gen)`` returns a :class:`MomentEstimate` and
    ``loglik(s_obs, moments, gamma)`` the log-likelihood.  If ``gamma_step``
    is given it is called once per iteration as
    ``gamma_step(theta, gamma, moments, gen) -> gamma`` before the theta move,
    reusing the cached moments of the current theta.

    During burn-in the proposal scale is nudged towards 20-40% acceptance
    but kept within a factor of ten of ``proposal_scale``.  With a noisy
    likelihood estimate the acceptance rate can stay low at any step size,
    and an unbounded rule would then shrink the step towards zero.

    Random streams: moments for iteration ``t`` come from ``rng.child(1, t)``
    (``t = 0`` is the initial state), proposals and acceptance uniforms from
    ``rng.child(2)`` and gamma updates from ``rng.child(3)``.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if not proposal_scale > 0:
        raise ValueError("proposal_scale must be positive")
    s_obs = np.asarray(s_obs, float)
    lower, upper = prior.bounds
    theta = np.zeros(prior.dim) if theta0 is None else np.atleast_1d(np.asarray(theta0, float)).copy()
    if not prior.contains(theta):
        raise ValueError(f"initial theta {theta} is outside the prior support")
    gamma = None if gamma0 is None else np.asarray(gamma0, float).copy()

    moments = moments_fn(theta, rng.child(1, 0).generator())
    ll = _safe_loglik(loglik, s_obs, moments, gamma)
    logprior = prior.logpdf(theta)

    move_gen = rng.child(2).generator()
    gamma_gen = rng.child(3).generator()
    burn_in = int(burn_in_frac * iters)
    scale = float(proposal_scale)

    thetas = np.empty((iters, prior.dim))
    logliks = np.empty(iters)
    accepted = np.zeros(iters, bool)
    gammas = None if gamma is None else np.empty((iters, gamma.size))

    for t in range(iters):
        if gamma_step is not None:
            gamma = gamma_step(theta, gamma, moments, gamma_gen)
            ll = _safe_loglik(loglik, s_obs, moments, gamma)

        step = move_gen.standard_normal(prior.dim)
        log_u = math.log(move_gen.random())
        proposal = reflect(theta + scale * step, lower, upper)
        prop_logprior = prior.logpdf(proposal)
        if math.isfinite(prop_logprior):
            prop_moments = moments_fn(proposal, rng.child(1, t + 1).generator())
            prop_ll = _safe_loglik(loglik, s_obs, prop_moments, gamma)
            log_alpha = prop_ll + prop_logprior - ll - logprior
            if math.isfinite(prop_ll) and (not math.isfinite(ll) or log_u < log_alpha):
                theta, moments, ll, logprior = proposal, prop_moments, prop_ll, prop_logprior
                accepted[t] = True

        thetas[t] = theta
        logliks[t] = ll
        if gammas is not None:
            gammas[t] = gamma
        if adapt and t < burn_in and (t + 1) % adapt_every == 0:
            rate = accepted[t + 1 - adapt_every : t + 1].mean()
            scale = _adapt(scale, rate, 0.1 * proposal_scale, 10.0 * proposal_scale)

    return Chain(thetas, logliks, accepted, burn_in, scale, gammas)


def _safe_loglik(loglik, s_obs, moments, gamma) -> float:
    try:
        value = loglik(s_obs, moments, gamma)
    except SingularCovarianceError:
        return -math.inf
    return value if not math.isnan(value) else -math.inf


def simulated_moments(m: int, simulator=None) -> Callable:
    simulator = simulator or _default_simulator()
    return lambda theta, gen: estimate_moments(theta, m, gen, simulator)


def bsl_mcmc(
    prior: UniformPrior,
    s_obs,
    m: int = 200,
    iters: int = 50_000,
    proposal_scale: float = 0.1,
    rng: RngStream | None = None,
    simulator=None,
    moments_fn: Callable | None = None,
    theta0=None,
    **kwargs,
) -> Chain:
    """Pseudo-marginal MH targeting the BSL posterior.

    Moments are estimated afresh only at proposals; the current state's
    log-likelihood estimate is carried forward unchanged.  ``moments_fn``
    replaces the simulation-based estimator (useful for exact-moment checks).
    """
    rng = rng if rng is not None else RngStream(0)
    moments_fn = moments_fn or simulated_moments(m, simulator)
    return pseudo_marginal_chain(
        prior,
        s_obs,
        iters,
        proposal_scale,
        rng,
        moments_fn,
        lambda s, mom, _gamma: synthetic_loglik(s, mom),
        theta0=theta0,
        **kwargs,
    )
