"""Distances between summary vectors and between raw sample sets.

Sample sets are ``(n, q)`` arrays; 1-d inputs are treated as ``n`` scalar
observations (``q = 1``).  When a whole time series is passed here, its
values are compared as an unordered sample from the marginal distribution.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist, pdist
from scipy.stats import wasserstein_distance


def _as_samples(X, name="X", min_size=1) -> np.ndarray:
    X = np.asarray(X, float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 1-d or 2-d array")
    if X.shape[0] < min_size:
        raise ValueError(f"{name} needs at least {min_size} points, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def _pair(X, Y, min_size=1):
    X = _as_samples(X, "X", min_size)
    Y = _as_samples(Y, "Y", min_size)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return X, Y


def euclidean(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def gaussian_kernel(X, Y, bandwidth: float) -> np.ndarray:
    """``exp(-|x - y|^2 / (2 bandwidth^2))`` for all pairs."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    return np.exp(-cdist(X, Y, "sqeuclidean") / (2.0 * bandwidth**2))


def median_heuristic_bandwidth(Z) -> float:
    """Median pairwise distance of ``Z``; falls back to 1.0 when that is zero."""
    Z = _as_samples(Z, "Z", 2)
    med = float(np.median(pdist(Z)))
    return med if med > 0 else 1.0


def mmd2_unbiased(X, Y, bandwidth: float | None = None) -> float:
    """Unbiased U-statistic estimate of the squared MMD with a Gaussian kernel.

    The within-sample sums exclude the diagonal, so the estimate can be
    negative.  ``bandwidth=None`` applies the median heuristic to the pooled
    sample.
    """
    X, Y = _pair(X, Y, 2)
    if bandwidth is None:
        bandwidth = median_heuristic_bandwidth(np.vstack([X, Y]))
    m, n = len(X), len(Y)
    kxx = gaussian_kernel(X, X, bandwidth)
    kyy = gaussian_kernel(Y, Y, bandwidth)
    kxy = gaussian_kernel(X, Y, bandwidth)
    xx = (kxx.sum() - np.trace(kxx)) / (m * (m - 1))
    yy = (kyy.sum() - np.trace(kyy)) / (n * (n - 1))
    return float(xx + yy - 2.0 * kxy.mean())


def mmd2_unbiased_batch(X, Ys, bandwidth: float) -> np.ndarray:
    """``mmd2_unbiased`` of one scalar sample ``X`` against each row of ``Ys``.

    Only for ``q = 1`` samples; ``Ys`` has shape ``(N, n)``.  Used by the
    full-data ABC sweep where the per-call overhead would dominate.
    """
    x = np.ravel(np.asarray(X, float))
    Ys = np.asarray(Ys, float)
    m, n = x.size, Ys.shape[1]
    if m < 2 or n < 2:
        raise ValueError("both samples need at least 2 points")
    c = 1.0 / (2.0 * bandwidth**2)
    kxx = np.exp(-c * (x[:, None] - x[None, :]) ** 2)
    xx = (kxx.sum() - m) / (m * (m - 1))
    out = np.empty(Ys.shape[0])
    for i, y in enumerate(Ys):
        kyy = np.exp(-c * (y[:, None] - y[None, :]) ** 2)
        kxy = np.exp(-c * (x[:, None] - y[None, :]) ** 2)
        out[i] = xx + (kyy.sum() - n) / (n * (n - 1)) - 2.0 * kxy.mean()
    return out


def kl_knn(X, Y, k: int = 1) -> float:
    """k-nearest-neighbour estimate of ``KL(P || Q)`` from ``X ~ P``, ``Y ~ Q``.

    Wang, Kulkarni and Verdu (2009):
    ``(q/n) sum_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1))`` where
    ``rho_k(i)`` is the k-th neighbour distance of ``X[i]`` within ``X`` and
    ``nu_k(i)`` its k-th neighbour distance into ``Y``.  Not symmetric.
    """
    X, Y = _pair(X, Y)
    n, m = len(X), len(Y)
    if n <= k:
        raise ValueError(f"X needs more than k={k} points")
    if m < k:
        raise ValueError(f"Y needs at least k={k} points")
    q = X.shape[1]
    rho = cKDTree(X).query(X, k=k + 1)[0][:, k]
    nu = cKDTree(Y).query(X, k=k)[0]
    if k > 1:
        nu = nu[:, k - 1]
    if np.any(rho == 0) or np.any(nu == 0):
        raise ValueError("zero nearest-neighbour distance: samples contain duplicate points")
    return float(q / n * np.sum(np.log(nu / rho)) + np.log(m / (n - 1)))


def wasserstein_1d(X, Y) -> float:
    """Order-1 Wasserstein distance between two scalar empirical distributions.

    For equal sizes this is the mean absolute difference of the sorted samples.
    """
    X, Y = _pair(X, Y)
    if X.shape[1] != 1:
        raise ValueError("wasserstein_1d needs scalar samples")
    return float(wasserstein_distance(X[:, 0], Y[:, 0]))


def cvm(X, Y) -> float:
    """Two-sample Cramer-von Mises criterion.

    ``nm/(n+m)^2 * sum_z (F_n(z) - G_m(z))^2`` over the pooled sample, which
    is zero exactly when the two empirical CDFs coincide.
    """
    X, Y = _pair(X, Y)
    if X.shape[1] != 1:
        raise ValueError("cvm needs scalar samples")
    x, y = np.sort(X[:, 0]), np.sort(Y[:, 0])
    n, m = x.size, y.size
    z = np.concatenate([x, y])
    F = np.searchsorted(x, z, side="right") / n
    G = np.searchsorted(y, z, side="right") / m
    return float(n * m / (n + m) ** 2 * np.sum((F - G) ** 2))


DISCREPANCIES = {
    "euclidean": euclidean,
    "mmd": mmd2_unbiased,
    "kl": kl_knn,
    "wasserstein": wasserstein_1d,
    "cvm": cvm,
}
