import numpy as np
import pytest

from robustsbi import RngStream, UniformPrior


@pytest.fixture
def prior():
    return UniformPrior()


@pytest.fixture
def stream():
    return RngStream(2024, 7)


def bartlett_cov(theta):
    """Asymptotic ``T * Cov`` of the lag-0/lag-1 sample autocovariances of a
    Gaussian MA(1), from Bartlett's formula
    ``sum_k gamma_k gamma_{k+j-i} + gamma_{k+j} gamma_{k-i}``."""
    g = {0: 1.0 + theta**2, 1: theta, -1: theta}
    gam = lambda k: g.get(k, 0.0)
    cov = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            cov[i, j] = sum(gam(k) * gam(k + j - i) + gam(k + j) * gam(k - i) for k in range(-4, 5))
    return cov


def batch_means_se(x, n_batches=100):
    """Standard error of the mean of a correlated series via batch means."""
    x = np.asarray(x)
    b = x[: len(x) // n_batches * n_batches].reshape(n_batches, -1).mean(axis=1)
    return b.std(ddof=1) / np.sqrt(n_batches)
