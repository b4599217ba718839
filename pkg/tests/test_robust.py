import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import kstest

from robustsbi import RngStream, UniformPrior, simulate_ma1
from robustsbi.robust import GammaPrior, gamma_log_prior, rbsl_m_loglik, rbsl_mcmc, rbsl_v_loglik, slice_update_gamma
from robustsbi.slice import slice_sample_1d
from robustsbi.summaries import autocov_summaries, ma1_simulator, ma1_summary_moments
from robustsbi.synthetic import MomentEstimate, bsl_mcmc, mvn_logpdf, synthetic_loglik

LOG_2PI = math.log(2 * math.pi)
UNIT1 = MomentEstimate(np.zeros(1), np.eye(1), 10)


def slice_chain(logf, n, seed, x0=0.0, thin=1):
    gen = RngStream(seed).generator()
    x, lf = x0, logf(x0)
    out = np.empty(n)
    for i in range(n * thin):
        x, lf = slice_sample_1d(x, logf, gen, logf_x0=lf)
        if (i + 1) % thin == 0:
            out[i // thin] = x
    return out


def grid_cdf(logf, lo, hi, n=20_001):
    grid = np.linspace(lo, hi, n)
    lp = np.array([logf(g) for g in grid])
    p = np.exp(lp - lp[np.isfinite(lp)].max())
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(grid))])
    return lambda x: np.interp(x, grid, cdf / cdf[-1])


class TestMeanAdjusted:
    def test_zero_gamma_is_bit_identical(self):
        est = MomentEstimate(np.array([0.3, -0.1]), np.array([[0.5, 0.1], [0.1, 0.2]]), 50)
        s = np.array([0.9, 0.4])
        assert rbsl_m_loglik(s, est, np.zeros(2)) == synthetic_loglik(s, est)

    def test_unit_example(self):
        assert rbsl_m_loglik([1.0], UNIT1, [1.0]) == pytest.approx(-0.5 * LOG_2PI)

    @given(st.floats(-5, 5), st.floats(0.1, 3.0), st.floats(-5, 5))
    @settings(max_examples=50)
    def test_maximised_where_shifted_mean_hits_observation(self, mu, sd, s):
        est = MomentEstimate(np.array([mu]), np.array([[sd**2]]), 10)
        g_star = (s - mu) / sd
        best = rbsl_m_loglik([s], est, [g_star])
        assert best == pytest.approx(-0.5 * LOG_2PI - math.log(sd))
        assert best >= rbsl_m_loglik([s], est, [g_star + 0.1])


class TestVarianceInflated:
    def test_zero_gamma_is_bit_identical(self):
        est = MomentEstimate(np.array([0.3, -0.1]), np.array([[0.5, 0.1], [0.1, 0.2]]), 50)
        s = np.array([0.9, 0.4])
        assert rbsl_v_loglik(s, est, np.zeros(2)) == synthetic_loglik(s, est)

    def test_unit_example(self):
        assert rbsl_v_loglik([0.0], UNIT1, [1.0]) == pytest.approx(-0.5 * math.log(4 * math.pi))

    def test_penalty_monotone_at_mean(self):
        values = [rbsl_v_loglik([0.0], UNIT1, [g]) for g in (0.0, 0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_negative_gamma_raises(self):
        with pytest.raises(ValueError):
            rbsl_v_loglik([0.0], UNIT1, [-0.1])


class TestGammaPrior:
    def test_laplace_density(self):
        p = GammaPrior("laplace", 0.5)
        assert p.logpdf1(0.0) == pytest.approx(0.0)
        assert p.logpdf1(1.0) == pytest.approx(-2.0)
        assert p.logpdf1(-1.0) == p.logpdf1(1.0)

    def test_exponential_density(self):
        p = GammaPrior("exponential", 0.5)
        assert p.logpdf1(0.0) == pytest.approx(math.log(0.5))
        assert p.logpdf1(2.0) == pytest.approx(math.log(0.5) - 1.0)
        assert p.logpdf1(-0.1) == -math.inf

    def test_sum_over_components(self):
        p = GammaPrior("laplace", 0.5)
        assert gamma_log_prior(p, [1.0, -1.0]) == pytest.approx(-4.0)

    @pytest.mark.parametrize("variant", ["laplace", "exponential"])
    def test_cdf_matches_sampler(self, variant):
        p = GammaPrior(variant, 0.5)
        draws = p.sample(20_000, RngStream(1).generator())
        assert kstest(draws, p.cdf).pvalue > 0.01

    def test_invalid(self):
        with pytest.raises(ValueError):
            GammaPrior("normal")
        with pytest.raises(ValueError):
            GammaPrior("laplace", 0.0)


class TestSliceSampler:
    @pytest.mark.parametrize("variant,mean,var", [("laplace", 0.0, 0.5), ("exponential", 2.0, 4.0)])
    def test_flat_likelihood_returns_prior(self, variant, mean, var):
        p = GammaPrior(variant, 0.5)
        x0 = 0.0 if variant == "laplace" else 1.0
        draws = slice_chain(p.logpdf1, 20_000, 2, x0=x0, thin=5)
        assert kstest(draws, p.cdf).pvalue > 0.01
        assert draws.mean() == pytest.approx(mean, abs=0.1 * math.sqrt(var))

    def test_gaussian_times_laplace_matches_grid(self):
        p = GammaPrior("laplace", 0.5)
        est = MomentEstimate(np.array([0.0]), np.array([[1.0]]), 10)
        logf = lambda g: rbsl_m_loglik([2.0], est, [g]) + p.logpdf1(g)
        draws = slice_chain(logf, 10_000, 3, thin=3)
        assert kstest(draws, grid_cdf(logf, -8, 10)).statistic < 0.05

    def test_update_uses_full_conditional(self):
        p = GammaPrior("exponential", 0.5)
        est = MomentEstimate(np.array([0.0]), np.array([[1.0]]), 10)
        gen = RngStream(4).generator()
        gamma, draws = np.array([0.5]), []
        for _ in range(15_000):
            gamma = slice_update_gamma(0, None, gamma, est, np.array([3.0]), p, gen, loglik=rbsl_v_loglik)
            draws.append(gamma[0])
        logf = lambda g: rbsl_v_loglik([3.0], est, [g]) + p.logpdf1(g) if g >= 0 else -math.inf
        assert kstest(np.array(draws)[::3], grid_cdf(logf, 0, 30)).statistic < 0.05

    def test_state_on_slice(self):
        gen = RngStream(5).generator()
        logf = lambda x: -0.5 * x * x
        x = 0.3
        for _ in range(100):
            x_new, lf = slice_sample_1d(x, logf, gen)
            assert lf == logf(x_new)
            x = x_new

    def test_rejects_start_outside_support(self):
        with pytest.raises(ValueError):
            slice_sample_1d(-1.0, lambda x: -math.inf if x < 0 else 0.0, RngStream(6).generator())


@pytest.fixture(scope="module")
def s_obs():
    return autocov_summaries(simulate_ma1(0.3, 100, RngStream(7)))


class TestRbslChain:
    prior = UniformPrior()

    def test_frozen_gamma_is_bsl(self, s_obs):
        a = rbsl_mcmc("M", self.prior, None, s_obs, m=20, iters=300, rng=RngStream(8), freeze_gamma=True)
        b = bsl_mcmc(self.prior, s_obs, m=20, iters=300, rng=RngStream(8))
        np.testing.assert_array_equal(a.thetas, b.thetas)
        np.testing.assert_array_equal(a.logliks, b.logliks)
        assert np.all(a.gammas == 0)

    @pytest.mark.parametrize("variant", ["M", "V"])
    def test_shapes_and_support(self, s_obs, variant):
        chain = rbsl_mcmc(variant, self.prior, None, s_obs, m=20, iters=300, rng=RngStream(9))
        assert chain.gammas.shape == (300, 2)
        assert chain.gamma.shape == (240, 2)
        if variant == "V":
            assert np.all(chain.gammas >= 0)

    def test_deterministic(self, s_obs):
        a = rbsl_mcmc("V", self.prior, None, s_obs, m=20, iters=100, rng=RngStream(10))
        b = rbsl_mcmc("V", self.prior, None, s_obs, m=20, iters=100, rng=RngStream(10))
        np.testing.assert_array_equal(a.gammas, b.gammas)

    def test_bad_arguments(self, s_obs):
        with pytest.raises(ValueError):
            rbsl_mcmc("X", self.prior, None, s_obs, iters=10)
        with pytest.raises(ValueError):
            rbsl_mcmc("M", self.prior, None, s_obs, iters=10, gamma0=np.zeros(3))
        with pytest.raises(ValueError):
            rbsl_mcmc("V", self.prior, None, s_obs, iters=10, gamma0=np.array([-1.0, 0.0]))

    def test_scale_equivariance(self, s_obs):
        # doubling every summary leaves the adjustment posterior unchanged
        base = ma1_simulator(100)
        doubled = lambda th, gen: 2.0 * base(th, gen)
        a = rbsl_mcmc("M", self.prior, None, s_obs, m=50, iters=3000, rng=RngStream(11), simulator=base)
        b = rbsl_mcmc("M", self.prior, None, 2.0 * s_obs, m=50, iters=3000, rng=RngStream(11), simulator=doubled)
        for j in range(2):
            stat = kstest(a.gamma[:, j], b.gamma[:, j]).statistic
            assert stat < 0.05

    def test_joint_chain_matches_grid_posterior(self):
        # one summary (lag-1), exact moments: the (theta, gamma) target is 2-D
        T = 100
        y = simulate_ma1(0.4, T, RngStream(12))
        s = autocov_summaries(y)[1:]

        def moments(theta, _gen):
            mean, cov = ma1_summary_moments(theta[0], T)
            return MomentEstimate(mean[1:], cov[1:, 1:], 10**9)

        gp = GammaPrior("laplace", 0.5)
        chain = rbsl_mcmc("M", self.prior, gp, s, iters=40_000, proposal_scale=0.5, rng=RngStream(13), moments_fn=moments)

        thetas = np.linspace(-1, 1, 401)
        gammas = np.linspace(-8, 8, 1601)
        logp = np.empty((thetas.size, gammas.size))
        for i, t in enumerate(thetas):
            mom = moments([t], None)
            sd = mom.std[0]
            z = (s[0] - mom.mu[0] - sd * gammas) / sd
            logp[i] = -0.5 * z * z - math.log(sd) - np.abs(gammas) / gp.lam
        p = np.exp(logp - logp.max())
        for draws, grid, marg in ((chain.theta[::4, 0], thetas, p.sum(axis=1)), (chain.gamma[::4, 0], gammas, p.sum(axis=0))):
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (marg[1:] + marg[:-1]))])
            cdf /= cdf[-1]
            assert kstest(draws, lambda x: np.interp(x, grid, cdf)).statistic < 0.05
