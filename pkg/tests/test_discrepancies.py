import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import cramervonmises_2samp

from robustsbi import RngStream
from robustsbi.discrepancies import (
    cvm,
    euclidean,
    kl_knn,
    median_heuristic_bandwidth,
    mmd2_unbiased,
    mmd2_unbiased_batch,
    wasserstein_1d,
)

vec3 = arrays(np.float64, 3, elements=st.floats(-1e3, 1e3))


class TestEuclidean:
    def test_values(self):
        assert euclidean([1, 0], [1, 0]) == 0
        assert euclidean([3, 4], [0, 0]) == 5
        assert euclidean([1, 0], [0.000702, 0]) == pytest.approx(0.999298)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            euclidean([1, 2], [1, 2, 3])

    @given(vec3, vec3, vec3)
    def test_triangle_and_symmetry(self, a, b, c):
        assert euclidean(a, c) <= euclidean(a, b) + euclidean(b, c) + 1e-9
        assert euclidean(a, b) == euclidean(b, a)


class TestMMD:
    def test_far_apart_pairs(self):
        eps = 1e-6
        value = mmd2_unbiased([0, eps], [100, 100 + eps], bandwidth=1.0)
        # within-sample terms exp(-eps^2/2) each, cross term exp(-100^2/2) = 0
        assert value == pytest.approx(2 * math.exp(-(eps**2) / 2), abs=1e-12)

    def test_identical_pairs(self):
        value = mmd2_unbiased([0, 1], [0, 1], bandwidth=1.0)
        assert value == pytest.approx(math.exp(-0.5) - 1.0, abs=1e-12)
        assert value == pytest.approx(-0.3935, abs=1e-4)

    def test_unbiased_at_null(self):
        gen = RngStream(31).generator()
        vals = np.array([mmd2_unbiased(gen.standard_normal(20), gen.standard_normal(20), 1.0) for _ in range(1000)])
        assert abs(vals.mean()) < 4 * vals.std(ddof=1) / math.sqrt(vals.size)

    @given(st.permutations(range(8)))
    @settings(max_examples=25)
    def test_permutation_invariant(self, perm):
        gen = np.random.default_rng(3)
        X, Y = gen.standard_normal((8, 2)), gen.standard_normal((8, 2)) + 0.5
        base = mmd2_unbiased(X, Y, 0.7)
        assert mmd2_unbiased(X[list(perm)], Y, 0.7) == pytest.approx(base, rel=1e-12, abs=1e-15)
        assert mmd2_unbiased(X, Y[list(perm)], 0.7) == pytest.approx(base, rel=1e-12, abs=1e-15)

    def test_symmetric(self):
        gen = np.random.default_rng(4)
        X, Y = gen.standard_normal(10), gen.standard_normal(12)
        assert mmd2_unbiased(X, Y, 1.0) == pytest.approx(mmd2_unbiased(Y, X, 1.0))

    def test_batch_matches_scalar(self):
        gen = np.random.default_rng(5)
        x, Ys = gen.standard_normal(15), gen.standard_normal((4, 12))
        np.testing.assert_allclose(mmd2_unbiased_batch(x, Ys, 0.8), [mmd2_unbiased(x, y, 0.8) for y in Ys])

    def test_too_small(self):
        with pytest.raises(ValueError):
            mmd2_unbiased([0.0], [1.0, 2.0], 1.0)

    def test_default_bandwidth_is_median_heuristic(self):
        X, Y = np.array([0.0, 1.0]), np.array([3.0, 4.0])
        assert mmd2_unbiased(X, Y) == mmd2_unbiased(X, Y, median_heuristic_bandwidth(np.r_[X, Y]))


class TestMedianHeuristic:
    def test_values(self):
        assert median_heuristic_bandwidth([0, 1]) == 1
        assert median_heuristic_bandwidth([0, 0, 0]) == 1.0
        assert median_heuristic_bandwidth([0, 1, 3]) == 2


@pytest.fixture(scope="module")
def gen():
    return RngStream(41).generator()


class TestKL:
    def test_same_distribution(self, gen):
        assert abs(kl_knn(gen.standard_normal(5000), gen.standard_normal(5000))) < 0.05

    def test_mean_shift(self, gen):
        assert kl_knn(gen.standard_normal(5000), 1 + gen.standard_normal(5000)) == pytest.approx(0.5, abs=0.1)

    def test_scale_change(self, gen):
        expected = math.log(2) + 1 / 8 - 0.5
        assert kl_knn(gen.standard_normal(5000), 2 * gen.standard_normal(5000)) == pytest.approx(expected, abs=0.1)

    def test_asymmetric(self, gen):
        X, Y = gen.standard_normal(2000), 2 * gen.standard_normal(2000) + 1
        assert abs(kl_knn(X, Y) - kl_knn(Y, X)) > 0.1

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            kl_knn([0.0, 0.0, 1.0], [0.5, 2.0])

    def test_k_greater_than_one(self, gen):
        X, Y = gen.standard_normal(3000), 1 + gen.standard_normal(3000)
        assert kl_knn(X, Y, k=3) == pytest.approx(0.5, abs=0.1)


class TestWasserstein:
    def test_identity_and_translation(self):
        x = np.random.default_rng(6).standard_normal(100)
        assert wasserstein_1d(x, x) == 0
        assert wasserstein_1d(x, x + 2.5) == pytest.approx(2.5)
        assert wasserstein_1d(x, x - 2.5) == pytest.approx(2.5)

    def test_sorted_mean_abs_difference(self):
        gen = np.random.default_rng(7)
        x, y = gen.standard_normal(50), gen.standard_normal(50)
        assert wasserstein_1d(x, y) == pytest.approx(np.mean(np.abs(np.sort(x) - np.sort(y))))

    def test_uniforms(self):
        gen = RngStream(51).generator()
        # W1(U(0,1), U(0,2)) = int_0^1 |u - 2u| du = 1/2
        assert wasserstein_1d(gen.random(100_000), 2 * gen.random(100_000)) == pytest.approx(0.5, abs=0.02)

    def test_empty(self):
        with pytest.raises(ValueError):
            wasserstein_1d([], [1.0])


class TestCvM:
    def test_identical(self):
        x = np.random.default_rng(8).standard_normal(40)
        assert cvm(x, x) <= 1e-15

    def test_matches_scipy_without_ties(self):
        gen = np.random.default_rng(9)
        x, y = gen.standard_normal(30), gen.standard_normal(45) + 0.3
        assert cvm(x, y) == pytest.approx(cramervonmises_2samp(x, y).statistic, rel=1e-10)

    def test_monotone_in_shift(self):
        gen = np.random.default_rng(10)
        x, y = gen.standard_normal(200), gen.standard_normal(200)
        values = [cvm(x, y + s) for s in (0.5, 1.0, 2.0)]
        assert values[0] < values[1] < values[2]

    @given(st.floats(0.1, 5.0), st.floats(-3, 3))
    @settings(max_examples=30)
    def test_invariant_under_monotone_transform(self, a, b):
        gen = np.random.default_rng(11)
        x, y = gen.standard_normal(30), gen.standard_normal(25) + 0.4
        f = lambda v: np.exp(a * v) + b
        assert cvm(f(x), f(y)) == pytest.approx(cvm(x, y), rel=1e-12)

    def test_symmetric(self):
        gen = np.random.default_rng(12)
        x, y = gen.standard_normal(20), gen.standard_normal(33)
        assert cvm(x, y) == pytest.approx(cvm(y, x))
