import numpy as np
import pytest

from mhmc.diagnostics import (
    autocorrelation,
    bias_and_mcse,
    effective_sample_size,
    mmd_squared,
    mmd_squared_prefix_curve,
)
from mhmc.errors import DimensionMismatch, TooFewChains, ZeroVariance


def ar1_series(rho, n, seed):
    rng = np.random.default_rng(seed)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    innovations = rng.standard_normal(n)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + innovations[t]
    return x


def mmd_squared_literal(x, y):
    """O(N^2) double kernel sum; the oracle for the moment-identity form."""
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    kxx = (1.0 + x @ x.T) ** 2
    kyy = (1.0 + y @ y.T) ** 2
    kxy = (1.0 + x @ y.T) ** 2
    return kxx.mean() + kyy.mean() - 2.0 * kxy.mean()


class TestAutocorrelation:
    def test_iid_chain_near_zero(self):
        rng = np.random.default_rng(1)
        n = 20_000
        chain = rng.standard_normal((n, 2))
        curve = autocorrelation(chain, 10)
        assert curve[0] == 1.0
        assert abs(curve[5]) <= 3.0 / np.sqrt(n)

    def test_constant_chain_raises(self):
        with pytest.raises(ZeroVariance):
            autocorrelation(np.ones((100, 1)), 5)

    def test_ar1_matches_analytic(self):
        x = ar1_series(0.8, 100_000, seed=2)
        curve = autocorrelation(x[:, None], 10)
        for k in range(1, 11):
            assert abs(curve[k] - 0.8**k) < 0.02

    def test_bounded_by_one(self):
        x = ar1_series(0.95, 5000, seed=3)
        curve = autocorrelation(x[:, None], 50)
        assert np.all(np.abs(curve) <= 1.0 + 1e-12)

    def test_reversed_chain_equal(self):
        rng = np.random.default_rng(4)
        chain = rng.standard_normal((500, 3))
        np.testing.assert_allclose(
            autocorrelation(chain, 20), autocorrelation(chain[::-1], 20), atol=1e-12
        )

    def test_max_lag_bound(self):
        with pytest.raises(ValueError):
            autocorrelation(np.random.default_rng(0).standard_normal((10, 1)), 10)


class TestEffectiveSampleSize:
    def test_iid_chain(self):
        rng = np.random.default_rng(5)
        n = 50_000
        ess = effective_sample_size(rng.standard_normal((n, 1)), 0)
        assert 0.8 * n <= ess <= 1.2 * n

    def test_ar1_half(self):
        # Integrated autocorrelation time (1+rho)/(1-rho) = 3 at rho = 0.5.
        n = 100_000
        ess = effective_sample_size(ar1_series(0.5, n, seed=6)[:, None], 0)
        assert abs(ess - n / 3.0) / (n / 3.0) < 0.10

    def test_single_sample_clips_to_one(self):
        assert effective_sample_size(np.array([[2.0]]), 0) == 1.0

    def test_constant_raises(self):
        with pytest.raises(ZeroVariance):
            effective_sample_size(np.ones((100, 1)), 0)

    def test_affine_invariance(self):
        x = ar1_series(0.7, 20_000, seed=7)[:, None]
        a = effective_sample_size(x, 0)
        b = effective_sample_size(2000.0 * x - 17.0, 0)
        assert a == pytest.approx(b, rel=1e-9)


class TestMmd:
    def test_identical_samples_zero(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((100, 2))
        assert mmd_squared(x, x) == 0.0

    def test_hand_example(self):
        # k(x,x)=4, k(y,y)=4, k(x,y)=1 => 4 + 4 - 2 = 6.
        assert mmd_squared([[1.0, 0.0]], [[0.0, 1.0]]) == pytest.approx(6.0)

    def test_matches_literal_double_sum(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            x = rng.standard_normal((40, 3))
            y = rng.standard_normal((60, 3)) + 0.5
            assert mmd_squared(x, y) == pytest.approx(
                mmd_squared_literal(x, y), rel=1e-10
            )

    def test_same_distribution_small(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal((10_000, 2))
        y = rng.standard_normal((10_000, 2))
        assert mmd_squared(x, y) <= 0.05

    def test_symmetry_and_nonnegativity(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((50, 2))
        y = 2.0 * rng.standard_normal((30, 2)) + 1.0
        assert mmd_squared(x, y) == pytest.approx(mmd_squared(y, x), rel=1e-12)
        assert mmd_squared(x, y) >= 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mmd_squared(np.zeros((5, 2)), np.zeros((5, 3)))
        with pytest.raises(DimensionMismatch):
            mmd_squared(np.zeros((0, 2)), np.zeros((5, 2)))

    def test_prefix_curve(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((95, 2))
        y = rng.standard_normal((200, 2))
        counts, values = mmd_squared_prefix_curve(x, y, 30)
        assert counts.tolist() == [30, 60, 90, 95]
        assert values[-1] == pytest.approx(mmd_squared(x, y))


class TestSummarizeChain:
    def test_invariants(self):
        rng = np.random.default_rng(20)
        thetas = rng.standard_normal((2000, 3))
        accepted = rng.random(2000) < 0.74
        from mhmc.diagnostics import summarize_chain

        diag = summarize_chain(thetas, accepted, max_lag=30)
        assert diag.autocorr[0] == 1.0
        assert np.all(np.abs(diag.autocorr) <= 1.0 + 1e-12)
        assert diag.ess.shape == (3,)
        assert np.all((1.0 <= diag.ess) & (diag.ess <= 2000.0))
        assert diag.mean_acceptance == pytest.approx(accepted.mean())


class TestBiasAndMcse:
    def test_exact_chains_within_three_mcse(self):
        rng = np.random.default_rng(13)
        chains = [rng.standard_normal((5000, 2)) for _ in range(10)]
        bias, mcse = bias_and_mcse(chains, lambda c: c[:, 0], truth=0.0)
        assert bias <= 3.0 * mcse

    def test_second_moment_bias_small(self):
        rng = np.random.default_rng(14)
        chains = [rng.standard_normal((10_000, 2)) for _ in range(10)]
        bias, _ = bias_and_mcse(chains, lambda c: c[:, 0] ** 2, truth=1.0)
        assert bias <= 0.03

    def test_mixture_truth_value(self):
        # E[x^2] = sigma^2 + mu_1^2 = 1 + 6.25 for the reference mixture.
        from mhmc.targets import mixture_target

        target = mixture_target(np.array([2.5, -2.5]), np.eye(2))
        assert target.second_moment[0] == pytest.approx(7.25)
        rng = np.random.default_rng(15)
        signs = rng.choice([-1.0, 1.0], size=(8, 20_000, 1))
        chains = signs * np.array([2.5, -2.5]) + rng.standard_normal((8, 20_000, 2))
        bias, mcse = bias_and_mcse(list(chains), lambda c: c[:, 0] ** 2, truth=7.25)
        assert bias <= 4.0 * mcse + 0.05

    def test_too_few_chains(self):
        with pytest.raises(TooFewChains):
            bias_and_mcse([np.zeros((10, 1))], lambda c: c[:, 0], truth=0.0)
