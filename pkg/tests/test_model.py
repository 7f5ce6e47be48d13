import math

import mpmath as mp
import numpy as np
import pytest
import scipy.integrate

from polsarcd import WishartParams, mathcore, sample
from polsarcd.errors import DomainError, EmptySample, NotHermitian
from polsarcd.estimation import estimate_sigma
from polsarcd.model import (
    as_sample,
    derive_seed,
    gamma_marginal_log_density,
    ks_test_gamma,
    log_density,
    trace_transform,
)


def batched_log_density(z: np.ndarray, params: WishartParams) -> np.ndarray:
    """Vectorized density evaluation used as a helper in sampling checks."""
    p, looks = params.p, params.looks
    _, ld = np.linalg.slogdet(z)
    inv = mathcore.inverse(params.sigma)
    tr = np.einsum("ij,nji->n", inv, z).real
    return (
        p * looks * np.log(looks)
        + (looks - p) * ld.real
        - looks * mathcore.logdet(params.sigma)
        - mathcore.lngamma_p(p, looks)
        - looks * tr
    )


class TestParams:
    def test_rejects_small_looks(self, b1):
        with pytest.raises(DomainError):
            WishartParams(b1, 1.5)

    def test_rejects_indefinite_sigma(self):
        with pytest.raises(Exception):
            WishartParams(np.diag([1.0, -2.0]), 4.0)

    def test_scaled(self, theta_b1):
        assert np.allclose(theta_b1.scaled(1.4).sigma, 1.4 * theta_b1.sigma)
        with pytest.raises(DomainError):
            theta_b1.scaled(0.0)


class TestAsSample:
    def test_rejects_empty(self):
        with pytest.raises(EmptySample):
            as_sample(np.empty((0, 2, 2)))

    def test_rejects_asymmetric_observation(self):
        bad = np.stack([np.eye(2), np.array([[1.0, 0.1], [0.0, 1.0]])]).astype(complex)
        with pytest.raises(NotHermitian):
            as_sample(bad)

    def test_promotes_single_matrix(self):
        out = as_sample(np.eye(3))
        assert out.shape == (1, 3, 3)


class TestLogDensity:
    def test_exponential_case(self):
        params = WishartParams(np.array([[1.0 + 0j]]), 1.0)
        assert log_density(np.array([[1.0 + 0j]]), params) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_gamma_marginal_at_p1(self):
        params = WishartParams(np.array([[2.0 + 0j]]), 4.0)
        lhs = log_density(np.array([[2.0 + 0j]]), params)
        rhs = gamma_marginal_log_density(2.0, 2.0, 4.0)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_against_high_precision_oracle(self, b1, theta_b1):
        mp.mp.dps = 50
        m = mp.matrix(3, 3)
        for i in range(3):
            for j in range(3):
                m[i, j] = mp.mpc(float(b1[i, j].real), float(b1[i, j].imag))
        looks = mp.mpf(4)
        p = 3
        lgp = (p * (p - 1) / 2) * mp.log(mp.pi) + sum(
            mp.loggamma(looks - i) for i in range(p)
        )
        prod = (m**-1) * m
        tr = mp.re(prod[0, 0] + prod[1, 1] + prod[2, 2])
        ld = mp.log(mp.re(mp.det(m)))
        oracle = p * looks * mp.log(looks) + (looks - p) * ld - looks * ld - lgp - looks * tr
        assert log_density(b1, theta_b1) == pytest.approx(float(oracle), abs=1e-10)

    def test_maximized_at_observation(self, b1, theta_b1):
        # perturbing the covariance away from the observation lowers the density
        rng = np.random.default_rng(29)
        base = log_density(b1, WishartParams(b1, 4.0))
        for _ in range(8):
            h = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            h = (h + h.conj().T) / 2.0
            h *= 0.01 * np.abs(b1).max() / np.abs(h).max()
            for s in (+1.0, -1.0):
                assert log_density(b1, WishartParams(b1 + s * h, 4.0)) < base

    def test_integrates_to_one_p1(self):
        params = WishartParams(np.array([[1.7 + 0j]]), 3.0)
        f = lambda z: math.exp(log_density(np.array([[z + 0j]]), params))
        val, _ = scipy.integrate.quad(f, 0.0, np.inf)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_integrates_to_one_p2_importance(self):
        sig = np.array([[2.0, 0.3 + 0.4j], [0.3 - 0.4j, 1.0]])
        f_params = WishartParams(sig, 5.0)
        g_params = WishartParams(sig * 1.5, 4.0)
        z = sample(g_params, 200000, derive_seed(4, 0))
        w = np.exp(batched_log_density(z, f_params) - batched_log_density(z, g_params))
        assert w.mean() == pytest.approx(1.0, abs=0.02)


class TestSampler:
    def test_mean_converges(self, theta_b1):
        z = sample(theta_b1, 10000, 1)
        assert np.abs(z.mean(axis=0) - theta_b1.sigma).max() < 0.05 * np.abs(
            theta_b1.sigma
        ).max()

    def test_identity_mean(self):
        params = WishartParams(np.eye(3), 4.0)
        z = sample(params, 10000, 2)
        assert np.abs(z.mean(axis=0) - np.eye(3)).max() < 0.05

    def test_deterministic(self, theta_b1):
        a = sample(theta_b1, 50, 123)
        b = sample(theta_b1, 50, 123)
        assert a.tobytes() == b.tobytes()

    def test_draws_are_hermitian_positive_definite(self, theta_b1):
        z = sample(theta_b1, 64, 5)
        assert np.abs(z - np.conj(np.swapaxes(z, 1, 2))).max() == 0.0
        for m in z:
            mathcore.cholesky(m)

    def test_rejects_fractional_looks(self, b1):
        with pytest.raises(DomainError):
            sample(WishartParams(b1, 3.5), 4, 0)

    def test_rejects_looks_below_dimension(self):
        # p = 4 requires at least 4 integer looks
        with pytest.raises(DomainError):
            sample(WishartParams(np.eye(4), 3.5), 2, 0)

    def test_accepts_looks_equal_to_dimension(self, b1):
        z = sample(WishartParams(b1, 3.0), 3, 0)
        assert z.shape == (3, 3, 3)

    def test_scalar_intensities_follow_gamma(self):
        params = WishartParams(np.array([[2.5 + 0j]]), 4.0)
        z = sample(params, 4000, 6)[:, 0, 0].real
        res = ks_test_gamma(z, shape=4.0, scale=2.5 / 4.0)
        assert res.p_value > 0.01

    def test_diagonal_marginals_follow_gamma(self, theta_b1):
        z = sample(theta_b1, 4000, 7)
        for k in range(3):
            channel = z[:, k, k].real
            res = ks_test_gamma(channel, shape=4.0, scale=theta_b1.sigma[k, k].real / 4.0)
            assert res.p_value > 0.01

    def test_error_decays_like_root_n(self, theta_b1):
        e1 = np.abs(sample(theta_b1, 100, derive_seed(0, 10)).mean(axis=0) - theta_b1.sigma).max()
        e2 = np.abs(
            sample(theta_b1, 10000, derive_seed(0, 11)).mean(axis=0) - theta_b1.sigma
        ).max()
        assert 5.0 <= e1 / e2 <= 20.0


class TestGammaMarginal:
    def test_exponential_value(self):
        assert gamma_marginal_log_density(1.0, 1.0, 1.0) == pytest.approx(-1.0)

    def test_integrates_to_one(self):
        f = lambda z: math.exp(gamma_marginal_log_density(z, 2.0, 4.0))
        val, _ = scipy.integrate.quad(f, 0.0, np.inf)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_domain(self):
        for bad in ((0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, 0.0)):
            with pytest.raises(DomainError):
                gamma_marginal_log_density(*bad)


class TestTraceTransform:
    def test_identical_observations_give_dimension(self, b1):
        z = np.stack([b1] * 5)
        t = trace_transform(z, b1)
        assert np.allclose(t, 3.0)

    def test_mean_is_dimension_under_fitted_sigma(self, theta_b1):
        z = sample(theta_b1, 200, 9)
        t = trace_transform(z, estimate_sigma(z))
        assert t.mean() == pytest.approx(3.0, abs=1e-10)

    def test_gamma_calibration(self, theta_b1):
        hits = 0
        for trial in range(200):
            z = sample(theta_b1, 500, derive_seed(77, trial))
            t = trace_transform(z, estimate_sigma(z))
            res = ks_test_gamma(t, shape=3 * 4.0, scale=1.0 / 4.0)
            hits += res.p_value > 0.01
        assert hits >= 190


class TestKsGamma:
    def test_quantile_construction_bounds_statistic(self):
        import scipy.stats as st

        n = 200
        grid = (np.arange(1, n + 1)) / (n + 1)
        values = st.gamma(a=3.0, scale=2.0).ppf(grid)
        res = ks_test_gamma(values, 3.0, 2.0)
        assert res.statistic <= 1.0 / (n + 1) + 1e-12

    def test_matches_scipy_statistic(self):
        import scipy.stats as st

        rng = np.random.default_rng(5)
        values = rng.gamma(4.0, 0.5, size=1000)
        mine = ks_test_gamma(values, 4.0, 0.5)
        ref = st.kstest(values, st.gamma(a=4.0, scale=0.5).cdf)
        assert mine.statistic == pytest.approx(ref.statistic, abs=1e-12)
        assert mine.p_value == pytest.approx(ref.pvalue, abs=5e-3)

    def test_calibration(self):
        rng = np.random.default_rng(50)
        hits = 0
        for _ in range(200):
            values = rng.gamma(4.0, 0.5, size=1000)
            hits += ks_test_gamma(values, 4.0, 0.5).p_value > 0.01
        assert hits >= 190

    def test_gross_misfit(self):
        rng = np.random.default_rng(51)
        values = rng.gamma(4.0, 0.5, size=1000) + 5 * 0.5
        assert ks_test_gamma(values, 4.0, 0.5).p_value < 1e-6

    def test_domain(self):
        with pytest.raises(DomainError):
            ks_test_gamma([1.0, -2.0], 1.0, 1.0)
        with pytest.raises(EmptySample):
            ks_test_gamma([], 1.0, 1.0)
