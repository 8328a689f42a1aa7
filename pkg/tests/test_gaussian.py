"""Linear-Gaussian information quantities against small hand oracles."""

import numpy as np
from numpy.testing import assert_allclose

from expdiag.gaussian import (LinearGaussian, block_cmi, block_entropy,
                              block_mi, conditional_cov, kl_gaussian,
                              logdet_psd)


def _random_system(rng, n=4, d=3):
    a = rng.standard_normal((n, d))
    q = rng.standard_normal((d, d + 2))
    prior = q @ q.T / (d + 2) + 0.1 * np.eye(d)
    return LinearGaussian(design=a, noise_var=float(rng.uniform(0.3, 2.0)),
                          prior_mean=rng.standard_normal(d), prior_cov=prior)


class TestBlockQuantities:
    def test_logdet_matches_slogdet(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            q = rng.standard_normal((4, 6))
            cov = q @ q.T
            assert_allclose(logdet_psd(cov), np.linalg.slogdet(cov)[1],
                            atol=1e-9)

    def test_entropy_of_independent_blocks_adds(self):
        cov = np.diag([1.0, 4.0, 9.0])
        h_all = block_entropy(cov)
        h_parts = block_entropy(cov, [0]) + block_entropy(cov, [1, 2])
        assert_allclose(h_all, h_parts, atol=1e-12)

    def test_mi_zero_for_independent_blocks(self):
        cov = np.diag([2.0, 3.0, 5.0])
        assert_allclose(block_mi(cov, [0], [1, 2]), 0.0, atol=1e-12)

    def test_mi_bivariate_closed_form(self):
        # I(X;Y) = -log(1 - rho^2)/2 for a correlated pair
        for rho in (0.1, 0.5, 0.9):
            cov = np.array([[1.0, rho], [rho, 1.0]])
            assert_allclose(block_mi(cov, [0], [1]),
                            -0.5 * np.log1p(-rho ** 2), atol=1e-12)

    def test_cmi_chain_rule_spot(self):
        rng = np.random.default_rng(1)
        q = rng.standard_normal((5, 8))
        cov = q @ q.T
        lhs = block_mi(cov, [0, 1], [2, 3, 4])
        rhs = block_mi(cov, [0, 1], [2]) + block_cmi(cov, [0, 1], [3, 4], [2])
        assert_allclose(lhs, rhs, atol=1e-9)

    def test_conditional_cov_degenerate_conditioner(self):
        # conditioning on a zero-variance coordinate must not produce NaNs
        cov = np.diag([1.0, 0.0, 2.0])
        out = conditional_cov(cov, [0, 2], [1])
        assert np.all(np.isfinite(out))
        assert_allclose(out, np.diag([1.0, 2.0]), atol=1e-12)


class TestKLGaussian:
    def test_self_is_zero(self):
        rng = np.random.default_rng(2)
        q = rng.standard_normal((3, 5))
        cov = q @ q.T
        mean = rng.standard_normal(3)
        assert_allclose(kl_gaussian(mean, cov, mean, cov), 0.0, atol=1e-10)

    def test_univariate_closed_form(self):
        # KL(N(m0,v0) || N(m1,v1))
        m0, v0, m1, v1 = 0.3, 2.0, -0.5, 1.5
        expect = 0.5 * (np.log(v1 / v0) + v0 / v1
                        + (m0 - m1) ** 2 / v1 - 1.0)
        got = kl_gaussian([m0], [[v0]], [m1], [[v1]])
        assert_allclose(got, expect, atol=1e-12)


class TestLinearGaussian:
    def test_posterior_matches_ridge_formula(self):
        rng = np.random.default_rng(3)
        lg = _random_system(rng)
        y = rng.standard_normal(lg.n)
        mean, cov = lg.posterior(y)
        prec = (np.linalg.inv(lg.prior_cov)
                + lg.design.T @ (lg.design / lg.noise_var[:, None]))
        cov_ref = np.linalg.inv(prec)
        mean_ref = cov_ref @ (np.linalg.solve(lg.prior_cov, lg.prior_mean)
                              + lg.design.T @ (y / lg.noise_var))
        assert_allclose(cov, cov_ref, atol=1e-10)
        assert_allclose(mean, mean_ref, atol=1e-10)

    def test_mi_equals_entropy_drop(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            lg = _random_system(rng)
            gap = lg.prior_entropy() - lg.posterior_entropy()
            assert_allclose(lg.mi(), gap, atol=1e-9)

    def test_mi_and_cmi_match_joint_cov_blocks(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            lg = _random_system(rng)
            joint = lg.joint_cov(1)
            d, n = lg.dim, lg.n
            th = list(range(d))
            yb = list(range(d, d + n))
            rep = list(range(d + n, d + 2 * n))
            assert_allclose(lg.mi(), block_mi(joint, th, yb), atol=1e-8)
            assert_allclose(lg.cmi(), block_cmi(joint, th, rep, yb),
                            atol=1e-8)

    def test_huge_prior_variance_stays_exact(self):
        # the naive Schur form loses ~all precision at sigma_p = 1000
        sp2 = 1000.0 ** 2
        lg = LinearGaussian(design=np.ones((1, 1)), noise_var=1.0,
                            prior_mean=np.zeros(1),
                            prior_cov=np.array([[sp2]]))
        expect = 0.5 * np.log((2 * sp2 + 1) / (sp2 + 1))
        assert_allclose(lg.cmi(), expect, rtol=1e-12)

    def test_point_mass_prior_coordinate(self):
        # a zero-variance coordinate contributes nothing but must not crash
        lg = LinearGaussian(design=np.ones((1, 2)), noise_var=1.0,
                            prior_mean=np.zeros(2),
                            prior_cov=np.diag([1.0, 0.0]))
        ref = LinearGaussian(design=np.ones((1, 1)), noise_var=1.0,
                             prior_mean=np.zeros(1),
                             prior_cov=np.eye(1))
        assert_allclose(lg.mi(), ref.mi(), atol=1e-12)
        assert_allclose(lg.cmi(), ref.cmi(), atol=1e-12)

    def test_subset_mi_never_exceeds_full(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            lg = _random_system(rng)
            assert lg.mi([0]) <= lg.mi() + 1e-10

    def test_fisher_is_design_gram(self):
        rng = np.random.default_rng(7)
        lg = _random_system(rng)
        assert_allclose(lg.fisher(),
                        lg.design.T @ (lg.design / lg.noise_var[:, None]),
                        atol=1e-12)
