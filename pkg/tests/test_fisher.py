"""Information-matrix machinery: eigensolver, bounds, and classification."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from expdiag.errors import CapabilityError, DomainError
from expdiag.fisher import (cmi_lower_bound_analytic, cmi_trace_term,
                            dilution_matrix, expected_fisher, mi_upper_bound,
                            observed_info_fd, psi, sym_eigen,
                            tradeoff_report)
from expdiag.models import builtin, point_values
from expdiag.rand import substream


class TestSymEigen:
    def test_matches_numpy_on_random_symmetric(self):
        rng = np.random.default_rng(0)
        for d in (1, 2, 5, 8):
            a = rng.standard_normal((d, d))
            a = (a + a.T) / 2
            w, v = sym_eigen(a)
            assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-9)
            assert_allclose(v @ np.diag(w) @ v.T, a, atol=1e-9)

    def test_orthonormal_vectors(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((6, 6))
        a = a @ a.T
        _, v = sym_eigen(a)
        assert_allclose(v.T @ v, np.eye(6), atol=1e-10)


class TestPsi:
    def test_anchor_and_continuity(self):
        assert psi(1.0) == 1.0
        assert_allclose(psi(1.0 - 1e-12), psi(1.0 + 1e-12), atol=1e-10)

    def test_closed_form_both_branches(self):
        assert_allclose(psi(0.25), 0.5, atol=1e-14)
        assert_allclose(psi(np.e ** 2), 2.0, atol=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            psi(-0.5)


class TestFisherEstimates:
    def test_fd_hessian_matches_analytic(self):
        spec = builtin("normal-location", {"n": 6})
        rng = substream(0, "fd")
        theta = spec.sample_prior(rng)
        y = spec.sample_data(theta, rng)
        obs = observed_info_fd(spec, y, theta)
        assert_allclose(obs.matrix, spec.analytic.fisher(point_values(theta)),
                        rtol=1e-5, atol=1e-7)

    def test_expected_fisher_is_psd_and_near_analytic(self):
        spec = builtin("normal-location", {"n": 4})
        est = expected_fisher(spec, spec.point([0.3]), n_mc=200,
                              rng=substream(1, "ef"))
        assert est.matrix.shape == (1, 1)
        assert est.matrix[0, 0] > 0
        assert abs(est.matrix[0, 0] - 4.0) < 4 * est.std_error_matrix[0, 0] + 1e-9


class TestMiUpperBound:
    def test_full_bound_dominates_mi(self):
        for name in ("flat", "normal-location", "redundant-location"):
            spec = builtin(name)
            bound = mi_upper_bound(spec, n_prior=60, n_mc=40,
                                   rng=substream(2, "bound", name))
            mi = spec.analytic.lingauss(None)
            assert mi.mi() <= bound.value + 1e-9

    def test_weak_needs_log_concave_prior(self):
        spec = builtin("normal-gamma")
        with pytest.raises(CapabilityError, match="log-concave"):
            mi_upper_bound(spec, variant="weak", n_prior=20, n_mc=20,
                           rng=substream(3, "weak"))

    def test_unknown_variant(self):
        with pytest.raises(DomainError):
            mi_upper_bound(builtin("flat"), variant="strong")


class TestCmiLowerBound:
    def test_sum_formula(self):
        iota = np.array([0.5, 2.0, 0.0])
        assert_allclose(cmi_lower_bound_analytic(iota),
                        0.5 / 1.5 + 2.0 / 3.0, atol=1e-14)

    def test_repeat_factor(self):
        assert cmi_lower_bound_analytic([1.0], R=4) == pytest.approx(0.2)

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(DomainError):
            cmi_lower_bound_analytic([-0.1])

    def test_trace_term_flat_model_zero(self):
        est = cmi_trace_term(builtin("flat"), n_y=10, n_mc=10,
                             rng=substream(4, "flat-tr"))
        assert abs(est.value) < 1e-10


class TestDilutionAndTradeoff:
    def test_poisson_negbin_totally_diluting(self):
        rep = dilution_matrix(builtin("poisson-negbin"), n_mc=120,
                              n_inner=60, seed=0)
        assert rep.classification == "totally-diluting"
        # eigenvalues measure information lost, so all must be >= 0
        assert min(rep.eigenvalues) >= -1e-8

    def test_orthogonal_regression_not_diluting(self):
        rep = dilution_matrix(builtin("simple-reg-2obs", {"rho": 0.0}),
                              n_mc=80, n_inner=50, seed=0)
        assert rep.classification in ("non-diluting", "indefinite")

    def test_tradeoff_report_fields(self):
        rep = tradeoff_report(builtin("simple-reg-2obs", {"rho": 0.5}),
                              n_prior=30, n_mc=10, seed=0)
        assert rep.delta_f >= -1e-12
        assert rep.mi_bound_exp <= rep.mi_bound_base + 1e-9
        text = rep.to_text()
        assert "mi upper bound" in text and "expanded" in text
        js = rep.to_json()
        assert '"classification"' in js
