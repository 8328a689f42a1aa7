"""Information estimators against closed forms and each other."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from expdiag.errors import (CapabilityError, DomainError,
                            NumericalError)
from expdiag.infotheory import (InfoEstimate, estimate_cmi, estimate_psd,
                                gaussian_entropy, gaussian_mi_cmi,
                                knn_entropy, mi_decomposition,
                                weak_id_verdict)
from expdiag.models import builtin
from expdiag.rand import substream
from expdiag.samplers import grid_posterior, sample_posterior


class TestInfoEstimate:
    def test_analytic_must_be_exact(self):
        with pytest.raises(DomainError, match="exact"):
            InfoEstimate(value=1.0, std_error=0.1, method="analytic")

    def test_nonfinite_needs_degenerate_flag(self):
        with pytest.raises(NumericalError):
            InfoEstimate(value=np.inf, std_error=0.0, method="analytic")
        ok = InfoEstimate(value=-np.inf, std_error=0.0, method="analytic",
                          degenerate=True)
        assert ok.degenerate

    def test_record_shape(self):
        rec = InfoEstimate(value=0.5, std_error=0.01,
                           method="nested-mc").to_record("cmi")
        assert rec == {"quantity": "cmi", "value": 0.5, "se": 0.01,
                       "method": "nested-mc", "config": {}}


class TestGaussianMiCmi:
    def test_normal_location_closed_form(self):
        out = gaussian_mi_cmi(builtin("normal-location"))
        assert_allclose(out["mi"].value, 0.5 * np.log(2.0), rtol=1e-12)
        assert_allclose(out["cmi"].value, 0.5 * np.log(1.5), rtol=1e-12)

    def test_split_means_formulas(self):
        for n in (1, 5, 30):
            base = gaussian_mi_cmi(builtin("split-means", {"n": n}))
            exp = gaussian_mi_cmi(
                builtin("split-means", {"n": n, "variant": "expanded"}))
            assert_allclose(base["cmi"].value,
                            0.5 * np.log((4 * n + 1) / (2 * n + 1)),
                            rtol=1e-12)
            assert_allclose(exp["cmi"].value,
                            np.log((2 * n + 1) / (n + 1)), rtol=1e-12)

    def test_pair_uses_expanded_with_shared_subset(self):
        pair = builtin("location-nuisance")
        out = gaussian_mi_cmi(pair)
        s2t, s2l = pair.expanded.hyper["s2_theta"], pair.expanded.hyper["s2_lambda"]
        assert_allclose(out["mi"].value,
                        0.5 * np.log(1 + s2t / (1 + s2l)), rtol=1e-12)

    def test_rejects_non_conjugate(self):
        with pytest.raises(CapabilityError, match="estimate_cmi"):
            gaussian_mi_cmi(builtin("student-t-outlier"))


class TestKnnEntropy:
    def test_gaussian_entropy_recovered(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((20000, 2))
        est = knn_entropy(x)
        expect = gaussian_entropy(np.eye(2)).value
        assert abs(est.value - expect) < 0.03

    def test_duplicates_rejected(self):
        x = np.zeros((500, 1))
        with pytest.raises(NumericalError, match="duplicate"):
            knn_entropy(x)


class TestEstimators:
    def test_psd_flat_model_is_zero(self):
        spec = builtin("flat")
        y = spec.canonical_template.with_values([0.2, -0.1])
        draws = sample_posterior(spec, y, size=400, seed=0)
        est = estimate_psd(y, spec, draws, s_outer=40, n_inner=120,
                           rng=substream(0, "psd-flat"))
        assert abs(est.value) < 1e-12

    def test_cmi_estimator_hits_closed_form(self):
        spec = builtin("normal-location")
        est = estimate_cmi(spec, n_y=40, s_outer=50, n_inner=150,
                           s_draws=400, rng=substream(1, "cmi"))
        target = 0.5 * np.log(1.5)
        assert est.std_error > 0
        assert abs(est.value - target) < 4 * est.std_error + 0.02


class TestWeakId:
    def test_analytic_gap_normal_location(self):
        spec = builtin("normal-location", {"n": 3})
        y = spec.canonical_template.with_values([0.1, -0.2, 0.3])
        rep = weak_id_verdict(spec, y, epsilon=0.1)
        # posterior variance shrinks by 1/(n+1): gap = log(n+1)/2
        assert_allclose(rep.gap, 0.5 * np.log(4.0), rtol=1e-12)
        assert not rep.weak
        assert rep.method == "analytic"

    def test_flat_model_is_weak(self):
        spec = builtin("flat")
        y = spec.canonical_template.with_values([1.0, -1.0])
        rep = weak_id_verdict(spec, y, epsilon=0.1)
        assert_allclose(rep.gap, 0.0, atol=1e-12)
        assert rep.weak

    def test_grid_riemann_entropy_path(self):
        spec = builtin("student-t-outlier")
        y = spec.canonical_template.with_values([-10.0, 10.0])
        draws = grid_posterior(spec, y)
        rep = weak_id_verdict(spec, y, draws=draws, seed=0, knn_size=30000)
        assert rep.method == "knn+grid"
        assert np.isfinite(rep.gap)
        assert rep.posterior_entropy.std_error == 0.0

    def test_bad_epsilon(self):
        spec = builtin("flat")
        with pytest.raises(DomainError):
            weak_id_verdict(spec, spec.canonical_template, epsilon=0.0)


class TestMiDecomposition:
    def test_analytic_pair_identity(self):
        dec = mi_decomposition(builtin("location-nuisance"))
        # mi_exp = mi_base + delta_exp + delta_post holds exactly
        assert abs(dec.identity_gap) <= max(1e-9, 3 * dec.identity_se)
        assert dec.delta_post.value <= 1e-12
        assert dec.pair_name == "location-nuisance"
