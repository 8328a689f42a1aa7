"""Model registry, dataset plumbing, and the frozen study datasets."""

import io

import numpy as np
import pytest
from numpy.testing import assert_allclose

from expdiag.models import (DataSet, ExpansionPair, ModelSpec, ParamPoint,
                            REGISTRY, builtin, builtin_pairs,
                            grouped_variance_ratio, point_values,
                            simulate_grouped_data)
from expdiag.rand import substream


class TestRegistry:
    def test_every_name_builds(self):
        for name in REGISTRY:
            made = builtin(name)
            assert isinstance(made, (ModelSpec, ExpansionPair))

    def test_pairs_subset(self):
        for name in builtin_pairs():
            assert isinstance(builtin(name), ExpansionPair)

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            builtin("no-such-model")

    def test_unknown_hyper_rejected(self):
        with pytest.raises(ValueError, match="unknown hyper"):
            builtin("normal-location", {"bogus": 1.0})

    def test_hyper_override(self):
        spec = builtin("normal-location", {"n": 5})
        assert spec.canonical_template.n == 5


class TestModelSpecContracts:
    @pytest.mark.parametrize("name", sorted(REGISTRY))
    def test_prior_and_likelihood_finite(self, name):
        made = builtin(name)
        specs = [made.base, made.expanded] if isinstance(made, ExpansionPair) \
            else [made]
        for spec in specs:
            rng = substream(0, "contract", spec.name)
            theta = spec.sample_prior(rng)
            assert np.isfinite(spec.log_prior(theta))
            y = spec.sample_data(theta, rng)
            assert y.n == spec.canonical_template.n
            assert np.isfinite(spec.log_lik(y, theta))

    def test_loglik_matrix_agrees_with_scalar(self):
        spec = builtin("student-t-outlier")
        rng = substream(1, "matrix")
        thetas = spec.sample_prior(rng, size=4)
        ys = np.stack([spec.sample_data(thetas[i], rng).values
                       for i in range(3)])
        mat = spec.loglik_matrix(ys, None, thetas)
        assert mat.shape == (3, 4)
        for b in range(3):
            for s in range(4):
                y_b = spec.canonical_template.with_values(ys[b])
                assert_allclose(mat[b, s], spec.log_lik(y_b, thetas[s]),
                                atol=1e-10)

    def test_wrong_parameter_length(self):
        spec = builtin("normal-location")
        with pytest.raises(ValueError, match="expected 1 parameters"):
            spec.log_prior(np.zeros(3))


class TestParamPoint:
    def test_shared_extra_split(self):
        p = ParamPoint(np.arange(5.0), d_shared=2, d_extra=3)
        assert_allclose(p.shared, [0.0, 1.0])
        assert_allclose(p.extra, [2.0, 3.0, 4.0])

    def test_point_values_passthrough(self):
        assert_allclose(point_values([1.0, 2.0]), [1.0, 2.0])
        p = ParamPoint(np.array([3.0]), 1)
        assert_allclose(point_values(p), [3.0])


class TestDataSet:
    def test_csv_round_trip_grouped(self):
        y = simulate_grouped_data(M=3, L=4, seed=9)
        buf = io.StringIO()
        y.to_csv(buf)
        buf.seek(0)
        back = DataSet.from_csv(buf, name=y.name)
        assert_allclose(back.values, y.values)
        np.testing.assert_array_equal(back.groups, y.groups)

    def test_csv_skips_comment_lines(self):
        text = "# a comment\ngroup,obs_index,value\n,0,1.5\n,1,2.5\n"
        y = DataSet.from_csv(io.StringIO(text))
        assert y.groups is None
        assert_allclose(y.values, [1.5, 2.5])

    def test_extended_checks_grouping(self):
        y = DataSet(values=np.zeros(3))
        with pytest.raises(ValueError):
            y.extended([1.0], np.array([0]))

    def test_with_values_keeps_groups(self):
        y = simulate_grouped_data(M=2, L=3, seed=0)
        z = y.with_values(np.zeros(6), name="zeros")
        np.testing.assert_array_equal(z.groups, y.groups)
        assert z.name == "zeros"


class TestStudyDatasets:
    """The three measurement-design datasets are frozen by (sigma*, seed)."""

    @pytest.mark.parametrize("sigma_star,seed,ratio", [
        (2.0, 327, 0.4490),
        (1.0, 61, 0.6003),
        (0.5, 280, 0.9497),
    ])
    def test_variance_ratio(self, sigma_star, seed, ratio):
        y = simulate_grouped_data(M=2, L=20, sigma_star=sigma_star, seed=seed)
        assert y.n == 40
        assert y.name == f"grouped-s{sigma_star:g}-seed{seed}"
        assert_allclose(grouped_variance_ratio(y), ratio, atol=5e-5)

    def test_bit_exact_regeneration(self):
        a = simulate_grouped_data(M=2, L=20, sigma_star=1.0, seed=61)
        b = simulate_grouped_data(M=2, L=20, sigma_star=1.0, seed=61)
        np.testing.assert_array_equal(a.values, b.values)


class TestConjugateAgreement:
    """Where a closed-form Gaussian view exists it must price the same
    likelihood the sampler sees."""

    @pytest.mark.parametrize("name", ["flat", "normal-location",
                                      "redundant-location", "prior-scale",
                                      "location-nuisance", "grouped-base"])
    def test_loglik_matches_gaussian_density(self, name):
        made = builtin(name)
        spec = made.expanded if isinstance(made, ExpansionPair) else made
        lg = spec.analytic.lingauss(None)
        rng = substream(2, "conj", name)
        for _ in range(5):
            theta = point_values(spec.sample_prior(rng))
            y = spec.sample_data(spec.point(theta), rng)
            mu = lg.design @ theta
            expect = float(
                -0.5 * np.sum(np.log(2 * np.pi * lg.noise_var)
                              + (y.values - mu) ** 2 / lg.noise_var))
            assert_allclose(spec.log_lik(y, theta), expect, atol=1e-9)
