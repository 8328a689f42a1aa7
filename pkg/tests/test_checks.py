"""Conditional predictive checks: tails, weighting, and failure modes."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from expdiag.checks import (CheckResult, check_scatter, conditional_pppv,
                            marginal_pppv, stat_constant, stat_coordinate,
                            stat_group_mean_sd, stat_negated_first,
                            stat_sample_mean, stat_window_sd, _tail_p)
from expdiag.errors import DomainError
from expdiag.models import builtin, simulate_grouped_data
from expdiag.rand import substream
from expdiag.samplers import grid_posterior, sample_posterior


class TestTailConventions:
    def test_right_counts_ties(self):
        t_rep = np.array([1.0, 2.0, 3.0, 4.0])
        assert _tail_p(t_rep, 3.0, "right") == 0.5
        assert _tail_p(t_rep, 5.0, "right") == 0.0

    def test_left(self):
        t_rep = np.array([1.0, 2.0, 3.0, 4.0])
        assert _tail_p(t_rep, 2.0, "left") == 0.5

    def test_two_sided_capped(self):
        t_rep = np.array([1.0, 2.0, 3.0, 4.0])
        assert _tail_p(t_rep, 2.5, "two") == 1.0

    def test_bad_tail_name(self):
        with pytest.raises(DomainError):
            stat_sample_mean("upper")


class TestStatistics:
    def test_window_sd_needs_two(self):
        with pytest.raises(DomainError):
            stat_window_sd(1)

    def test_group_sd_needs_groups(self):
        spec = builtin("normal-location", {"n": 3})
        y = spec.canonical_template.with_values([1.0, 2.0, 3.0])
        with pytest.raises(DomainError):
            stat_group_mean_sd()(y)

    def test_coordinate_and_negation(self):
        y = builtin("student-t-outlier").canonical_template.with_values(
            [-10.0, 10.0])
        assert stat_coordinate(1)(y) == 10.0
        assert stat_negated_first()(y) == 10.0


class TestConditionalPPPV:
    def test_constant_statistic_is_flat_at_one(self):
        spec = builtin("normal-location")
        y = spec.canonical_template.with_values([0.3])
        draws = sample_posterior(spec, y, size=300, seed=0)
        res = conditional_pppv(spec, y, draws, stat_constant(),
                               n_inner=120, rng=substream(0, "const"))
        np.testing.assert_array_equal(res.conditional_p, 1.0)
        assert_allclose(res.marginal_p, 1.0, atol=1e-12)

    def test_marginal_is_weighted_average(self):
        spec = builtin("student-t-outlier")
        y = spec.canonical_template.with_values([-10.0, 10.0])
        draws = grid_posterior(spec, y)
        res = conditional_pppv(spec, y, draws, stat_coordinate(1),
                               n_inner=150, rng=substream(1, "avg"))
        assert_allclose(res.marginal_p,
                        float(res.weights @ res.conditional_p), atol=1e-12)
        assert 0.0 <= res.mass_below(0.01) <= 1.0

    def test_reproducible_given_rng(self):
        spec = builtin("normal-location")
        y = spec.canonical_template.with_values([1.0])
        draws = sample_posterior(spec, y, size=150, seed=3)
        a = conditional_pppv(spec, y, draws, stat_sample_mean(),
                             n_inner=100, rng=substream(9, "rep"))
        b = conditional_pppv(spec, y, draws, stat_sample_mean(),
                             n_inner=100, rng=substream(9, "rep"))
        np.testing.assert_array_equal(a.conditional_p, b.conditional_p)

    def test_small_n_inner_rejected(self):
        spec = builtin("normal-location")
        y = spec.canonical_template.with_values([0.0])
        draws = sample_posterior(spec, y, size=150, seed=0)
        with pytest.raises(DomainError, match="n_inner"):
            conditional_pppv(spec, y, draws, stat_sample_mean(), n_inner=10)

    def test_typical_data_gives_moderate_p(self):
        spec = builtin("normal-location", {"n": 8})
        rng = substream(5, "typical")
        theta = spec.sample_prior(rng)
        y = spec.sample_data(theta, rng)
        draws = sample_posterior(spec, y, size=400, seed=1)
        p = marginal_pppv(spec, y, draws, stat_sample_mean(),
                          n_inner=200, rng=substream(5, "p"))
        assert 0.05 < p < 0.95


class TestCheckScatter:
    def test_alignment_and_projection(self):
        spec = builtin("student-t-outlier")
        y = spec.canonical_template.with_values([-10.0, 10.0])
        draws = grid_posterior(spec, y, resolution=101)
        res = conditional_pppv(spec, y, draws, stat_coordinate(1),
                               n_inner=100, rng=substream(2, "scat"))
        table = check_scatter(res, draws, 0)
        assert table.shape == (101, 2)
        assert_allclose(table[:, 0], draws.draws[:, 0])

    def test_callable_projection(self):
        spec = builtin("normal-location")
        y = spec.canonical_template.with_values([0.0])
        draws = sample_posterior(spec, y, size=120, seed=0)
        res = conditional_pppv(spec, y, draws, stat_sample_mean(),
                               n_inner=100, rng=substream(3, "call"))
        table = check_scatter(res, draws, lambda v: v[0] ** 2)
        assert np.all(table[:, 0] >= 0)

    def test_projection_out_of_range(self):
        spec = builtin("normal-location")
        y = spec.canonical_template.with_values([0.0])
        draws = sample_posterior(spec, y, size=120, seed=0)
        res = conditional_pppv(spec, y, draws, stat_sample_mean(),
                               n_inner=100, rng=substream(4, "rng"))
        with pytest.raises(DomainError, match="out of range"):
            check_scatter(res, draws, 3)


class TestCheckResultValidation:
    def test_weight_length_mismatch(self):
        with pytest.raises(DomainError):
            CheckResult(stat_name="s", tail="right", t_obs=0.0,
                        marginal_p=0.5, conditional_p=np.array([0.5, 0.5]),
                        weights=np.array([1.0]), n_inner=100, draws_ref={})
