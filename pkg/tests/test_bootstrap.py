"""Augmentation-scheme comparison machinery at toy scale."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from expdiag.bootstrap import (SchemeResult, boot_new_subpops,
                               boot_same_subpops, compare_schemes,
                               reference_fit, scheme_costs)
from expdiag.errors import DomainError
from expdiag.models import DataSet, make_grouped_expanded, simulate_grouped_data


def _tiny_setup():
    y = simulate_grouped_data(M=2, L=5, sigma_star=1.0, seed=3)
    model = make_grouped_expanded({"L": 5, "M": 2})
    return y, model


class TestSchemeCosts:
    def test_equal_cost_at_defaults(self):
        costs = scheme_costs(L=20, M=2, M_new=8, L_new=20)
        assert costs["same-subpops"] == costs["new-subpops"] == 160

    def test_factor_scales_new_groups(self):
        costs = scheme_costs(L=10, M=3, M_new=2, L_new=4, factor=2)
        assert costs == {"same-subpops": 20, "new-subpops": 24}


class TestValidation:
    def test_needs_grouped_data(self):
        y = DataSet(values=np.zeros(6))
        model = make_grouped_expanded({"L": 3, "M": 2})
        with pytest.raises(DomainError, match="grouped"):
            boot_same_subpops(y, model, R=2, S=150, warmup=150,
                              ref_size=300, ref_warmup=150)

    def test_rejects_unbalanced_groups(self):
        y = DataSet(values=np.zeros(5), groups=np.array([0, 0, 1, 1, 1]))
        model = make_grouped_expanded({"L": 2, "M": 2})
        with pytest.raises(DomainError, match="balanced"):
            boot_new_subpops(y, model, R=2, S=150, warmup=150,
                             ref_size=300, ref_warmup=150)

    def test_model_layout_must_match(self):
        y, _ = _tiny_setup()
        wrong = make_grouped_expanded({"L": 7, "M": 2})
        with pytest.raises(DomainError, match="groups"):
            boot_same_subpops(y, wrong, R=2, S=150, warmup=150,
                              ref_size=300, ref_warmup=150)


class TestCompareSchemes:
    def test_four_cells_and_rows(self):
        y, model = _tiny_setup()
        comp = compare_schemes(y, model, R=4, S=150, M_new=4, L_new=4,
                               seed=0, warmup=150, ref_size=400,
                               ref_warmup=200)
        for scheme in ("same-subpops", "new-subpops"):
            for source in ("posterior", "prior"):
                cell = comp.cell(scheme, source)
                assert isinstance(cell, SchemeResult)
                assert np.all(np.isfinite(cell.rho))
                assert np.all(cell.rho > 0)
        row = comp.table_row()
        assert row["dataset"] == y.name
        assert comp.sigma_obs > 0
        hist = comp.histogram_rows(bins=10)
        assert {r["scheme"] for r in hist} == {
            f"{sc}:{so}" for sc in ("same-subpops", "new-subpops")
            for so in ("posterior", "prior")}
        assert all(r["count"] >= 0 for r in hist)

    def test_reference_reuse_is_deterministic(self):
        y, model = _tiny_setup()
        ref = reference_fit(model, y, seed=1, size=400, warmup=200)
        a = boot_same_subpops(y, model, R=3, S=150, seed=2, reference=ref,
                              warmup=150)
        b = boot_same_subpops(y, model, R=3, S=150, seed=2, reference=ref,
                              warmup=150)
        assert_allclose(a.rho, b.rho)
        assert a.rho_bar == pytest.approx(b.rho_bar)
