"""Regression-table plumbing: group selection, budgets, formatting."""

import pytest

from expdiag.suite import (
    GROUPS,
    PRESETS,
    CheckLine,
    format_table,
    run_examples,
)


@pytest.fixture(scope="module")
def quick_curve():
    return run_examples(["split-curve"], preset="quick", seed=7)


class TestRunExamples:
    def test_group_names(self):
        assert list(GROUPS) == ["cmi", "cmi-mc", "split-curve", "ppc",
                                "fisher", "bounds", "tradeoff"]

    def test_analytic_groups_all_pass(self):
        lines = run_examples(["cmi", "bounds"])
        assert lines
        failures = [ln.name for ln in lines if not ln.passed]
        assert failures == []

    def test_lines_tagged_with_their_group(self):
        lines = run_examples(["cmi"])
        assert {ln.group for ln in lines} == {"cmi"}

    def test_unknown_group_rejected(self):
        with pytest.raises(ValueError, match="unknown groups"):
            run_examples(["cmi", "nope"])

    def test_unknown_preset_rejected(self):
        with pytest.raises(ValueError, match="unknown preset"):
            run_examples(["cmi"], preset="leisurely")

    def test_same_seed_reproduces_monte_carlo_lines(self, quick_curve):
        again = run_examples(["split-curve"], preset="quick", seed=7)
        assert [ln.got for ln in again] == [ln.got for ln in quick_curve]

    def test_explicit_budget_bypasses_preset_lookup(self, quick_curve):
        # a budget dict is accepted verbatim, so a copied preset must
        # reproduce the preset run exactly
        lines = run_examples(["split-curve"], seed=7,
                             budget=dict(PRESETS["quick"]))
        assert [ln.got for ln in lines] == [ln.got for ln in quick_curve]

    def test_seed_moves_monte_carlo_estimates(self, quick_curve):
        other = run_examples(["split-curve"], preset="quick", seed=8)
        assert any(a.got != b.got for a, b in zip(quick_curve, other))


class TestFormatTable:
    def _lines(self):
        ok = CheckLine("g", "alpha", 1.0, 1.0, 0.1, "abs", True)
        bad = CheckLine("g", "beta", 2.0, 1.0, 0.1, "abs", False, note="x")
        return [ok, bad]

    def test_footer_counts_passes(self):
        assert "1/2 checks passed" in format_table(self._lines())

    def test_status_column_shows_both_verdicts(self):
        text = format_table(self._lines())
        assert "pass" in text and "FAIL" in text

    def test_to_record_fields(self):
        ok, bad = self._lines()
        assert ok.to_record()["status"] == "pass"
        assert bad.to_record()["status"] == "FAIL"
        assert bad.to_record()["note"] == "x"
        assert set(ok.to_record()) == {"group", "check", "estimate", "target",
                                       "tolerance", "kind", "status", "note"}
