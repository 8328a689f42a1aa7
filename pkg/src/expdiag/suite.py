"""Regression suite: every closed-form example the package must reproduce.

Each check compares a package estimate against an independently computed
target — a closed form, a quadrature oracle, or a strict inequality with a
Monte Carlo dead-band — and yields one pass/fail line.  The CLI `examples`
command and the acceptance tests both run these, so the table below is the
single source of truth for what "working" means.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import checks as ch
from . import fisher as fb
from .fisher import cmi_trace_term
from .infotheory import estimate_cmi, gaussian_mi_cmi
from .models import REGISTRY, DataSet, builtin, builtin_pairs, point_values
from .rand import substream
from .samplers import grid_posterior

SWEEP_RHO = (0.0, 0.25, 0.5, 0.75, 0.95)

PRESETS = {
    # acceptance-grade budgets; the whole default run stays under five
    # minutes on one core
    "default": {
        "cmi_mc": dict(n_y=150, s_outer=120, n_inner=250, s_draws=500),
        "split_curve": dict(n_y=30, s_outer=50, n_inner=100, s_draws=300),
        "split_curve_last": dict(n_y=60, s_outer=60, n_inner=120,
                                 s_draws=300),
        "ppc_n_inner": 500,
        "fisher": dict(n_prior=120, n_mc=100, n_atoms=400, thm3_n_mc=150,
                       drop_n_prior=2000),
        "tradeoff": dict(sweep_n_prior=30, sweep_n_mc=10, pn_n_prior=100,
                         pn_n_mc=80),
    },
    # fast smoke budgets for interactive use; tolerances are unchanged, so
    # the noisier Monte Carlo lines may legitimately fail here
    "quick": {
        "cmi_mc": dict(n_y=40, s_outer=60, n_inner=120, s_draws=300),
        "split_curve": dict(n_y=12, s_outer=30, n_inner=60, s_draws=200),
        "split_curve_last": dict(n_y=20, s_outer=40, n_inner=80,
                                 s_draws=200),
        "ppc_n_inner": 200,
        "fisher": dict(n_prior=60, n_mc=60, n_atoms=200, thm3_n_mc=60,
                       drop_n_prior=500),
        "tradeoff": dict(sweep_n_prior=12, sweep_n_mc=6, pn_n_prior=50,
                         pn_n_mc=40),
    },
}


@dataclass(frozen=True)
class CheckLine:
    """One pass/fail row of the regression table."""

    group: str
    name: str
    got: float
    target: float
    tol: float
    kind: str  # abs | ge | le | gt
    passed: bool
    note: str = ""

    def to_record(self) -> dict:
        return {"group": self.group, "check": self.name,
                "estimate": self.got, "target": self.target,
                "tolerance": self.tol, "kind": self.kind,
                "status": "pass" if self.passed else "FAIL",
                "note": self.note}


def _line(group: str, name: str, got: float, target: float, tol: float,
          kind: str = "abs", note: str = "") -> CheckLine:
    got, target, tol = float(got), float(target), float(tol)
    if kind == "abs":
        passed = abs(got - target) <= tol
    elif kind == "ge":
        passed = got >= target - tol
    elif kind == "le":
        passed = got <= target + tol
    elif kind == "gt":
        passed = got > target + tol
    else:
        raise ValueError(f"unknown check kind {kind!r}")
    return CheckLine(group, name, got, target, tol, kind, passed, note)


# ── group: cmi (closed-form regressions) ─────────────────────────────────────

def _check_cmi(budget: dict, seed: int) -> list:
    lines = []
    half_log_32 = 0.5 * np.log(1.5)
    for name in ("normal-location", "redundant-location"):
        got = gaussian_mi_cmi(builtin(name))["cmi"].value
        lines.append(_line("cmi", f"{name} cmi = log(3/2)/2", got,
                           half_log_32, 1e-12))
    for n in (1, 5, 30):
        got_b = gaussian_mi_cmi(builtin("split-means", {"n": n}))["cmi"].value
        got_e = gaussian_mi_cmi(
            builtin("split-means", {"n": n, "variant": "expanded"}))["cmi"].value
        lines.append(_line("cmi", f"split-means base cmi (n={n})", got_b,
                           0.5 * np.log((4 * n + 1) / (2 * n + 1)), 1e-12))
        lines.append(_line("cmi", f"split-means expanded cmi (n={n})", got_e,
                           np.log((2 * n + 1) / (n + 1)), 1e-12))
    scale_cmis = {}
    for sp in (1e-3, 1.0, 1e3):
        got = gaussian_mi_cmi(builtin("prior-scale", {"sigma_p": sp}))["cmi"].value
        scale_cmis[sp] = got
        lines.append(_line("cmi", f"prior-scale cmi (sigma_p={sp:g})", got,
                           0.5 * np.log((2 * sp ** 2 + 1) / (sp ** 2 + 1)),
                           1e-12))
    lines.append(_line("cmi", "prior-scale cmi -> 0 as scale -> 0",
                       scale_cmis[1e-3], 0.0, 1e-5))
    lines.append(_line("cmi", "prior-scale cmi -> log(2)/2 as scale -> inf",
                       scale_cmis[1e3], 0.5 * np.log(2.0), 1e-5))
    for s2l in (0.0, 3.0, 1e3):
        pair = builtin("location-nuisance", {"s2_lambda": s2l})
        got = gaussian_mi_cmi(pair)
        s = 1.0 + s2l  # sigma_theta^2 + sigma_lambda^2 at sigma_theta^2 = 1
        lines.append(_line("cmi", f"location-nuisance mi (s2_lambda={s2l:g})",
                           got["mi"].value,
                           0.5 * np.log(1.0 + 1.0 / (1.0 + s2l)), 1e-12))
        lines.append(_line("cmi", f"location-nuisance cmi (s2_lambda={s2l:g})",
                           got["cmi"].value,
                           0.5 * np.log((1 + 2 * s) / (1 + s)), 1e-12))
    return lines


# ── group: cmi-mc (nested Monte Carlo estimator) ─────────────────────────────

def _check_cmi_mc(budget: dict, seed: int) -> list:
    b = budget["cmi_mc"]
    est = estimate_cmi(builtin("normal-location"), rng=substream(seed, "cmi-mc"),
                       **b)
    target = 0.5 * np.log(1.5)
    return [
        _line("cmi-mc", "nested-mc cmi vs closed form (3 s.e.)", est.value,
              target, 3 * est.std_error,
              note=f"se {est.std_error:.2e}"),
        _line("cmi-mc", "3 s.e. within +-0.01 budget", 3 * est.std_error,
              0.01, 0.0, kind="le"),
    ]


# ── group: split-curve (falsifiability gain across sample size) ─────────────

def _check_split_curve(budget: dict, seed: int) -> list:
    lines = []
    last_ratio = None
    for n in (1, 2, 5, 10, 30):
        b = budget["split_curve_last"] if n == 30 else budget["split_curve"]
        est_b = estimate_cmi(builtin("split-means", {"n": n}),
                             rng=substream(seed, "curve-base", n), **b)
        est_e = estimate_cmi(builtin("split-means",
                                     {"n": n, "variant": "expanded"}),
                             rng=substream(seed, "curve-exp", n), **b)
        change = (est_e.value - est_b.value) / est_b.value
        lines.append(_line("split-curve", f"percent change > 0 (n={n})",
                           change, 0.0, 0.0, kind="gt",
                           note=f"base {est_b.value:.4f} "
                                f"exp {est_e.value:.4f}"))
        last_ratio = change
    lines.append(_line("split-curve", "percent change -> 1 (n=30)",
                       last_ratio, 1.0, 0.1))
    return lines


# ── group: ppc (heavy-tail two-statistic check) ──────────────────────────────

def _t_outlier_oracle(model, y: DataSet) -> tuple:
    """Marginal ppp-v for both statistics by direct quadrature.

    Posterior weights and replicate tail probabilities both come straight
    from scipy's t distribution on a fine grid, independent of the
    package's samplers and predictive machinery.
    """
    df = float(model.hyper["df"])
    lo, hi = float(model.hyper["lo"]), float(model.hyper["hi"])
    grid = np.linspace(lo, hi, 20001)
    logw = (stats.t.logpdf(y.values[0] - grid, df)
            + stats.t.logpdf(y.values[1] - grid, df))
    w = np.exp(logw - logw.max())
    w /= w.sum()
    t1_tail = stats.t.cdf(y.values[0] - grid, df)  # P(-y1_rep >= -y1 | theta)
    t2_tail = stats.t.sf(y.values[1] - grid, df)   # P(y2_rep >= y2 | theta)
    return float(w @ t1_tail), float(w @ t2_tail)


def _check_ppc(budget: dict, seed: int) -> list:
    model = builtin("student-t-outlier")
    y = model.canonical_template.with_values([-10.0, 10.0], name="t-outlier")
    draws = grid_posterior(model, y)
    n_inner = budget["ppc_n_inner"]
    r1 = ch.conditional_pppv(model, y, draws, ch.stat_negated_first(),
                             n_inner=n_inner, rng=substream(seed, "ppc-t1"))
    r2 = ch.conditional_pppv(model, y, draws, ch.stat_coordinate(1),
                             n_inner=n_inner, rng=substream(seed, "ppc-t2"))
    o1, o2 = _t_outlier_oracle(model, y)
    flagged = (r1.conditional_p < 0.01) | (r2.conditional_p < 0.01)
    union_mass = float(r1.weights @ flagged)
    lines = [
        _line("ppc", "T1 marginal ppp-v ~ 0.165", r1.marginal_p, 0.165, 0.02),
        _line("ppc", "T2 marginal ppp-v ~ 0.165", r2.marginal_p, 0.165, 0.02),
        _line("ppc", "T1 marginal vs quadrature oracle", r1.marginal_p, o1,
              0.01, note=f"oracle {o1:.4f}"),
        _line("ppc", "T2 marginal vs quadrature oracle", r2.marginal_p, o2,
              0.01, note=f"oracle {o2:.4f}"),
        _line("ppc", "mass with conditional p < 0.01 (either stat)",
              union_mass, 0.6, 0.0, kind="ge"),
    ]
    return lines


# ── group: fisher (trace inequalities) ───────────────────────────────────────

def _trace_with_se(est_and_samples) -> tuple:
    est, samples = est_and_samples
    traces = np.array([np.trace(s) for s in samples])
    return float(np.trace(est.matrix)), float(
        np.std(traces, ddof=1) / np.sqrt(traces.size))


def _check_fisher(budget: dict, seed: int) -> list:
    b = budget["fisher"]
    lines = []

    pair = builtin("poisson-negbin")
    tr_b, se_b = _trace_with_se(fb.prior_expected_fisher(
        pair.base, block="full", n_prior=b["n_prior"], n_mc=b["n_mc"],
        rng=substream(seed, "pn-base"), return_samples=True))
    tr_m, se_m = _trace_with_se(fb.prior_expected_fisher(
        pair.expanded, block="shared", n_prior=b["n_prior"], n_mc=b["n_mc"],
        n_atoms=b["n_atoms"], rng=substream(seed, "pn-marg"),
        return_samples=True))
    lines.append(_line("fisher", "poisson-negbin shared trace falls",
                       tr_b - tr_m, 0.0, 3 * float(np.hypot(se_b, se_m)),
                       kind="gt",
                       note=f"base {tr_b:.3f} marginal {tr_m:.3f}"))

    lr = builtin("linreg-addpred")
    x, z = lr.design_x, lr.design_z
    n = x.shape[0]
    s2tau = float(lr.expanded.hyper["s2_tau"])
    cov_xz = (x * z[:, None]).mean(axis=0)
    correction = (n ** 2 * np.exp(s2tau / 2.0)
                  * float(((cov_xz / (z * z).mean()) ** 2).sum()))
    rng = substream(seed, "lr-drop")
    f_base = lr.base.analytic.fisher
    f_marg = lr.expanded.analytic.fisher_shared_marginal
    drops = np.array([
        np.trace(f_base(v)) - np.trace(f_marg(v))
        for v in (point_values(lr.base.sample_prior(rng))
                  for _ in range(b["drop_n_prior"]))])
    lines.append(_line("fisher", "linreg trace drop >= correlation penalty",
                       float(drops.mean()), correction,
                       3 * float(drops.std(ddof=1) / np.sqrt(drops.size)),
                       kind="ge", note=f"penalty {correction:.4f}"))

    for name in builtin_pairs():
        rep = fb.trace_bound_delta(builtin(name), n_mc=b["thm3_n_mc"],
                                   seed=seed)
        lines.append(_line("fisher", f"marginal-trace bound holds ({name})",
                           rep.lhs, rep.rhs,
                           3 * float(np.hypot(rep.lhs_se, rep.rhs_se)),
                           kind="le",
                           note=f"lhs {rep.lhs:.3f} rhs {rep.rhs:.3f}"))
    return lines


# ── group: bounds (MI sandwiches, trace identity, BvM) ───────────────────────

def _conjugate_specs() -> list:
    """(label, ModelSpec) for every builtin with linear-Gaussian structure."""
    out = []
    for name in sorted(REGISTRY):
        made = builtin(name)
        spec = made.expanded if hasattr(made, "expanded") else made
        if spec.analytic is not None and spec.analytic.lingauss is not None:
            out.append((name, spec))
    out.append(("split-means/expanded",
                builtin("split-means", {"variant": "expanded"})))
    return out


def _check_bounds(budget: dict, seed: int) -> list:
    lines = []
    for label, spec in _conjugate_specs():
        lg = spec.analytic.lingauss(None)
        mi = lg.mi(None)
        b_full = fb.mi_upper_bound(spec, variant="full",
                                   rng=substream(seed, "bd-f", label)).value
        b_weak = fb.mi_upper_bound(spec, variant="weak",
                                   rng=substream(seed, "bd-w", label)).value
        lines.append(_line("bounds", f"analytic mi <= bound ({label})",
                           mi, b_full, 1e-9, kind="le"))
        lines.append(_line("bounds", f"bound <= weak bound ({label})",
                           b_full, b_weak, 1e-9, kind="le"))

    for label, spec in _conjugate_specs():
        cov = spec.analytic.prior_cov
        if not np.allclose(cov, np.eye(cov.shape[0])):
            continue
        lg = spec.analytic.lingauss(None)
        fisher = lg.fisher()
        iota = np.linalg.eigvalsh(fisher)
        post_cov = lg.posterior(np.zeros(lg.n))[1]
        lines.append(_line(
            "bounds", f"trace identity sum i/(1+i) ({label})",
            fb.cmi_lower_bound_analytic(iota, R=1),
            float(np.trace(post_cov @ fisher)), 1e-6))

    for label, spec, d in [
            ("normal-location", builtin("normal-location", {"n": 1000}), 1),
            ("split-means/expanded",
             builtin("split-means", {"n": 1000, "variant": "expanded"}), 2)]:
        ct = cmi_trace_term(spec, n_y=20, n_mc=20,
                            rng=substream(seed, "bvm", label))
        lines.append(_line("bounds", f"large-n trace term ~ d ({label})",
                           ct.value, float(d), 0.1 * d,
                           note=f"n=1000, d={d}"))
    return lines


# ── group: tradeoff (four-cell ordering and dilution) ────────────────────────

def _ranks(values) -> np.ndarray:
    order = np.argsort(np.asarray(values))
    ranks = np.empty_like(order)
    ranks[order] = np.arange(order.size)
    return ranks


def _check_tradeoff(budget: dict, seed: int) -> list:
    b = budget["tradeoff"]
    mi_seq, term_seq = [], []
    for i, rho in enumerate(SWEEP_RHO):
        pair = builtin("simple-reg-2obs", {"rho": rho})
        rep = fb.tradeoff_report(pair, n_prior=b["sweep_n_prior"],
                                 n_mc=b["sweep_n_mc"], seed=seed)
        ct = cmi_trace_term(pair.expanded, n_y=8, block="shared-given-extra",
                            rng=substream(seed, "sweep", i))
        mi_seq.append(rep.mi_bound_exp)
        term_seq.append(ct.value)
    rank_corr = float(np.corrcoef(_ranks(mi_seq), _ranks(term_seq))[0, 1])
    lines = [
        _line("tradeoff", "correlation sweep rank(mi) vs rank(cmi) = -1",
              rank_corr, -1.0, 1e-12,
              note=f"mi {np.round(mi_seq, 3).tolist()}"),
    ]

    rep = fb.tradeoff_report(builtin("poisson-negbin"),
                             n_prior=b["pn_n_prior"], n_mc=b["pn_n_mc"],
                             seed=seed)
    lines.append(_line("tradeoff", "poisson-negbin totally diluting",
                       float(rep.classification == "totally-diluting"), 1.0,
                       0.0, note=rep.classification))
    lines.append(_line("tradeoff", "diluting mi bound contracts",
                       rep.mi_bound_exp, rep.mi_bound_base, 1e-9, kind="le"))
    lines.append(_line("tradeoff", "falsifiability gain delta_f >= 0",
                       rep.delta_f, 0.0, 0.0, kind="ge"))
    return lines


# ── driver ───────────────────────────────────────────────────────────────────

GROUPS: dict[str, Callable] = {
    "cmi": _check_cmi,
    "cmi-mc": _check_cmi_mc,
    "split-curve": _check_split_curve,
    "ppc": _check_ppc,
    "fisher": _check_fisher,
    "bounds": _check_bounds,
    "tradeoff": _check_tradeoff,
}


def run_examples(groups=None, preset: str = "default", seed: int = 0,
                 budget: Optional[dict] = None) -> list:
    """Run the regression table; returns CheckLines in table order."""
    if budget is None:
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; "
                             f"available: {sorted(PRESETS)}")
        budget = PRESETS[preset]
    if groups is None:
        groups = list(GROUPS)
    unknown = [g for g in groups if g not in GROUPS]
    if unknown:
        raise ValueError(f"unknown groups {unknown}; available: {list(GROUPS)}")
    lines = []
    for group in groups:
        lines.extend(GROUPS[group](budget, seed))
    return lines


def format_table(lines) -> str:
    """Fixed-width pass/fail table."""
    header = f"{'status':6}  {'group':11}  {'check':48}  " \
             f"{'estimate':>12}  {'target':>12}  {'tol':>9}"
    rows = [header, "-" * len(header)]
    for ln in lines:
        rows.append(f"{'pass' if ln.passed else 'FAIL':6}  {ln.group:11}  "
                    f"{ln.name:48}  {ln.got:12.6g}  {ln.target:12.6g}  "
                    f"{ln.tol:9.3g}")
    n_fail = sum(not ln.passed for ln in lines)
    rows.append("-" * len(header))
    rows.append(f"{len(lines) - n_fail}/{len(lines)} checks passed")
    return "\n".join(rows)