"""Command-line front end.

Five subcommands: `examples` (the regression gate), `diagnose` (single-model
identifiability/falsifiability quantities), `expand-compare` (four-cell
tradeoff report for an expansion pair), `ppc` (conditional predictive checks
with scatter figures), and `bootstrap` (augmentation-scheme comparison).

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 the computation
hit a numerical or capability limit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from . import checks as ch
from . import fisher as fb
from . import report as rp
from . import suite
from .errors import CapabilityError, DomainError, NumericalError
from .infotheory import (_posterior_for, estimate_cmi, estimate_psd,
                         gaussian_mi_cmi, weak_id_verdict)
from .models import (DataSet, ExpansionPair, REGISTRY, builtin,
                     simulate_grouped_data)
from .rand import substream
from .samplers import grid_posterior

FORMATS = ("json", "csv", "svg", "txt")

# the three study datasets: (sigma_star, seed) chosen so the grouped
# variance ratio lands near 0.45 / 0.60 / 0.95
STUDY_DATASETS = ((2.0, 327), (1.0, 61), (0.5, 280))

DIAGNOSE_BUDGETS = {
    "default": dict(n_prior=120, n_mc=100, s_draws=1500,
                    n_y=40, s_outer=60, n_inner=150),
    "quick": dict(n_prior=40, n_mc=40, s_draws=600,
                  n_y=10, s_outer=30, n_inner=60),
}
PPC_BUDGETS = {
    "default": dict(s_draws=2000, n_inner=500),
    "quick": dict(s_draws=600, n_inner=150),
}
BOOT_BUDGETS = {
    "default": dict(R=100, S=1000, warmup=500, ref_size=8000,
                    ref_warmup=1000),
    "quick": dict(R=30, S=400, warmup=300, ref_size=4000, ref_warmup=800),
}


# ── argument plumbing ────────────────────────────────────────────────────────

def _parse_hp(text: str) -> dict:
    """`k=v,k2=v2` with ints/floats coerced, anything else kept as string."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise DomainError(f"bad hyperparameter setting {item!r}; "
                              "expected key=value")
        for cast in (int, float):
            try:
                out[key] = cast(raw)
                break
            except ValueError:
                continue
        else:
            out[key] = raw
    return out


def _parse_formats(text: str) -> tuple:
    fmts = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise DomainError(f"unknown output formats {bad}; "
                          f"choose from {FORMATS}")
    return fmts


def _parse_stat(text: str) -> ch.TestStatistic:
    name, _, tail = text.partition(":")
    tail = tail or "right"
    if name == "mean":
        return ch.stat_sample_mean(tail)
    if name == "const":
        return ch.stat_constant(tail=tail)
    if name == "neg-first":
        return ch.stat_negated_first(tail)
    if name == "group-sd":
        return ch.stat_group_mean_sd(tail)
    if name.startswith("coord-"):
        return ch.stat_coordinate(int(name[len("coord-"):]), tail)
    if name.startswith("sd-last-"):
        return ch.stat_window_sd(int(name[len("sd-last-"):]), tail)
    raise DomainError(
        f"unknown statistic {name!r}; expected mean, const, neg-first, "
        "group-sd, coord-K, or sd-last-K, optionally with :left/:right/:two")


def _make(name: str, hp: dict):
    if name not in REGISTRY:
        raise DomainError(f"unknown model {name!r}; "
                          f"available: {sorted(REGISTRY)}")
    return builtin(name, hp or None)


def _spec_of(made):
    return made.expanded if isinstance(made, ExpansionPair) else made


def _load_data(args, model) -> DataSet:
    if args.data is not None:
        with open(args.data) as fh:
            return DataSet.from_csv(fh, name=Path(args.data).stem)
    # showcase defaults: the two-observation outlier pair for the heavy-tail
    # model, a simulated panel for grouped models, a prior-predictive draw
    # otherwise
    if model.name == "student-t-outlier":
        return model.canonical_template.with_values([-10.0, 10.0],
                                                    name="t-outlier")
    if model.name.startswith("grouped"):
        return simulate_grouped_data(M=int(model.hyper["M"]),
                                     L=int(model.hyper["L"]),
                                     sigma_star=1.0, seed=args.seed)
    rng = substream(args.seed, "showcase-data", model.name)
    theta = model.sample_prior(rng)
    return model.sample_data(theta, rng)


def _config_of(args) -> dict:
    """Everything that affects the computation; where it lands does not."""
    return {k: v for k, v in vars(args).items()
            if k not in ("func", "out", "format")}


def _outdir(args, config: dict) -> Path:
    base = Path(args.out)
    path = base / f"{args.command}-{rp.config_hash(config)}"
    path.mkdir(parents=True, exist_ok=True)
    return path


# ── commands ─────────────────────────────────────────────────────────────────

def cmd_examples(args) -> int:
    groups = None
    if args.only:
        groups = [g.strip() for g in args.only.split(",") if g.strip()]
        bad = [g for g in groups if g not in suite.GROUPS]
        if bad:
            raise DomainError(f"unknown example groups {bad}; "
                              f"available: {list(suite.GROUPS)}")
    lines = suite.run_examples(groups=groups, preset=args.budget,
                               seed=args.seed)
    table = suite.format_table(lines)
    print(table)
    config = _config_of(args)
    out = _outdir(args, config)
    fmts = _parse_formats(args.format)
    records = [ln.to_record() for ln in lines]
    if "json" in fmts:
        rp.write_json(out / "examples.json",
                      {"checks": records,
                       "n_pass": sum(ln.passed for ln in lines),
                       "n_fail": sum(not ln.passed for ln in lines)},
                      config)
    if "csv" in fmts:
        rp.write_csv(out / "examples.csv", records, config)
    if "txt" in fmts:
        (out / "examples.txt").write_text(table + "\n")
    return 0 if all(ln.passed for ln in lines) else 1


def _count_modes(weights: np.ndarray) -> int:
    """Local maxima of a grid weight profile carrying >= 5% of the peak."""
    w = np.asarray(weights, dtype=float)
    peaks = (w[1:-1] > w[:-2]) & (w[1:-1] >= w[2:]) & (w[1:-1] >= 0.05 * w.max())
    return int(peaks.sum())


def cmd_diagnose(args) -> int:
    hp = _parse_hp(args.hp)
    model = _spec_of(_make(args.model, hp))
    y = _load_data(args, model)
    b = DIAGNOSE_BUDGETS[args.budget]
    seed = args.seed
    records = []
    flags = {}

    conjugate = (model.analytic is not None
                 and model.analytic.lingauss is not None)
    if conjugate:
        exact = gaussian_mi_cmi(model, template=y)
        records.append(exact["mi"].to_record("mi"))
        records.append(exact["cmi"].to_record("cmi"))
    else:
        est = estimate_cmi(model, n_y=b["n_y"], s_outer=b["s_outer"],
                           n_inner=b["n_inner"], s_draws=b["s_draws"],
                           rng=substream(seed, "diag-cmi"), template=y)
        records.append(est.to_record("cmi"))

    draws = _posterior_for(model, y, b["s_draws"], seed, "auto")
    psd = estimate_psd(y, model, draws, s_outer=b["s_outer"],
                       n_inner=b["n_inner"], rng=substream(seed, "diag-psd"))
    records.append(psd.to_record("psd"))

    for variant in ("full", "weak"):
        try:
            bound = fb.mi_upper_bound(model, variant=variant,
                                      n_prior=b["n_prior"], n_mc=b["n_mc"],
                                      rng=substream(seed, "diag-b", variant))
            records.append(bound.to_record(f"mi-bound-{variant}"))
        except CapabilityError as err:
            flags[f"mi_bound_{variant}"] = f"unavailable: {err}"

    trace = fb.cmi_trace_term(model, n_y=b["n_y"], n_mc=b["n_mc"],
                              rng=substream(seed, "diag-tr"), seed=seed)
    records.append(trace.to_record("cmi-trace-term"))

    try:
        weak = weak_id_verdict(model, y, draws=draws, seed=seed)
        records.append(weak.to_record())
        flags["weakly_identified"] = bool(weak.weak)
    except NumericalError as err:
        flags["weak_id"] = f"unavailable: {err}"

    est_info, samples = fb.prior_expected_fisher(
        model, block="full", n_prior=b["n_prior"], n_mc=b["n_mc"],
        rng=substream(seed, "diag-fi"), return_samples=True)
    spectrum = est_info.spectrum()

    if model.d_total <= 2:
        grid = grid_posterior(model, y)
        flags["n_posterior_modes"] = _count_modes(grid.weights)
        flags["multimodal"] = bool(_count_modes(grid.weights) >= 2)

    config = _config_of(args)
    out = _outdir(args, config)
    fmts = _parse_formats(args.format)
    payload = {"model": model.name, "dataset": y.name,
               "quantities": records, "flags": flags,
               "fisher_spectrum": spectrum.tolist()}
    if "json" in fmts:
        rp.write_json(out / "diagnostics.json", payload, config)
    if "csv" in fmts:
        rp.write_csv(out / "diagnostics.csv",
                     [{**r, "config": ""} for r in records], config,
                     fieldnames=["quantity", "value", "se", "method",
                                 "config"])
    if "svg" in fmts:
        fig = rp.fig_spectra({"prior-expected": spectrum},
                             f"{model.name}: information spectrum")
        rp.save_svg(fig, out / "spectrum.svg", config)
    for rec in records:
        print(f"{rec['quantity']:>18}: {rec['value']:.6g} "
              f"(se {rec['se']:.2g}, {rec['method']})")
    for key, val in flags.items():
        print(f"{key:>18}: {val}")
    print(f"artifacts in {out}")
    return 0


def cmd_expand_compare(args) -> int:
    hp = _parse_hp(args.hp)
    made = _make(args.pair, hp)
    if not isinstance(made, ExpansionPair):
        raise DomainError(f"{args.pair!r} is a single model; "
                          "expand-compare needs an expansion pair")
    b = DIAGNOSE_BUDGETS[args.budget]
    rep = fb.tradeoff_report(made, n_prior=b["n_prior"], n_mc=b["n_mc"],
                             seed=args.seed)
    print(rep.to_text())

    config = _config_of(args)
    out = _outdir(args, config)
    fmts = _parse_formats(args.format)
    if "json" in fmts:
        import json as _json
        rp.write_json(out / "tradeoff.json", _json.loads(rep.to_json()),
                      config)
    if "txt" in fmts:
        (out / "tradeoff.txt").write_text(rep.to_text() + "\n")
    if "csv" in fmts:
        cells = [
            {"cell": "mi-bound", "base": rep.mi_bound_base,
             "expanded": rep.mi_bound_exp},
            {"cell": "cmi-term", "base": rep.cmi_term_base,
             "expanded": rep.cmi_term_exp},
            {"cell": "delta", "base": rep.delta_i, "expanded": rep.delta_f},
        ]
        rp.write_csv(out / "cells.csv", cells, config)
        spectra = [{"index": i,
                    "iota": rep.iota[i] if i < len(rep.iota) else "",
                    "iota_cond": (rep.iota_cond[i]
                                  if i < len(rep.iota_cond) else ""),
                    "iota_exp": rep.iota_exp[i]}
                   for i in range(len(rep.iota_exp))]
        rp.write_csv(out / "spectra.csv", spectra, config)
    if "svg" in fmts:
        rp.save_svg(rp.fig_tradeoff_cells(rep, made.name),
                    out / "tradeoff.svg", config)
        rp.save_svg(rp.fig_spectra(
            {"base": rep.iota, "conditional": rep.iota_cond,
             "expanded": rep.iota_exp},
            f"{made.name}: prior-whitened spectra"),
            out / "spectra.svg", config)

    if made.name == "simple-reg-2obs" and "csv" in fmts:
        rows = []
        for i, rho in enumerate(suite.SWEEP_RHO):
            pr = builtin("simple-reg-2obs", {"rho": rho})
            srep = fb.tradeoff_report(pr, n_prior=30, n_mc=10,
                                      seed=args.seed)
            ct = fb.cmi_trace_term(pr.expanded, n_y=8,
                                   block="shared-given-extra",
                                   rng=substream(args.seed, "sweep", i))
            rows.append({"rho": rho, "mi_bound_exp": srep.mi_bound_exp,
                         "cmi_term_exp": ct.value})
        rp.write_csv(out / "sweep.csv", rows, config)
    print(f"artifacts in {out}")
    return 0


def cmd_ppc(args) -> int:
    hp = _parse_hp(args.hp)
    model = _spec_of(_make(args.model, hp))
    y = _load_data(args, model)
    b = PPC_BUDGETS[args.budget]
    if args.stat:
        stats = [_parse_stat(s) for s in args.stat]
    elif model.name == "student-t-outlier":
        stats = [ch.stat_negated_first(), ch.stat_coordinate(1)]
    elif y.groups is not None:
        stats = [ch.stat_group_mean_sd()]
    else:
        stats = [ch.stat_sample_mean()]

    draws = _posterior_for(model, y, b["s_draws"], args.seed, "auto")
    config = _config_of(args)
    out = _outdir(args, config)
    fmts = _parse_formats(args.format)
    summary = []
    for stat in stats:
        res = ch.conditional_pppv(model, y, draws, stat,
                                  n_inner=b["n_inner"],
                                  rng=substream(args.seed, "ppc", stat.name))
        table = ch.check_scatter(res, draws, args.proj)
        corr = spearmanr(table[:, 0], table[:, 1])
        summary.append({**res.to_summary(),
                        "mass_below_0.01": res.mass_below(0.01),
                        "proj": args.proj,
                        "rank_corr_proj_vs_p": float(corr.statistic)})
        if "csv" in fmts:
            rows = [{"draw": i, f"proj_{args.proj}": table[i, 0],
                     "conditional_p": table[i, 1],
                     "weight": res.weights[i]}
                    for i in range(table.shape[0])]
            rp.write_csv(out / f"ppc-{stat.name}.csv", rows, config)
        if "svg" in fmts:
            fig = rp.fig_ppc_scatter(table, res.marginal_p, stat.name,
                                     f"parameter {args.proj}")
            rp.save_svg(fig, out / f"ppc-{stat.name}.svg", config)
        print(f"{stat.name}: marginal p {res.marginal_p:.4f}, "
              f"mass p<0.01 {res.mass_below(0.01):.3f}")
    if "json" in fmts:
        rp.write_json(out / "ppc.json",
                      {"model": model.name, "dataset": y.name,
                       "stats": summary}, config)
    print(f"artifacts in {out}")
    return 0


def cmd_bootstrap(args) -> int:
    from .bootstrap import compare_schemes  # slow import path kept local
    from .models import make_grouped_expanded

    config = _config_of(args)
    out = _outdir(args, config)
    fmts = _parse_formats(args.format)

    datasets = []
    if args.data:
        for path in args.data:
            with open(path) as fh:
                datasets.append(DataSet.from_csv(fh, name=Path(path).stem))
    else:
        datasets = [simulate_grouped_data(M=2, L=20, sigma_star=s, seed=sd)
                    for s, sd in STUDY_DATASETS]

    if args.generate:
        for ds in datasets:
            path = out / f"{ds.name}.csv"
            with path.open("w", newline="") as fh:
                ds.to_csv(fh)
            print(f"wrote {path}")
        return 0

    b = BOOT_BUDGETS[args.budget]
    r_reps = args.R if args.R is not None else b["R"]
    s_len = args.S if args.S is not None else b["S"]
    results = []
    for ds in datasets:
        n_groups = ds.n_groups
        model = make_grouped_expanded({"L": n_groups, "M": ds.n // n_groups})
        comp = compare_schemes(ds, model, R=r_reps, S=s_len,
                               M_new=args.M_new, L_new=args.L_new,
                               seed=args.seed, warmup=b["warmup"],
                               ref_size=b["ref_size"],
                               ref_warmup=b["ref_warmup"])
        row = comp.table_row()
        results.append(row)
        if "csv" in fmts:
            rp.write_csv(out / f"boot-{ds.name}-table.csv", [row], config)
            rp.write_csv(out / f"boot-{ds.name}-hist.csv",
                         comp.histogram_rows(), config)
        if "svg" in fmts:
            rp.save_svg(rp.fig_bootstrap_hist(comp.histogram_rows(), ds.name),
                        out / f"boot-{ds.name}.svg", config)
        cells = ", ".join(
            f"{sc}:{so} {comp.cell(sc, so).rho_bar:.3f}"
            for sc in ("same-subpops", "new-subpops")
            for so in ("posterior", "prior"))
        print(f"{ds.name}: sigma_obs {comp.sigma_obs:.4f}; rho_bar {cells}")
    if "json" in fmts:
        rp.write_json(out / "bootstrap.json", {"tables": results}, config)
    print(f"artifacts in {out}")
    return 0


# ── parser ───────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expdiag",
        description="Identifiability/falsifiability diagnostics for "
                    "Bayesian model expansion")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", choices=("default", "quick"),
                        default="default")
    common.add_argument("--out", default="out",
                        help="base output directory (default: out)")
    common.add_argument("--format", default="json,csv,svg",
                        help="comma list from json,csv,svg,txt")
    common.add_argument("--hp", default="",
                        help="hyperparameter overrides k=v,k2=v2")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("examples", parents=[common],
                       help="run the closed-form regression table")
    p.add_argument("--only", default="",
                   help=f"comma list of groups from {list(suite.GROUPS)}")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("diagnose", parents=[common],
                       help="information quantities for one model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", default=None, help="dataset CSV")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("expand-compare", parents=[common],
                       help="four-cell tradeoff report for an expansion pair")
    p.add_argument("--pair", required=True)
    p.set_defaults(func=cmd_expand_compare)

    p = sub.add_parser("ppc", parents=[common],
                       help="conditional posterior predictive checks")
    p.add_argument("--model", required=True)
    p.add_argument("--data", default=None, help="dataset CSV")
    p.add_argument("--stat", action="append", default=None,
                   help="statistic spec, repeatable (e.g. coord-1:right)")
    p.add_argument("--proj", type=int, default=0,
                   help="parameter coordinate for the scatter x-axis")
    p.set_defaults(func=cmd_ppc)

    p = sub.add_parser("bootstrap", parents=[common],
                       help="compare data-augmentation schemes")
    p.add_argument("--data", action="append", default=None,
                   help="grouped dataset CSV, repeatable")
    p.add_argument("--generate", action="store_true",
                   help="write the three study datasets and exit")
    p.add_argument("--R", type=int, default=None, help="replications")
    p.add_argument("--S", type=int, default=None, help="refit chain length")
    p.add_argument("--M-new", dest="M_new", type=int, default=8)
    p.add_argument("--L-new", dest="L_new", type=int, default=20)
    p.set_defaults(func=cmd_bootstrap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapabilityError as err:
        print(f"capability error: {err}", file=sys.stderr)
        return 3
    except NumericalError as err:  # includes ReliabilityError
        print(f"numerical error: {err}", file=sys.stderr)
        return 3
    except ValueError as err:  # DomainError and library input validation
        print(f"usage error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())