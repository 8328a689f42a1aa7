"""Artifact emission: JSON/CSV writers and SVG figures.

Every artifact embeds the run's config hash, seed, and artifact version so
outputs can be audited back to the exact invocation.  Figures go through
matplotlib's Agg backend with a pinned hash salt and no timestamp metadata,
which makes re-runs byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

import numpy as np  # noqa: E402

ARTIFACT_VERSION = "0.1.0"

matplotlib.rcParams["svg.hashsalt"] = "expdiag"
matplotlib.rcParams["figure.dpi"] = 100


# ── run identity ─────────────────────────────────────────────────────────────

def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def config_hash(config: dict) -> str:
    """Stable 12-hex-digit digest of a run configuration."""
    blob = json.dumps(_canonical(config), sort_keys=True,
                      separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def run_meta(config: dict) -> dict:
    return {"config_hash": config_hash(config),
            "seed": config.get("seed"),
            "artifact_version": ARTIFACT_VERSION}


# ── writers ──────────────────────────────────────────────────────────────────

def write_json(path, payload: dict, config: dict) -> Path:
    path = Path(path)
    body = {"meta": run_meta(config), **_canonical(payload)}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path, rows: list, config: dict, fieldnames=None) -> Path:
    """Rows of dicts with a leading run-identity comment line."""
    path = Path(path)
    if fieldnames is None:
        if not rows:
            raise ValueError("no rows and no fieldnames; cannot infer a csv header")
        fieldnames = list(rows[0].keys())
    meta = run_meta(config)
    with path.open("w", newline="") as fh:
        fh.write(f"# config_hash={meta['config_hash']} "
                 f"seed={meta['seed']} "
                 f"artifact_version={meta['artifact_version']}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in fieldnames})
    return path


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, (np.floating,)):
        return format(float(v), ".12g")
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def save_svg(fig, path, config: dict) -> Path:
    path = Path(path)
    meta = run_meta(config)
    fig.text(0.005, 0.005,
             f"{meta['config_hash']} seed={meta['seed']} "
             f"v{meta['artifact_version']}",
             fontsize=4, color="0.6")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


# ── figures ──────────────────────────────────────────────────────────────────

def fig_ppc_scatter(table: np.ndarray, marginal_p: float, stat_name: str,
                    proj_label: str):
    """Conditional p-values against a parameter projection.

    Main panel: scatter with the marginal p-value as a reference line.
    Side panels: histograms of each axis.
    """
    fig = plt.figure(figsize=(6.0, 5.0))
    gs = fig.add_gridspec(2, 2, width_ratios=(4, 1), height_ratios=(1, 4),
                          hspace=0.08, wspace=0.08)
    ax = fig.add_subplot(gs[1, 0])
    ax_top = fig.add_subplot(gs[0, 0], sharex=ax)
    ax_right = fig.add_subplot(gs[1, 1], sharey=ax)

    ax.scatter(table[:, 0], table[:, 1], s=8, alpha=0.5, linewidths=0,
               color="tab:blue")
    ax.axhline(marginal_p, color="black", linewidth=1.2)
    ax.set_xlabel(proj_label)
    ax.set_ylabel(f"conditional p [{stat_name}]")
    ax.set_ylim(-0.03, 1.03)

    ax_top.hist(table[:, 0], bins=40, color="0.7")
    ax_right.hist(table[:, 1], bins=40, orientation="horizontal", color="0.7")
    ax_top.tick_params(labelbottom=False, left=False, labelleft=False)
    ax_right.tick_params(labelleft=False, bottom=False, labelbottom=False)
    for spine in ("top", "right", "left"):
        ax_top.spines[spine].set_visible(False)
    for spine in ("top", "right", "bottom"):
        ax_right.spines[spine].set_visible(False)
    return fig


def fig_bootstrap_hist(hist_rows: list, dataset: str):
    """Step histograms of rho per scheme cell, shared bins."""
    cells = sorted({r["scheme"] for r in hist_rows})
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for cell in cells:
        rows = [r for r in hist_rows if r["scheme"] == cell]
        edges = [r["bin_left"] for r in rows] + [rows[-1]["bin_right"]]
        counts = [r["count"] for r in rows]
        ax.stairs(counts, edges, label=cell, linewidth=1.4)
    ax.axvline(1.0, color="black", linewidth=0.8, linestyle="--")
    ax.set_xlabel("rho = sd(mu | augmented) / sd(mu | observed)")
    ax.set_ylabel("count")
    ax.set_title(dataset)
    ax.legend(fontsize=8)
    return fig


def fig_spectra(spectra: dict, title: str):
    """Grouped bar chart of information spectra (base / conditional / full)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    n_groups = len(spectra)
    width = 0.8 / n_groups
    for j, (label, vals) in enumerate(spectra.items()):
        vals = np.asarray(vals, dtype=float)
        pos = np.arange(vals.size) + j * width
        ax.bar(pos, vals, width=width, label=label)
    ax.set_xlabel("eigenvalue index (ascending)")
    ax.set_ylabel("prior-whitened information")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return fig


def fig_tradeoff_cells(report, title: str):
    """The four-cell bound table as a grouped bar chart."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    labels = ["mi upper bound", "cmi lower term*"]
    base_vals = [report.mi_bound_base, report.cmi_term_base]
    exp_vals = [report.mi_bound_exp, report.cmi_term_exp]
    pos = np.arange(2)
    ax.bar(pos - 0.18, base_vals, width=0.36, label="base")
    ax.bar(pos + 0.18, exp_vals, width=0.36, label="expanded")
    ax.set_xticks(pos, labels)
    ax.set_title(f"{title} ({report.classification})")
    ax.legend(fontsize=8)
    ax.text(0.98, 0.02, "* up to constant / log d", transform=ax.transAxes,
            ha="right", fontsize=7, color="0.4")
    return fig