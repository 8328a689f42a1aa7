"""Posterior sampling: exact conjugate draws, dense grids, adaptive RWM.

Everything returns PosteriorDraws so downstream estimators can consume
weighted (grid) and unweighted (exact/RWM) posteriors through one interface.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapabilityError, NumericalError
from .models import DataSet, ModelSpec
from .rand import substream

SAMPLER_KINDS = ("exact", "grid", "rwm")

# target acceptance rate for the adaptive random-walk proposal
RWM_TARGET_ACCEPT = 0.234


@dataclass
class GaussianPosterior:
    """Exact Gaussian posterior; cov symmetrized, eigenvalues clamped at 0."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        asym = float(np.abs(cov - cov.T).max())
        if asym > 1e-12 * max(1.0, float(np.abs(cov).max())):
            raise NumericalError(f"posterior covariance asymmetric by {asym:.3e}")
        cov = (cov + cov.T) / 2.0
        eigs, vecs = np.linalg.eigh(cov)
        if eigs.min() < -1e-10 * max(1.0, float(eigs.max())):
            raise NumericalError(f"posterior covariance has eigenvalue {eigs.min():.3e}")
        eigs = np.clip(eigs, 0.0, None)
        self.cov = (vecs * eigs) @ vecs.T

    @property
    def dim(self) -> int:
        return self.mean.size

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        root = np.linalg.cholesky(self.cov + 1e-300 * np.eye(self.dim))
        return self.mean + rng.standard_normal((size, self.dim)) @ root.T


@dataclass
class PosteriorDraws:
    """S draws from a posterior, optionally weighted.

    weights is None for equally weighted draws; otherwise non-negative,
    summing to one within 1e-12.  diagnostics carries sampler-specific
    numbers (acceptance rate, warmup length, warnings).
    """

    draws: np.ndarray
    weights: Optional[np.ndarray]
    seed: Optional[int]
    sampler: str
    model_name: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.draws = np.atleast_2d(np.asarray(self.draws, dtype=float))
        if self.sampler not in SAMPLER_KINDS:
            raise ValueError(f"sampler must be one of {SAMPLER_KINDS}, got {self.sampler!r}")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float).ravel()
            if self.weights.size != self.draws.shape[0]:
                raise ValueError("weights length must match number of draws")
            if np.any(self.weights < 0):
                raise ValueError("weights must be non-negative")
            total = float(self.weights.sum())
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"weights must sum to 1 within 1e-12, got {total!r}")
        if self.sampler == "rwm":
            acc = self.diagnostics.get("acceptance")
            if acc is None or not 0.0 < acc < 1.0:
                raise ValueError(f"rwm draws need acceptance in (0,1), got {acc!r}")

    @property
    def size(self) -> int:
        return self.draws.shape[0]

    @property
    def dim(self) -> int:
        return self.draws.shape[1]

    def effective_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.size, 1.0 / self.size)
        return self.weights

    def mean(self) -> np.ndarray:
        return self.effective_weights() @ self.draws

    def cov(self) -> np.ndarray:
        w = self.effective_weights()
        c = self.draws - w @ self.draws
        return (c * w[:, None]).T @ c

    def sd(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov()))

    def resample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Equal-weight draws resampled according to the weights."""
        idx = rng.choice(self.size, size=size, p=self.effective_weights())
        return self.draws[idx]

    # ── serialization: CSV of draws + JSON-able sidecar ─────────────────────

    def to_csv(self, fileobj) -> None:
        writer = csv.writer(fileobj)
        writer.writerow(["draw_index", "weight"]
                        + [f"param_{j}" for j in range(self.dim)])
        w = self.effective_weights()
        for i in range(self.size):
            writer.writerow([i, repr(float(w[i]))]
                            + [repr(float(v)) for v in self.draws[i]])

    def sidecar(self) -> dict:
        diag = {k: v for k, v in self.diagnostics.items()}
        return {"sampler": self.sampler, "seed": self.seed,
                "model": self.model_name, "size": int(self.size),
                "dim": int(self.dim), "weighted": self.weights is not None,
                "diagnostics": diag}


# ── exact conjugate posteriors ───────────────────────────────────────────────

def exact_gaussian_posterior(model: ModelSpec, y: DataSet) -> GaussianPosterior:
    """Closed-form Gaussian posterior for linear-Gaussian builtins."""
    if model.analytic is None or model.analytic.lingauss is None:
        raise CapabilityError(
            f"{model.name}: no linear-Gaussian structure declared; "
            "use grid_posterior or rwm_sample")
    lg = model.analytic.lingauss(y)
    mean, cov = lg.posterior(y.values)
    return GaussianPosterior(mean=mean, cov=cov)


def exact_sample(model: ModelSpec, y: DataSet, size: int, seed: int) -> PosteriorDraws:
    """Independent exact posterior draws, conjugate models only."""
    rng = substream(seed, "exact", model.name)
    if model.analytic is not None and model.analytic.posterior_sampler is not None:
        draws = model.analytic.posterior_sampler(y, size, rng)
    else:
        post = exact_gaussian_posterior(model, y)
        draws = post.sample(size, rng)
    return PosteriorDraws(draws=draws, weights=None, seed=seed, sampler="exact",
                          model_name=model.name)


# ── dense grid posteriors (dim <= 2) ─────────────────────────────────────────

def grid_posterior(model: ModelSpec, y: DataSet, bounds=None,
                   resolution: int = 201) -> PosteriorDraws:
    """Posterior on a dense rectangular grid, weights via log-sum-exp.

    Only for d_total <= 2; the draw matrix holds the grid coordinates and
    the weights are the normalized joint density over the grid.
    """
    d = model.d_total
    if d > 2:
        raise CapabilityError(
            f"grid_posterior supports at most 2 parameters, {model.name} has {d}")
    if bounds is None:
        if model.default_bounds is None:
            raise CapabilityError(f"{model.name}: no bounds given and no defaults")
        lo, hi = model.default_bounds
    else:
        lo, hi = (np.asarray(b, dtype=float).ravel() for b in bounds)
    axes = [np.linspace(lo[j], hi[j], resolution) for j in range(d)]
    if d == 1:
        grid = axes[0][:, None]
    else:
        g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        grid = np.column_stack([g0.ravel(), g1.ravel()])

    logp = np.array([model.log_prior(v) for v in grid])
    ok = np.isfinite(logp)
    if ok.any():
        ll = model.loglik_matrix(y.values[None, :], y.groups, grid[ok])[0]
        logp[ok] = logp[ok] + ll
    top = logp.max()
    if not np.isfinite(top):
        raise NumericalError(
            f"grid_posterior: posterior underflows everywhere on the grid for {model.name}")
    w = np.exp(logp - top)
    w /= w.sum()
    return PosteriorDraws(draws=grid, weights=w, seed=None, sampler="grid",
                          model_name=model.name,
                          diagnostics={"resolution": resolution,
                                       "bounds_lo": lo.tolist(),
                                       "bounds_hi": hi.tolist()})


# ── adaptive random-walk Metropolis ──────────────────────────────────────────

def rwm_sample(model: ModelSpec, y: DataSet, size: int = 6000,
               warmup: int = 1000, seed: int = 0,
               init: Optional[np.ndarray] = None) -> PosteriorDraws:
    """Random-walk Metropolis with diagonal proposal.

    Adaptation happens strictly during warmup: Robbins-Monro scaling of a
    global step factor toward 0.234 acceptance, plus one refresh of the
    per-coordinate scales from the second half of warmup.  The post-warmup
    chain is a fixed-kernel Markov chain.
    """
    if size < 100 or warmup < 100:
        raise ValueError(f"rwm_sample needs size >= 100 and warmup >= 100, "
                         f"got {size}, {warmup}")
    rng = substream(seed, "rwm", model.name)
    d = model.d_total

    if init is not None:
        x = np.asarray(init, dtype=float).ravel().copy()
        lp = model.log_post(y, x)
        if not np.isfinite(lp):
            raise ValueError("rwm_sample: init point has zero posterior density")
    else:
        x, lp = None, -np.inf
        for _ in range(200):
            cand = model.sample_prior(rng).values
            lc = model.log_post(y, cand)
            if np.isfinite(lc):
                x, lp = cand, lc
                break
        if x is None:
            raise NumericalError(
                f"rwm_sample: no prior draw had finite posterior density for {model.name}")

    scale_vec = np.maximum(np.abs(x), 1.0) * 0.1
    log_s = float(np.log(2.38 / np.sqrt(d)))
    half = warmup // 2
    keep_from = half + (warmup - half) // 2
    warm_hist = np.empty((warmup, d))

    def step(x, lp, s):
        prop = x + np.exp(s) * scale_vec * rng.standard_normal(d)
        lp_prop = model.log_post(y, prop)
        if np.log(rng.uniform()) < lp_prop - lp:
            return prop, lp_prop, True
        return x, lp, False

    anchor = 0  # Robbins-Monro restarts when the coordinate scales change
    for k in range(warmup):
        x, lp, acc = step(x, lp, log_s)
        warm_hist[k] = x
        log_s += (float(acc) - RWM_TARGET_ACCEPT) / (k - anchor + 1) ** 0.6
        if k == half:
            sd = warm_hist[half // 2:half].std(axis=0)
            floor = max(sd.max(), 1e-8) * 1e-3
            scale_vec = np.maximum(sd, floor)
            log_s, anchor = float(np.log(2.38 / np.sqrt(d))), k

    draws = np.empty((size, d))
    n_acc = 0
    for k in range(size):
        x, lp, acc = step(x, lp, log_s)
        draws[k] = x
        n_acc += acc
    acceptance = (n_acc + 0.5) / (size + 1.0)  # kept inside (0,1) exactly

    warnings = []
    if not 0.01 < acceptance < 0.99:
        warnings.append(f"acceptance rate {acceptance:.4f} outside (0.01, 0.99); "
                        "treat the chain with suspicion")
    diag = {"acceptance": float(acceptance), "warmup": warmup,
            "step_scale": float(np.exp(log_s)),
            "warnings": warnings}
    return PosteriorDraws(draws=draws, weights=None, seed=seed, sampler="rwm",
                          model_name=model.name, diagnostics=diag)


def sample_posterior(model: ModelSpec, y: DataSet, size: int = 6000,
                     seed: int = 0, warmup: int = 1000) -> PosteriorDraws:
    """Cheapest sound sampler: exact when conjugate, else RWM."""
    if model.analytic is not None and (
            model.analytic.lingauss is not None
            or model.analytic.posterior_sampler is not None):
        return exact_sample(model, y, size, seed)
    return rwm_sample(model, y, size=size, warmup=warmup, seed=seed)


# ── posterior predictive sampling ────────────────────────────────────────────

def sample_ppd(model: ModelSpec, draws: PosteriorDraws, n_rep: int,
               rng: np.random.Generator,
               template: Optional[DataSet] = None) -> np.ndarray:
    """n_rep replicate datasets from the posterior predictive.

    Returns an (n_rep, n) array of values; grouped structure is taken from
    the template (or the model's canonical template).  Weighted draws are
    respected by resampling parameter vectors in proportion to weight.
    """
    tmpl = model.canonical_template if template is None else template
    thetas = draws.resample(n_rep, rng)
    out = np.empty((n_rep, tmpl.n))
    for i in range(n_rep):
        out[i] = model._sample_data(thetas[i], tmpl, rng)
    return out
