"""Fisher/observed information and the trade-off bounds built on it.

Observed information comes from central finite differences of the
log-likelihood; expected information averages it over simulated data unless
the model declares a closed form.  On top of those sit the psi-based MI
upper bounds, the marginal-trace inequality with its per-coordinate Delta
terms, the posterior-covariance trace term for the CMI lower bound, the
dilution classification, and the four-cell trade-off report.

Unknown universal constants are never guessed: every lower-bound quantity
is labeled "up to constant" and reported next to the dimension factors.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import CapabilityError, DomainError, NumericalError
from .infotheory import InfoEstimate
from .models import DataSet, ExpansionPair, ModelSpec, point_values
from .rand import as_generator, substream
from .samplers import exact_gaussian_posterior, grid_posterior, rwm_sample

FD_STEP = 1e-4
FISHER_BLOCKS = ("full", "shared", "shared-given-extra")
SKEW_DELTA_DEFAULT = 0.5  # any value below 2^(-1/2) satisfies the hypothesis


# ── symmetric eigensolver (cyclic Jacobi) ────────────────────────────────────

def sym_eigen(matrix, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, orthonormal eigenvectors as columns).
    The input must be symmetric within 1e-8; it is symmetrized on entry.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    scale = np.linalg.norm(a)
    if np.max(np.abs(a - a.T)) > 1e-8 * max(1.0, scale):
        raise DomainError("matrix is not symmetric within 1e-8")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a[0].copy(), v
    tol = 1e-12 * max(scale, 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol / (n * n):
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    else:
        raise NumericalError(
            f"Jacobi sweep limit ({max_sweeps}) reached without convergence")
    eigs = np.diag(a).copy()
    order = np.argsort(eigs)
    return eigs[order], v[:, order]


def _opnorm(matrix) -> float:
    eigs, _ = sym_eigen(matrix)
    return float(np.max(np.abs(eigs)))


def _sqrt_psd(matrix) -> np.ndarray:
    eigs, vecs = sym_eigen(matrix)
    if eigs.min() < -1e-10 * max(1.0, abs(eigs.max())):
        raise NumericalError("matrix square root of an indefinite matrix")
    return vecs @ np.diag(np.sqrt(np.clip(eigs, 0.0, None))) @ vecs.T


# ── information-matrix container ─────────────────────────────────────────────

@dataclass(frozen=True)
class InfoMatrixEstimate:
    """A d x d information matrix with entrywise uncertainty.

    ``at`` records the averaging measure: a fixed parameter point, the
    prior, or the posterior.  ``n_mc`` is 0 for closed forms.
    """

    matrix: np.ndarray
    std_error_matrix: np.ndarray
    n_mc: int
    at: str

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        se = np.atleast_2d(np.asarray(self.std_error_matrix, dtype=float))
        if not np.all(np.isfinite(m)):
            raise NumericalError(f"non-finite information matrix ({self.at})")
        if np.max(np.abs(m - m.T)) > 1e-8 * max(1.0, np.abs(m).max()):
            raise NumericalError(
                f"information matrix asymmetric beyond 1e-8 ({self.at})")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))
        object.__setattr__(self, "std_error_matrix", se)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def spectrum(self) -> np.ndarray:
        eigs, _ = sym_eigen(self.matrix)
        return eigs

    def se_scale(self) -> float:
        return float(np.max(self.std_error_matrix))

    def block(self, idx) -> "InfoMatrixEstimate":
        sub = np.ix_(idx, idx)
        return InfoMatrixEstimate(matrix=self.matrix[sub],
                                  std_error_matrix=self.std_error_matrix[sub],
                                  n_mc=self.n_mc, at=self.at)


# ── finite-difference Hessians ───────────────────────────────────────────────

def _fd_steps(v0: np.ndarray, h) -> np.ndarray:
    if h is None:
        return np.maximum(FD_STEP, FD_STEP * np.abs(v0))
    return np.broadcast_to(np.asarray(h, dtype=float), v0.shape).copy()


def _fd_hessian(f, v0: np.ndarray, h=None) -> np.ndarray:
    """Central-difference Hessian of f at v0.

    Steps are reduced (halved, up to 12 times) for any coordinate whose
    stencil lands outside the support; persistent -inf raises.
    """
    v0 = np.asarray(v0, dtype=float)
    d = v0.size
    steps = _fd_steps(v0, h)
    f0 = f(v0)
    if not np.isfinite(f0):
        raise NumericalError("function not finite at the expansion point")

    def probe(offsets):
        v = v0.copy()
        for i, delta in offsets:
            v[i] += delta
        return f(v)

    hess = np.empty((d, d))
    for i in range(d):
        for _ in range(12):
            fp = probe([(i, steps[i])])
            fm = probe([(i, -steps[i])])
            if np.isfinite(fp) and np.isfinite(fm):
                hess[i, i] = (fp - 2.0 * f0 + fm) / steps[i] ** 2
                break
            steps[i] *= 0.5
        else:
            raise NumericalError(
                f"support boundary inside the stencil of coordinate {i}")
    for i in range(d):
        for j in range(i + 1, d):
            for _ in range(12):
                fpp = probe([(i, steps[i]), (j, steps[j])])
                fpm = probe([(i, steps[i]), (j, -steps[j])])
                fmp = probe([(i, -steps[i]), (j, steps[j])])
                fmm = probe([(i, -steps[i]), (j, -steps[j])])
                vals = (fpp, fpm, fmp, fmm)
                if all(np.isfinite(x) for x in vals):
                    hess[i, j] = hess[j, i] = (
                        (fpp - fpm - fmp + fmm)
                        / (4.0 * steps[i] * steps[j]))
                    break
                steps[i] *= 0.5
                steps[j] *= 0.5
            else:
                raise NumericalError(
                    "support boundary inside the cross stencil "
                    f"({i}, {j})")
    return 0.5 * (hess + hess.T)


def observed_info_fd(model: ModelSpec, y: DataSet, point,
                     h=None) -> InfoMatrixEstimate:
    """Observed information: negative log-likelihood Hessian at a point."""
    v0 = point_values(point)
    hess = _fd_hessian(lambda v: model._log_lik(y, v), v0, h)
    return InfoMatrixEstimate(matrix=-hess,
                              std_error_matrix=np.zeros((v0.size, v0.size)),
                              n_mc=0, at=f"fixed point, data {y.name!r}")


def _analytic_fisher(model: ModelSpec, v0: np.ndarray):
    if model.analytic is None:
        return None
    if model.analytic.fisher is not None:
        return np.atleast_2d(np.asarray(model.analytic.fisher(v0),
                                        dtype=float))
    if model.analytic.lingauss is not None:
        return model.analytic.lingauss(model.canonical_template).fisher()
    return None


def expected_fisher(model: ModelSpec, point, n_mc: int = 150,
                    rng=None, use_analytic: bool = True) -> InfoMatrixEstimate:
    """Expected Fisher information at a fixed parameter point.

    Uses the model's closed form when declared, otherwise a Monte Carlo
    average of finite-difference observed information over simulated data.
    Eigenvalues in [-3 s.e., 0) are clamped to zero (MC noise); anything
    more negative is treated as a bug and raised.
    """
    v0 = point_values(point)
    if use_analytic:
        exact = _analytic_fisher(model, v0)
        if exact is not None:
            z = np.zeros_like(exact)
            return InfoMatrixEstimate(matrix=exact, std_error_matrix=z,
                                      n_mc=0, at="fixed point (analytic)")
    rng = as_generator(rng)
    d = v0.size
    acc = np.zeros((n_mc, d, d))
    for m in range(n_mc):
        y = model.sample_data(v0, rng)
        acc[m] = observed_info_fd(model, y, v0).matrix
    mean = acc.mean(axis=0)
    se = acc.std(axis=0, ddof=1) / np.sqrt(n_mc)
    eigs, vecs = sym_eigen(mean)
    tol = 3.0 * max(float(se.max()), 1e-12)
    if eigs.min() < -tol:
        raise NumericalError(
            f"expected Fisher information eigenvalue {eigs.min():.4g} "
            f"below -3 s.e. ({tol:.4g}); not explainable as MC noise")
    if eigs.min() < 0.0:
        warnings.warn("clamping slightly negative Fisher eigenvalues to 0",
                      RuntimeWarning)
        mean = vecs @ np.diag(np.clip(eigs, 0.0, None)) @ vecs.T
    return InfoMatrixEstimate(matrix=mean, std_error_matrix=se, n_mc=n_mc,
                              at="fixed point (MC)")


# ── prior-averaged information, including the marginalized likelihood ────────

def _marginal_loglik_fn(model: ModelSpec, n_atoms: int,
                        rng: np.random.Generator):
    """log p(y | theta) for the extra-marginalized likelihood.

    The extra block is integrated by a fixed mixture of prior draws; the
    atoms are shared across evaluations so the function is smooth in theta
    (which finite differences require).
    """
    d_sh = model.d_shared
    atoms = model.sample_prior(rng, size=n_atoms)[:, d_sh:]

    def f(y: DataSet, theta: np.ndarray) -> float:
        params = np.hstack([np.tile(theta, (n_atoms, 1)), atoms])
        ll = model.loglik_matrix(y.values[None, :], y.groups, params)[0]
        return float(logsumexp(ll) - np.log(n_atoms))

    return f


def prior_expected_fisher(model: ModelSpec, block: str = "full",
                          n_prior: int = 120, n_mc: int = 100,
                          rng=None, n_atoms: int = 400,
                          return_samples: bool = False):
    """Fisher information averaged over the prior.

    block "full" returns E I(theta, lambda); "shared-given-extra" its
    shared principal submatrix E I(theta | lambda); "shared" the Fisher
    information of the extra-marginalized likelihood p(y | theta).
    """
    if block not in FISHER_BLOCKS:
        raise DomainError(f"block must be one of {FISHER_BLOCKS}")
    rng = as_generator(rng)
    d_sh = model.d_shared

    if block == "shared" and model.d_extra > 0:
        if (model.analytic is not None
                and model.analytic.fisher_shared_marginal is not None):
            mats = np.stack([
                np.atleast_2d(model.analytic.fisher_shared_marginal(
                    model.sample_prior(rng).values[:d_sh]))
                for _ in range(n_prior)])
        else:
            mats = np.empty((n_prior, d_sh, d_sh))
            for t in range(n_prior):
                f = _marginal_loglik_fn(model, n_atoms, rng)
                v = model.sample_prior(rng).values
                inner = np.zeros((d_sh, d_sh))
                for _ in range(n_mc):
                    y = model.sample_data(v, rng)
                    inner -= _fd_hessian(lambda th: f(y, th), v[:d_sh])
                mats[t] = inner / n_mc
    else:
        mats = []
        for _ in range(n_prior):
            v = model.sample_prior(rng)
            mats.append(expected_fisher(model, v, n_mc=n_mc, rng=rng).matrix)
        mats = np.stack(mats)
        if block == "shared-given-extra" or (block == "shared"
                                             and model.d_extra == 0):
            mats = mats[:, :d_sh, :d_sh]
    mean = mats.mean(axis=0)
    se = mats.std(axis=0, ddof=1) / np.sqrt(n_prior)
    est = InfoMatrixEstimate(matrix=mean, std_error_matrix=se,
                             n_mc=n_prior, at=f"prior ({block})")
    if return_samples:
        return est, mats
    return est


# ── psi and the MI upper bounds ──────────────────────────────────────────────

def psi(x):
    """sqrt(x) below 1, 1 + log(x)/2 above; concave, increasing, psi(1)=1."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("psi is defined on nonnegative inputs")
    out = np.where(x <= 1.0, np.sqrt(x),
                   1.0 + 0.5 * np.log(np.maximum(x, 1e-300)))
    return float(out) if out.ndim == 0 else out


def _prior_cov(model: ModelSpec, idx, rng, n_draws: int = 4000) -> np.ndarray:
    if model.analytic is not None and model.analytic.prior_cov is not None:
        return model.analytic.prior_cov[np.ix_(idx, idx)]
    draws = model.sample_prior(rng, size=n_draws)[:, idx]
    return np.cov(draws.T).reshape(len(idx), len(idx))


def mi_upper_bound(model: ModelSpec, variant: str = "full",
                   block: str = "full", n_prior: int = 120,
                   n_mc: int = 100, rng=None) -> InfoEstimate:
    """Fisher-based upper bound on I(theta, y).

    "full" sandwiches the prior-averaged Fisher matrix between prior
    covariance square roots; "weak" replaces the sandwich with the largest
    prior eigenvalue times the trace, which is never smaller.
    """
    if variant not in ("full", "weak"):
        raise DomainError(f"variant must be 'full' or 'weak', got {variant!r}")
    if not model.log_concave_prior:
        raise CapabilityError(
            f"{model.name}: prior is not declared log-concave, so the "
            "bound's hypothesis is unmet; refusing to report a number")
    rng = as_generator(rng)
    info = prior_expected_fisher(model, block=block, n_prior=n_prior,
                                 n_mc=n_mc, rng=rng)
    idx = list(range(info.dim)) if block != "shared-given-extra" \
        else list(range(model.d_shared))
    if block == "shared":
        idx = list(range(model.d_shared))
    cov = _prior_cov(model, idx, rng)
    d = len(idx)
    if variant == "full":
        root = _sqrt_psd(cov)
        arg = float(np.trace(root @ info.matrix @ root)) / d
    else:
        v_pr = float(sym_eigen(cov)[0][-1])
        arg = v_pr * info.trace() / d
    value = d * psi(max(arg, 0.0))
    exact = info.n_mc == 0 or float(info.se_scale()) == 0.0
    se = 0.0
    if not exact:
        # first-order propagation of the trace s.e. through d*psi(x/d)
        tr_se = float(np.sqrt(np.sum(info.std_error_matrix ** 2)))
        slope = 0.5 / np.sqrt(arg) if 0 < arg <= 1 else 0.5 / max(arg, 1e-12)
        se = slope * tr_se * (float(sym_eigen(cov)[0][-1])
                              if variant == "weak" else 1.0)
    method = "analytic" if exact else "nested-mc"
    config = {"model": model.name, "variant": variant, "block": block,
              "d": d, "n_prior": n_prior}
    return InfoEstimate(value=value, std_error=0.0 if exact else max(se, 1e-12),
                        method=method, config=config)


# ── the marginal trace bound and its Delta terms ─────────────────────────────

@dataclass(frozen=True)
class TraceBoundReport:
    """Trace inequality for the extra-marginalized Fisher information.

    lhs  = E tr I(theta)                (marginalized likelihood)
    rhs  = sum_j E{-d^2/dtheta_j^2 log p(y|theta,lambda)} + sum_j delta_j
    """

    delta_j: np.ndarray
    lhs: float
    rhs: float
    lhs_se: float
    rhs_se: float
    cond_diag: np.ndarray
    prior_term: np.ndarray
    mixed_sums: np.ndarray
    hessian_opnorm: float
    n_mc: int
    pair_name: str

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 3.0 * np.hypot(self.lhs_se, self.rhs_se)

    def to_record(self) -> dict:
        return {"pair": self.pair_name, "lhs": self.lhs, "rhs": self.rhs,
                "lhs_se": self.lhs_se, "rhs_se": self.rhs_se,
                "delta_j": [float(v) for v in self.delta_j],
                "holds": bool(self.holds)}


def trace_bound_delta(pair: ExpansionPair, n_mc: int = 300,
                      seed: int = 0, n_atoms: int = 400,
                      n_marginal: tuple = (60, 40),
                      n_boot: int = 200) -> TraceBoundReport:
    """Per-coordinate Delta terms of the marginal-trace inequality.

    All pieces are Monte Carlo averages over the expanded model's prior
    predictive; the rhs standard error comes from a nonparametric bootstrap
    of the panel because each Delta_j is a nonlinear function of means.
    """
    exp_model = pair.expanded
    d_sh, d_ex = exp_model.d_shared, exp_model.d_extra
    if d_ex == 0:
        raise DomainError(f"{pair.name}: expansion has no extra parameters")
    rng = substream(seed, "trace-bound", pair.name)

    cond_diag = np.empty((n_mc, d_sh))   # -d^2/dtheta_j^2 log p(y|theta,lam)
    prior_term = np.empty((n_mc, d_sh))  # -d^2/dtheta_j^2 log p(lam|theta)
    mixed = np.empty((n_mc, d_sh, d_ex))
    opnorm = np.empty(n_mc)
    for t in range(n_mc):
        v = exp_model.sample_prior(rng).values
        y = exp_model.sample_data(v, rng)
        th, lam = v[:d_sh], v[d_sh:]

        lik_hess = _fd_hessian(lambda w: exp_model._log_lik(y, w), v)
        cond_diag[t] = -np.diag(lik_hess)[:d_sh]
        mixed[t] = lik_hess[:d_sh, d_sh:]

        prior_hess = _fd_hessian(
            lambda u: pair.log_prior_extra_cond(lam, u), th)
        prior_term[t] = -np.diag(prior_hess)

        def joint_lam(lm):
            w = np.concatenate([th, lm])
            return (exp_model._log_lik(y, w)
                    + pair.log_prior_extra_cond(lm, th))

        opnorm[t] = _opnorm(-_fd_hessian(joint_lam, lam))

    e_op = float(np.mean(opnorm))
    if e_op <= 0:
        raise NumericalError(
            f"{pair.name}: expected partial-Hessian operator norm is "
            f"{e_op:.3g}; the extra block carries no curvature")

    def assemble(idx):
        prior_mean = prior_term[idx].mean(axis=0)
        mixed_mean = mixed[idx].mean(axis=0)
        op_mean = float(np.mean(opnorm[idx]))
        dj = prior_mean - mixed_mean.sum(axis=1) ** 2 / op_mean
        rhs = float(cond_diag[idx].mean(axis=0).sum() + dj.sum())
        return dj, rhs

    delta_j, rhs = assemble(np.arange(n_mc))
    boot_rng = substream(seed, "trace-bound-boot", pair.name)
    boots = np.array([assemble(boot_rng.integers(0, n_mc, size=n_mc))[1]
                      for _ in range(n_boot)])
    rhs_se = float(boots.std(ddof=1))

    marg = prior_expected_fisher(exp_model, block="shared",
                                 n_prior=n_marginal[0], n_mc=n_marginal[1],
                                 rng=substream(seed, "trace-lhs", pair.name),
                                 n_atoms=n_atoms)
    lhs = marg.trace()
    lhs_se = float(np.sqrt(np.sum(np.diag(marg.std_error_matrix) ** 2)))
    return TraceBoundReport(
        delta_j=delta_j, lhs=lhs, rhs=rhs, lhs_se=lhs_se, rhs_se=rhs_se,
        cond_diag=cond_diag.mean(axis=0), prior_term=prior_term.mean(axis=0),
        mixed_sums=mixed.mean(axis=0).sum(axis=1),
        hessian_opnorm=e_op, n_mc=n_mc, pair_name=pair.name)


# ── CMI lower-bound quantities ───────────────────────────────────────────────

def _posterior_cov(model: ModelSpec, y: DataSet, seed: int) -> np.ndarray:
    if model.analytic is not None and (model.analytic.lingauss is not None):
        return exact_gaussian_posterior(model, y).cov
    if model.analytic is not None and model.analytic.posterior_sampler is not None:
        rng = substream(seed, "post-cov", model.name)
        draws = model.analytic.posterior_sampler(y, 4000, rng)
        return np.cov(draws.T).reshape(model.d_total, model.d_total)
    if model.d_total <= 2:
        return grid_posterior(model, y).cov()
    return rwm_sample(model, y, size=3000, warmup=800, seed=seed).cov()


def cmi_trace_term(model: ModelSpec, n_y: int = 150, n_mc: int = 100,
                   rng=None, block: str = "full",
                   seed: int = 0) -> InfoEstimate:
    """The posterior-covariance trace term of the CMI lower bound.

    Estimates tr(E Sigma_y^{1/2} I(theta) Sigma_y^{1/2}) over the prior
    predictive.  The universal constant in front is unknown, so the value
    is reported "up to constant" with d and log d alongside; the trace is
    invariant to reparametrization, so no prior whitening is needed.
    """
    rng = as_generator(rng)
    d_sh = model.d_shared
    idx = np.arange(model.d_total) if block == "full" else np.arange(d_sh)
    if block not in ("full", "shared-given-extra"):
        raise DomainError("block must be 'full' or 'shared-given-extra'")
    vals = np.empty(n_y)
    warned = False
    for t in range(n_y):
        v = model.sample_prior(rng)
        y = model.sample_data(v, rng)
        cov = _posterior_cov(model, y, seed=int(rng.integers(2 ** 31 - 1)))
        info = expected_fisher(model, v, n_mc=n_mc, rng=rng).matrix
        sub = np.ix_(idx, idx)
        vals[t] = float(np.trace(cov[sub] @ info[sub]))
        if not warned:
            eigs, _ = sym_eigen(info[sub])
            if eigs.min() <= 1e-10 * max(1.0, eigs.max()):
                warnings.warn(
                    f"{model.name}: singular Fisher information spectrum; "
                    "the lower bound degenerates (consider reparametrizing)",
                    RuntimeWarning)
                warned = True
    d = idx.size
    config = {"model": model.name, "block": block, "d": int(d),
              "log_d": float(np.log(d)) if d > 1 else 0.0,
              "label": "lower-bound trace term (up to constant)",
              "n_y": n_y}
    return InfoEstimate(value=float(vals.mean()),
                        std_error=float(vals.std(ddof=1) / np.sqrt(n_y)),
                        method="nested-mc", config=config)


def cmi_lower_bound_analytic(iota, R: int = 1) -> float:
    """sum_i iota_i / (1 + R iota_i); assumes a unit-covariance normal prior."""
    iota = np.asarray(iota, dtype=float).ravel()
    if np.any(iota < 0):
        raise DomainError("Fisher eigenvalues must be nonnegative")
    if R < 1 or int(R) != R:
        raise DomainError(f"R must be a positive integer, got {R}")
    return float(np.sum(iota / (1.0 + R * iota)))


# ── dilution classification ──────────────────────────────────────────────────

DILUTION_KINDS = ("totally-diluting", "totally-concentrating", "indefinite")


@dataclass(frozen=True)
class DilutionReport:
    """E_{p(theta)p(lambda)} { I_b(theta) - I(theta|lambda) } and its sign."""

    matrix: np.ndarray
    std_error_matrix: np.ndarray
    eigenvalues: np.ndarray
    classification: str
    n_mc: int
    pair_name: str

    def to_record(self) -> dict:
        return {"pair": self.pair_name,
                "matrix": self.matrix.tolist(),
                "eigenvalues": self.eigenvalues.tolist(),
                "classification": self.classification}


def dilution_matrix(pair: ExpansionPair, n_mc: int = 250,
                    n_inner: int = 100, seed: int = 0) -> DilutionReport:
    """Does the extra block dilute or concentrate the shared information?

    Classification uses a 3 s.e. dead-band on the eigenvalues: any
    eigenvalue whose interval straddles zero makes the verdict indefinite.
    """
    rng = substream(seed, "dilution", pair.name)
    base, exp_model = pair.base, pair.expanded
    d_sh = base.d_shared
    diffs = np.empty((n_mc, d_sh, d_sh))
    for t in range(n_mc):
        th = base.sample_prior(rng).values
        lam = exp_model.sample_prior(rng).values[d_sh:]
        ib = expected_fisher(base, th, n_mc=n_inner, rng=rng).matrix
        full = expected_fisher(exp_model, np.concatenate([th, lam]),
                               n_mc=n_inner, rng=rng).matrix
        diffs[t] = ib - full[:d_sh, :d_sh]
    mean = diffs.mean(axis=0)
    se = diffs.std(axis=0, ddof=1) / np.sqrt(n_mc)
    eigs, _ = sym_eigen(mean)
    band = 3.0 * float(se.max())
    if np.all(eigs > band):
        kind = "totally-diluting"
    elif np.all(eigs < -band):
        kind = "totally-concentrating"
    else:
        kind = "indefinite"
    return DilutionReport(matrix=mean, std_error_matrix=se,
                          eigenvalues=eigs, classification=kind,
                          n_mc=n_mc, pair_name=pair.name)


# ── skewness condition ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class SkewnessReport:
    var_op: float
    lambda_min_mean: float
    delta: float
    ok: bool

    def to_record(self) -> dict:
        return {"var_op": self.var_op,
                "lambda_min_mean": self.lambda_min_mean,
                "delta": self.delta, "ok": self.ok}


def skewness_check(matrix_samples, delta: float = SKEW_DELTA_DEFAULT
                   ) -> SkewnessReport:
    """Is sqrt(E ||A - EA||_op^2) < delta * lambda_min(EA)?

    This is the mean-dominance condition under which random information
    (or covariance) matrices are well-summarized by their expectations.
    """
    if not 0.0 < delta < 2 ** -0.5:
        raise DomainError(
            f"delta must lie in (0, 2^-1/2), got {delta}")
    mats = np.stack([np.atleast_2d(np.asarray(m, dtype=float))
                     for m in matrix_samples])
    if mats.shape[0] < 2:
        raise DomainError("need at least two matrix samples")
    mean = mats.mean(axis=0)
    var_op = float(np.mean([_opnorm(m - mean) ** 2 for m in mats]))
    lam_min = float(sym_eigen(mean)[0][0])
    ok = bool(np.sqrt(var_op) < delta * lam_min)
    return SkewnessReport(var_op=var_op, lambda_min_mean=lam_min,
                          delta=delta, ok=ok)


# ── the four-cell trade-off report ───────────────────────────────────────────

def _psi2(x: np.ndarray, R: int) -> np.ndarray:
    return x / (1.0 + R * x)


@dataclass(frozen=True)
class TradeoffReport:
    """Identifiability and falsifiability bounds across an expansion.

    All spectra are prior-whitened (unit prior scale), so the psi-based
    quantities are dimensionless.  Lower-bound cells omit the unknown
    universal constant; ``dims`` carries the d and d_exp needed to finish
    them.  mi_bound_exp folds the whitened trace-bound correction into the
    psi argument (its proof-level form); delta_i reports the correction's
    magnitude when adverse.
    """

    pair_name: str
    dims: tuple
    iota: np.ndarray
    iota_cond: np.ndarray
    iota_exp: np.ndarray
    mi_bound_base: float
    mi_bound_exp: float
    cmi_term_base: float
    cmi_term_exp: float
    delta_i: float
    delta_f: float
    skew_ok: dict
    hypotheses: dict
    classification: str
    R: int
    trace_bound: Optional[TraceBoundReport] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.delta_f < -1e-8:
            raise NumericalError(
                f"delta_f = {self.delta_f:.3g} < 0 contradicts eigenvalue "
                "interlacing; the spectra were not computed from one panel")
        for name in ("iota", "iota_cond", "iota_exp"):
            v = getattr(self, name)
            if np.any(np.diff(v) < 0):
                raise NumericalError(f"{name} spectrum is not ascending")

    @property
    def hypotheses_met(self) -> bool:
        return all(bool(v) for v in self.hypotheses.values()
                   if isinstance(v, (bool, np.bool_)))

    def to_json(self) -> str:
        payload = {
            "pair": self.pair_name,
            "dims": {"d": self.dims[0], "d_exp": self.dims[1]},
            "spectra": {"iota": self.iota.tolist(),
                        "iota_cond": self.iota_cond.tolist(),
                        "iota_exp": self.iota_exp.tolist()},
            "mi_upper_bounds": {"base": self.mi_bound_base,
                                "expanded": self.mi_bound_exp},
            "cmi_lower_terms": {
                "base": self.cmi_term_base,
                "expanded": self.cmi_term_exp,
                "label": "up to universal constant / log d"},
            "delta_i": self.delta_i,
            "delta_f": self.delta_f,
            "replicates_R": self.R,
            "skew_ok": self.skew_ok,
            "hypotheses": self.hypotheses,
            "classification": self.classification,
            "notes": self.notes,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_text(self) -> str:
        d, d_exp = self.dims
        lines = []
        if not self.hypotheses_met:
            lines.append("!! hypotheses unmet -- bounds reported for "
                         "diagnostic value only")
        lines += [
            f"trade-off report: {self.pair_name}  (d={d}, d_exp={d_exp}, "
            f"{self.classification})",
            f"{'':>24}{'base':>14}{'expanded':>14}",
            (f"{'mi upper bound':>24}{self.mi_bound_base:>14.4f}"
             f"{self.mi_bound_exp:>14.4f}"),
            (f"{'cmi lower term*':>24}{self.cmi_term_base:>14.4f}"
             f"{self.cmi_term_exp:>14.4f}"),
            (f"{'delta_i':>24}{self.delta_i:>28.4f}"),
            (f"{'delta_f':>24}{self.delta_f:>28.4f}"),
            "  * up to a universal constant over log d",
        ]
        return "\n".join(lines)


def tradeoff_report(pair: ExpansionPair, n_prior: int = 120,
                    n_mc: int = 100, seed: int = 0, R: int = 1,
                    delta: float = SKEW_DELTA_DEFAULT,
                    run_trace_bound: bool = True) -> TradeoffReport:
    """Assemble the four-cell identifiability/falsifiability comparison.

    The conditional spectrum is taken from the same prior panel as the
    full expanded spectrum (a principal submatrix of the same mean
    matrix), which makes the interlacing-based delta_f nonnegativity exact
    rather than statistical.
    """
    base, exp_model = pair.base, pair.expanded
    d_sh, d_tot = exp_model.d_shared, exp_model.d_total
    rng = substream(seed, "tradeoff", pair.name)

    info_b, samp_b = prior_expected_fisher(
        base, block="full", n_prior=n_prior, n_mc=n_mc, rng=rng,
        return_samples=True)
    info_e, samp_e = prior_expected_fisher(
        exp_model, block="full", n_prior=n_prior, n_mc=n_mc, rng=rng,
        return_samples=True)

    cov_b = _prior_cov(base, list(range(d_sh)), rng)
    cov_e = _prior_cov(exp_model, list(range(d_tot)), rng)
    offdiag = np.abs(cov_e - np.diag(np.diag(cov_e))).max()
    if offdiag > 1e-10:
        warnings.warn("prior covariance is not diagonal; whitening will not "
                      "preserve the submatrix structure exactly",
                      RuntimeWarning)
    root_b = _sqrt_psd(cov_b)
    root_e = _sqrt_psd(cov_e)
    root_cond = root_e[:d_sh, :d_sh]

    white_b = root_b @ info_b.matrix @ root_b
    white_e = root_e @ info_e.matrix @ root_e
    white_cond = root_cond @ info_e.matrix[:d_sh, :d_sh] @ root_cond

    iota, _ = sym_eigen(white_b)
    iota_exp, _ = sym_eigen(white_e)
    iota_cond, _ = sym_eigen(white_cond)

    trace_rep = None
    delta_m = 0.0
    if run_trace_bound:
        trace_rep = trace_bound_delta(pair, n_mc=max(150, n_mc), seed=seed)
        w2 = np.diag(cov_e)[:d_sh]
        delta_m = float(np.sum(w2 * trace_rep.delta_j))
    delta_i = max(0.0, -delta_m)

    d = d_sh
    mi_bound_base = d * psi(max(float(iota.sum()) / d, 0.0))
    net_trace = max(float(iota_cond.sum()) + min(delta_m, 0.0), 0.0)
    mi_bound_exp = d * psi(net_trace / d)

    cmi_term_base = float(np.sum(_psi2(np.clip(iota, 0.0, None), R)))
    cmi_cond = float(np.sum(_psi2(np.clip(iota_cond, 0.0, None), R)))
    cmi_term_exp = float(np.sum(_psi2(np.clip(iota_exp, 0.0, None), R)))
    delta_f = cmi_term_exp - cmi_cond

    skew = {"base": skewness_check(samp_b, delta=delta).ok,
            "expanded": skewness_check(samp_e, delta=delta).ok}
    hypotheses = {
        "log_concave_base": bool(base.log_concave_prior),
        "log_concave_expanded": bool(exp_model.log_concave_prior),
        "skew_ok_base": skew["base"],
        "skew_ok_expanded": skew["expanded"],
        "normal_posterior": "assumed (not verified)",
    }
    dil = dilution_matrix(pair, n_mc=min(n_prior, 150),
                          n_inner=min(n_mc, 80), seed=seed)
    notes = {
        "whitening": "spectra in unit-prior-scale coordinates",
        "v_pr_base": float(sym_eigen(cov_b)[0][-1]),
        "v_pr_expanded": float(sym_eigen(cov_e)[0][-1]),
        "psi1": "d * psi(. / d)",
        "psi2": "x / (1 + R x), constants omitted",
        "mi_bound_exp_raw": d * psi(max(float(iota_cond.sum()), 0.0) / d),
        "cmi_term_cond": cmi_cond,
    }
    return TradeoffReport(
        pair_name=pair.name, dims=(d_sh, d_tot),
        iota=iota, iota_cond=iota_cond, iota_exp=iota_exp,
        mi_bound_base=mi_bound_base, mi_bound_exp=mi_bound_exp,
        cmi_term_base=cmi_term_base, cmi_term_exp=cmi_term_exp,
        delta_i=delta_i, delta_f=delta_f, skew_ok=skew,
        hypotheses=hypotheses, classification=dil.classification,
        R=R, trace_bound=trace_rep, notes=notes)
