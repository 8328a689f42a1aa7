"""Model atoms: parameter points, datasets, model specs, expansions, builtins.

A ModelSpec bundles the prior, likelihood and simulators for one Bayesian
model with an unconstrained parameter vector.  An ExpansionPair ties a base
model to an expanded model that recovers it at a (possibly infinite) value of
the extra parameters.  The builtin registry wires up the small analytic
models every estimator in the package is validated against.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from .gaussian import LinearGaussian
from .rand import substream

LOG_2PI = float(np.log(2.0 * np.pi))


# ── extended reals ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ExtReal:
    """Extended-real scalar: a float, +infinity or -infinity, tagged.

    Infinity is a tag, never a float sentinel, so arithmetic on limit points
    cannot silently leak into likelihood evaluations.
    """

    value: float
    inf: int = 0  # 0 finite, +1 plus-infinity, -1 minus-infinity

    def __post_init__(self):
        if self.inf not in (-1, 0, 1):
            raise ValueError(f"inf tag must be -1, 0 or 1, got {self.inf}")
        if self.inf == 0 and not math.isfinite(self.value):
            raise ValueError("finite ExtReal must hold a finite value")

    @classmethod
    def finite(cls, x: float) -> "ExtReal":
        return cls(float(x), 0)

    @classmethod
    def posinf(cls) -> "ExtReal":
        return cls(0.0, +1)

    @classmethod
    def neginf(cls) -> "ExtReal":
        return cls(0.0, -1)

    @property
    def is_finite(self) -> bool:
        return self.inf == 0

    def __float__(self) -> float:
        if not self.is_finite:
            raise ValueError("cannot convert infinite ExtReal to float")
        return self.value

    def __repr__(self) -> str:
        if self.inf > 0:
            return "+inf"
        if self.inf < 0:
            return "-inf"
        return repr(self.value)


# ── parameter and data containers ────────────────────────────────────────────

@dataclass(frozen=True)
class ParamPoint:
    """One parameter vector with its shared/extra layout."""

    values: np.ndarray
    d_shared: int
    d_extra: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=float).ravel())
        if self.values.size != self.d_shared + self.d_extra:
            raise ValueError(
                f"point has {self.values.size} values, layout says "
                f"{self.d_shared}+{self.d_extra}")

    @property
    def shared(self) -> np.ndarray:
        return self.values[:self.d_shared]

    @property
    def extra(self) -> np.ndarray:
        return self.values[self.d_shared:]


def point_values(point) -> np.ndarray:
    """Accept a ParamPoint or a bare array and return the flat values."""
    if isinstance(point, ParamPoint):
        return point.values
    return np.asarray(point, dtype=float).ravel()


@dataclass
class DataSet:
    """Observed data: an n-vector of values plus optional group labels.

    Group labels, when present, are integers 0..L-1 with every label
    occupied.  `seed` records how the data was simulated (None for external
    data).
    """

    values: np.ndarray
    groups: Optional[np.ndarray] = None
    name: str = "data"
    seed: Optional[int] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size == 0:
            raise ValueError("dataset must contain at least one observation")
        if self.groups is not None:
            self.groups = np.asarray(self.groups, dtype=int).ravel()
            if self.groups.size != self.values.size:
                raise ValueError("groups and values length mismatch")
            labels = np.unique(self.groups)
            lmax = labels.max()
            if labels.min() < 0:
                raise ValueError("group labels must be non-negative")
            if labels.size != lmax + 1:
                raise ValueError(
                    f"group labels must cover 0..{lmax} with no gaps")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def n_groups(self) -> int:
        return 0 if self.groups is None else int(self.groups.max()) + 1

    def with_values(self, values: np.ndarray, name: Optional[str] = None) -> "DataSet":
        """Same structure (groups), new values."""
        return DataSet(values=np.asarray(values, dtype=float),
                       groups=None if self.groups is None else self.groups.copy(),
                       name=self.name if name is None else name,
                       seed=None)

    def extended(self, new_values, new_groups, name=None) -> "DataSet":
        values = np.concatenate([self.values, np.asarray(new_values, dtype=float).ravel()])
        if self.groups is None:
            groups = None
            if new_groups is not None:
                raise ValueError("cannot append grouped data to ungrouped dataset")
        else:
            groups = np.concatenate([self.groups, np.asarray(new_groups, dtype=int).ravel()])
        return DataSet(values=values, groups=groups,
                       name=self.name if name is None else name, seed=None)

    # ── CSV round trip: columns exactly (group, obs_index, value) ──────────

    def to_csv(self, fileobj) -> None:
        writer = csv.writer(fileobj)
        writer.writerow(["group", "obs_index", "value"])
        for i, v in enumerate(self.values):
            g = "" if self.groups is None else int(self.groups[i])
            writer.writerow([g, i, repr(float(v))])

    @classmethod
    def from_csv(cls, fileobj, name: str = "data") -> "DataSet":
        reader = csv.reader(row for row in fileobj if not row.startswith("#"))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["group", "obs_index", "value"]:
            raise ValueError("dataset CSV must start with header group,obs_index,value")
        rows = sorted(((int(r[1]), r[0], float(r[2])) for r in reader if r))
        if not rows:
            raise ValueError("dataset CSV has no observations")
        values = np.array([r[2] for r in rows])
        glabels = [r[1].strip() for r in rows]
        if all(g == "" for g in glabels):
            groups = None
        elif any(g == "" for g in glabels):
            raise ValueError("dataset CSV mixes grouped and ungrouped rows")
        else:
            groups = np.array([int(g) for g in glabels])
        return cls(values=values, groups=groups, name=name)


# ── model specification ──────────────────────────────────────────────────────

@dataclass
class Analytic:
    """Optional closed-form oracles attached to a builtin model.

    Every field may be None; estimators fall back to Monte Carlo when an
    oracle is missing.
    """

    # linear-Gaussian view of (prior, likelihood) for a given data template
    lingauss: Optional[Callable[[DataSet], LinearGaussian]] = None
    # expected Fisher information of the likelihood at a parameter point
    fisher: Optional[Callable[[np.ndarray], np.ndarray]] = None
    # Fisher info of the extra-marginalized likelihood at a shared point
    fisher_shared_marginal: Optional[Callable[[np.ndarray], np.ndarray]] = None
    prior_mean: Optional[np.ndarray] = None
    prior_cov: Optional[np.ndarray] = None
    # exact posterior sampler: (y, size, rng) -> (size, d) draws
    posterior_sampler: Optional[Callable[[DataSet, int, np.random.Generator], np.ndarray]] = None


@dataclass(eq=False)
class ModelSpec:
    """A Bayesian model on an unconstrained parameter vector.

    The private callables work on bare arrays; the public methods accept
    ParamPoint or array and validate shapes.
    """

    name: str
    d_shared: int
    d_extra: int
    hyper: dict
    _log_prior: Callable[[np.ndarray], float]
    _log_lik: Callable[[DataSet, np.ndarray], float]
    _sample_prior: Callable[[np.random.Generator], np.ndarray]
    # (point values, template dataset, rng) -> new observation values
    _sample_data: Callable[[np.ndarray, DataSet, np.random.Generator], np.ndarray]
    canonical_template: DataSet
    pointwise: bool = True
    log_concave_prior: bool = False
    # (values (B,n), groups, thetas (S,d)) -> (B,S) log-likelihood matrix
    _loglik_many: Optional[Callable] = None
    analytic: Optional[Analytic] = None
    # fallback box for grid/RWM initialization, per coordinate
    default_bounds: Optional[tuple[np.ndarray, np.ndarray]] = None

    @property
    def d_total(self) -> int:
        return self.d_shared + self.d_extra

    def point(self, values) -> ParamPoint:
        return ParamPoint(np.asarray(values, dtype=float),
                          self.d_shared, self.d_extra)

    def log_prior(self, point) -> float:
        v = point_values(point)
        if v.size != self.d_total:
            raise ValueError(f"{self.name}: expected {self.d_total} parameters, got {v.size}")
        return float(self._log_prior(v))

    def log_lik(self, y: DataSet, point) -> float:
        v = point_values(point)
        if v.size != self.d_total:
            raise ValueError(f"{self.name}: expected {self.d_total} parameters, got {v.size}")
        return float(self._log_lik(y, v))

    def log_post(self, y: DataSet, point) -> float:
        lp = self.log_prior(point)
        if not np.isfinite(lp):
            return -np.inf
        return lp + self.log_lik(y, point)

    def sample_prior(self, rng: np.random.Generator, size: Optional[int] = None):
        if size is None:
            return self.point(self._sample_prior(rng))
        return np.stack([self._sample_prior(rng) for _ in range(size)])

    def sample_data(self, point, rng: np.random.Generator,
                    template: Optional[DataSet] = None) -> DataSet:
        tmpl = self.canonical_template if template is None else template
        values = self._sample_data(point_values(point), tmpl, rng)
        return tmpl.with_values(values, name=f"{self.name}-sim")

    def loglik_matrix(self, values: np.ndarray, groups, thetas: np.ndarray) -> np.ndarray:
        """(B, S) matrix of log p(y_b | theta_s); vectorized when possible."""
        values = np.atleast_2d(np.asarray(values, dtype=float))
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if self._loglik_many is not None:
            return self._loglik_many(values, groups, thetas)
        out = np.empty((values.shape[0], thetas.shape[0]))
        for b in range(values.shape[0]):
            y = DataSet(values=values[b], groups=groups, name="batch")
            for s in range(thetas.shape[0]):
                out[b, s] = self._log_lik(y, thetas[s])
        return out


@dataclass(eq=False)
class ExpansionPair:
    """Base model plus expanded model recovering it at extra = lambda0.

    `lambda0` is a tuple of tagged extended reals.  When any coordinate is
    infinite, `limit_ladder` holds the finite extra-parameter vectors used to
    verify the limit (strictly improving agreement along the ladder).
    """

    name: str
    base: ModelSpec
    expanded: ModelSpec
    lambda0: tuple
    # expanded model's prior for the shared block given extra = lam
    _log_prior_shared_cond: Callable[[np.ndarray, np.ndarray], float]
    # expanded model's prior for the extra block given shared = theta
    _log_prior_extra_cond: Callable[[np.ndarray, np.ndarray], float]
    prior_independent: bool = True
    limit_ladder: Optional[tuple] = None

    def __post_init__(self):
        if self.base.d_extra != 0:
            raise ValueError("base model must have no extra parameters")
        if self.expanded.d_shared != self.base.d_shared:
            raise ValueError("expanded model must share the base parameter block")
        if len(self.lambda0) != self.expanded.d_extra:
            raise ValueError("lambda0 length must match expanded d_extra")
        if any(not e.is_finite for e in self.lambda0) and self.limit_ladder is None:
            # default approach sequence: push infinite coordinates out along
            # decades, keep finite coordinates fixed
            ladder = []
            for mag in (1e1, 1e2, 1e3, 1e4):
                vec = np.array([e.value if e.is_finite else e.inf * mag
                                for e in self.lambda0])
                ladder.append(vec)
            self.limit_ladder = tuple(ladder)

    @property
    def lambda0_finite(self) -> np.ndarray:
        if any(not e.is_finite for e in self.lambda0):
            raise ValueError(f"{self.name}: lambda0 has infinite coordinates")
        return np.array([float(e) for e in self.lambda0])

    def log_joint_base(self, y: DataSet, theta: np.ndarray) -> float:
        return self.base.log_prior(theta) + self.base.log_lik(y, theta)

    def log_joint_cond(self, y: DataSet, theta: np.ndarray, lam: np.ndarray) -> float:
        """log p(y, theta | extra = lam) in the expanded model."""
        theta = np.asarray(theta, dtype=float).ravel()
        lam = np.asarray(lam, dtype=float).ravel()
        full = np.concatenate([theta, lam])
        return (float(self._log_prior_shared_cond(theta, lam))
                + self.expanded.log_lik(y, full))

    def log_prior_extra_cond(self, lam: np.ndarray, theta: np.ndarray) -> float:
        return float(self._log_prior_extra_cond(np.asarray(lam, dtype=float).ravel(),
                                                np.asarray(theta, dtype=float).ravel()))


@dataclass
class ValidationReport:
    pair_name: str
    passed: bool
    max_discrepancy: float
    tol: float
    ladder: Optional[list] = None          # per-rung max discrepancies
    ladder_values: Optional[list] = None   # the extra vectors probed
    n_probes: int = 0


def validate_expansion(pair: ExpansionPair, tol: float = 1e-6,
                       tol_limit: float = 1e-3, n_prior: int = 5,
                       n_data: int = 5, seed: int = 20260815) -> ValidationReport:
    """Check that the expanded model recovers the base model at lambda0.

    Finite lambda0: max |log p_b(y, theta) - log p(y, theta | lambda0)| over
    the probe grid must be <= tol.  Infinite coordinates: the same
    discrepancy must strictly decrease along the limit ladder and the final
    rung must come in under tol_limit.
    """
    rng = substream(seed, "validate", pair.name)
    probes = []
    for _ in range(n_prior):
        theta = pair.base.sample_prior(rng).values
        for _ in range(n_data):
            probes.append((theta, pair.base.sample_data(theta, rng)))
    origin_theta = np.zeros(pair.base.d_shared)
    origin_y = pair.base.canonical_template
    probes.append((origin_theta, origin_y))

    def max_disc(lam: np.ndarray) -> float:
        worst = 0.0
        for theta, y in probes:
            d = abs(pair.log_joint_base(y, theta) - pair.log_joint_cond(y, theta, lam))
            worst = max(worst, d)
        return worst

    if all(e.is_finite for e in pair.lambda0):
        worst = max_disc(pair.lambda0_finite)
        return ValidationReport(pair_name=pair.name, passed=worst <= tol,
                                max_discrepancy=worst, tol=tol,
                                n_probes=len(probes))

    rung_vals = [max_disc(np.asarray(lam, dtype=float)) for lam in pair.limit_ladder]
    decreasing = all(rung_vals[i + 1] < rung_vals[i] for i in range(len(rung_vals) - 1))
    passed = decreasing and rung_vals[-1] <= tol_limit
    return ValidationReport(pair_name=pair.name, passed=passed,
                            max_discrepancy=rung_vals[-1], tol=tol_limit,
                            ladder=rung_vals,
                            ladder_values=[np.asarray(l).tolist() for l in pair.limit_ladder],
                            n_probes=len(probes))


# ── likelihood helpers ───────────────────────────────────────────────────────

def _gaussian_design_loglik(design: np.ndarray, noise_var):
    """Vectorized iid-Gaussian log-likelihood for a fixed design matrix."""
    design = np.atleast_2d(design)
    n = design.shape[0]
    nv = np.broadcast_to(np.asarray(noise_var, dtype=float), (n,)).copy()
    const = -0.5 * (n * LOG_2PI + np.log(nv).sum())

    def single(y: DataSet, v: np.ndarray) -> float:
        r = y.values - design @ v
        return const - 0.5 * float((r * r / nv).sum())

    def many(values: np.ndarray, groups, thetas: np.ndarray) -> np.ndarray:
        mu = design @ thetas.T                      # (n, S)
        wy = values / nv                            # (B, n)
        cross = wy @ mu                             # (B, S)
        ynorm = (values * wy).sum(axis=1)           # (B,)
        mnorm = (mu * (mu / nv[:, None])).sum(axis=0)  # (S,)
        return const - 0.5 * (ynorm[:, None] - 2.0 * cross + mnorm[None, :])

    return single, many


def _t_logpdf(x: np.ndarray, df: float) -> np.ndarray:
    return (special.gammaln((df + 1) / 2) - special.gammaln(df / 2)
            - 0.5 * np.log(df * np.pi)
            - (df + 1) / 2 * np.log1p(np.square(x) / df))


def _log_gamma_pdf_in_log(u, shape: float, rate: float):
    """Density of log X where X ~ Gamma(shape, rate), Jacobian included."""
    u = np.asarray(u, dtype=float)
    return (shape * np.log(rate) - special.gammaln(shape)
            + shape * u - rate * np.exp(u))


def _norm_logpdf_prior(v, var):
    v = np.asarray(v, dtype=float)
    var = np.asarray(var, dtype=float)
    return float(-0.5 * np.sum(LOG_2PI + np.log(var) + v * v / var))


# ── builtin factories ────────────────────────────────────────────────────────

def _hp(hyper: Optional[dict], defaults: dict, name: str) -> dict:
    out = dict(defaults)
    if hyper:
        unknown = set(hyper) - set(defaults)
        if unknown:
            raise ValueError(f"{name}: unknown hyperparameters {sorted(unknown)}; "
                             f"known: {sorted(defaults)}")
        out.update(hyper)
    return out


def _gaussian_location_spec(name: str, n: int, sigma_p: float,
                            hyper: dict) -> ModelSpec:
    """y_i ~ N(theta, 1) iid, theta ~ N(0, sigma_p^2)."""
    design = np.ones((n, 1))
    single, many = _gaussian_design_loglik(design, 1.0)
    prior_cov = np.array([[sigma_p ** 2]])
    template = DataSet(values=np.zeros(n), name=f"{name}-template")

    def lingauss(y: Optional[DataSet]) -> LinearGaussian:
        m = n if y is None else y.n
        return LinearGaussian(design=np.ones((m, 1)), noise_var=1.0,
                              prior_mean=np.zeros(1), prior_cov=prior_cov)

    return ModelSpec(
        name=name, d_shared=1, d_extra=0, hyper=hyper,
        _log_prior=lambda v: _norm_logpdf_prior(v, sigma_p ** 2),
        _log_lik=single,
        _sample_prior=lambda rng: rng.normal(0.0, sigma_p, size=1),
        _sample_data=lambda v, tmpl, rng: rng.normal(v[0], 1.0, size=tmpl.n),
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=many,
        analytic=Analytic(
            lingauss=lingauss,
            fisher=lambda v: np.array([[float(n)]]),
            prior_mean=np.zeros(1), prior_cov=prior_cov),
        default_bounds=(np.array([-8.0 * sigma_p]), np.array([8.0 * sigma_p])),
    )


def make_normal_location(hyper=None) -> ModelSpec:
    hp = _hp(hyper, {"n": 1, "sigma_p": 1.0}, "normal-location")
    return _gaussian_location_spec("normal-location", int(hp["n"]),
                                   float(hp["sigma_p"]), hp)


def make_prior_scale(hyper=None) -> ModelSpec:
    hp = _hp(hyper, {"n": 1, "sigma_p": 1.0}, "prior-scale")
    spec = _gaussian_location_spec("prior-scale", int(hp["n"]),
                                   float(hp["sigma_p"]), hp)
    return spec


def make_redundant_location(hyper=None) -> ModelSpec:
    """y ~ N((theta1+theta2)/sqrt(2), 1), theta_i iid N(0,1)."""
    hp = _hp(hyper, {"n": 1}, "redundant-location")
    n = int(hp["n"])
    design = np.full((n, 2), 1.0 / np.sqrt(2.0))
    single, many = _gaussian_design_loglik(design, 1.0)
    template = DataSet(values=np.zeros(n), name="redundant-location-template")

    def lingauss(y: Optional[DataSet]) -> LinearGaussian:
        m = n if y is None else y.n
        return LinearGaussian(design=np.full((m, 2), 1.0 / np.sqrt(2.0)),
                              noise_var=1.0, prior_mean=np.zeros(2),
                              prior_cov=np.eye(2))

    return ModelSpec(
        name="redundant-location", d_shared=2, d_extra=0, hyper=hp,
        _log_prior=lambda v: _norm_logpdf_prior(v, 1.0),
        _log_lik=single,
        _sample_prior=lambda rng: rng.normal(size=2),
        _sample_data=lambda v, tmpl, rng: rng.normal(
            (v[0] + v[1]) / np.sqrt(2.0), 1.0, size=tmpl.n),
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=many,
        analytic=Analytic(lingauss=lingauss,
                          fisher=lambda v: np.full((2, 2), n / 2.0),
                          prior_mean=np.zeros(2), prior_cov=np.eye(2)),
        default_bounds=(np.full(2, -8.0), np.full(2, 8.0)),
    )


def make_flat(hyper=None) -> ModelSpec:
    """Null baseline: y ~ N(0, 1) independent of theta, theta ~ N(0, 1).

    Every information quantity is exactly zero; useful for calibrating the
    estimators' noise floor.
    """
    hp = _hp(hyper, {"n": 2}, "flat")
    n = int(hp["n"])
    design = np.zeros((n, 1))
    single, many = _gaussian_design_loglik(design, 1.0)
    template = DataSet(values=np.zeros(n), name="flat-template")

    def lingauss(y: Optional[DataSet]) -> LinearGaussian:
        m = n if y is None else y.n
        return LinearGaussian(design=np.zeros((m, 1)), noise_var=1.0,
                              prior_mean=np.zeros(1), prior_cov=np.eye(1))

    return ModelSpec(
        name="flat", d_shared=1, d_extra=0, hyper=hp,
        _log_prior=lambda v: _norm_logpdf_prior(v, 1.0),
        _log_lik=single,
        _sample_prior=lambda rng: rng.normal(size=1),
        _sample_data=lambda v, tmpl, rng: rng.normal(0.0, 1.0, size=tmpl.n),
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=many,
        analytic=Analytic(lingauss=lingauss,
                          fisher=lambda v: np.zeros((1, 1)),
                          prior_mean=np.zeros(1), prior_cov=np.eye(1)),
        default_bounds=(np.array([-8.0]), np.array([8.0])),
    )


def make_split_means(hyper=None) -> ModelSpec:
    """2n observations; base: one common mean; expanded: one mean per half."""
    hp = _hp(hyper, {"n": 1, "variant": "base"}, "split-means")
    n = int(hp["n"])
    variant = str(hp["variant"])
    groups = np.repeat([0, 1], n)
    if variant == "base":
        spec = _gaussian_location_spec("split-means", 2 * n, 1.0, hp)
        # keep the two halves labelled even though the base model ignores them
        spec.canonical_template = DataSet(values=np.zeros(2 * n), groups=groups,
                                          name="split-means-template")
        return spec
    if variant != "expanded":
        raise ValueError(f"split-means: variant must be base or expanded, got {variant!r}")

    design = np.zeros((2 * n, 2))
    design[np.arange(2 * n), groups] = 1.0
    single, many = _gaussian_design_loglik(design, 1.0)
    template = DataSet(values=np.zeros(2 * n), groups=groups,
                       name="split-means-template")

    def lingauss(y: Optional[DataSet]) -> LinearGaussian:
        if y is None or y.groups is None:
            d = design
        else:
            d = np.zeros((y.n, 2))
            d[np.arange(y.n), y.groups] = 1.0
        return LinearGaussian(design=d, noise_var=1.0,
                              prior_mean=np.zeros(2), prior_cov=np.eye(2))

    def sample(v, tmpl, rng):
        g = tmpl.groups if tmpl.groups is not None else groups
        return rng.normal(v[np.asarray(g)], 1.0)

    return ModelSpec(
        name="split-means", d_shared=2, d_extra=0, hyper=hp,
        _log_prior=lambda v: _norm_logpdf_prior(v, 1.0),
        _log_lik=single,
        _sample_prior=lambda rng: rng.normal(size=2),
        _sample_data=sample,
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=many,
        analytic=Analytic(lingauss=lingauss,
                          fisher=lambda v: np.diag([float(n), float(n)]),
                          prior_mean=np.zeros(2), prior_cov=np.eye(2)),
        default_bounds=(np.full(2, -8.0), np.full(2, 8.0)),
    )


def make_normal_gamma(hyper=None) -> ModelSpec:
    """y ~ N(theta1, theta2^{-1/2}); (theta1, theta2) ~ NG(0, mu_v, 2, mu_v).

    Parametrized as (theta1, log theta2) so the vector is unconstrained;
    mu_v is the prior mean of the noise variance.
    """
    hp = _hp(hyper, {"n": 2, "mu_v": 1.0}, "normal-gamma")
    n, mu_v = int(hp["n"]), float(hp["mu_v"])
    a0, b0, l0 = 2.0, mu_v, mu_v
    template = DataSet(values=np.zeros(n), name="normal-gamma-template")

    def log_prior(v):
        th1, u = v[0], v[1]
        lp_gamma = float(_log_gamma_pdf_in_log(u, a0, b0))
        # theta1 | theta2 ~ N(0, 1/(l0 theta2))
        t = np.exp(u)
        lp_loc = -0.5 * (LOG_2PI - np.log(l0 * t) + l0 * t * th1 * th1)
        return lp_gamma + lp_loc

    def log_lik(y, v):
        th1, u = v[0], v[1]
        t = np.exp(u)
        r = y.values - th1
        return float(0.5 * y.n * (u - LOG_2PI) - 0.5 * t * (r * r).sum())

    def loglik_many(values, groups, thetas):
        th1 = thetas[:, 0]
        t = np.exp(thetas[:, 1])
        m = values.shape[1]
        ssum = values.sum(axis=1)
        ssq = (values * values).sum(axis=1)
        quad = ssq[:, None] - 2.0 * ssum[:, None] * th1[None, :] + m * (th1 ** 2)[None, :]
        return 0.5 * m * (thetas[:, 1] - LOG_2PI)[None, :] - 0.5 * t[None, :] * quad

    def sample_prior(rng):
        t = rng.gamma(a0, 1.0 / b0)
        th1 = rng.normal(0.0, 1.0 / np.sqrt(l0 * t))
        return np.array([th1, np.log(t)])

    def posterior_update(y: DataSet):
        m = y.n
        ybar = float(y.values.mean())
        ss = float(((y.values - ybar) ** 2).sum())
        mu_n = m * ybar / (l0 + m)
        lam_n = l0 + m
        a_n = a0 + m / 2.0
        b_n = b0 + 0.5 * ss + 0.5 * l0 * m * ybar ** 2 / (l0 + m)
        return mu_n, lam_n, a_n, b_n

    def posterior_sampler(y, size, rng):
        mu_n, lam_n, a_n, b_n = posterior_update(y)
        t = rng.gamma(a_n, 1.0 / b_n, size=size)
        th1 = rng.normal(mu_n, 1.0 / np.sqrt(lam_n * t))
        return np.column_stack([th1, np.log(t)])

    spec = ModelSpec(
        name="normal-gamma", d_shared=2, d_extra=0, hyper=hp,
        _log_prior=log_prior,
        _log_lik=log_lik,
        _sample_prior=sample_prior,
        _sample_data=lambda v, tmpl, rng: rng.normal(
            v[0], np.exp(-0.5 * v[1]), size=tmpl.n),
        canonical_template=template,
        log_concave_prior=False,
        _loglik_many=loglik_many,
        analytic=Analytic(posterior_sampler=posterior_sampler),
        default_bounds=(np.array([-10.0, -12.0]), np.array([10.0, 12.0])),
    )
    spec.posterior_update = posterior_update  # used by conjugate tests
    return spec


def make_student_t_outlier(hyper=None) -> ModelSpec:
    """y_i ~ t(theta, scale, df) iid, theta ~ uniform(lo, hi)."""
    hp = _hp(hyper, {"df": 10.0, "scale": 1.0, "lo": -15.0, "hi": 15.0, "n": 2},
             "student-t-outlier")
    df, scale = float(hp["df"]), float(hp["scale"])
    lo, hi = float(hp["lo"]), float(hp["hi"])
    n = int(hp["n"])
    template = DataSet(values=np.zeros(n), name="student-t-template")
    log_range = np.log(hi - lo)

    def log_prior(v):
        if lo <= v[0] <= hi:
            return -log_range
        return -np.inf

    def log_lik(y, v):
        return float(_t_logpdf((y.values - v[0]) / scale, df).sum()
                     - y.n * np.log(scale))

    def loglik_many(values, groups, thetas):
        # (B, S, n) is fine here: this model is only ever used with tiny n
        x = (values[:, None, :] - thetas[None, :, 0:1]) / scale
        return _t_logpdf(x, df).sum(axis=2) - values.shape[1] * np.log(scale)

    return ModelSpec(
        name="student-t-outlier", d_shared=1, d_extra=0, hyper=hp,
        _log_prior=log_prior,
        _log_lik=log_lik,
        _sample_prior=lambda rng: rng.uniform(lo, hi, size=1),
        _sample_data=lambda v, tmpl, rng: v[0] + scale * rng.standard_t(df, size=tmpl.n),
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=loglik_many,
        default_bounds=(np.array([lo]), np.array([hi])),
    )


def make_location_nuisance(hyper=None) -> ExpansionPair:
    """Base y ~ N(theta, 1); expanded y ~ N(theta + lambda, 1)."""
    hp = _hp(hyper, {"n": 1, "s2_theta": 1.0, "s2_lambda": 3.0}, "location-nuisance")
    n = int(hp["n"])
    s2t, s2l = float(hp["s2_theta"]), float(hp["s2_lambda"])

    base = _gaussian_location_spec("location-nuisance-base", n, np.sqrt(s2t), hp)

    design = np.ones((n, 2))
    single, many = _gaussian_design_loglik(design, 1.0)
    prior_cov = np.diag([s2t, s2l])
    template = DataSet(values=np.zeros(n), name="location-nuisance-template")

    def lingauss(y: Optional[DataSet]) -> LinearGaussian:
        m = n if y is None else y.n
        return LinearGaussian(design=np.ones((m, 2)), noise_var=1.0,
                              prior_mean=np.zeros(2), prior_cov=prior_cov)

    expanded = ModelSpec(
        name="location-nuisance", d_shared=1, d_extra=1, hyper=hp,
        _log_prior=lambda v: _norm_logpdf_prior(v, np.array([s2t, s2l])),
        _log_lik=single,
        _sample_prior=lambda rng: rng.normal(0.0, np.sqrt([s2t, s2l])),
        _sample_data=lambda v, tmpl, rng: rng.normal(v[0] + v[1], 1.0, size=tmpl.n),
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=many,
        analytic=Analytic(
            lingauss=lingauss,
            fisher=lambda v: np.full((2, 2), float(n)),
            fisher_shared_marginal=lambda th: np.array([[n / (1.0 + n * s2l)]]),
            prior_mean=np.zeros(2), prior_cov=prior_cov),
        default_bounds=(np.array([-8 * np.sqrt(s2t), -8 * np.sqrt(s2l)]),
                        np.array([8 * np.sqrt(s2t), 8 * np.sqrt(s2l)])),
    )

    return ExpansionPair(
        name="location-nuisance", base=base, expanded=expanded,
        lambda0=(ExtReal.finite(0.0),),
        _log_prior_shared_cond=lambda th, lam: _norm_logpdf_prior(th, s2t),
        _log_prior_extra_cond=lambda lam, th: _norm_logpdf_prior(lam, s2l),
    )


def _linreg_design(n: int, m: int, rho_z: float, design_seed: int):
    """Deterministic regression design: standardized X, z at target overlap.

    z is centered, then scaled to sample variance n; rho_z = 0 requests exact
    orthogonality to the columns of X and the intercept.
    """
    rng = substream(design_seed, "linreg-design")
    x = rng.normal(size=(n, m))
    x = (x - x.mean(axis=0)) / x.std(axis=0)
    raw = rng.normal(size=n)
    basis = np.column_stack([x, np.ones(n)])
    resid = raw - basis @ np.linalg.lstsq(basis, raw, rcond=None)[0]
    resid /= resid.std()
    if rho_z == 0.0:
        z = resid
    else:
        shared = x.sum(axis=1) / np.sqrt(m)
        z = rho_z * shared + np.sqrt(1.0 - rho_z ** 2) * resid
        z = (z - z.mean()) / z.std()
    return x, z * np.sqrt(n)


def make_linreg_addpred(hyper=None) -> ExpansionPair:
    """Gaussian regression; the expansion adds one more predictor.

    Base parameters (beta_1..m, alpha, tau) with noise variance e^tau;
    expanded appends the new predictor's coefficient lambda.
    """
    hp = _hp(hyper, {"n": 20, "m": 2, "rho_z": 0.5, "s2_coef": 1.0,
                     "s2_tau": 0.25, "s2_lambda": 1.0, "design_seed": 0},
             "linreg-addpred")
    n, m = int(hp["n"]), int(hp["m"])
    s2c, s2tau, s2lam = float(hp["s2_coef"]), float(hp["s2_tau"]), float(hp["s2_lambda"])
    x, z = _linreg_design(n, m, float(hp["rho_z"]), int(hp["design_seed"]))
    template = DataSet(values=np.zeros(n), name="linreg-template")
    d_base = m + 2

    def make_spec(with_z: bool) -> ModelSpec:
        cols = np.column_stack([x, np.ones(n), z]) if with_z else np.column_stack([x, np.ones(n)])
        # parameter order: (beta_1..m, alpha, tau [, lambda]) — lambda last
        pr_var = np.concatenate([np.full(m, s2c), [s2c], [s2tau]]
                                + ([[s2lam]] if with_z else []))

        def mean_of(v):
            if with_z:
                coef = np.concatenate([v[:m + 1], v[m + 2:m + 3]])
            else:
                coef = v[:m + 1]
            return cols @ coef

        def log_lik(y, v):
            tau = v[m + 1]
            r = y.values - mean_of(v)
            return float(-0.5 * (y.n * (LOG_2PI + tau) + np.exp(-tau) * (r * r).sum()))

        def loglik_many(values, groups, thetas):
            tau = thetas[:, m + 1]
            if with_z:
                coef = np.column_stack([thetas[:, :m + 1], thetas[:, m + 2]])
            else:
                coef = thetas[:, :m + 1]
            mu = cols @ coef.T                      # (n, S)
            cross = values @ mu                     # (B, S)
            ynorm = (values * values).sum(axis=1)
            mnorm = (mu * mu).sum(axis=0)
            quad = ynorm[:, None] - 2 * cross + mnorm[None, :]
            return -0.5 * (values.shape[1] * (LOG_2PI + tau)[None, :]
                           + np.exp(-tau)[None, :] * quad)

        def sample_prior(rng):
            return rng.normal(0.0, np.sqrt(pr_var))

        def sample_data(v, tmpl, rng):
            return mean_of(v) + np.exp(0.5 * v[m + 1]) * rng.normal(size=tmpl.n)

        def fisher(v):
            tau = v[m + 1]
            d = pr_var.size
            f = np.zeros((d, d))
            idx = list(range(m + 1)) + ([m + 2] if with_z else [])
            f[np.ix_(idx, idx)] = np.exp(-tau) * (cols.T @ cols)
            f[m + 1, m + 1] = n / 2.0
            return f

        def fisher_shared_marginal(th):
            # y | theta ~ N(X beta + alpha, e^tau I + s2_lambda z z^T)
            tau = th[m + 1]
            sig = np.exp(tau) * np.eye(n) + s2lam * np.outer(z, z)
            si = np.linalg.inv(sig)
            jmean = np.column_stack([x, np.ones(n)])
            f = np.zeros((d_base, d_base))
            f[:m + 1, :m + 1] = jmean.T @ si @ jmean
            msq = si * np.exp(tau)
            f[m + 1, m + 1] = 0.5 * np.trace(msq @ msq)
            return f

        return ModelSpec(
            name="linreg-addpred" if with_z else "linreg-addpred-base",
            d_shared=d_base, d_extra=1 if with_z else 0, hyper=hp,
            _log_prior=lambda v: _norm_logpdf_prior(v, pr_var),
            _log_lik=log_lik,
            _sample_prior=sample_prior,
            _sample_data=sample_data,
            canonical_template=template,
            log_concave_prior=True,
            _loglik_many=loglik_many,
            analytic=Analytic(
                fisher=fisher,
                fisher_shared_marginal=fisher_shared_marginal if with_z else None,
                prior_mean=np.zeros(pr_var.size), prior_cov=np.diag(pr_var)),
            default_bounds=(-8 * np.sqrt(pr_var), 8 * np.sqrt(pr_var)),
        )

    base = make_spec(False)
    expanded = make_spec(True)
    base_var = np.concatenate([np.full(m, s2c), [s2c], [s2tau]])

    pair = ExpansionPair(
        name="linreg-addpred", base=base, expanded=expanded,
        lambda0=(ExtReal.finite(0.0),),
        _log_prior_shared_cond=lambda th, lam: _norm_logpdf_prior(th, base_var),
        _log_prior_extra_cond=lambda lam, th: _norm_logpdf_prior(lam, s2lam),
    )
    pair.design_x, pair.design_z = x, z
    return pair


def make_poisson_negbin(hyper=None) -> ExpansionPair:
    """Base y ~ Poisson(e^mu); expansion frees the shape of a NegBin.

    Extra parameter is the log shape; the base model sits at log-shape
    = +infinity, so validation climbs a ladder of finite shapes.
    """
    hp = _hp(hyper, {"n": 5}, "poisson-negbin")
    n = int(hp["n"])
    template = DataSet(values=np.zeros(n), name="poisson-negbin-template")

    def pois_single(y, v):
        mu = v[0]
        return float((y.values * mu - np.exp(mu)).sum()
                     - special.gammaln(y.values + 1).sum())

    def pois_many(values, groups, thetas):
        mu = thetas[:, 0]
        ssum = values.sum(axis=1)
        lgam = special.gammaln(values + 1).sum(axis=1)
        return (ssum[:, None] * mu[None, :]
                - values.shape[1] * np.exp(mu)[None, :] - lgam[:, None])

    base = ModelSpec(
        name="poisson-negbin-base", d_shared=1, d_extra=0, hyper=hp,
        _log_prior=lambda v: _norm_logpdf_prior(v, 1.0),
        _log_lik=pois_single,
        _sample_prior=lambda rng: rng.normal(size=1),
        _sample_data=lambda v, tmpl, rng: rng.poisson(np.exp(v[0]), size=tmpl.n).astype(float),
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=pois_many,
        analytic=Analytic(fisher=lambda v: np.array([[n * np.exp(v[0])]]),
                          prior_mean=np.zeros(1), prior_cov=np.eye(1)),
        default_bounds=(np.array([-6.0]), np.array([6.0])),
    )

    def nb_terms(values, mu, lam):
        """log NegBin(y; mean e^mu, shape e^lam), elementwise."""
        r = np.exp(lam)
        return (special.gammaln(values + r) - special.gammaln(r)
                - special.gammaln(values + 1)
                + r * (lam - np.logaddexp(lam, mu))
                + values * (mu - np.logaddexp(lam, mu)))

    def nb_single(y, v):
        return float(nb_terms(y.values, v[0], v[1]).sum())

    def nb_many(values, groups, thetas):
        out = np.empty((values.shape[0], thetas.shape[0]))
        for s in range(thetas.shape[0]):
            out[:, s] = nb_terms(values, thetas[s, 0], thetas[s, 1]).sum(axis=1)
        return out

    def nb_sample(v, tmpl, rng):
        r = np.exp(v[1])
        mean = np.exp(v[0])
        return rng.negative_binomial(r, r / (r + mean), size=tmpl.n).astype(float)

    expanded = ModelSpec(
        name="poisson-negbin", d_shared=1, d_extra=1, hyper=hp,
        _log_prior=lambda v: _norm_logpdf_prior(v, 1.0),
        _log_lik=nb_single,
        _sample_prior=lambda rng: rng.normal(size=2),
        _sample_data=nb_sample,
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=nb_many,
        analytic=Analytic(prior_mean=np.zeros(2), prior_cov=np.eye(2)),
        default_bounds=(np.array([-6.0, -6.0]), np.array([6.0, 6.0])),
    )

    ladder = tuple(np.array([np.log(s)]) for s in (1e2, 1e3, 1e4, 1e5))
    return ExpansionPair(
        name="poisson-negbin", base=base, expanded=expanded,
        lambda0=(ExtReal.posinf(),),
        _log_prior_shared_cond=lambda th, lam: _norm_logpdf_prior(th, 1.0),
        _log_prior_extra_cond=lambda lam, th: _norm_logpdf_prior(lam, 1.0),
        limit_ladder=ladder,
    )


def make_simple_reg_2obs(hyper=None) -> ExpansionPair:
    """Two-observation regression; the expansion adds a correlated predictor.

    x1 = (0, 1); x2 is unit length with <x1, x2> = rho.  Coefficients have
    a wide N(0, sigma_b^2) prior, so identification of beta1 degrades as the
    predictors align.
    """
    hp = _hp(hyper, {"rho": 0.0, "sigma_b": 10.0}, "simple-reg-2obs")
    rho, sb = float(hp["rho"]), float(hp["sigma_b"])
    if not -1.0 < rho < 1.0:
        raise ValueError(f"simple-reg-2obs: rho must be in (-1, 1), got {rho}")
    x1 = np.array([0.0, 1.0])
    x2 = np.array([np.sqrt(1.0 - rho ** 2), rho])
    template = DataSet(values=np.zeros(2), name="simple-reg-template")

    def make_spec(expanded: bool) -> ModelSpec:
        design = np.column_stack([x1, x2]) if expanded else x1[:, None]
        d = design.shape[1]
        single, many = _gaussian_design_loglik(design, 1.0)
        prior_cov = sb ** 2 * np.eye(d)

        def lingauss(y: Optional[DataSet]) -> LinearGaussian:
            return LinearGaussian(design=design, noise_var=1.0,
                                  prior_mean=np.zeros(d), prior_cov=prior_cov)

        return ModelSpec(
            name="simple-reg-2obs" if expanded else "simple-reg-2obs-base",
            d_shared=1, d_extra=d - 1, hyper=hp,
            _log_prior=lambda v: _norm_logpdf_prior(v, sb ** 2),
            _log_lik=single,
            _sample_prior=lambda rng: rng.normal(0.0, sb, size=d),
            _sample_data=lambda v, tmpl, rng: design @ v + rng.normal(size=2),
            canonical_template=template,
            log_concave_prior=True,
            _loglik_many=many,
            analytic=Analytic(
                lingauss=lingauss,
                fisher=lambda v: design.T @ design,
                fisher_shared_marginal=(
                    (lambda th: np.atleast_2d(
                        x1 @ np.linalg.solve(np.eye(2) + sb ** 2 * np.outer(x2, x2), x1)))
                    if expanded else None),
                prior_mean=np.zeros(d), prior_cov=prior_cov),
            default_bounds=(np.full(d, -8.0 * sb), np.full(d, 8.0 * sb)),
        )

    return ExpansionPair(
        name="simple-reg-2obs", base=make_spec(False), expanded=make_spec(True),
        lambda0=(ExtReal.finite(0.0),),
        _log_prior_shared_cond=lambda th, lam: _norm_logpdf_prior(th, sb ** 2),
        _log_prior_extra_cond=lambda lam, th: _norm_logpdf_prior(lam, sb ** 2),
    )


# ── grouped data (hierarchical) models ───────────────────────────────────────

def simulate_grouped_data(M: int = 2, L: int = 20, sigma_star: float = 1.0,
                          mu_star: float = 2.0, tau_star: float = 1.0,
                          seed: int = 0) -> DataSet:
    """Draw M measurements from each of L subpopulations.

    theta_l ~ N(mu_star, tau_star), y_ml ~ N(theta_l, sigma_star); group
    labels 0..L-1, M consecutive rows per group.  Bit-exact for a fixed seed.
    """
    rng = substream(seed, "grouped-data")
    theta = mu_star + tau_star * rng.standard_normal(L)
    groups = np.repeat(np.arange(L), M)
    values = theta[groups] + sigma_star * rng.standard_normal(L * M)
    return DataSet(values=values, groups=groups,
                   name=f"grouped-s{sigma_star:g}-seed{seed}", seed=seed)


def grouped_variance_ratio(y: DataSet) -> float:
    """Variance of subpopulation sample means over total sample variance."""
    if y.groups is None:
        raise ValueError("variance ratio needs group labels")
    means = np.array([y.values[y.groups == l].mean() for l in range(y.n_groups)])
    return float(means.var() / y.values.var())


def make_grouped_base(hyper=None) -> ModelSpec:
    """All groups share one mean: y ~ N(mu, sigma_guess), mu ~ N(0, |mu0|)."""
    hp = _hp(hyper, {"L": 20, "M": 2, "sigma_guess": 1.0, "mu0": 2.0}, "grouped-base")
    L, M = int(hp["L"]), int(hp["M"])
    sg, mu0 = float(hp["sigma_guess"]), abs(float(hp["mu0"]))
    groups = np.repeat(np.arange(L), M)
    template = DataSet(values=np.zeros(L * M), groups=groups, name="grouped-template")

    def lingauss(y: Optional[DataSet]) -> LinearGaussian:
        m = L * M if y is None else y.n
        return LinearGaussian(design=np.ones((m, 1)), noise_var=sg ** 2,
                              prior_mean=np.zeros(1),
                              prior_cov=np.array([[mu0 ** 2]]))

    def log_lik(y, v):
        r = y.values - v[0]
        return float(-0.5 * (y.n * (LOG_2PI + 2 * np.log(sg))
                             + (r * r).sum() / sg ** 2))

    def loglik_many(values, groups_, thetas):
        mu = thetas[:, 0]
        m = values.shape[1]
        ssum = values.sum(axis=1)
        ssq = (values * values).sum(axis=1)
        quad = ssq[:, None] - 2 * ssum[:, None] * mu[None, :] + m * (mu ** 2)[None, :]
        return -0.5 * (m * (LOG_2PI + 2 * np.log(sg)) + quad / sg ** 2)

    return ModelSpec(
        name="grouped-base", d_shared=1, d_extra=0, hyper=hp,
        _log_prior=lambda v: _norm_logpdf_prior(v, mu0 ** 2),
        _log_lik=log_lik,
        _sample_prior=lambda rng: rng.normal(0.0, mu0, size=1),
        _sample_data=lambda v, tmpl, rng: rng.normal(v[0], sg, size=tmpl.n),
        canonical_template=template,
        log_concave_prior=True,
        _loglik_many=loglik_many,
        analytic=Analytic(lingauss=lingauss,
                          fisher=lambda v: np.array([[L * M / sg ** 2]]),
                          prior_mean=np.zeros(1),
                          prior_cov=np.array([[mu0 ** 2]])),
        default_bounds=(np.array([-8.0 * mu0]), np.array([8.0 * mu0])),
    )


def make_grouped_expanded(hyper=None) -> ModelSpec:
    """Hierarchical grouped model with free scales.

    Parameters (mu, log sigma, log tau, theta_1..theta_L): y_ml ~
    N(theta_l, sigma), theta_l ~ N(mu, tau), mu ~ N(0, |mu0|), sigma and tau
    get gamma(2, rate) priors whose modes sit at the stated guesses.
    """
    hp = _hp(hyper, {"L": 20, "M": 2, "sigma_guess": 1.0, "tau_guess": 1.0,
                     "mu0": 2.0, "a_sigma": 2.0, "a_tau": 2.0}, "grouped-expanded")
    L, M = int(hp["L"]), int(hp["M"])
    mu0 = abs(float(hp["mu0"]))
    a_s, a_t = float(hp["a_sigma"]), float(hp["a_tau"])
    # mode of gamma(a, rate b) is (a-1)/b; match it to the guess
    b_s = (a_s - 1.0) / float(hp["sigma_guess"])
    b_t = (a_t - 1.0) / float(hp["tau_guess"])
    groups = np.repeat(np.arange(L), M)
    template = DataSet(values=np.zeros(L * M), groups=groups, name="grouped-template")

    def log_prior(v):
        mu, lsig, ltau = v[0], v[1], v[2]
        theta = v[3:]
        tau = np.exp(ltau)
        lp = -0.5 * (LOG_2PI + 2 * np.log(mu0) + mu ** 2 / mu0 ** 2)
        lp += float(_log_gamma_pdf_in_log(lsig, a_s, b_s))
        lp += float(_log_gamma_pdf_in_log(ltau, a_t, b_t))
        r = theta - mu
        lp += -0.5 * (L * (LOG_2PI + 2 * ltau) + (r * r).sum() / tau ** 2)
        return lp

    def log_lik(y, v):
        sig = np.exp(v[1])
        theta = v[3:]
        r = y.values - theta[y.groups]
        return float(-0.5 * (y.n * (LOG_2PI + 2 * v[1]) + (r * r).sum() / sig ** 2))

    def loglik_many(values, groups_, thetas):
        g = groups if groups_ is None else np.asarray(groups_)
        lsig = thetas[:, 1]
        th = thetas[:, 3:]                      # (S, L)
        nloc = values.shape[1]
        counts = np.bincount(g, minlength=th.shape[1]).astype(float)
        gsum = np.stack([np.bincount(g, weights=values[b], minlength=th.shape[1])
                         for b in range(values.shape[0])])   # (B, L)
        ssq = (values * values).sum(axis=1)     # (B,)
        quad = (ssq[:, None] - 2.0 * gsum @ th.T
                + (counts[None, :] * th * th).sum(axis=1)[None, :])
        return -0.5 * (nloc * (LOG_2PI + 2 * lsig)[None, :]
                       + np.exp(-2 * lsig)[None, :] * quad)

    def sample_prior(rng):
        mu = rng.normal(0.0, mu0)
        sig = rng.gamma(a_s, 1.0 / b_s)
        tau = rng.gamma(a_t, 1.0 / b_t)
        theta = rng.normal(mu, tau, size=L)
        return np.concatenate([[mu, np.log(sig), np.log(tau)], theta])

    def sample_data(v, tmpl, rng):
        sig = np.exp(v[1])
        theta = v[3:]
        g = tmpl.groups if tmpl.groups is not None else groups
        return rng.normal(theta[np.asarray(g)], sig)

    lo = np.concatenate([[-8 * mu0, -6.0, -6.0], np.full(L, -8 * mu0 - 8.0)])
    hi = -lo
    return ModelSpec(
        name="grouped-expanded", d_shared=1, d_extra=L + 2, hyper=hp,
        _log_prior=log_prior,
        _log_lik=log_lik,
        _sample_prior=sample_prior,
        _sample_data=sample_data,
        canonical_template=template,
        log_concave_prior=False,
        _loglik_many=loglik_many,
        default_bounds=(lo, hi),
    )


# ── registry ────────────────────────────────────────────────────────────────

REGISTRY: dict[str, Callable] = {
    "flat": make_flat,
    "normal-location": make_normal_location,
    "redundant-location": make_redundant_location,
    "split-means": make_split_means,
    "normal-gamma": make_normal_gamma,
    "prior-scale": make_prior_scale,
    "location-nuisance": make_location_nuisance,
    "linreg-addpred": make_linreg_addpred,
    "poisson-negbin": make_poisson_negbin,
    "student-t-outlier": make_student_t_outlier,
    "grouped-base": make_grouped_base,
    "grouped-expanded": make_grouped_expanded,
    "simple-reg-2obs": make_simple_reg_2obs,
}


def builtin(name: str, hyper: Optional[dict] = None):
    """Construct a builtin ModelSpec or ExpansionPair by name."""
    if name not in REGISTRY:
        raise KeyError(f"unknown builtin {name!r}; available: {sorted(REGISTRY)}")
    return REGISTRY[name](hyper)


def builtin_pairs() -> list[str]:
    """Names whose builtin() result is an ExpansionPair."""
    return ["location-nuisance", "linreg-addpred", "poisson-negbin",
            "simple-reg-2obs"]
