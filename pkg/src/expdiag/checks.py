"""Posterior-predictive checks: marginal and per-draw conditional p-values.

A conditional p-value is the tail probability of a test statistic under
replicates drawn at a single posterior draw; the ordinary marginal p-value
is its weighted average over the draws, so the two are produced together
and the averaging identity holds exactly by construction.

Tail conventions: ties count toward the tail (the indicator is >= / <=),
and the two-sided value is 2 * min(left, right) capped at 1 -- one common
convention among several; there is no canonical two-sided definition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NumericalError, ReliabilityError
from .models import DataSet, ModelSpec
from .rand import as_generator, substream
from .samplers import PosteriorDraws

TAILS = ("right", "left", "two")
DEFAULT_N_INNER = 500
MAX_DROP_FRACTION = 0.01


# ── test statistics ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class TestStatistic:
    """A named real-valued function of a dataset, with a tail direction."""

    name: str
    eval: Callable[[DataSet], float]
    tail: str = "right"

    def __post_init__(self):
        if self.tail not in TAILS:
            raise DomainError(f"tail must be one of {TAILS}, got {self.tail!r}")
        if not self.name:
            raise DomainError("statistic needs a name")

    def __call__(self, y: DataSet) -> float:
        return float(self.eval(y))


def stat_sample_mean(tail: str = "right") -> TestStatistic:
    return TestStatistic("sample-mean", lambda y: float(y.values.mean()), tail)


def stat_constant(value: float = 0.0, tail: str = "right") -> TestStatistic:
    """Ignores the data; a null statistic whose conditional p is always 1."""
    return TestStatistic("constant", lambda y: float(value), tail)


def stat_coordinate(k: int, tail: str = "right") -> TestStatistic:
    return TestStatistic(f"coord-{k}", lambda y: float(y.values[k]), tail)


def stat_negated_first(tail: str = "right") -> TestStatistic:
    return TestStatistic("neg-first-coord", lambda y: float(-y.values[0]), tail)


def stat_window_sd(k: int, tail: str = "right") -> TestStatistic:
    """Sample standard deviation of the last k observations."""
    if k < 2:
        raise DomainError("window sd needs k >= 2")

    def ev(y: DataSet) -> float:
        if y.n < k:
            raise DomainError(f"dataset has {y.n} < {k} observations")
        return float(y.values[-k:].std(ddof=1))

    return TestStatistic(f"sd-last-{k}", ev, tail)


def stat_group_mean_sd(tail: str = "right") -> TestStatistic:
    """Standard deviation across group means (grouped data only)."""

    def ev(y: DataSet) -> float:
        if y.groups is None:
            raise DomainError("group-mean sd needs grouped data")
        means = np.array([y.values[y.groups == g].mean()
                          for g in range(y.n_groups)])
        return float(means.std(ddof=1))

    return TestStatistic("group-mean-sd", ev, tail)


# ── results ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class CheckResult:
    """Marginal p-value plus the per-draw conditional p-values behind it."""

    stat_name: str
    tail: str
    t_obs: float
    marginal_p: float
    conditional_p: np.ndarray
    weights: np.ndarray
    n_inner: int
    draws_ref: dict = field(default_factory=dict)

    def __post_init__(self):
        cond = np.asarray(self.conditional_p, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "conditional_p", cond)
        object.__setattr__(self, "weights", w)
        if cond.shape != w.shape:
            raise DomainError("conditional_p and weights must align")
        if np.any((cond < 0) | (cond > 1)):
            raise NumericalError("conditional p-value outside [0, 1]")
        if not 0.0 <= self.marginal_p <= 1.0:
            raise NumericalError(
                f"marginal p-value {self.marginal_p} outside [0, 1]")
        if abs(float(w @ cond) - self.marginal_p) > 1e-12:
            raise NumericalError(
                "marginal p-value is not the weighted mean of the "
                "conditional ones; result was assembled inconsistently")

    @property
    def size(self) -> int:
        return self.conditional_p.size

    def mass_below(self, threshold: float) -> float:
        """Posterior mass where the conditional p-value is below threshold."""
        return float(self.weights[self.conditional_p < threshold].sum())

    def to_summary(self) -> dict:
        return {"stat": self.stat_name, "tail": self.tail,
                "t_obs": self.t_obs, "marginal_p": self.marginal_p,
                "n_inner": self.n_inner, "n_draws": int(self.size),
                "draws_ref": dict(self.draws_ref)}


def _tail_p(t_rep: np.ndarray, t_obs: float, tail: str) -> float:
    right = float(np.mean(t_rep >= t_obs))
    if tail == "right":
        return right
    left = float(np.mean(t_rep <= t_obs))
    if tail == "left":
        return left
    return min(1.0, 2.0 * min(left, right))


def conditional_pppv(model: ModelSpec, y: DataSet, draws: PosteriorDraws,
                     stat: TestStatistic, n_inner: int = DEFAULT_N_INNER,
                     rng=None) -> CheckResult:
    """Conditional p-values p_T(theta_s) at every posterior draw.

    Each draw gets its own derived random stream, so the result does not
    depend on evaluation order.  Replicates where the statistic is not
    finite are dropped (with a warning); more than 1% dropped overall is a
    reliability error.
    """
    if n_inner < 100:
        raise DomainError(f"n_inner must be >= 100, got {n_inner}")
    if draws.size == 0:
        raise DomainError("posterior draws are empty")
    rng = as_generator(rng)
    t_obs = stat(y)
    if not np.isfinite(t_obs):
        raise NumericalError(
            f"statistic {stat.name!r} is not finite on the observed data")

    master = int(rng.integers(2 ** 31 - 1))
    cond = np.empty(draws.size)
    n_dropped = 0
    for s in range(draws.size):
        sub = substream(master, stat.name, s)
        theta = draws.draws[s]
        t_rep = np.empty(n_inner)
        for r in range(n_inner):
            t_rep[r] = stat(model.sample_data(theta, sub, template=y))
        keep = np.isfinite(t_rep)
        n_dropped += int(n_inner - keep.sum())
        if not np.any(keep):
            raise ReliabilityError(
                f"statistic {stat.name!r} non-finite on every replicate "
                f"at draw {s}")
        cond[s] = _tail_p(t_rep[keep], t_obs, stat.tail)

    total = draws.size * n_inner
    if n_dropped:
        warnings.warn(f"dropped {n_dropped} non-finite replicate statistics",
                      RuntimeWarning)
        if n_dropped > MAX_DROP_FRACTION * total:
            raise ReliabilityError(
                f"{n_dropped}/{total} replicate statistics non-finite; "
                "the p-value estimate is unreliable")
    w = draws.effective_weights()
    marginal = min(1.0, max(0.0, float(w @ cond)))
    return CheckResult(stat_name=stat.name, tail=stat.tail, t_obs=t_obs,
                       marginal_p=marginal, conditional_p=cond,
                       weights=w, n_inner=n_inner,
                       draws_ref={"model": draws.model_name,
                                  "sampler": draws.sampler,
                                  "seed": draws.seed,
                                  "size": int(draws.size),
                                  "replicate_seed": master})


def marginal_pppv(model: ModelSpec, y: DataSet, draws: PosteriorDraws,
                  stat: TestStatistic, n_inner: int = DEFAULT_N_INNER,
                  rng=None) -> float:
    """The ordinary posterior-predictive p-value for the statistic."""
    return conditional_pppv(model, y, draws, stat, n_inner, rng).marginal_p


def check_scatter(result: CheckResult, draws: PosteriorDraws,
                  projection) -> np.ndarray:
    """(projection(theta_s), p_T(theta_s)) pairs, aligned with the draws.

    projection is a coordinate index or a callable mapping a draw vector
    to a real.
    """
    if result.size != draws.size:
        raise DomainError("result and draws are from different runs")
    if callable(projection):
        proj = np.array([float(projection(d)) for d in draws.draws])
    else:
        k = int(projection)
        if not 0 <= k < draws.dim:
            raise DomainError(
                f"projection index {k} out of range for dim {draws.dim}")
        proj = draws.draws[:, k].astype(float)
    return np.column_stack([proj, result.conditional_p])