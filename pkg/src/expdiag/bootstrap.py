"""Posterior-bootstrap comparison of future-data sampling schemes.

Given grouped data fit by the hierarchical model, which buys more precision
on the population mean: more measurements from the subpopulations we already
have, or measurements from new subpopulations?  Each replication draws
parameters (from the posterior, or the prior for the contrast variant),
simulates the corresponding batch of future data, refits, and records the
ratio rho_r = sd(mu | augmented data) / sd(mu | original data).

Refits use the same random-walk Metropolis settings as the original fit,
warm-started at the drawn parameters; every replication owns a derived seed,
so results are independent of execution order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ReliabilityError
from .models import DataSet, ModelSpec, make_grouped_expanded
from .rand import substream
from .samplers import PosteriorDraws, rwm_sample

SCHEMES = ("same-subpops", "new-subpops")
SOURCES = ("posterior", "prior")
DEFAULT_R = 500
DEFAULT_S = 2000
DEFAULT_M_NEW = 8
DEFAULT_L_NEW = 20
REFERENCE_SIZE = 20000
NEW_GROUP_COST_FACTOR = 4
MAX_FAIL_FRACTION = 0.05


# ── results ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SchemeResult:
    """Ratios rho_r from one (scheme, source) cell of the comparison."""

    scheme: str
    source: str
    rho: np.ndarray
    rho_bar: float
    sigma_obs: float
    n_failed: int
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}")
        if self.source not in SOURCES:
            raise DomainError(f"source must be one of {SOURCES}")
        rho = np.asarray(self.rho, dtype=float)
        object.__setattr__(self, "rho", rho)
        if rho.size == 0:
            raise DomainError("no successful replications")
        if np.any(rho <= 0) or not np.all(np.isfinite(rho)):
            raise DomainError("rho entries must be positive and finite")
        if abs(float(rho.mean()) - self.rho_bar) > 1e-12:
            raise DomainError("rho_bar is not the mean of rho")

    @property
    def size(self) -> int:
        return self.rho.size

    def se(self) -> float:
        if self.rho.size < 2:
            return float("inf")
        return float(self.rho.std(ddof=1) / np.sqrt(self.rho.size))

    def sd(self) -> float:
        return float(self.rho.std(ddof=1))

    def to_record(self) -> dict:
        return {"scheme": self.scheme, "source": self.source,
                "rho_bar": self.rho_bar, "rho_se": self.se(),
                "rho_sd": self.sd(), "n": int(self.size),
                "n_failed": int(self.n_failed), **self.config}


def scheme_costs(L: int, M: int, M_new: int, L_new: int,
                 factor: int = NEW_GROUP_COST_FACTOR) -> dict:
    """Sampling cost of each scheme; a new subpopulation costs factor x more."""
    return {"same-subpops": M_new * L, "new-subpops": factor * L_new * M}


# ── shared machinery ─────────────────────────────────────────────────────────

def _group_size(y: DataSet) -> int:
    if y.groups is None:
        raise DomainError("bootstrap schemes need grouped data")
    counts = np.bincount(y.groups)
    if np.any(counts != counts[0]):
        raise DomainError("bootstrap schemes assume balanced groups")
    return int(counts[0])


def reference_fit(model: ModelSpec, y: DataSet, seed: int,
                  size: int = REFERENCE_SIZE, warmup: int = 2000
                  ) -> PosteriorDraws:
    """The long original-data fit that anchors sigma_obs and posterior draws."""
    return rwm_sample(model, y, size=size, warmup=warmup,
                      seed=int(substream(seed, "reference").integers(2 ** 31)))


def _mu_sd(draws: PosteriorDraws) -> float:
    return float(draws.draws[:, 0].std(ddof=1))


def _run_scheme(y: DataSet, model: ModelSpec, scheme: str, source: str,
                R: int, S: int, n_new: int, seed: int,
                reference: PosteriorDraws, sigma_obs: float,
                warmup: int) -> SchemeResult:
    L = y.n_groups
    M = _group_size(y)
    if model.d_total != L + 3:
        raise DomainError(
            f"model has {model.d_total} parameters but the data has {L} "
            "groups; expected the hierarchical layout (mu, log sigma, "
            "log tau, theta_1..L)")
    if scheme == "new-subpops" and n_new > 0:
        refit_model = make_grouped_expanded({**model.hyper, "L": L + n_new})
    else:
        refit_model = model

    rho = []
    n_failed = 0
    for r in range(R):
        rng = substream(seed, scheme, source, r)
        if source == "posterior":
            v = reference.draws[int(rng.integers(reference.size))]
        else:
            v = model.sample_prior(rng).values
        sig = float(np.exp(v[1]))
        if scheme == "same-subpops":
            labels = np.repeat(np.arange(L), n_new)
            means = v[3:][labels]
            init = v
        else:
            mu, tau = float(v[0]), float(np.exp(v[2]))
            theta_new = rng.normal(mu, tau, size=n_new)
            labels = np.repeat(L + np.arange(n_new), M)
            means = theta_new[np.repeat(np.arange(n_new), M)]
            init = np.concatenate([v, theta_new])
        y_rep = y.extended(rng.normal(means, sig), labels,
                           name=f"{y.name}+{scheme}-r{r}")
        try:
            fit = rwm_sample(refit_model, y_rep, size=S, warmup=warmup,
                             seed=int(rng.integers(2 ** 31 - 1)), init=init)
            sd_r = _mu_sd(fit)
            if not np.isfinite(sd_r) or sd_r <= 0:
                raise ReliabilityError("degenerate refit chain")
        except (ReliabilityError, ValueError) as err:
            n_failed += 1
            warnings.warn(f"replication {r} failed: {err}", RuntimeWarning)
            continue
        rho.append(sd_r / sigma_obs)

    if n_failed > MAX_FAIL_FRACTION * R:
        raise ReliabilityError(
            f"{n_failed}/{R} replications failed; comparison unreliable")
    rho = np.array(rho)
    return SchemeResult(
        scheme=scheme, source=source, rho=rho, rho_bar=float(rho.mean()),
        sigma_obs=sigma_obs, n_failed=n_failed,
        config={"R": R, "S": S,
                ("M_new" if scheme == "same-subpops" else "L_new"): n_new,
                "seed": seed, "dataset": y.name, "warmup": warmup})


def _reference_or(model, y, seed, reference, ref_size, ref_warmup):
    _group_size(y)  # fail fast on ungrouped/unbalanced data
    if reference is None:
        reference = reference_fit(model, y, seed, size=ref_size,
                                  warmup=ref_warmup)
    return reference, _mu_sd(reference)


# ── public operations ────────────────────────────────────────────────────────

def boot_same_subpops(y: DataSet, model: ModelSpec, R: int = DEFAULT_R,
                      M_new: int = DEFAULT_M_NEW, S: int = DEFAULT_S,
                      seed: int = 0, reference: PosteriorDraws = None,
                      warmup: int = 1000, ref_size: int = REFERENCE_SIZE,
                      ref_warmup: int = 2000) -> SchemeResult:
    """M_new additional measurements from each existing subpopulation."""
    reference, sigma_obs = _reference_or(model, y, seed, reference,
                                         ref_size, ref_warmup)
    return _run_scheme(y, model, "same-subpops", "posterior", R, S, M_new,
                       seed, reference, sigma_obs, warmup)


def boot_new_subpops(y: DataSet, model: ModelSpec, R: int = DEFAULT_R,
                     L_new: int = DEFAULT_L_NEW, S: int = DEFAULT_S,
                     seed: int = 0, reference: PosteriorDraws = None,
                     warmup: int = 1000, ref_size: int = REFERENCE_SIZE,
                     ref_warmup: int = 2000) -> SchemeResult:
    """M measurements from each of L_new subpopulations drawn fresh."""
    reference, sigma_obs = _reference_or(model, y, seed, reference,
                                         ref_size, ref_warmup)
    return _run_scheme(y, model, "new-subpops", "posterior", R, S, L_new,
                       seed, reference, sigma_obs, warmup)


def boot_prior_variant(y: DataSet, model: ModelSpec, scheme: str,
                       R: int = DEFAULT_R, S: int = DEFAULT_S,
                       n_new: int = None, seed: int = 0,
                       reference: PosteriorDraws = None, warmup: int = 1000,
                       ref_size: int = REFERENCE_SIZE,
                       ref_warmup: int = 2000) -> SchemeResult:
    """Same pipelines with prior draws replacing the initial posterior draw.

    The refit still conditions on the combined data; only the parameters
    that generate the future batch come from the prior.
    """
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}")
    if n_new is None:
        n_new = DEFAULT_M_NEW if scheme == "same-subpops" else DEFAULT_L_NEW
    reference, sigma_obs = _reference_or(model, y, seed, reference,
                                         ref_size, ref_warmup)
    return _run_scheme(y, model, scheme, "prior", R, S, n_new,
                       seed, reference, sigma_obs, warmup)


@dataclass(frozen=True)
class SchemeComparison:
    """All four (scheme x source) cells for one dataset."""

    dataset: str
    sigma_obs: float
    cells: dict
    costs: dict

    def cell(self, scheme: str, source: str) -> SchemeResult:
        return self.cells[f"{scheme}:{source}"]

    def table_row(self) -> dict:
        row = {"dataset": self.dataset, "sigma_obs": self.sigma_obs}
        for key, res in self.cells.items():
            row[f"rho_bar[{key}]"] = res.rho_bar
            row[f"rho_se[{key}]"] = res.se()
        return row

    def histogram_rows(self, bins: int = 30) -> list:
        """Shared-bin histogram counts of rho for every cell."""
        all_rho = np.concatenate([r.rho for r in self.cells.values()])
        edges = np.histogram_bin_edges(all_rho, bins=bins)
        rows = []
        for key, res in self.cells.items():
            counts, _ = np.histogram(res.rho, bins=edges)
            for b in range(counts.size):
                rows.append({"bin_left": float(edges[b]),
                             "bin_right": float(edges[b + 1]),
                             "count": int(counts[b]),
                             "scheme": key, "dataset": self.dataset})
        return rows


def compare_schemes(y: DataSet, model: ModelSpec, R: int = DEFAULT_R,
                    S: int = DEFAULT_S, M_new: int = DEFAULT_M_NEW,
                    L_new: int = DEFAULT_L_NEW, seed: int = 0,
                    warmup: int = 1000, ref_size: int = REFERENCE_SIZE,
                    ref_warmup: int = 2000) -> SchemeComparison:
    """Run all four scheme x source cells against one reference fit."""
    reference = reference_fit(model, y, seed, size=ref_size,
                              warmup=ref_warmup)
    sigma_obs = _mu_sd(reference)
    cells = {}
    for scheme, n_new in (("same-subpops", M_new), ("new-subpops", L_new)):
        for source in SOURCES:
            cells[f"{scheme}:{source}"] = _run_scheme(
                y, model, scheme, source, R, S, n_new, seed,
                reference, sigma_obs, warmup)
    return SchemeComparison(
        dataset=y.name, sigma_obs=sigma_obs, cells=cells,
        costs=scheme_costs(y.n_groups, _group_size(y), M_new, L_new))