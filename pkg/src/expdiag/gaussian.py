"""Exact linear-Gaussian algebra.

Closed-form posteriors, entropies and (conditional) mutual informations for
jointly Gaussian vectors.  These serve as the analytic oracles that the Monte
Carlo estimators elsewhere in the package are validated against, so everything
here is determinant/Schur-complement arithmetic and nothing is sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOG_2PIE = float(np.log(2.0 * np.pi * np.e))


# ── generic block operations on a joint covariance ──────────────────────────

def logdet_psd(cov: np.ndarray) -> float:
    """Log-determinant of a symmetric positive (semi)definite matrix.

    Returns -inf for a singular matrix instead of raising, since a degenerate
    block legitimately means "entropy -inf" downstream.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    sign, val = np.linalg.slogdet(cov)
    if sign <= 0:
        # slogdet can report sign 0 (singular) or small negative signs from
        # round-off on nearly singular inputs; treat both as degenerate.
        eigs = np.linalg.eigvalsh((cov + cov.T) / 2.0)
        if np.any(eigs < -1e-8 * max(1.0, float(np.abs(eigs).max()))):
            raise ValueError("matrix is not positive semidefinite")
        return -np.inf
    return float(val)


def block_entropy(cov: np.ndarray, idx=None) -> float:
    """Differential entropy of the selected coordinates, in nats."""
    cov = np.atleast_2d(cov)
    if idx is not None:
        idx = np.asarray(idx, dtype=int)
        cov = cov[np.ix_(idx, idx)]
    k = cov.shape[0]
    return 0.5 * (k * LOG_2PIE + logdet_psd(cov))


def _psd_solve(cbb: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve cbb @ x = rhs for a PSD cbb, tolerating degenerate directions.

    Uses the eigen-pseudoinverse, which is the correct conditioning rule for
    a singular Gaussian block (a point-mass coordinate simply drops out).
    """
    w, q = np.linalg.eigh((cbb + cbb.T) / 2.0)
    cut = 1e-12 * max(float(w.max(initial=0.0)), 1e-300)
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    return q @ (inv[:, None] * (q.T @ rhs))


def conditional_cov(cov: np.ndarray, target, given) -> np.ndarray:
    """Schur complement: covariance of `target` after conditioning on `given`."""
    cov = np.atleast_2d(cov)
    a = np.asarray(target, dtype=int)
    b = np.asarray(given, dtype=int)
    caa = cov[np.ix_(a, a)]
    if b.size == 0:
        return caa
    cab = cov[np.ix_(a, b)]
    cbb = cov[np.ix_(b, b)]
    out = caa - cab @ _psd_solve(cbb, cab.T)
    return (out + out.T) / 2.0


def block_mi(cov: np.ndarray, a, b) -> float:
    """I(A;B) for jointly Gaussian blocks: h(B) - h(B|A).

    The one-sided form stays finite when A has degenerate coordinates
    (e.g. a point-mass prior), where the three-entropy sum would be NaN.
    """
    a = np.asarray(a, dtype=int)
    b = np.asarray(b, dtype=int)
    return block_entropy(cov, b) - block_entropy(conditional_cov(cov, b, a))


def block_cmi(cov: np.ndarray, a, b, c) -> float:
    """I(A;B|C) for jointly Gaussian blocks: h(B|C) - h(B|A,C)."""
    a = np.asarray(a, dtype=int)
    b = np.asarray(b, dtype=int)
    c = np.asarray(c, dtype=int)
    if c.size == 0:
        return block_mi(cov, a, b)
    hb_c = block_entropy(conditional_cov(cov, b, c))
    hb_ac = block_entropy(conditional_cov(cov, b, np.concatenate([a, c])))
    return hb_c - hb_ac


def kl_gaussian(mean0, cov0, mean1, cov1) -> float:
    """KL(N(mean0, cov0) || N(mean1, cov1)) in nats."""
    m0 = np.asarray(mean0, dtype=float).ravel()
    m1 = np.asarray(mean1, dtype=float).ravel()
    c0 = np.atleast_2d(cov0)
    c1 = np.atleast_2d(cov1)
    d = m0.size
    sol = np.linalg.solve(c1, c0)
    diff = m1 - m0
    quad = float(diff @ np.linalg.solve(c1, diff))
    return 0.5 * (np.trace(sol) + quad - d + logdet_psd(c1) - logdet_psd(c0))


# ── linear-Gaussian observation model ────────────────────────────────────────

@dataclass
class LinearGaussian:
    """y = design @ v + e with e ~ N(0, diag(noise_var)) and v ~ N(m0, S0).

    `noise_var` may be a scalar or per-observation vector.  All information
    quantities are exact; `param_idx` arguments select a sub-block of v.
    """

    design: np.ndarray
    noise_var: np.ndarray
    prior_mean: np.ndarray
    prior_cov: np.ndarray

    def __post_init__(self):
        self.design = np.atleast_2d(np.asarray(self.design, dtype=float))
        n = self.design.shape[0]
        self.noise_var = np.broadcast_to(
            np.asarray(self.noise_var, dtype=float), (n,)).copy()
        self.prior_mean = np.asarray(self.prior_mean, dtype=float).ravel()
        self.prior_cov = np.atleast_2d(np.asarray(self.prior_cov, dtype=float))

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def dim(self) -> int:
        return self.design.shape[1]

    def joint_cov(self, n_rep: int = 0) -> np.ndarray:
        """Covariance of (v, y, y_rep_1, ..., y_rep_{n_rep}) stacked.

        Replicates share v, so their cross-covariances are A S0 A^T without
        the noise term.
        """
        a, s0 = self.design, self.prior_cov
        gram = a @ s0 @ a.T
        noise = np.diag(self.noise_var)
        d, n = self.dim, self.n
        k = d + (1 + n_rep) * n
        cov = np.empty((k, k))
        cov[:d, :d] = s0
        for i in range(1 + n_rep):
            r = d + i * n
            cov[:d, r:r + n] = s0 @ a.T
            cov[r:r + n, :d] = a @ s0
            for j in range(1 + n_rep):
                c = d + j * n
                cov[r:r + n, c:c + n] = gram + (noise if i == j else 0.0)
        return cov

    def posterior(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Exact posterior mean and covariance of v given y."""
        y = np.asarray(y, dtype=float).ravel()
        a = self.design
        prec0 = np.linalg.inv(self.prior_cov)
        atn = a.T / self.noise_var
        prec = prec0 + atn @ a
        cov = np.linalg.inv(prec)
        cov = (cov + cov.T) / 2.0
        mean = cov @ (prec0 @ self.prior_mean + atn @ y)
        return mean, cov

    def _param_idx(self, param_idx) -> np.ndarray:
        if param_idx is None:
            return np.arange(self.dim)
        return np.asarray(param_idx, dtype=int)

    def mi(self, param_idx=None) -> float:
        """I(v_sub ; y): marginal identifiability of the selected block.

        Computed as h(y) - h(y | v_sub) with cov(y | v_sub) assembled from
        the prior-conditional covariance, which stays accurate for prior
        scales many orders of magnitude above the noise.
        """
        p = self._param_idx(param_idx)
        a = self.design
        noise = np.diag(self.noise_var)
        gram = a @ self.prior_cov @ a.T
        cond = conditional_cov(self.prior_cov, np.arange(self.dim), p)
        return 0.5 * (logdet_psd(gram + noise)
                      - logdet_psd(a @ cond @ a.T + noise))

    def cmi(self, param_idx=None) -> float:
        """I(v_sub ; y_rep | y): falsifiability term for the selected block.

        For the full parameter vector this is h(y_rep | y) - h(noise), with
        cov(y_rep | y) = N + N (G+N)^{-1} G  (G the prior gram of the mean),
        an identity that avoids the cancellation-prone Schur subtraction.
        """
        p = self._param_idx(param_idx)
        if p.size == self.dim:
            noise = np.diag(self.noise_var)
            gram = self.design @ self.prior_cov @ self.design.T
            var_rep = noise + noise @ _psd_solve(gram + noise, gram)
            var_rep = (var_rep + var_rep.T) / 2.0
            return 0.5 * (logdet_psd(var_rep) - logdet_psd(noise))
        cov = self.joint_cov(1)
        d, n = self.dim, self.n
        return block_cmi(cov, p, np.arange(d + n, d + 2 * n), np.arange(d, d + n))

    def prior_entropy(self, param_idx=None) -> float:
        return block_entropy(self.prior_cov, self._param_idx(param_idx))

    def posterior_entropy(self, param_idx=None) -> float:
        """Posterior entropy of the selected block (same for every y)."""
        cov = self.joint_cov(0)
        p = self._param_idx(param_idx)
        sub = conditional_cov(cov, p, np.arange(self.dim, self.dim + self.n))
        return block_entropy(sub)

    def fisher(self) -> np.ndarray:
        """Fisher information of v for one dataset: A^T diag(1/noise) A."""
        a = self.design
        return a.T @ (a / self.noise_var[:, None])
