"""Independent per-objective Gaussian process surrogates.

Each objective gets its own zero-mean GP with a Matern 5/2 ARD kernel over
inputs normalized to the unit cube. Observations are standardized internally
per objective; every public query (posterior moments, conditioning) speaks
the raw objective scale. Models are immutable once built.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

__all__ = ["KernelParams", "GaussianProcess", "matern52"]

SQRT5 = np.sqrt(5.0)

# search bounds for maximum-likelihood fitting, in standardized output space
LENGTHSCALE_BOUNDS = (1e-3, 10.0)
SIGNAL_BOUNDS = (1e-4, 100.0)
NOISE_BOUNDS = (1e-6, 1.0)

_JITTERS = (0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters of one objective's GP, in standardized output space."""

    lengthscales: np.ndarray  # (D,)
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        ls = np.asarray(self.lengthscales, dtype=float)
        object.__setattr__(self, "lengthscales", ls)
        if np.any(ls <= 0) or self.signal_variance <= 0:
            raise ValueError("lengthscales and signal variance must be positive")
        if self.noise_variance < NOISE_BOUNDS[0]:
            object.__setattr__(self, "noise_variance", NOISE_BOUNDS[0])


def _scaled_sqdist(X1, X2, lengthscales):
    A = X1 / lengthscales
    B = X2 / lengthscales
    d2 = np.sum(A**2, axis=1)[:, None] + np.sum(B**2, axis=1)[None, :] - 2.0 * A @ B.T
    return np.clip(d2, 0.0, None)


def matern52(X1, X2, lengthscales, signal_variance) -> np.ndarray:
    """Matern 5/2 ARD kernel matrix between two point sets."""
    r = np.sqrt(_scaled_sqdist(np.atleast_2d(X1), np.atleast_2d(X2), lengthscales))
    t = SQRT5 * r
    return signal_variance * (1.0 + t + t**2 / 3.0) * np.exp(-t)


def _chol_with_jitter(K: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, escalating jitter until the matrix factors."""
    for jitter in _JITTERS:
        try:
            L = cholesky(K + jitter * np.eye(K.shape[0]), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError(
        "covariance matrix not positive definite after maximum jitter"
    )


def _neg_log_marginal_likelihood(theta, X, y):
    """Negative LML and gradient w.r.t. log hyperparameters.

    theta = log([lengthscales (D), signal variance, noise variance]).
    Returns (inf, zeros) when the covariance cannot be factorized.
    """
    n, d = X.shape
    ls = np.exp(theta[:d])
    s2 = np.exp(theta[d])
    noise = np.exp(theta[d + 1])

    diff = X[:, None, :] - X[None, :, :]
    scaled2 = (diff / ls) ** 2
    r = np.sqrt(np.clip(np.sum(scaled2, axis=2), 0.0, None))
    t = SQRT5 * r
    decay = np.exp(-t)
    corr = (1.0 + t + t**2 / 3.0) * decay
    K = s2 * corr + noise * np.eye(n)

    try:
        L, _ = _chol_with_jitter(K)
    except np.linalg.LinAlgError:
        return np.inf, np.zeros_like(theta)

    alpha = cho_solve((L, True), y)
    nll = 0.5 * y @ alpha + np.sum(np.log(np.diag(L))) + 0.5 * n * np.log(2 * np.pi)

    Kinv = cho_solve((L, True), np.eye(n))
    # d(nll)/d theta_j = -0.5 tr((alpha alpha^T - K^{-1}) dK/d theta_j)
    A = np.outer(alpha, alpha) - Kinv
    grad = np.empty_like(theta)
    dk_common = (5.0 / 3.0) * s2 * (1.0 + t) * decay
    for j in range(d):
        grad[j] = -0.5 * np.sum(A * (dk_common * scaled2[:, :, j]))
    grad[d] = -0.5 * np.sum(A * (s2 * corr))
    grad[d + 1] = -0.5 * noise * np.trace(A)
    return nll, grad


def _fit_single_objective(X, y, n_restarts, rng):
    """Multi-start bounded ML estimate of one objective's hyperparameters."""
    d = X.shape[1]
    lo = np.log(np.r_[np.full(d, LENGTHSCALE_BOUNDS[0]), SIGNAL_BOUNDS[0], NOISE_BOUNDS[0]])
    hi = np.log(np.r_[np.full(d, LENGTHSCALE_BOUNDS[1]), SIGNAL_BOUNDS[1], NOISE_BOUNDS[1]])
    bounds = list(zip(lo, hi))

    starts = [np.log(np.r_[np.full(d, 0.5), 1.0, 1e-2])]
    for _ in range(max(0, n_restarts - 1)):
        starts.append(rng.uniform(lo, hi))

    best_theta, best_nll = None, np.inf
    for theta0 in starts:
        f0, _ = _neg_log_marginal_likelihood(theta0, X, y)
        res = minimize(
            _neg_log_marginal_likelihood,
            theta0,
            args=(X, y),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
        )
        theta, fval = (res.x, res.fun) if res.fun <= f0 else (theta0, f0)
        if fval < best_nll:
            best_theta, best_nll = theta, fval
    ls = np.exp(best_theta[:d])
    return KernelParams(ls, float(np.exp(best_theta[d])), float(np.exp(best_theta[d + 1])))


class GaussianProcess:
    """Independent multi-output GP posterior with cached factorizations.

    Inputs live in ``[0, 1]^D``; raw observations are standardized with the
    stored per-objective shift/scale. Instances are immutable: conditioning
    returns a new model.
    """

    def __init__(self, X, Y, params, shift=None, scale=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.shape[0] != Y.shape[0]:
            raise ValueError("inputs and observations must have equal length")
        self.X = X
        self.Y = Y
        self.n, self.input_dim = X.shape
        self.n_objectives = Y.shape[1]
        if len(params) != self.n_objectives:
            raise ValueError("need one hyperparameter set per objective")
        self.params = tuple(params)
        self.shift = (
            np.zeros(self.n_objectives) if shift is None else np.asarray(shift, dtype=float)
        )
        self.scale = (
            np.ones(self.n_objectives) if scale is None else np.asarray(scale, dtype=float)
        )
        if np.any(self.scale <= 0):
            raise ValueError("scale must be positive")
        self._Y_std = (self.Y - self.shift) / self.scale
        self._chols = []
        self._alphas = []
        for m, p in enumerate(self.params):
            if self.n > 0:
                K = matern52(X, X, p.lengthscales, p.signal_variance)
                K[np.diag_indices_from(K)] += p.noise_variance
                L, _ = _chol_with_jitter(K)
                alpha = cho_solve((L, True), self._Y_std[:, m])
            else:
                L = np.zeros((0, 0))
                alpha = np.zeros(0)
            self._chols.append(L)
            self._alphas.append(alpha)

    # -- construction ------------------------------------------------------

    @classmethod
    def fit(cls, X, Y, n_restarts: int = 5, seed: int = 0) -> "GaussianProcess":
        """Fit hyperparameters by multi-start maximum likelihood.

        Observations are standardized per objective before fitting. Objectives
        with (near) constant observations are handled by pinning the signal
        variance at its lower bound, with a warning.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.shape[0] < 2:
            raise ValueError("need at least two observations to fit")
        rng = np.random.default_rng(seed)
        shift = Y.mean(axis=0)
        scale = Y.std(axis=0)
        params = []
        for m in range(Y.shape[1]):
            if scale[m] < 1e-12:
                warnings.warn(
                    f"objective {m} has constant observations; "
                    "pinning signal variance at its lower bound"
                )
                scale[m] = 1.0
                params.append(
                    KernelParams(np.full(X.shape[1], 0.5), SIGNAL_BOUNDS[0], NOISE_BOUNDS[0])
                )
                continue
            y_std = (Y[:, m] - shift[m]) / scale[m]
            params.append(_fit_single_objective(X, y_std, n_restarts, rng))
        return cls(X, Y, params, shift=shift, scale=scale)

    def condition_on(self, X_new, Y_new) -> "GaussianProcess":
        """Posterior given the data augmented with noisy pseudo-observations.

        Hyperparameters and standardization are kept fixed; the new outputs
        are treated as observations under the model's own noise.
        """
        X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
        Y_new = np.asarray(Y_new, dtype=float)
        if Y_new.ndim == 1:
            Y_new = Y_new[:, None]
        if X_new.shape[0] == 0:
            return self
        return GaussianProcess(
            np.vstack([self.X, X_new]),
            np.vstack([self.Y, Y_new]),
            self.params,
            shift=self.shift,
            scale=self.scale,
        )

    # -- queries (raw objective scale) -------------------------------------

    def noise_variances(self) -> np.ndarray:
        """Per-objective observation noise variance on the raw scale."""
        return np.array(
            [p.noise_variance * s**2 for p, s in zip(self.params, self.scale)]
        )

    def posterior(self, X_query) -> tuple[np.ndarray, np.ndarray]:
        """Latent posterior mean (k, M) and variance (k, M) at the query points."""
        Xq = np.atleast_2d(np.asarray(X_query, dtype=float))
        k = Xq.shape[0]
        mean = np.empty((k, self.n_objectives))
        var = np.empty((k, self.n_objectives))
        for m, p in enumerate(self.params):
            if self.n == 0:
                mean[:, m] = 0.0
                var[:, m] = p.signal_variance
            else:
                Ks = matern52(Xq, self.X, p.lengthscales, p.signal_variance)
                mean[:, m] = Ks @ self._alphas[m]
                v = solve_triangular(self._chols[m], Ks.T, lower=True)
                var[:, m] = p.signal_variance - np.sum(v**2, axis=0)
        var = np.clip(var, 0.0, None)
        return mean * self.scale + self.shift, var * self.scale**2

    def posterior_cov(self, X_query) -> tuple[np.ndarray, np.ndarray]:
        """Latent posterior mean (k, M) and per-objective covariance (M, k, k)."""
        Xq = np.atleast_2d(np.asarray(X_query, dtype=float))
        k = Xq.shape[0]
        mean = np.empty((k, self.n_objectives))
        cov = np.empty((self.n_objectives, k, k))
        for m, p in enumerate(self.params):
            Kqq = matern52(Xq, Xq, p.lengthscales, p.signal_variance)
            if self.n == 0:
                mean[:, m] = 0.0
                cov[m] = Kqq
            else:
                Ks = matern52(Xq, self.X, p.lengthscales, p.signal_variance)
                mean[:, m] = Ks @ self._alphas[m]
                v = solve_triangular(self._chols[m], Ks.T, lower=True)
                cov[m] = Kqq - v.T @ v
            d = np.diagonal(cov[m]).copy()
            np.fill_diagonal(cov[m], np.clip(d, 0.0, None))
        return mean * self.scale + self.shift, cov * self.scale[:, None, None] ** 2

    def posterior_cross_cov(self, A, B) -> np.ndarray:
        """Per-objective posterior covariance (M, a, b) between two point sets."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        out = np.empty((self.n_objectives, A.shape[0], B.shape[0]))
        for m, p in enumerate(self.params):
            Kab = matern52(A, B, p.lengthscales, p.signal_variance)
            if self.n > 0:
                va = solve_triangular(
                    self._chols[m], matern52(self.X, A, p.lengthscales, p.signal_variance),
                    lower=True,
                )
                vb = solve_triangular(
                    self._chols[m], matern52(self.X, B, p.lengthscales, p.signal_variance),
                    lower=True,
                )
                Kab = Kab - va.T @ vb
            out[m] = Kab
        return out * self.scale[:, None, None] ** 2

    def nadir(self) -> np.ndarray:
        """Componentwise worst observed value, on the raw scale."""
        if self.n == 0:
            raise ValueError("no observations")
        return self.Y.min(axis=0)

    def log_marginal_likelihood(self) -> np.ndarray:
        """Per-objective log marginal likelihood of the standardized data."""
        out = np.empty(self.n_objectives)
        for m in range(self.n_objectives):
            L = self._chols[m]
            y = self._Y_std[:, m]
            out[m] = -(
                0.5 * y @ self._alphas[m]
                + np.sum(np.log(np.diag(L)))
                + 0.5 * self.n * np.log(2 * np.pi)
            )
        return out
