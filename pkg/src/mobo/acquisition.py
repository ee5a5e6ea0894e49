"""Entropy-based acquisition functions over Pareto-optimal samples.

The utility of a candidate is the reduction in predictive entropy after
conditioning on sampled optimal input/output sets: the Gaussian entropy of
the observation minus an estimate of the entropy once the observation is
constrained to lie below the sampled front. Four conditional-entropy
estimates are provided (truncated-normal, moment-matched with full or
diagonal covariance, and Monte Carlo), each usable with or without
conditioning the surrogate on the sampled optima. Simple non-entropy
baselines used by the benchmark harness live here as well.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from .gp import GaussianProcess, _chol_with_jitter
from .pareto import BoxDecomposition, hypervolume, pareto_filter
from .sampling import ParetoSample, draw_path, reference_from_nadir

__all__ = [
    "ESTIMATE_KINDS",
    "TruncationStats",
    "AcquisitionContext",
    "initial_entropy",
    "pointwise_initial_entropy",
    "cdf_dominated",
    "truncation_stats",
    "truncation_stats_from_moments",
    "truncated_moments",
    "h_noiseless",
    "h_lower_bound",
    "h_monte_carlo",
    "acquisition_value",
    "acquisition_values",
    "greedy_batch_select",
    "baseline_random",
    "baseline_tsemo",
    "baseline_parego",
    "augmented_chebyshev",
    "mc_expected_improvement",
    "qmc_normal_base_samples",
]

ESTIMATE_KINDS = (
    "jes-0", "jes-lb", "jes-lb2", "jes-mc",
    "mes-0", "mes-lb", "mes-lb2", "mes-mc",
)

LOG_2PI_E = np.log(2.0 * np.pi * np.e)
W_FLOOR = 1e-10
VARIANCE_FLOOR = 1e-12
_MC_CHUNK = 256


def qmc_normal_base_samples(n: int, dim: int, seed: int = 0) -> np.ndarray:
    """Scrambled low-discrepancy standard-normal draws for reparameterization."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # Sobol balance warning for non-power-of-two n
        u = qmc.Sobol(d=dim, scramble=True, seed=seed).random(n)
    return ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))


def _phi(z):
    """Standard normal pdf, zero at infinite arguments."""
    with np.errstate(over="ignore"):
        out = np.exp(-0.5 * z**2) / np.sqrt(2.0 * np.pi)
    return np.where(np.isfinite(z), out, 0.0)


def _z_phi(z):
    """z * pdf(z) with the tail limit of zero."""
    with np.errstate(invalid="ignore", over="ignore"):
        out = z * _phi(z)
    return np.where(np.isfinite(z), out, 0.0)


def _prod_excluding_one(A):
    """prod over the last axis of A, excluding each column in turn."""
    m = A.shape[-1]
    out = np.empty_like(A)
    for j in range(m):
        cols = [c for c in range(m) if c != j]
        out[..., j] = np.prod(A[..., cols], axis=-1) if cols else 1.0
    return out


# ---------------------------------------------------------------------------
# entropy building blocks
# ---------------------------------------------------------------------------


def pointwise_initial_entropy(model: GaussianProcess, X) -> np.ndarray:
    """Gaussian observation entropy at each query point, shape (k,)."""
    _, var = model.posterior(X)
    total = var + model.noise_variances()
    m = model.n_objectives
    return 0.5 * m * LOG_2PI_E + 0.5 * np.sum(np.log(total), axis=1)


def initial_entropy(model: GaussianProcess, X) -> float:
    """Joint Gaussian observation entropy of a batch of query points.

    For a single point this is the sum of per-objective marginal entropies;
    for a batch the per-objective log-determinant of the noisy posterior
    covariance is computed exactly (with jitter rescue for degenerate
    batches, e.g. duplicated points at zero noise).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 1:
        return float(pointwise_initial_entropy(model, X)[0])
    _, cov = model.posterior_cov(X)
    noise = model.noise_variances()
    m = model.n_objectives
    total = 0.5 * m * LOG_2PI_E
    for j in range(m):
        K = cov[j] + noise[j] * np.eye(X.shape[0])
        L, _ = _chol_with_jitter(K)
        total += np.sum(np.log(np.diag(L)))
    return float(total)


def cdf_dominated(mean, var, decomposition: BoxDecomposition) -> np.ndarray:
    """Probability that an independent Gaussian vector lands in the dominated region.

    ``mean`` and ``var`` may be batched with shape (k, M); the result has
    shape (k,), clamped to [0, 1].
    """
    mean = np.atleast_2d(np.asarray(mean, dtype=float))
    sd = np.sqrt(np.atleast_2d(np.asarray(var, dtype=float)))
    with np.errstate(invalid="ignore"):
        gu = (decomposition.upper[None, :, :] - mean[:, None, :]) / sd[:, None, :]
        gl = (decomposition.lower[None, :, :] - mean[:, None, :]) / sd[:, None, :]
    W_jm = ndtr(gu) - np.where(np.isfinite(gl), ndtr(gl), 0.0)
    W = np.sum(np.prod(W_jm, axis=2), axis=1)
    return np.clip(W, 0.0, 1.0)


@dataclass(frozen=True)
class TruncationStats:
    """Normal cdf/pdf statistics of a box decomposition at query points.

    All box-indexed arrays have shape (k, J, M); ``W`` has shape (k,). The
    latent variance is floored before standardization, and ``rho`` is the
    correlation between the noisy observation and the latent value.
    """

    mean: np.ndarray  # (k, M)
    variance: np.ndarray  # (k, M), latent
    noise: np.ndarray  # (M,)
    gamma_lower: np.ndarray
    gamma_upper: np.ndarray
    W_jm: np.ndarray
    W_j: np.ndarray  # (k, J)
    W: np.ndarray  # (k,)
    G_jm: np.ndarray
    V_jm: np.ndarray
    rho: np.ndarray  # (k, M)
    # sums over boxes of W_j * (G|V)_jm / W_jm, computed without division
    g_sum: np.ndarray = field(repr=False, default=None)  # (k, M)
    v_sum: np.ndarray = field(repr=False, default=None)  # (k, M)


def truncation_stats(
    model: GaussianProcess, X, decomposition: BoxDecomposition
) -> TruncationStats:
    """Evaluate the truncation statistics of ``decomposition`` under ``model``.

    Pass the conditioned model to honour sampled optima as pseudo-data, or
    the plain posterior to skip that step.
    """
    mean, var = model.posterior(X)
    return truncation_stats_from_moments(
        mean, var, model.noise_variances(), decomposition
    )


def truncation_stats_from_moments(mean, var, noise, decomposition) -> TruncationStats:
    """Truncation statistics from explicit per-objective moments (batched)."""
    mean = np.atleast_2d(np.asarray(mean, dtype=float))
    var = np.clip(np.atleast_2d(np.asarray(var, dtype=float)), VARIANCE_FLOOR, None)
    noise = np.asarray(noise, dtype=float)
    sd = np.sqrt(var)

    with np.errstate(invalid="ignore"):
        gu = (decomposition.upper[None, :, :] - mean[:, None, :]) / sd[:, None, :]
        gl = (decomposition.lower[None, :, :] - mean[:, None, :]) / sd[:, None, :]

    Phi_u = ndtr(gu)
    Phi_l = np.where(np.isfinite(gl), ndtr(gl), 0.0)
    W_jm = np.clip(Phi_u - Phi_l, 0.0, None)
    W_j = np.prod(W_jm, axis=2)
    W = np.sum(W_j, axis=1)

    G_jm = _phi(gu) - _phi(gl)
    V_jm = _z_phi(gu) - _z_phi(gl)
    excl = _prod_excluding_one(W_jm)
    g_sum = np.sum(G_jm * excl, axis=1)
    v_sum = np.sum(V_jm * excl, axis=1)
    rho = np.sqrt(var / (var + noise))

    return TruncationStats(
        mean=mean,
        variance=var,
        noise=noise,
        gamma_lower=gl,
        gamma_upper=gu,
        W_jm=W_jm,
        W_j=W_j,
        W=W,
        G_jm=G_jm,
        V_jm=V_jm,
        rho=rho,
        g_sum=g_sum,
        v_sum=v_sum,
    )


def _gaussian_entropy(stats: TruncationStats) -> np.ndarray:
    m = stats.mean.shape[1]
    return 0.5 * m * LOG_2PI_E + 0.5 * np.sum(
        np.log(stats.variance + stats.noise), axis=1
    )


def h_noiseless(stats: TruncationStats) -> np.ndarray:
    """Truncated-normal conditional entropy with the noise-corrected variance term.

    Falls back to the untruncated Gaussian entropy where the dominated-region
    probability is below floor.
    """
    W = np.maximum(stats.W, W_FLOOR)
    correction = np.log(W) - 0.5 * np.sum(stats.v_sum, axis=1) / W
    out = _gaussian_entropy(stats) + correction
    low = stats.W <= W_FLOOR
    if np.any(low):
        warnings.warn("dominated-region probability below floor; entropy untruncated")
        out = np.where(low, _gaussian_entropy(stats), out)
    return out


def truncated_moments(stats: TruncationStats) -> tuple[np.ndarray, np.ndarray]:
    """Moment-matched mean (k, M) and covariance (k, M, M) of the constrained observation."""
    W = np.maximum(stats.W, W_FLOOR)[:, None]
    sd = np.sqrt(stats.variance)
    mean = stats.mean - sd * stats.g_sum / W

    k, _, m = stats.W_jm.shape
    cov = np.empty((k, m, m))
    var_diag = (
        stats.variance
        + stats.noise
        - (stats.variance / W) * (stats.v_sum + stats.g_sum**2 / W)
    )
    for a in range(m):
        cov[:, a, a] = var_diag[:, a]
        for b in range(a + 1, m):
            others = [c for c in range(m) if c != a and c != b]
            excl2 = (
                np.prod(stats.W_jm[:, :, others], axis=2) if others else np.ones((k, stats.W_jm.shape[1]))
            )
            cross = np.sum(stats.G_jm[:, :, a] * stats.G_jm[:, :, b] * excl2, axis=1)
            cov_ab = (sd[:, a] * sd[:, b] / W[:, 0]) * (
                cross - stats.g_sum[:, a] * stats.g_sum[:, b] / W[:, 0]
            )
            cov[:, a, b] = cov_ab
            cov[:, b, a] = cov_ab
    return mean, cov


def h_lower_bound(stats: TruncationStats, full_covariance: bool = True) -> np.ndarray:
    """Entropy of the moment-matched Gaussian approximation.

    ``full_covariance=True`` uses the exact log-determinant of the matched
    covariance; ``False`` keeps only its diagonal, which can only increase
    the value. Rows whose matched covariance is not positive definite fall
    back to the diagonal with a warning.
    """
    _, cov = truncated_moments(stats)
    k, m, _ = cov.shape
    diag = np.einsum("kmm->km", cov)
    h_diag = 0.5 * m * LOG_2PI_E + 0.5 * np.sum(
        np.log(np.maximum(diag, VARIANCE_FLOOR)), axis=1
    )
    if not full_covariance:
        return h_diag

    cov = 0.5 * (cov + np.transpose(cov, (0, 2, 1)))
    jitter = 1e-12 * np.maximum(np.mean(diag, axis=1), 1.0)
    cov = cov + jitter[:, None, None] * np.eye(m)
    sign, logdet = np.linalg.slogdet(cov)
    bad = sign <= 0
    if np.any(bad):
        warnings.warn("moment-matched covariance not positive definite; using diagonal")
    h_full = 0.5 * m * LOG_2PI_E + 0.5 * logdet
    return np.where(bad, h_diag, h_full)


def h_monte_carlo(stats: TruncationStats, base_samples) -> np.ndarray:
    """Monte Carlo conditional entropy using fixed standard-normal base draws.

    The observation is reparameterized through the base draws; each draw is
    weighted by the probability that the latent value still lies in the
    dominated region after observing it.
    """
    z = np.asarray(base_samples, dtype=float)
    n_draws = z.shape[0]
    k = stats.mean.shape[0]
    W = np.maximum(stats.W, W_FLOOR)

    total_var = stats.variance + stats.noise
    log_p_const = -0.5 * np.sum(np.log(total_var), axis=1)  # (k,)
    log_phi_z = np.sum(-0.5 * z**2 - 0.5 * np.log(2.0 * np.pi), axis=1)  # (I,)

    denom = np.sqrt(np.clip(1.0 - stats.rho**2, VARIANCE_FLOOR, None))  # (k, M)
    out = np.empty(k)
    for start in range(0, k, _MC_CHUNK):
        sl = slice(start, min(start + _MC_CHUNK, k))
        gu = stats.gamma_upper[sl][:, :, :, None]  # (c, J, M, 1)
        gl = stats.gamma_lower[sl][:, :, :, None]
        shift = stats.rho[sl][:, None, :, None] * z.T[None, None, :, :]  # (c, 1, M, I)
        scale = denom[sl][:, None, :, None]
        with np.errstate(invalid="ignore"):
            wu = ndtr((gu - shift) / scale)
            wl = np.where(np.isfinite(gl), ndtr((gl - shift) / scale), 0.0)
        Wp = np.sum(np.prod(np.clip(wu - wl, 0.0, None), axis=2), axis=1)  # (c, I)
        with np.errstate(divide="ignore"):
            log_wp = np.where(Wp > 0, np.log(np.maximum(Wp, 1e-300)), 0.0)
        log_py = log_phi_z[None, :] + log_p_const[sl, None]
        integrand = np.where(Wp > 0, Wp * (log_wp + log_py), 0.0)
        out[sl] = -np.sum(integrand, axis=1) / (W[sl] * n_draws) + np.log(W[sl])

    low = stats.W <= W_FLOOR
    if np.any(low):
        gauss_mc = -(np.sum(log_phi_z) / n_draws + log_p_const)
        out = np.where(low, gauss_mc, out)
    return out


# ---------------------------------------------------------------------------
# acquisition over sampled optima
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AcquisitionContext:
    """Frozen per-iteration state: surrogate, optimal samples and base draws."""

    model: GaussianProcess
    samples: tuple[ParetoSample, ...]
    kind: str
    base_samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ESTIMATE_KINDS:
            raise ValueError(f"unknown estimate kind {self.kind!r}")
        if not self.samples:
            raise ValueError("need at least one Pareto sample")
        if self.kind.endswith("-mc") and self.base_samples is None:
            raise ValueError("Monte Carlo estimates need base samples")
        object.__setattr__(self, "samples", tuple(self.samples))

    @classmethod
    def build(cls, model, samples, kind, n_base_samples: int = 128, seed: int = 0):
        base = None
        if kind.endswith("-mc"):
            base = qmc_normal_base_samples(n_base_samples, model.n_objectives, seed)
        return cls(model=model, samples=tuple(samples), kind=kind, base_samples=base)


def _conditional_entropies(ctx: AcquisitionContext, X) -> np.ndarray:
    """Mean over samples of the conditional entropy estimate, shape (k,)."""
    conditioned = ctx.kind.startswith("jes")
    total = 0.0
    for sample in ctx.samples:
        model = sample.conditioned_model if conditioned else ctx.model
        stats = truncation_stats(model, X, sample.decomposition)
        if ctx.kind.endswith("-0"):
            h = h_noiseless(stats)
        elif ctx.kind.endswith("-lb"):
            h = h_lower_bound(stats, full_covariance=True)
        elif ctx.kind.endswith("-lb2"):
            h = h_lower_bound(stats, full_covariance=False)
        else:
            h = h_monte_carlo(stats, ctx.base_samples)
        total = total + h
    return total / len(ctx.samples)


def acquisition_values(ctx: AcquisitionContext, X) -> np.ndarray:
    """Single-point acquisition value at each row of X, shape (k,)."""
    return pointwise_initial_entropy(ctx.model, X) - _conditional_entropies(ctx, X)


def acquisition_value(ctx: AcquisitionContext, X) -> float:
    """Acquisition value of a batch: joint initial entropy minus summed estimates."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return initial_entropy(ctx.model, X) - float(np.sum(_conditional_entropies(ctx, X)))


def greedy_batch_select(ctx: AcquisitionContext, candidates, q: int) -> np.ndarray:
    """Greedily grow a batch of q candidate indices maximizing the batch value.

    The conditional-entropy term is additive over batch members, so it is
    evaluated once per candidate; each round only updates the joint initial
    entropy through the Schur complement of the noisy covariance.
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    k = candidates.shape[0]
    if q > k:
        raise ValueError("batch size exceeds number of candidates")
    noise = ctx.model.noise_variances()
    _, var = ctx.model.posterior(candidates)
    h_bar = _conditional_entropies(ctx, candidates)

    chosen: list[int] = []
    taken = np.zeros(k, dtype=bool)
    for _ in range(q):
        if not chosen:
            gain = 0.5 * np.sum(np.log(var + noise), axis=1) - h_bar
        else:
            Xc = candidates[chosen]
            cov_cc = ctx.model.posterior_cross_cov(Xc, Xc)
            cov_cx = ctx.model.posterior_cross_cov(Xc, candidates)
            gain = -h_bar.copy()
            for m in range(ctx.model.n_objectives):
                B = cov_cc[m] + noise[m] * np.eye(len(chosen))
                L, _ = _chol_with_jitter(B)
                v = solve_triangular(L, cov_cx[m], lower=True)
                schur = var[:, m] + noise[m] - np.sum(v**2, axis=0)
                gain += 0.5 * np.log(np.maximum(schur, 1e-300))
        gain[taken] = -np.inf
        idx = int(np.argmax(gain))
        chosen.append(idx)
        taken[idx] = True
    return np.asarray(chosen, dtype=int)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------


def baseline_random(candidates, seed: int = 0) -> int:
    """Index of a uniformly random candidate."""
    rng = np.random.default_rng(seed)
    return int(rng.integers(0, np.atleast_2d(candidates).shape[0]))


def baseline_tsemo(
    model: GaussianProcess, candidates, seed: int = 0, reference=None, n_features: int = 500
) -> int:
    """Index of the candidate with the best hypervolume improvement on one path.

    The improvement is measured against the path's values at the observed
    inputs; ties (including all-zero improvement) go to the lowest index.
    """
    if reference is None:
        reference = reference_from_nadir(model.nadir())
    reference = np.asarray(reference, dtype=float)
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    path = draw_path(model, n_features=n_features, seed=seed)
    front = pareto_filter(path(model.X))
    base_hv = hypervolume(front, reference)
    values = path(candidates)
    best_idx, best_gain = 0, -np.inf
    for i in range(candidates.shape[0]):
        gain = hypervolume(np.vstack([front, values[i]]), reference) - base_hv
        if gain > best_gain + 1e-15:
            best_gain, best_idx = gain, i
    return best_idx


def augmented_chebyshev(Y_norm, weights, rho: float = 0.01) -> np.ndarray:
    """Augmented Chebyshev scalarization of normalized objectives (maximization)."""
    Y_norm = np.asarray(Y_norm, dtype=float)
    weighted = Y_norm * np.asarray(weights, dtype=float)
    return np.min(weighted, axis=-1) + rho * np.sum(weighted, axis=-1)


def mc_expected_improvement(draws, incumbent: float) -> np.ndarray:
    """Monte Carlo expected improvement of sampled utilities over an incumbent."""
    return np.mean(np.clip(np.asarray(draws, dtype=float) - incumbent, 0.0, None), axis=-1)


def baseline_parego(
    model: GaussianProcess, candidates, seed: int = 0, n_base_samples: int = 128
) -> int:
    """Index maximizing Monte Carlo expected improvement of a random scalarization.

    Objectives are normalized to [0, 1] with the observed ranges, scalarized
    with a random simplex weight, and improvement is measured over the best
    scalarized observation.
    """
    rng = np.random.default_rng(seed)
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    m = model.n_objectives
    w = rng.dirichlet(np.ones(m))
    z = rng.standard_normal((n_base_samples, m))

    lo = model.Y.min(axis=0)
    span = np.maximum(model.Y.max(axis=0) - lo, 1e-12)
    incumbent = float(np.max(augmented_chebyshev((model.Y - lo) / span, w)))

    mean, var = model.posterior(candidates)
    draws = mean[:, None, :] + np.sqrt(var)[:, None, :] * z[None, :, :]
    scal = augmented_chebyshev((draws - lo) / span, w)  # (k, I)
    return int(np.argmax(mc_expected_improvement(scal, incumbent)))
