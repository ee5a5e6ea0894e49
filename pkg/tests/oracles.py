"""Independent reference implementations used to validate the package.

Everything here is deliberately written from first principles (brute-force
enumeration, Monte Carlo, adaptive quadrature, dense linear algebra) and
shares no code path with the library being tested.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate
from scipy.stats import norm


# ---------------------------------------------------------------------------
# Pareto geometry
# ---------------------------------------------------------------------------


def brute_force_pareto(points: np.ndarray) -> np.ndarray:
    """O(k^2) domination scan returning the non-dominated subset, deduplicated."""
    pts = np.atleast_2d(points)
    keep = []
    for i, a in enumerate(pts):
        dominated = False
        for j, b in enumerate(pts):
            if i == j:
                continue
            if np.all(b >= a) and np.any(b > a):
                dominated = True
                break
            if j < i and np.all(b == a):
                dominated = True  # duplicate, keep first only
                break
        if not dominated:
            keep.append(i)
    return pts[keep]


def weakly_dominated_mask(Z: np.ndarray, front: np.ndarray) -> np.ndarray:
    """Row mask: is each z weakly dominated by at least one front point."""
    return np.any(np.all(Z[:, None, :] <= front[None, :, :], axis=2), axis=1)


def mc_dominated_volume(front, reference, n_samples: int, seed: int = 0):
    """Monte Carlo estimate (value, standard error) of the clipped dominated volume."""
    front = np.atleast_2d(np.asarray(front, dtype=float))
    ref = np.asarray(reference, dtype=float)
    hi = front.max(axis=0)
    box = np.prod(np.clip(hi - ref, 0.0, None))
    if box == 0.0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < n_samples:
        n = min(1_000_000, n_samples - done)
        Z = rng.uniform(ref, hi, size=(n, front.shape[1]))
        hits += int(np.sum(weakly_dominated_mask(Z, front)))
        done += n
    frac = hits / n_samples
    se = box * np.sqrt(frac * (1.0 - frac) / n_samples)
    return box * frac, se


def mc_cdf_dominated(mean, var, front, n_samples: int, seed: int = 0):
    """Monte Carlo estimate (value, standard error) of P(z weakly below the front)."""
    mean = np.asarray(mean, dtype=float)
    sd = np.sqrt(np.asarray(var, dtype=float))
    front = np.atleast_2d(np.asarray(front, dtype=float))
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < n_samples:
        n = min(1_000_000, n_samples - done)
        Z = mean + sd * rng.standard_normal((n, mean.shape[0]))
        hits += int(np.sum(weakly_dominated_mask(Z, front)))
        done += n
    frac = hits / n_samples
    se = np.sqrt(max(frac * (1.0 - frac), 1e-12) / n_samples)
    return frac, se


# ---------------------------------------------------------------------------
# Gaussian process regression (dense direct solve)
# ---------------------------------------------------------------------------


def dense_matern52(X1, X2, lengthscales, signal_variance):
    X1, X2 = np.atleast_2d(X1), np.atleast_2d(X2)
    d = X1[:, None, :] - X2[None, :, :]
    r = np.sqrt(np.sum((d / lengthscales) ** 2, axis=2))
    t = np.sqrt(5.0) * r
    return signal_variance * (1 + t + t**2 / 3) * np.exp(-t)


def dense_gp_posterior(X_train, y_train, X_query, lengthscales, signal_variance,
                       noise_variance):
    """Posterior mean/covariance via an explicit dense solve (no Cholesky reuse)."""
    K = dense_matern52(X_train, X_train, lengthscales, signal_variance)
    K = K + noise_variance * np.eye(len(X_train))
    Ks = dense_matern52(X_query, X_train, lengthscales, signal_variance)
    Kss = dense_matern52(X_query, X_query, lengthscales, signal_variance)
    sol = np.linalg.solve(K, np.asarray(y_train, dtype=float))
    mean = Ks @ sol
    cov = Kss - Ks @ np.linalg.solve(K, Ks.T)
    return mean, cov


# ---------------------------------------------------------------------------
# truncated / constrained observation distributions
# ---------------------------------------------------------------------------


def _box_segment_moments(lo, hi, mu, var):
    """(probability, first, second) moments of N(mu, var) restricted to (lo, hi].

    Computed by adaptive quadrature on a clipped finite interval.
    """
    sd = np.sqrt(var)
    a = max(lo, mu - 10.0 * sd)
    b = min(hi, mu + 10.0 * sd)
    if b <= a:
        return 0.0, 0.0, 0.0
    pdf = lambda z: norm.pdf(z, loc=mu, scale=sd)  # noqa: E731
    p, _ = integrate.quad(pdf, a, b, limit=200)
    if p <= 0:
        return 0.0, 0.0, 0.0
    e1, _ = integrate.quad(lambda z: z * pdf(z), a, b, limit=200)
    e2, _ = integrate.quad(lambda z: z * z * pdf(z), a, b, limit=200)
    return p, e1 / p, e2 / p


def quad_constrained_moments(lower, upper, mean, var, noise):
    """Moments of the noisy observation given the latent value lies in the boxes.

    Per box the latent density factorizes into independent one-dimensional
    truncated normals, integrated adaptively; the independent observation
    noise then adds to the diagonal of the covariance. Returns
    (probability, mean (M,), covariance (M, M)).
    """
    lower = np.atleast_2d(lower)
    upper = np.atleast_2d(upper)
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    noise = np.asarray(noise, dtype=float)
    m = mean.shape[0]

    probs, e1s, e2s = [], [], []
    for lo, hi in zip(lower, upper):
        p_m, e1_m, e2_m = zip(
            *[_box_segment_moments(lo[j], hi[j], mean[j], var[j]) for j in range(m)]
        )
        probs.append(np.prod(p_m))
        e1s.append(np.asarray(e1_m))
        e2s.append(np.asarray(e2_m))
    probs = np.asarray(probs)
    W = probs.sum()
    if W <= 0:
        raise ValueError("constraint region has zero probability")
    e1s = np.asarray(e1s)
    e2s = np.asarray(e2s)

    first = (probs[:, None] * e1s).sum(axis=0) / W
    second = np.empty((m, m))
    for a in range(m):
        for b in range(m):
            if a == b:
                second[a, a] = np.sum(probs * e2s[:, a]) / W
            else:
                second[a, b] = np.sum(probs * e1s[:, a] * e1s[:, b]) / W
    cov = second - np.outer(first, first) + np.diag(noise)
    return W, first, cov


def _latent_in_region_prob(y, lower, upper, mean, var, noise):
    """P(latent in the boxes | observed y), by direct Gaussian conditioning."""
    y = np.asarray(y, dtype=float)
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    noise = np.asarray(noise, dtype=float)
    post_mean = mean + var / (var + noise) * (y - mean)
    post_var = var * noise / (var + noise)
    total = 0.0
    for lo, hi in zip(np.atleast_2d(lower), np.atleast_2d(upper)):
        term = 1.0
        for j in range(mean.shape[0]):
            sd = np.sqrt(max(post_var[j], 1e-300))
            term *= norm.cdf((hi[j] - post_mean[j]) / sd) - (
                norm.cdf((lo[j] - post_mean[j]) / sd) if np.isfinite(lo[j]) else 0.0
            )
        total += term
    return total


def quad_constrained_entropy(lower, upper, mean, var, noise):
    """Differential entropy of the noisy observation constrained to the boxes.

    Noiseless case: the observation density is the latent normal truncated to
    the boxes, integrated box by box. Noisy case (M <= 2): adaptive quadrature
    of -q log q over the observation space, with the constraint weight
    obtained by Gaussian conditioning.
    """
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    noise = np.asarray(noise, dtype=float)
    m = mean.shape[0]
    lower = np.atleast_2d(lower)
    upper = np.atleast_2d(upper)

    if np.all(noise == 0.0):
        probs, logs = [], []
        for lo, hi in zip(lower, upper):
            p = 1.0
            e_log = 0.0
            for j in range(m):
                sd = np.sqrt(var[j])
                a = max(lo[j], mean[j] - 10 * sd)
                b = min(hi[j], mean[j] + 10 * sd)
                if b <= a:
                    p = 0.0
                    break
                pdf = lambda z: norm.pdf(z, loc=mean[j], scale=sd)  # noqa: E731
                pj, _ = integrate.quad(pdf, a, b, limit=200)
                lj, _ = integrate.quad(
                    lambda z: norm.logpdf(z, loc=mean[j], scale=sd) * pdf(z), a, b,
                    limit=200,
                )
                p *= pj
                e_log += lj / pj if pj > 0 else 0.0
            if p > 0:
                probs.append(p)
                logs.append(e_log)
        probs = np.asarray(probs)
        W = probs.sum()
        # H = -sum_j (P_j / W) (E_j[log N] - log W)
        return -float(np.sum(probs / W * np.asarray(logs))) + np.log(W)

    W, _, _ = quad_constrained_moments(lower, upper, mean, var, noise)
    total_sd = np.sqrt(var + noise)

    def neg_q_log_q(*y):
        y = np.asarray(y)
        wp = _latent_in_region_prob(y, lower, upper, mean, var, noise)
        if wp <= 0:
            return 0.0
        log_n = np.sum(norm.logpdf(y, loc=mean, scale=total_sd))
        q = wp / W * np.exp(log_n)
        return -q * (np.log(wp / W) + log_n)

    lo = mean - 8.5 * total_sd
    hi = mean + 8.5 * total_sd
    if m == 1:
        value, _ = integrate.quad(neg_q_log_q, lo[0], hi[0], limit=200)
    elif m == 2:
        value, _ = integrate.dblquad(
            lambda y2, y1: neg_q_log_q(y1, y2), lo[0], hi[0], lo[1], hi[1],
            epsabs=1e-6, epsrel=1e-6,
        )
    else:
        raise ValueError("entropy oracle only supports one or two objectives")
    return float(value)


def truncated_normal_upper_entropy(upper, mean, var):
    """Closed-form entropy of N(mean, var) truncated to (-inf, upper]."""
    sd = np.sqrt(var)
    beta = (upper - mean) / sd
    z = norm.cdf(beta)
    return 0.5 * np.log(2 * np.pi * np.e * var) + np.log(z) - beta * norm.pdf(beta) / (2 * z)


def truncated_normal_upper_moments(upper, mean, var):
    """Closed-form (mean, variance) of N(mean, var) truncated to (-inf, upper]."""
    sd = np.sqrt(var)
    beta = (upper - mean) / sd
    ratio = norm.pdf(beta) / norm.cdf(beta)
    t_mean = mean - sd * ratio
    t_var = var * (1.0 - beta * ratio - ratio**2)
    return t_mean, t_var
