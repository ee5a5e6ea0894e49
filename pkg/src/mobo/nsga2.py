"""NSGA-II evolutionary solver for vector-valued minimization on the unit cube.

Variation uses simulated binary crossover and polynomial mutation; survival
uses non-dominated sorting with crowding distance. All randomness comes from
one seeded generator, so a fixed config reproduces the output bitwise.
Objectives are evaluated in batches: ``objective(X)`` maps (k, D) -> (k, M).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pareto import pareto_indices

__all__ = ["EvolverConfig", "nsga2_minimize"]

_BAD = 1e18  # sentinel replacing non-finite objective values


@dataclass(frozen=True)
class EvolverConfig:
    population: int = 100
    generations: int = 500
    offspring: int = 10
    crossover_eta: float = 15.0
    mutation_eta: float = 20.0
    mutation_prob: float | None = None  # default 1 / D
    seed: int = 0

    def __post_init__(self):
        if self.population < 2 or self.offspring < 1 or self.generations < 1:
            raise ValueError("population must be >= 2, offspring and generations >= 1")
        if self.crossover_eta <= 0 or self.mutation_eta <= 0:
            raise ValueError("distribution indices must be positive")
        if self.mutation_prob is not None and not (0 < self.mutation_prob <= 1):
            raise ValueError("mutation_prob must lie in (0, 1]")


def _sanitize(F: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(F), F, _BAD)


def fast_non_dominated_sort(F: np.ndarray) -> np.ndarray:
    """Rank each row of F (minimization); rank 0 is the non-dominated front."""
    n = F.shape[0]
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    eq = np.all(F[:, None, :] == F[None, :, :], axis=2)
    dom = le & ~eq  # dom[i, j]: i strictly dominates j
    counts = dom.sum(axis=0)
    ranks = np.full(n, -1, dtype=int)
    rank = 0
    unassigned = counts.copy()
    while np.any(ranks < 0):
        front = (unassigned == 0) & (ranks < 0)
        if not np.any(front):  # cycles impossible; guard against numerical oddity
            front = ranks < 0
        ranks[front] = rank
        unassigned = unassigned - dom[front].sum(axis=0)
        rank += 1
    return ranks


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """Crowding distance within one front (minimization objectives)."""
    n, m = F.shape
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        fj = F[order, j]
        span = fj[-1] - fj[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (fj[2:] - fj[:-2]) / span
    return dist


def _survival(X, F, n_survive):
    ranks = fast_non_dominated_sort(F)
    selected: list[int] = []
    for rank in range(ranks.max() + 1):
        front = np.nonzero(ranks == rank)[0]
        if len(selected) + len(front) <= n_survive:
            selected.extend(front.tolist())
        else:
            crowd = crowding_distance(F[front])
            # prefer spread; break crowding ties by original position
            order = np.lexsort((front, -crowd))
            selected.extend(front[order][: n_survive - len(selected)].tolist())
            break
    idx = np.asarray(selected, dtype=int)
    return X[idx], F[idx]


def _tournament(rng, ranks, crowd, n_picks):
    a = rng.integers(0, len(ranks), size=n_picks)
    b = rng.integers(0, len(ranks), size=n_picks)
    a_wins = (ranks[a] < ranks[b]) | (
        (ranks[a] == ranks[b]) & (crowd[a] > crowd[b])
    ) | ((ranks[a] == ranks[b]) & (crowd[a] == crowd[b]) & (a <= b))
    return np.where(a_wins, a, b)


def _sbx_crossover(rng, parents_a, parents_b, eta):
    u = rng.random(parents_a.shape)
    swap = rng.random(parents_a.shape) < 0.5
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0)),
    )
    beta = np.where(swap, beta, 1.0)
    c1 = 0.5 * ((1 + beta) * parents_a + (1 - beta) * parents_b)
    c2 = 0.5 * ((1 - beta) * parents_a + (1 + beta) * parents_b)
    cross = rng.random(parents_a.shape[0]) < 0.9
    c1 = np.where(cross[:, None], c1, parents_a)
    c2 = np.where(cross[:, None], c2, parents_b)
    return np.clip(c1, 0.0, 1.0), np.clip(c2, 0.0, 1.0)


def _polynomial_mutation(rng, X, eta, prob):
    u = rng.random(X.shape)
    apply = rng.random(X.shape) < prob
    lo_side = u < 0.5
    # bounds are [0, 1]; delta terms follow the usual bounded formulation
    d1 = X
    d2 = 1.0 - X
    pow_ = 1.0 / (eta + 1.0)
    val_lo = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)) ** pow_ - 1.0
    val_hi = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)) ** pow_
    delta = np.where(lo_side, val_lo, val_hi)
    Xm = np.where(apply, X + delta, X)
    return np.clip(Xm, 0.0, 1.0)


def nsga2_minimize(objective, dim: int, n_obj: int, config: EvolverConfig):
    """Minimize a batched vector objective over [0, 1]^dim.

    Returns the mutually non-dominated subset of the final population as a
    pair of matching arrays (inputs (k, dim), objectives (k, n_obj)). Rows
    with non-finite objective values are pushed behind every finite point.
    """
    rng = np.random.default_rng(config.seed)
    prob = config.mutation_prob if config.mutation_prob is not None else 1.0 / dim

    X = rng.random((config.population, dim))
    F = _sanitize(np.asarray(objective(X), dtype=float).reshape(config.population, n_obj))

    # the initial population counts as the first generation
    for _ in range(config.generations - 1):
        ranks = fast_non_dominated_sort(F)
        crowd = np.empty(len(ranks))
        for r in range(ranks.max() + 1):
            idx = np.nonzero(ranks == r)[0]
            crowd[idx] = crowding_distance(F[idx])

        n_pairs = (config.offspring + 1) // 2
        pa = _tournament(rng, ranks, crowd, n_pairs)
        pb = _tournament(rng, ranks, crowd, n_pairs)
        c1, c2 = _sbx_crossover(rng, X[pa], X[pb], config.crossover_eta)
        children = np.vstack([c1, c2])[: config.offspring]
        children = _polynomial_mutation(rng, children, config.mutation_eta, prob)
        Fc = _sanitize(
            np.asarray(objective(children), dtype=float).reshape(len(children), n_obj)
        )
        X, F = _survival(np.vstack([X, children]), np.vstack([F, Fc]), config.population)

    keep = pareto_indices(F)
    keep = keep[np.all(F[keep] < _BAD, axis=1)]
    return X[keep], F[keep]
