"""Benchmark problems for the optimization harness.

Problems expose a batched, deterministic ``evaluate`` in the maximization
convention (the raw benchmark definitions are minimization and get negated
here), plus observation-noise levels and the reference point used by the
hypervolume metrics.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .nsga2 import EvolverConfig, nsga2_minimize
from .pareto import pareto_filter
from .sampling import FeatureBasis, sample_matern_frequencies

__all__ = ["Problem", "zdt2", "zdt2_problem", "gp_sample_problem", "make_problem"]

_FRONT_CACHE_DIR = Path.home() / ".cache" / "mobo" / "fronts"
_FRONT_BUDGET = EvolverConfig(population=200, generations=400, offspring=20, seed=7)


@dataclass(frozen=True)
class Problem:
    """A noisy vector-valued benchmark (maximization convention)."""

    name: str
    dim: int
    n_obj: int
    bounds: np.ndarray  # (D, 2)
    evaluate: Callable[[np.ndarray], np.ndarray]  # (k, D) -> (k, M), noiseless
    noise_sd: np.ndarray  # (M,)
    reference_point: np.ndarray  # (M,)
    true_front: Callable[[], np.ndarray] | None = field(default=None)

    def from_unit_cube(self, X01) -> np.ndarray:
        X01 = np.atleast_2d(np.asarray(X01, dtype=float))
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return lo + X01 * (hi - lo)


def zdt2(x, paper_sign: bool = False) -> np.ndarray:
    """Bi-objective ZDT2 values (minimization), batched over rows of ``x``.

    ``paper_sign=True`` flips the sign of the coupling sum inside g, a
    non-standard variant kept behind a flag; the canonical form uses
    g = 1 + 9/(D-1) * sum(x[1:]).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    f1 = x[:, 0]
    coupling = (9.0 / (d - 1)) * np.sum(x[:, 1:], axis=1) if d > 1 else 0.0
    g = 1.0 - coupling if paper_sign else 1.0 + coupling
    with np.errstate(divide="ignore", invalid="ignore"):
        f2 = g * (1.0 - (f1 / g) ** 2)
    return np.column_stack([f1, f2])


def _zdt2_true_front(n_points: int = 2001) -> np.ndarray:
    f1 = np.linspace(0.0, 1.0, n_points)
    return np.column_stack([-f1, -(1.0 - f1**2)])


def zdt2_problem(dim: int = 6, noise_sd=(0.1, 0.8), paper_sign: bool = False) -> Problem:
    """ZDT2 with the benchmark noise levels and reference point."""
    if dim < 2:
        raise ValueError("zdt2 needs at least two inputs")
    name = "zdt2-paper-sign" if paper_sign else "zdt2"
    problem = Problem(
        name=name,
        dim=dim,
        n_obj=2,
        bounds=np.tile([0.0, 1.0], (dim, 1)),
        evaluate=lambda X: -zdt2(X, paper_sign=paper_sign),
        noise_sd=np.asarray(noise_sd, dtype=float),
        reference_point=np.array([-11.0, -11.0]),
        true_front=None if paper_sign else _zdt2_true_front,
    )
    if paper_sign:
        return replace(problem, true_front=lambda: solved_front(problem))
    return problem


def solved_front(problem: Problem, budget: EvolverConfig = _FRONT_BUDGET) -> np.ndarray:
    """Long evolutionary solve of a problem's front, cached to disk."""
    key = json.dumps(
        [problem.name, problem.dim, problem.n_obj, budget.population, budget.generations,
         budget.offspring, budget.seed]
    )
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    cache = _FRONT_CACHE_DIR / f"{digest}.npy"
    if cache.exists():
        return np.load(cache)
    objective = lambda X01: -problem.evaluate(problem.from_unit_cube(X01))  # noqa: E731
    _, F = nsga2_minimize(objective, problem.dim, problem.n_obj, budget)
    front = pareto_filter(-F)
    try:
        cache.parent.mkdir(parents=True, exist_ok=True)
        np.save(cache, front)
    except OSError:
        pass
    return front


def gp_sample_problem(
    dim: int,
    n_obj: int,
    seed: int = 0,
    lengthscale: float = 0.4,
    n_features: int = 256,
    noise_sd: float = 0.0,
) -> Problem:
    """Smooth synthetic problem built from fixed random trigonometric expansions.

    Deterministic given the seed; the front is obtained by a cached long
    solver run. Supports the single-objective case ``n_obj=1``.
    """
    rng = np.random.default_rng(seed)
    ls = np.full(dim, lengthscale)
    bases = []
    for _ in range(n_obj):
        freqs = sample_matern_frequencies(rng, n_features, ls)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n_features)
        weights = rng.standard_normal(n_features)
        bases.append(FeatureBasis(freqs, phases, weights))

    def evaluate(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([b(X) for b in bases])

    problem = Problem(
        name=f"gp-sample-d{dim}-m{n_obj}-s{seed}",
        dim=dim,
        n_obj=n_obj,
        bounds=np.tile([0.0, 1.0], (dim, 1)),
        evaluate=evaluate,
        noise_sd=np.full(n_obj, float(noise_sd)),
        reference_point=np.full(n_obj, -3.0),
        true_front=None,
    )
    return replace(problem, true_front=lambda: solved_front(problem))


def make_problem(name: str, dim: int | None = None, paper_sign: bool = False) -> Problem:
    """Problem registry used by experiment configs and the command line."""
    if name == "zdt2":
        return zdt2_problem(dim=dim or 6, paper_sign=paper_sign)
    if name == "zdt2-noiseless":
        return zdt2_problem(dim=dim or 6, noise_sd=(0.0, 0.0), paper_sign=paper_sign)
    raise ValueError(f"unknown problem {name!r}")
