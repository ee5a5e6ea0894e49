"""Experiment orchestration: the optimization loop, persistence and defaults.

A run is a pure function of its config: every random decision is drawn from
a seed tree rooted at the config seed, so repeating a run reproduces the
records byte for byte. Results stream to ``record.csv`` (one row per
iteration, flushed immediately); wall-clock phase timings go to a sibling
``timing.csv`` so the record itself stays deterministic.
"""

from __future__ import annotations

import dataclasses
import json
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .acquisition import (
    ESTIMATE_KINDS,
    AcquisitionContext,
    acquisition_values,
    baseline_parego,
    baseline_random,
    baseline_tsemo,
    greedy_batch_select,
)
from .gp import GaussianProcess
from .metrics import HV_DISCREPANCY_FLOOR
from .nsga2 import EvolverConfig, nsga2_minimize
from .pareto import greedy_hv_truncate, hypervolume, pareto_filter
from .problems import Problem, make_problem
from .sampling import reference_from_nadir, sample_pareto

__all__ = [
    "ACQUISITIONS",
    "ExperimentConfig",
    "RunRecord",
    "load_config",
    "optimize_acquisition",
    "recommend",
    "run_experiment",
]

ACQUISITIONS = ESTIMATE_KINDS + ("random", "tsemo", "parego")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one optimization run.

    ``None`` for ``n_init`` or ``candidate_pool`` selects the dimension-based
    defaults 2(D+1) and 1000 D.
    """

    problem: str = "zdt2"
    acquisition: str = "jes-lb2"
    q: int = 1
    n_init: int | None = None
    n_iter: int = 50
    seed: int = 0
    n_pareto_samples: int = 10
    n_pareto_points: int = 10
    n_base_samples: int = 128
    n_features: int = 500
    evolver: EvolverConfig = field(default_factory=EvolverConfig)
    candidate_pool: int | None = None
    recommendation_size: int = 50
    problem_dim: int | None = None
    zdt2_paper_sign: bool = False

    def __post_init__(self):
        if self.acquisition not in ACQUISITIONS:
            raise ValueError(
                f"unknown acquisition {self.acquisition!r}; valid: {ACQUISITIONS}"
            )
        counts = {
            "q": self.q,
            "n_iter": self.n_iter + 1,  # zero iterations allowed
            "n_pareto_samples": self.n_pareto_samples,
            "n_pareto_points": self.n_pareto_points,
            "n_base_samples": self.n_base_samples,
            "n_features": self.n_features,
            "recommendation_size": self.recommendation_size,
        }
        for name, value in counts.items():
            if value < 1:
                raise ValueError(f"{name} must be at least 1")


def load_config(path) -> ExperimentConfig:
    """Parse a JSON config whose keys mirror ExperimentConfig; unknown keys fail."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "evolver" in raw:
        ev = raw["evolver"]
        ev_known = {f.name for f in dataclasses.fields(EvolverConfig)}
        ev_unknown = set(ev) - ev_known
        if ev_unknown:
            raise ValueError(f"unknown evolver keys: {sorted(ev_unknown)}")
        raw = dict(raw, evolver=EvolverConfig(**ev))
    return ExperimentConfig(**raw)


@dataclass
class RunRecord:
    """Per-iteration results of one run (deterministic part only)."""

    dim: int
    n_obj: int
    q: int
    iterations: list[dict] = field(default_factory=list)

    def header(self) -> list[str]:
        return (
            ["iter"]
            + [f"x_{i + 1}" for i in range(self.dim)]
            + [f"y_{j + 1}" for j in range(self.n_obj)]
            + ["log_hv_disc"]
        )

    def row_strings(self, row: dict) -> list[str]:
        def join(values):
            return ";".join(repr(float(v)) for v in values)

        cells = [str(row["iter"])]
        if row["X"] is None:
            cells += [""] * (self.dim + self.n_obj)
        else:
            cells += [join(row["X"][:, i]) for i in range(self.dim)]
            cells += [join(row["Y"][:, j]) for j in range(self.n_obj)]
        cells.append(repr(float(row["log_hv_disc"])))
        return cells

    def final_log_hv_disc(self) -> float:
        return float(self.iterations[-1]["log_hv_disc"])


class _Writer:
    """Crash-resilient CSV sink: every appended row is flushed to disk."""

    def __init__(self, out_dir, record: RunRecord):
        self.record_path = None
        self.timing_path = None
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            self.record_path = out / "record.csv"
            self.timing_path = out / "timing.csv"
            self.record_path.write_text(",".join(record.header()) + "\n")
            self.timing_path.write_text(
                "iter,phase_ms_init,phase_ms_sample,phase_ms_opt\n"
            )

    def append(self, record: RunRecord, row: dict, timing: dict):
        if self.record_path is None:
            return
        with self.record_path.open("a") as fh:
            fh.write(",".join(record.row_strings(row)) + "\n")
            fh.flush()
        with self.timing_path.open("a") as fh:
            fh.write(
                f"{row['iter']},{timing['init']:.3f},{timing['sample']:.3f},"
                f"{timing['opt']:.3f}\n"
            )
            fh.flush()


def _sobol(dim: int, n: int, seed: int) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return qmc.Sobol(d=dim, scramble=True, seed=seed).random(n)


def _pattern_search(evaluate, starts: np.ndarray, n_steps: int = 50,
                    step0: float = 0.1, step_min: float = 1e-3):
    """Coordinate pattern search on the unit cube; never accepts a worse point."""
    X = starts.copy()
    r, d = X.shape
    values = evaluate(X)
    steps = np.full(r, step0)
    moves = np.vstack([np.eye(d), -np.eye(d)])  # (2D, D)
    for _ in range(n_steps):
        trial = np.clip(X[:, None, :] + steps[:, None, None] * moves[None, :, :], 0.0, 1.0)
        flat = trial.reshape(-1, d)
        tv = evaluate(flat).reshape(r, 2 * d)
        best = np.argmax(tv, axis=1)
        best_val = tv[np.arange(r), best]
        improved = best_val > values
        X[improved] = flat.reshape(r, 2 * d, d)[improved, best[improved]]
        values[improved] = best_val[improved]
        steps[~improved] = np.maximum(steps[~improved] * 0.5, step_min)
    return X, values


def optimize_acquisition(
    ctx: AcquisitionContext,
    pool_size: int,
    q: int,
    seed: int = 0,
    n_refine: int = 10,
) -> np.ndarray:
    """Maximize the acquisition over a low-discrepancy pool with local refinement.

    The top pool points are polished by a bounded pattern search, then a
    greedy pass assembles the batch when q > 1.
    """
    dim = ctx.model.input_dim
    pool = _sobol(dim, pool_size, seed)
    values = acquisition_values(ctx, pool)
    order = np.argsort(-values, kind="stable")[: min(n_refine, pool_size)]
    refined, _ = _pattern_search(lambda X: acquisition_values(ctx, X), pool[order])
    candidates = np.vstack([pool, refined])
    idx = greedy_batch_select(ctx, candidates, q)
    return candidates[idx]


def recommend(
    model: GaussianProcess,
    evolver: EvolverConfig,
    size: int,
    previous: np.ndarray | None = None,
    reference=None,
) -> np.ndarray:
    """Pareto-set recommendation: optimize the posterior mean, keep the best HV subset.

    The previous recommendation is merged into the candidate set before
    truncation so established solutions are never lost to solver noise.
    """
    if reference is None:
        reference = reference_from_nadir(model.nadir())
    mean_objective = lambda X: -model.posterior(X)[0]  # noqa: E731
    X_cand, _ = nsga2_minimize(mean_objective, model.input_dim, model.n_objectives, evolver)
    if previous is not None and len(previous) > 0:
        X_cand = np.vstack([X_cand, previous]) if X_cand.shape[0] else np.asarray(previous)
    mean, _ = model.posterior(X_cand)
    if X_cand.shape[0] <= size:
        return X_cand
    keep = greedy_hv_truncate(mean, size, np.asarray(reference, dtype=float))
    return X_cand[np.sort(keep)]


def _observe(problem: Problem, X01, rng) -> np.ndarray:
    truth = problem.evaluate(problem.from_unit_cube(X01))
    return truth + problem.noise_sd * rng.standard_normal(truth.shape)


def _recommendation_metric(problem, X_rec, true_hv) -> float:
    if true_hv is None:
        return float("nan")
    truth = problem.evaluate(problem.from_unit_cube(X_rec))
    rec_hv = hypervolume(pareto_filter(truth), problem.reference_point)
    return float(np.log(max(abs(true_hv - rec_hv), HV_DISCREPANCY_FLOOR)))


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> RunRecord:
    """Run one full optimization experiment; deterministic given the config."""
    problem = make_problem(cfg.problem, cfg.problem_dim, cfg.zdt2_paper_sign)
    dim, n_obj = problem.dim, problem.n_obj
    n_init = cfg.n_init if cfg.n_init is not None else 2 * (dim + 1)
    pool_size = cfg.candidate_pool if cfg.candidate_pool is not None else 1000 * dim

    def seeds_for(*key: int):
        return np.random.SeedSequence(entropy=cfg.seed, spawn_key=key)

    def int_seeds(iteration: int, count: int):
        return [
            int(s.generate_state(1)[0]) for s in seeds_for(2, iteration).spawn(count)
        ]

    noise_rng = np.random.default_rng(seeds_for(1))
    true_hv = None
    if problem.true_front is not None:
        true_hv = hypervolume(problem.true_front(), problem.reference_point)

    record = RunRecord(dim=dim, n_obj=n_obj, q=cfg.q)
    writer = _Writer(out_dir, record)

    t0 = time.perf_counter()
    X = _sobol(dim, n_init, int(seeds_for(0).generate_state(1)[0]))
    Y = _observe(problem, X, noise_rng)
    fit_seed, rec_seed = int_seeds(0, 2)
    model = GaussianProcess.fit(X, Y, seed=fit_seed)
    rec = recommend(model, dataclasses.replace(cfg.evolver, seed=rec_seed),
                    cfg.recommendation_size)
    init_ms = 1e3 * (time.perf_counter() - t0)
    row = {
        "iter": 0,
        "X": None,
        "Y": None,
        "log_hv_disc": _recommendation_metric(problem, rec, true_hv),
    }
    record.iterations.append(row)
    writer.append(record, row, {"init": init_ms, "sample": 0.0, "opt": 0.0})

    for it in range(1, cfg.n_iter + 1):
        sample_seeds = int_seeds(it, cfg.n_pareto_samples + 4)
        fit_seed, rec_seed, opt_seed, base_seed = sample_seeds[-4:]

        t0 = time.perf_counter()
        ctx = None
        if cfg.acquisition in ESTIMATE_KINDS:
            samples = [
                sample_pareto(
                    model,
                    cfg.n_pareto_points,
                    cfg.evolver,
                    seed=s,
                    n_features=cfg.n_features,
                )
                for s in sample_seeds[: cfg.n_pareto_samples]
            ]
            ctx = AcquisitionContext.build(
                model,
                samples,
                cfg.acquisition,
                n_base_samples=cfg.n_base_samples,
                seed=base_seed,
            )
        sample_ms = 1e3 * (time.perf_counter() - t0)

        t0 = time.perf_counter()
        if ctx is not None:
            X_next = optimize_acquisition(ctx, pool_size, cfg.q, seed=opt_seed)
        else:
            X_next = _select_baseline(cfg, model, problem, dim, pool_size, opt_seed)
        opt_ms = 1e3 * (time.perf_counter() - t0)

        Y_next = _observe(problem, X_next, noise_rng)
        X = np.vstack([X, X_next])
        Y = np.vstack([Y, Y_next])

        t0 = time.perf_counter()
        model = GaussianProcess.fit(X, Y, seed=fit_seed)
        rec = recommend(
            model,
            dataclasses.replace(cfg.evolver, seed=rec_seed),
            cfg.recommendation_size,
            previous=rec,
        )
        fit_ms = 1e3 * (time.perf_counter() - t0)

        row = {
            "iter": it,
            "X": X_next,
            "Y": Y_next,
            "log_hv_disc": _recommendation_metric(problem, rec, true_hv),
        }
        record.iterations.append(row)
        writer.append(record, row, {"init": fit_ms, "sample": sample_ms, "opt": opt_ms})

    return record


def _select_baseline(cfg, model, problem, dim, pool_size, opt_seed) -> np.ndarray:
    pool = _sobol(dim, pool_size, opt_seed)
    chosen: list[int] = []
    for j in range(cfg.q):
        sub_seed = opt_seed + 77 * (j + 1)
        if cfg.acquisition == "random":
            idx = baseline_random(pool, seed=sub_seed)
            while idx in chosen:
                idx = (idx + 1) % pool.shape[0]
        elif cfg.acquisition == "tsemo":
            idx = _argmax_excluding(
                lambda c: baseline_tsemo(
                    model, c, seed=sub_seed, n_features=cfg.n_features
                ),
                pool,
                chosen,
            )
        else:
            idx = _argmax_excluding(
                lambda c: baseline_parego(
                    model, c, seed=sub_seed, n_base_samples=cfg.n_base_samples
                ),
                pool,
                chosen,
            )
        chosen.append(idx)
    return pool[chosen]


def _argmax_excluding(select, pool, chosen):
    keep = np.setdiff1d(np.arange(pool.shape[0]), np.asarray(chosen, dtype=int))
    return int(keep[select(pool[keep])])
