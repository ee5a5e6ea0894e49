"""Multi-objective Bayesian optimization with entropy-based acquisitions."""

from .acquisition import (
    AcquisitionContext,
    acquisition_value,
    acquisition_values,
    cdf_dominated,
    greedy_batch_select,
    h_lower_bound,
    h_monte_carlo,
    h_noiseless,
    initial_entropy,
    truncation_stats,
)
from .engine import ExperimentConfig, load_config, optimize_acquisition, recommend, run_experiment
from .gp import GaussianProcess, KernelParams, matern52
from .metrics import (
    WeightDistribution,
    generalized_hypervolume,
    log_hv_discrepancy,
    map_to_sphere,
    scalarize,
)
from .nsga2 import EvolverConfig, nsga2_minimize
from .pareto import (
    BoxDecomposition,
    box_decompose,
    dominates,
    greedy_hv_truncate,
    hypervolume,
    pareto_filter,
)
from .problems import Problem, gp_sample_problem, make_problem, zdt2, zdt2_problem
from .sampling import ParetoSample, PathSample, draw_path, sample_pareto

__all__ = [
    "AcquisitionContext",
    "BoxDecomposition",
    "EvolverConfig",
    "ExperimentConfig",
    "GaussianProcess",
    "KernelParams",
    "ParetoSample",
    "PathSample",
    "Problem",
    "WeightDistribution",
    "acquisition_value",
    "acquisition_values",
    "box_decompose",
    "cdf_dominated",
    "dominates",
    "draw_path",
    "generalized_hypervolume",
    "gp_sample_problem",
    "greedy_batch_select",
    "greedy_hv_truncate",
    "h_lower_bound",
    "h_monte_carlo",
    "h_noiseless",
    "hypervolume",
    "initial_entropy",
    "load_config",
    "log_hv_discrepancy",
    "make_problem",
    "map_to_sphere",
    "matern52",
    "nsga2_minimize",
    "optimize_acquisition",
    "pareto_filter",
    "recommend",
    "run_experiment",
    "sample_pareto",
    "scalarize",
    "truncation_stats",
    "zdt2",
    "zdt2_problem",
]
