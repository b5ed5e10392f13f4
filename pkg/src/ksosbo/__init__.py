"""Bayesian optimization with a kernel sum-of-squares acquisition optimizer.

The package provides the full benchmark pipeline: analytic test functions,
a Matern-5/2 Gaussian-process surrogate, expected-improvement and
lower-confidence-bound acquisitions, four interchangeable acquisition
optimizers (the kernel SOS relaxation plus Sobol search, CMA-ES, and
differential evolution), the sequential BO loop, and an experiment harness
with CSV persistence, summary metrics, and a CLI.
"""

from .acquisition import AcquisitionObjective, ei_value, ei_value_batch, lcb_value
from .baselines import CMAESConfig, DEConfig, cmaes_minimize, de_minimize, sobol_search
from .benchmarks import (
    BENCHMARK_NAMES,
    Benchmark,
    evaluate,
    evaluate_batch,
    make_benchmark,
    optimum_value,
)
from .bo import (
    BOConfig,
    IterationRow,
    RunHeader,
    RunRecord,
    config_fingerprint,
    initial_design,
    run_bo,
)
from .errors import ConfigurationError, InputError, NumericalError
from .gp import Dataset, GPHyperparams, GPModel, fit_gp, posterior, posterior_batch
from .harness import (
    MANIFEST_FILE,
    RUN_CSV_COLUMNS,
    RUNS_SUBDIR,
    SUMMARY_CSV_COLUMNS,
    SUMMARY_FILE,
    SURROGATE_CSV_COLUMNS,
    UNDEFINED_MARKER,
    AggregateSeries,
    ExperimentSpec,
    aggregate,
    fmt17,
    improvement_pct,
    load_config,
    parse_config,
    rank_optimizers,
    read_run_csv,
    run_experiment,
    simple_regret,
    surrogate_scan_1d,
    time_to_threshold,
    verify_outputs,
    write_surrogate_csv,
)
from .kernels import KernelSpec, cross_kernel, eval_kernel, kernel_matrix
from .ksos import (
    KSOSConfig,
    KSOSSolution,
    ksos_minimize,
    smoothing_sigma,
    solve_ksos_sdp,
    sos_model_values,
)
from .sampling import BoxDomain, sobol_points, uniform_points

__version__ = "0.1.0"

__all__ = [
    "AcquisitionObjective",
    "AggregateSeries",
    "BENCHMARK_NAMES",
    "MANIFEST_FILE",
    "RUN_CSV_COLUMNS",
    "RUNS_SUBDIR",
    "SUMMARY_CSV_COLUMNS",
    "SUMMARY_FILE",
    "SURROGATE_CSV_COLUMNS",
    "UNDEFINED_MARKER",
    "BOConfig",
    "Benchmark",
    "BoxDomain",
    "CMAESConfig",
    "ConfigurationError",
    "DEConfig",
    "Dataset",
    "ExperimentSpec",
    "GPHyperparams",
    "GPModel",
    "InputError",
    "IterationRow",
    "KSOSConfig",
    "KSOSSolution",
    "KernelSpec",
    "NumericalError",
    "RunHeader",
    "RunRecord",
    "aggregate",
    "cmaes_minimize",
    "config_fingerprint",
    "cross_kernel",
    "de_minimize",
    "ei_value",
    "ei_value_batch",
    "eval_kernel",
    "evaluate",
    "evaluate_batch",
    "fit_gp",
    "fmt17",
    "improvement_pct",
    "initial_design",
    "kernel_matrix",
    "ksos_minimize",
    "lcb_value",
    "load_config",
    "make_benchmark",
    "optimum_value",
    "parse_config",
    "posterior",
    "posterior_batch",
    "rank_optimizers",
    "read_run_csv",
    "run_bo",
    "run_experiment",
    "simple_regret",
    "smoothing_sigma",
    "sobol_points",
    "sobol_search",
    "solve_ksos_sdp",
    "sos_model_values",
    "surrogate_scan_1d",
    "time_to_threshold",
    "uniform_points",
    "verify_outputs",
    "write_surrogate_csv",
]
