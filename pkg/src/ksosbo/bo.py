"""Outer Bayesian-optimization loop: fit, acquire, evaluate, record.

One run is a strictly sequential loop. Each iteration fits the Gaussian
process surrogate on the data so far, builds the acquisition objective with
the incumbent observed minimum, hands the acquisition to the configured
inner optimizer under its evaluation budget, evaluates the returned query on
the expensive objective, and appends a row to the run record. Exactly
n_init + n_iters expensive evaluations are consumed per run.

Randomness is split per run into five independent streams (initial design,
acquisition optimizer, GP restarts, observation noise, duplicate-query
perturbation) derived from the seed, so toggling one consumer never shifts
the draws of another.

Observation noise, when enabled, is injected at the BO-step observations
(standard deviation noise_factor times the standard deviation of the values
observed so far); the initial design is recorded noiselessly. Reported
regret always uses the noiseless objective value of the best observed query,
so it remains a true optimality gap under noise.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .acquisition import AcquisitionObjective, acquisition_min_batch
from .baselines import CMAESConfig, DEConfig, cmaes_minimize, de_minimize, sobol_search
from .benchmarks import Benchmark, evaluate, evaluate_batch
from .errors import ConfigurationError, InputError, NumericalError
from .gp import Dataset, fit_gp
from .ksos import KSOSConfig, ksos_minimize
from .sampling import scale_to_box, sobol_points, uniform_points

_OPTIMIZER_KINDS = ("ksos", "sobol", "cmaes", "de")
_ACQUISITION_KINDS = ("ei", "lcb")
_INIT_KINDS = ("uniform", "sobol")
_DUPLICATE_PERTURBATION = 1e-8


@dataclass(frozen=True)
class BOConfig:
    """Configuration of one Bayesian-optimization run.

    The inner optimizer's evaluation budget is always `budget`; a supplied
    CMAESConfig has its budget field overridden accordingly.
    """

    optimizer: str = "ksos"
    acquisition: str = "ei"
    xi: float = 0.01
    beta: float = 2.0
    n_init: int = 12
    n_iters: int = 400
    budget: int = 128
    noise_factor: float = 0.05
    inject_observation_noise: bool = False
    init_design: str = "uniform"
    ksos: KSOSConfig = field(default_factory=KSOSConfig)
    cmaes: CMAESConfig | None = None
    de: DEConfig = field(default_factory=DEConfig)

    def __post_init__(self):
        if self.optimizer not in _OPTIMIZER_KINDS:
            raise ConfigurationError(f"unknown optimizer {self.optimizer!r}")
        if self.acquisition not in _ACQUISITION_KINDS:
            raise ConfigurationError(f"unknown acquisition {self.acquisition!r}")
        if self.init_design not in _INIT_KINDS:
            raise ConfigurationError(f"unknown init_design {self.init_design!r}")
        if self.n_init < 2:
            raise ConfigurationError("n_init must be >= 2")
        if self.n_iters < 0:
            raise ConfigurationError("n_iters must be >= 0")
        if self.budget < 2:
            raise ConfigurationError("budget must be >= 2")
        if self.xi < 0:
            raise ConfigurationError("xi must be >= 0")
        if not self.beta > 0:
            raise ConfigurationError("beta must be > 0")
        if self.noise_factor < 0:
            raise ConfigurationError("noise_factor must be >= 0")

    def resolved_cmaes(self) -> CMAESConfig:
        base = self.cmaes if self.cmaes is not None else CMAESConfig()
        return replace(base, budget=self.budget)


def bo_config_to_dict(cfg: BOConfig) -> dict:
    """Plain-dict form of the fully resolved configuration."""
    out = asdict(cfg)
    out["cmaes"] = asdict(cfg.resolved_cmaes())
    out["de"]["mutation_range"] = list(cfg.de.mutation_range)
    return out


def config_fingerprint(cfg: BOConfig) -> str:
    """Short stable hash identifying the resolved configuration."""
    canonical = json.dumps(bo_config_to_dict(cfg), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class RunHeader:
    benchmark: str
    dim: int
    optimizer: str
    acquisition: str
    seed: int
    config_fingerprint: str


@dataclass(frozen=True)
class IterationRow:
    iteration: int
    query: tuple
    observed: float
    best_so_far: float
    regret: float
    iter_wall_seconds: float
    cum_wall_seconds: float
    diagnostics: dict | None = None


@dataclass
class RunRecord:
    """All rows of one run; one row per expensive evaluation.

    failed marks a run aborted by a module error; rows then hold the part
    completed before the failure.
    """

    header: RunHeader
    rows: list
    failed: bool = False
    failure_message: str = ""


def initial_design(
    n_init: int, box, kind: str, rng: np.random.Generator
) -> np.ndarray:
    """n_init in-box starting points, uniform or Sobol."""
    if n_init < 1:
        raise InputError("n_init must be >= 1")
    if kind == "uniform":
        unit = uniform_points(n_init, box.dim, rng)
    elif kind == "sobol":
        unit = sobol_points(n_init, box.dim, rng)
    else:
        raise ConfigurationError(f"unknown init_design {kind!r}")
    return scale_to_box(unit, box)


def _perturb_duplicates(
    x: np.ndarray, X: np.ndarray, box, rng: np.random.Generator
) -> np.ndarray:
    # Exact repeats make the GP kernel singular beyond the jitter ladder.
    span = box.range_array
    for _ in range(10):
        nearest = float(np.min(np.max(np.abs(X - x), axis=1)))
        if nearest > 0.0:
            return x
        x = box.clip(x + rng.uniform(-1.0, 1.0, size=x.shape) * _DUPLICATE_PERTURBATION * span)
    return x


def _run_inner_optimizer(cfg: BOConfig, batch_objective, box, rng):
    if cfg.optimizer == "ksos":
        x_next, solution = ksos_minimize(batch_objective, box, cfg.budget, cfg.ksos, rng)
        diagnostics = {
            "status": solution.status,
            "newton_iters": solution.newton_iters,
            "residual_norm": solution.residual_norm,
        }
        return x_next, diagnostics
    if cfg.optimizer == "sobol":
        x_next, _ = sobol_search(batch_objective, box, cfg.budget, rng)
        return x_next, None
    if cfg.optimizer == "cmaes":
        x_next, _ = cmaes_minimize(batch_objective, box, cfg.resolved_cmaes(), rng)
        return x_next, None
    x_next, _ = de_minimize(batch_objective, box, cfg.de, rng)
    return x_next, None


def run_bo(benchmark: Benchmark, cfg: BOConfig, seed: int) -> RunRecord:
    """Run one Bayesian-optimization experiment and return its record.

    Deterministic given (benchmark, cfg, seed) up to wall-clock columns.
    A module error aborts the run; the partial record comes back with
    failed=True and the error message attached.
    """
    if cfg.optimizer == "de":
        population = cfg.de.popsize_multiplier * benchmark.dim
        if population * (1 + cfg.de.maxiter) > cfg.budget:
            raise ConfigurationError(
                "de consumes population * (1 + maxiter) evaluations, which exceeds the budget"
            )

    header = RunHeader(
        benchmark=benchmark.name,
        dim=benchmark.dim,
        optimizer=cfg.optimizer,
        acquisition=cfg.acquisition,
        seed=int(seed),
        config_fingerprint=config_fingerprint(cfg),
    )
    streams = np.random.SeedSequence(int(seed)).spawn(5)
    rng_init = np.random.default_rng(streams[0])
    rng_acq = np.random.default_rng(streams[1])
    rng_gp = np.random.default_rng(streams[2])
    rng_noise = np.random.default_rng(streams[3])
    rng_perturb = np.random.default_rng(streams[4])

    box = benchmark.box
    rows: list[IterationRow] = []
    cum_wall = 0.0

    tick = time.perf_counter()
    X = initial_design(cfg.n_init, box, cfg.init_design, rng_init)
    y_true = evaluate_batch(benchmark, X)
    init_wall = time.perf_counter() - tick

    y_obs = y_true.copy()
    best_observed = np.inf
    # Noiseless value of the best observed query; regret reports this gap so
    # it stays a true optimality gap when observation noise is injected. The
    # values are cached from the original evaluations, so regret bookkeeping
    # costs no extra expensive evaluations.
    best_true = np.inf
    per_init_wall = init_wall / cfg.n_init
    for i in range(cfg.n_init):
        if y_obs[i] < best_observed:
            best_observed = float(y_obs[i])
            best_true = float(y_true[i])
        cum_wall += per_init_wall
        regret = best_true - benchmark.f_star
        rows.append(
            IterationRow(
                iteration=i + 1,
                query=tuple(float(v) for v in X[i]),
                observed=float(y_obs[i]),
                best_so_far=best_observed,
                regret=float(regret),
                iter_wall_seconds=per_init_wall,
                cum_wall_seconds=cum_wall,
            )
        )

    warm_start = None
    for t in range(cfg.n_iters):
        tick = time.perf_counter()
        try:
            model = fit_gp(
                Dataset(X, y_obs),
                noise_factor=cfg.noise_factor,
                rng=rng_gp,
                warm_start=warm_start,
            )
            warm_start = model.params
            objective = AcquisitionObjective(
                model=model,
                kind=cfg.acquisition,
                f_best=float(np.min(y_obs)),
                xi=cfg.xi,
                beta=cfg.beta,
            )

            def batch_objective(P, _obj=objective):
                return acquisition_min_batch(_obj, np.atleast_2d(np.asarray(P, dtype=float)))

            x_next, diagnostics = _run_inner_optimizer(cfg, batch_objective, box, rng_acq)
            x_next = _perturb_duplicates(np.asarray(x_next, dtype=float), X, box, rng_perturb)

            y_next_true = evaluate(benchmark, x_next)
            y_next = y_next_true
            if cfg.inject_observation_noise:
                sigma_n = cfg.noise_factor * float(np.std(y_obs))
                if sigma_n > 0:
                    y_next = y_next_true + float(rng_noise.normal(0.0, sigma_n))
        except (InputError, ConfigurationError, NumericalError, np.linalg.LinAlgError) as ex:
            return RunRecord(
                header=header, rows=rows, failed=True, failure_message=f"{type(ex).__name__}: {ex}"
            )

        X = np.vstack([X, x_next])
        y_obs = np.append(y_obs, y_next)
        if y_next < best_observed:
            best_observed = float(y_next)
            best_true = float(y_next_true)
        regret = best_true - benchmark.f_star

        iter_wall = time.perf_counter() - tick
        cum_wall += iter_wall
        rows.append(
            IterationRow(
                iteration=cfg.n_init + t + 1,
                query=tuple(float(v) for v in x_next),
                observed=float(y_next),
                best_so_far=best_observed,
                regret=float(regret),
                iter_wall_seconds=iter_wall,
                cum_wall_seconds=cum_wall,
                diagnostics=diagnostics,
            )
        )

    return RunRecord(header=header, rows=rows)
