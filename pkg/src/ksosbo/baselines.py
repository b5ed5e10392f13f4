"""Derivative-free comparison optimizers sharing one evaluation-budget contract.

Three baselines, all consuming a vectorized objective (rows of points in,
one value per row out) over a BoxDomain:

- sobol_search: score a Sobol design of exactly `budget` points, return the
  argmin with first-index tie-breaking.
- cmaes_minimize: standard (mu/mu_w, lambda) CMA-ES with weighted
  recombination of the top half, cumulative step-size adaptation, and
  rank-one plus rank-mu covariance updates, using the standard tutorial
  learning rates for the configured population size. Out-of-box samples are
  clamped to the box before evaluation and the clamped point feeds the
  distribution updates. At most `budget` evaluations.
- de_minimize: differential evolution, best/1/bin. Mutant = best +
  F (a - b) with F drawn once per generation from mutation_range
  (dithering); binomial crossover with one forced coordinate; strictly
  greedy selection (ties never replace the incumbent); Latin-hypercube
  initial population; out-of-box mutant coordinates resampled uniformly
  inside bounds. Evaluation count is exactly population * (1 + maxiter)
  with population = popsize_multiplier * d.

All three are deterministic given their Generator and keep every evaluated
point inside the box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError
from .sampling import BoxDomain, scale_to_box, sobol_points


@dataclass(frozen=True)
class CMAESConfig:
    pop_size: int = 8
    sigma0_factor: float = 0.3
    budget: int = 128

    def __post_init__(self):
        if self.pop_size < 2:
            raise ConfigurationError("pop_size must be >= 2")
        if not self.sigma0_factor > 0:
            raise ConfigurationError("sigma0_factor must be > 0")
        if self.budget < self.pop_size:
            raise ConfigurationError("budget must be >= pop_size")


@dataclass(frozen=True)
class DEConfig:
    popsize_multiplier: int = 2
    maxiter: int = 5
    mutation_range: tuple = (0.5, 1.0)
    recombination: float = 0.7

    def __post_init__(self):
        if self.popsize_multiplier < 1:
            raise ConfigurationError("popsize_multiplier must be >= 1")
        if self.maxiter < 0:
            raise ConfigurationError("maxiter must be >= 0")
        low, high = self.mutation_range
        if not (0 <= low < high):
            raise ConfigurationError("mutation_range must satisfy 0 <= low < high")
        if not (0 < self.recombination <= 1):
            raise ConfigurationError("recombination must lie in (0, 1]")


def _evaluate_rows(objective, X: np.ndarray) -> np.ndarray:
    values = np.asarray(objective(X), dtype=float).ravel()
    if values.shape[0] != X.shape[0]:
        raise InputError("objective must return one value per point row")
    return values


def sobol_search(
    objective, box: BoxDomain, budget: int, rng: np.random.Generator | None = None
) -> tuple[np.ndarray, float]:
    """Evaluate exactly `budget` Sobol candidates, return the best.

    Ties break toward the earliest candidate in the sequence.
    """
    if budget < 1:
        raise InputError("budget must be >= 1")
    candidates = scale_to_box(sobol_points(budget, box.dim, rng), box)
    values = _evaluate_rows(objective, candidates)
    i = int(np.argmin(values))
    return candidates[i].copy(), float(values[i])


def _cma_weights(pop_size: int) -> tuple[np.ndarray, float]:
    mu = pop_size // 2
    raw = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1, dtype=float))
    weights = raw / np.sum(raw)
    mu_eff = 1.0 / float(np.sum(weights**2))
    return weights, mu_eff


def cmaes_minimize(
    objective, box: BoxDomain, cfg: CMAESConfig, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Minimize over the box with (mu/mu_w, lambda) CMA-ES.

    Mean starts at the box center, sigma at sigma0_factor * mean(range).
    Stops before any generation that would exceed cfg.budget evaluations.
    Covariance degeneracy (non-finite or non-positive eigenvalues, or a
    non-finite step size) triggers a restart from the best point seen with
    a fresh identity covariance; the budget keeps counting across restarts.
    """
    d = box.dim
    lam = cfg.pop_size
    weights, mu_eff = _cma_weights(lam)
    mu = weights.shape[0]

    # Standard tutorial learning rates.
    c_sigma = (mu_eff + 2.0) / (d + mu_eff + 5.0)
    d_sigma = 1.0 + 2.0 * max(0.0, np.sqrt((mu_eff - 1.0) / (d + 1.0)) - 1.0) + c_sigma
    c_c = (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d)
    c_1 = 2.0 / ((d + 1.3) ** 2 + mu_eff)
    c_mu = min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d + 2.0) ** 2 + mu_eff))
    chi_d = np.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d**2))

    sigma0 = cfg.sigma0_factor * float(np.mean(box.range_array))

    def fresh_state(mean: np.ndarray):
        return {
            "mean": mean.copy(),
            "sigma": sigma0,
            "cov": np.eye(d),
            "p_sigma": np.zeros(d),
            "p_c": np.zeros(d),
        }

    state = fresh_state(0.5 * (box.lower_array + box.upper_array))
    best_x = state["mean"].copy()
    best_f = np.inf
    evals = 0
    generation = 0

    while evals + lam <= cfg.budget:
        generation += 1
        w_cov, q_cov = np.linalg.eigh(state["cov"])
        degenerate = (
            not np.all(np.isfinite(w_cov))
            or np.min(w_cov) <= 0
            or not np.isfinite(state["sigma"])
            or state["sigma"] <= 0
        )
        if degenerate:
            state = fresh_state(best_x if np.isfinite(best_f) else state["mean"])
            w_cov, q_cov = np.linalg.eigh(state["cov"])
        sqrt_w = np.sqrt(w_cov)

        z = rng.standard_normal((lam, d))
        y = z @ (q_cov * sqrt_w).T
        x = state["mean"] + state["sigma"] * y
        x_clamped = np.clip(x, box.lower_array, box.upper_array)
        values = _evaluate_rows(objective, x_clamped)
        evals += lam

        order = np.argsort(values, kind="stable")
        if values[order[0]] < best_f:
            best_f = float(values[order[0]])
            best_x = x_clamped[order[0]].copy()

        # Updates use the clamped samples, re-expressed in step coordinates.
        y_clamped = (x_clamped - state["mean"]) / state["sigma"]
        y_top = y_clamped[order[:mu]]
        y_w = weights @ y_top
        new_mean = state["mean"] + state["sigma"] * y_w

        inv_sqrt_y = (q_cov / sqrt_w) @ (q_cov.T @ y_w)
        state["p_sigma"] = (1.0 - c_sigma) * state["p_sigma"] + np.sqrt(
            c_sigma * (2.0 - c_sigma) * mu_eff
        ) * inv_sqrt_y
        p_sigma_norm = float(np.linalg.norm(state["p_sigma"]))
        h_sigma = float(
            p_sigma_norm
            / np.sqrt(1.0 - (1.0 - c_sigma) ** (2 * generation))
            / chi_d
            < 1.4 + 2.0 / (d + 1.0)
        )
        state["p_c"] = (1.0 - c_c) * state["p_c"] + h_sigma * np.sqrt(
            c_c * (2.0 - c_c) * mu_eff
        ) * y_w

        rank_one = np.outer(state["p_c"], state["p_c"])
        rank_mu = (y_top * weights[:, None]).T @ y_top
        state["cov"] = (
            (1.0 - c_1 - c_mu) * state["cov"]
            + c_1 * (rank_one + (1.0 - h_sigma) * c_c * (2.0 - c_c) * state["cov"])
            + c_mu * rank_mu
        )
        state["sigma"] *= float(np.exp((c_sigma / d_sigma) * (p_sigma_norm / chi_d - 1.0)))
        state["mean"] = new_mean

    return best_x, float(best_f)


def _latin_hypercube(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    cells = np.empty((n, d))
    for j in range(d):
        perm = rng.permutation(n)
        cells[:, j] = (perm + rng.uniform(size=n)) / n
    return cells


def de_minimize(
    objective, box: BoxDomain, cfg: DEConfig, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Minimize over the box with differential evolution, best/1/bin."""
    d = box.dim
    population = cfg.popsize_multiplier * d
    if population < 4:
        raise ConfigurationError(
            "population popsize_multiplier * d must be >= 4 to form difference vectors"
        )
    low_f, high_f = cfg.mutation_range

    pop = scale_to_box(_latin_hypercube(population, d, rng), box)
    values = _evaluate_rows(objective, pop)
    best_i = int(np.argmin(values))

    lo = box.lower_array
    hi = box.upper_array
    for _ in range(cfg.maxiter):
        f_gen = float(rng.uniform(low_f, high_f))
        trials = np.empty_like(pop)
        for i in range(population):
            others = [k for k in range(population) if k != i]
            a, b = rng.choice(others, size=2, replace=False)
            mutant = pop[best_i] + f_gen * (pop[a] - pop[b])
            outside = (mutant < lo) | (mutant > hi)
            if np.any(outside):
                mutant[outside] = rng.uniform(lo[outside], hi[outside])
            cross = rng.random(d) < cfg.recombination
            cross[int(rng.integers(d))] = True
            trials[i] = np.where(cross, mutant, pop[i])
        trial_values = _evaluate_rows(objective, trials)
        accept = trial_values < values
        pop[accept] = trials[accept]
        values[accept] = trial_values[accept]
        best_i = int(np.argmin(values))

    return pop[best_i].copy(), float(values[best_i])
