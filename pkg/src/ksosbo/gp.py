"""Gaussian-process surrogate: marginal-likelihood fitting and posterior prediction.

The covariance is constant * matern25 + white noise. The noise variance is
never optimized: it is pinned to (noise_factor * std(y))^2 with std taken as
the population standard deviation, recomputed at every refit. Only the
constant and the lengthscale are searched, in log space, by a bounded
simplex method with multiple restarts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .errors import InputError, NumericalError
from .kernels import KernelSpec, cross_kernel, kernel_matrix

LOG_CONSTANT_BOUNDS = (np.log(1e-3), np.log(1e3))
LOG_LENGTHSCALE_BOUNDS = (np.log(1e-2), np.log(1e2))
NOISE_VARIANCE_FLOOR = 1e-10

_JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class Dataset:
    """Observation set: points X (n, d) and objective values y (n,)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise InputError(f"|X| = {X.shape[0]} but |y| = {y.shape[0]}")
        if X.shape[0] < 1:
            raise InputError("dataset must contain at least one observation")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class GPHyperparams:
    constant_value: float
    lengthscale: float
    noise_variance: float

    def __post_init__(self):
        if not self.constant_value > 0:
            raise InputError("constant_value must be > 0")
        lo, hi = np.exp(LOG_LENGTHSCALE_BOUNDS)
        if not lo <= self.lengthscale <= hi:
            raise InputError(
                f"lengthscale {self.lengthscale} outside bounds [{lo}, {hi}]"
            )
        if self.noise_variance < 0:
            raise InputError("noise_variance must be >= 0")


@dataclass(frozen=True)
class GPModel:
    """Immutable fitted surrogate; safe to share across concurrent readers."""

    dataset: Dataset
    params: GPHyperparams
    chol: np.ndarray
    alpha: np.ndarray
    jitter_used: float

    @property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(
            "matern25",
            lengthscale_or_sigma=self.params.lengthscale,
            output_variance=self.params.constant_value,
        )


def _chol_with_jitter(A: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor with an escalating diagonal jitter ladder."""
    mean_diag = float(np.mean(np.diag(A)))
    attempted = []
    for eps in _JITTER_LADDER:
        jitter = eps * mean_diag
        attempted.append(jitter)
        try:
            L = cholesky(A + jitter * np.eye(A.shape[0]), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            continue
        except ValueError:
            continue
    raise NumericalError(
        "Cholesky factorization failed at every jitter level",
        attempted_jitters=attempted,
    )


def _training_cov(dataset: Dataset, params: GPHyperparams) -> np.ndarray:
    spec = KernelSpec(
        "matern25",
        lengthscale_or_sigma=params.lengthscale,
        output_variance=params.constant_value,
    )
    K = kernel_matrix(spec, dataset.X)
    return K + params.noise_variance * np.eye(dataset.n)


def log_marginal_likelihood(dataset: Dataset, params: GPHyperparams) -> float:
    """log p(y | X, params) for the constant * matern25 + white model.

    Returns -0.5 y^T (K + s I)^{-1} y - sum(log L_ii) - (n/2) log 2pi.

    Raises
    ------
    NumericalError
        If K + noise I cannot be factorized at any jitter level.
    """
    A = _training_cov(dataset, params)
    L, _ = _chol_with_jitter(A)
    alpha = cho_solve((L, True), dataset.y)
    return float(
        -0.5 * dataset.y @ alpha
        - np.sum(np.log(np.diag(L)))
        - dataset.n * _HALF_LOG_2PI
    )


def build_model(dataset: Dataset, params: GPHyperparams) -> GPModel:
    """Factorize the training covariance and cache the solve for predictions."""
    A = _training_cov(dataset, params)
    L, jitter = _chol_with_jitter(A)
    alpha = cho_solve((L, True), dataset.y)
    return GPModel(dataset=dataset, params=params, chol=L, alpha=alpha, jitter_used=jitter)


def _pinned_noise_variance(y: np.ndarray, noise_factor: float) -> float:
    std = float(np.std(y))  # population convention, divide by n
    var = (noise_factor * std) ** 2
    return max(var, NOISE_VARIANCE_FLOOR)


def fit_gp(
    dataset: Dataset,
    noise_factor: float = 0.05,
    rng: np.random.Generator | None = None,
    warm_start: GPHyperparams | None = None,
) -> GPModel:
    """Fit constant and lengthscale by maximizing the log marginal likelihood.

    The search runs in (log constant, log lengthscale) space over the bounded
    box, with 5 simplex restarts: one warm start (the previous fit, or the
    box center when absent) and four drawn from ``rng``. The best point seen
    across all restarts and all start points is selected, so the fit is never
    worse than any of its initializations.

    Parameters
    ----------
    dataset : Dataset
    noise_factor : float
        Noise pin: noise_variance = max((noise_factor * std(y))^2, 1e-10).
    rng : numpy Generator, optional
        Source of the four random restarts; a fixed default seed is used when
        omitted so repeated fits of the same data are identical.
    warm_start : GPHyperparams, optional
        Previous iteration's fit, used as the first start point.
    """
    if noise_factor < 0:
        raise InputError("noise_factor must be >= 0")
    if rng is None:
        rng = np.random.default_rng(0)
    noise_variance = _pinned_noise_variance(dataset.y, noise_factor)

    lo = np.array([LOG_CONSTANT_BOUNDS[0], LOG_LENGTHSCALE_BOUNDS[0]])
    hi = np.array([LOG_CONSTANT_BOUNDS[1], LOG_LENGTHSCALE_BOUNDS[1]])
    bounds = list(zip(lo, hi))

    def negative_lml(theta: np.ndarray) -> float:
        t = np.clip(theta, lo, hi)
        params = GPHyperparams(
            constant_value=float(np.exp(t[0])),
            lengthscale=float(np.exp(t[1])),
            noise_variance=noise_variance,
        )
        try:
            return -log_marginal_likelihood(dataset, params)
        except NumericalError:
            return 1e25

    if warm_start is not None:
        first = np.clip(
            np.array([np.log(warm_start.constant_value), np.log(warm_start.lengthscale)]),
            lo,
            hi,
        )
    else:
        first = 0.5 * (lo + hi)
    starts = [first] + [rng.uniform(lo, hi) for _ in range(4)]

    candidates = []
    for x0 in starts:
        candidates.append((negative_lml(x0), x0))
        res = minimize(
            negative_lml,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxiter": 200, "xatol": 1e-4, "fatol": 1e-8},
        )
        candidates.append((float(res.fun), np.clip(res.x, lo, hi)))
    best_val, best_theta = min(candidates, key=lambda c: c[0])

    params = GPHyperparams(
        constant_value=float(np.exp(best_theta[0])),
        lengthscale=float(np.exp(best_theta[1])),
        noise_variance=noise_variance,
    )
    return build_model(dataset, params)


def posterior_batch(model: GPModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation at many points at once.

    Variance is the latent-function variance (observation noise excluded),
    clamped at zero before the square root.
    """
    Xq = np.atleast_2d(np.asarray(X, dtype=float))
    if Xq.shape[1] != model.dataset.dim:
        raise InputError(
            f"query dimension {Xq.shape[1]} != model dimension {model.dataset.dim}"
        )
    Kx = cross_kernel(model.kernel_spec, model.dataset.X, Xq)  # (n, m)
    mean = Kx.T @ model.alpha
    V = solve_triangular(model.chol, Kx, lower=True)
    prior_var = model.params.constant_value  # k(x, x) for matern25
    var = prior_var - np.einsum("ij,ij->j", V, V)
    std = np.sqrt(np.maximum(var, 0.0))
    return mean, std


def posterior(model: GPModel, x) -> tuple[float, float]:
    """Posterior (mean, std) at one point; std is clamped non-negative."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    mean, std = posterior_batch(model, xv[None, :])
    return float(mean[0]), float(std[0])
