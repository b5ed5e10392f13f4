"""Analytic benchmark functions with domains and known global optima.

Fifteen standard test functions spanning multimodal, bowl-shaped,
plate-shaped, valley-shaped, and steep-drop landscapes. Every function is
exposed through a `Benchmark` record carrying its box domain, the published
global minimum value `f_star`, and, where an exact closed-form minimizer is
known and lies inside the box, the minimizer `x_star`.

Conventions baked into the formulas:
- all indices in the formulas are 1-based (e.g. the Griewank product divides
  x_i by sqrt(i) with i starting at 1);
- Michalewicz uses steepness m = 10, the convention under which the published
  10-dimensional optimum of about -9.66 holds;
- `f_star` stores the published constant for each function. For
  styblinski_tang and michalewicz those constants are rounded in the last
  printed digit, so evaluations near the true minimizer can undershoot
  `f_star` by about 2e-4 per dimension; `x_star` is left unset for those two
  rather than pretending the rounded point reproduces the rounded value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError
from .sampling import BoxDomain

_MICHALEWICZ_M = 10
# Published 10-d optimum for m = 10; other dimensions have no published value.
_MICHALEWICZ_10D_OPTIMUM = -9.66
_STYBLINSKI_TANG_PER_DIM = -39.16599
_SCHWEFEL_CONSTANT = 418.9829
_SCHWEFEL_MINIMIZER = 420.9687


@dataclass(frozen=True)
class Benchmark:
    """One analytic test function bound to a concrete dimension.

    x_star is the exact global minimizer when one is known in closed form
    and lies inside the box; None otherwise (michalewicz, styblinski_tang,
    and trid in dimensions where the minimizer leaves the domain). Schwefel's
    published minimizer is rounded; evaluate() there lands within about
    2.5e-5 per dimension of f_star rather than machine precision.
    """

    name: str
    dim: int
    box: BoxDomain
    f_star: float
    x_star: tuple | None = None


def _ackley(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    root_mean_square = np.sqrt(np.sum(X**2, axis=1) / d)
    mean_cos = np.sum(np.cos(2.0 * np.pi * X), axis=1) / d
    return -20.0 * np.exp(-0.2 * root_mean_square) - np.exp(mean_cos) + 20.0 + math.e


def _rastrigin(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    return 10.0 * d + np.sum(X**2 - 10.0 * np.cos(2.0 * np.pi * X), axis=1)


def _levy(X: np.ndarray) -> np.ndarray:
    w = 1.0 + (X - 1.0) / 4.0
    head = np.sin(np.pi * w[:, 0]) ** 2
    mid = np.sum(
        (w[:, :-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:, :-1] + 1.0) ** 2),
        axis=1,
    )
    tail = (w[:, -1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[:, -1]) ** 2)
    return head + mid + tail


def _griewank(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    idx = np.sqrt(np.arange(1, d + 1, dtype=float))
    return np.sum(X**2, axis=1) / 4000.0 - np.prod(np.cos(X / idx), axis=1) + 1.0


def _schwefel(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    return _SCHWEFEL_CONSTANT * d - np.sum(X * np.sin(np.sqrt(np.abs(X))), axis=1)


def _sphere(X: np.ndarray) -> np.ndarray:
    return np.sum(X**2, axis=1)


def _rotated_hyper_ellipsoid(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    # sum_i sum_{j<=i} x_j^2 collapses to sum_j (d - j + 1) x_j^2.
    weights = np.arange(d, 0, -1, dtype=float)
    return np.sum(weights * X**2, axis=1)


def _sum_of_different_powers(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    powers = np.arange(2, d + 2, dtype=float)
    return np.sum(np.abs(X) ** powers, axis=1)


def _trid(X: np.ndarray) -> np.ndarray:
    square = np.sum((X - 1.0) ** 2, axis=1)
    cross = np.sum(X[:, 1:] * X[:, :-1], axis=1)
    return square - cross


def _zakharov(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    weighted = X @ (0.5 * np.arange(1, d + 1, dtype=float))
    return np.sum(X**2, axis=1) + weighted**2 + weighted**4


def _rosenbrock(X: np.ndarray) -> np.ndarray:
    return np.sum(
        100.0 * (X[:, 1:] - X[:, :-1] ** 2) ** 2 + (1.0 - X[:, :-1]) ** 2, axis=1
    )


def _dixon_price(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    idx = np.arange(2, d + 1, dtype=float)
    tail = np.sum(idx * (2.0 * X[:, 1:] ** 2 - X[:, :-1]) ** 2, axis=1)
    return (X[:, 0] - 1.0) ** 2 + tail


def _michalewicz(X: np.ndarray) -> np.ndarray:
    d = X.shape[1]
    idx = np.arange(1, d + 1, dtype=float)
    return -np.sum(
        np.sin(X) * np.sin(idx * X**2 / np.pi) ** (2 * _MICHALEWICZ_M), axis=1
    )


def _powell(X: np.ndarray) -> np.ndarray:
    a = X[:, 0::4]
    b = X[:, 1::4]
    c = X[:, 2::4]
    e = X[:, 3::4]
    return np.sum(
        (a + 10.0 * b) ** 2
        + 5.0 * (c - e) ** 2
        + (b - 2.0 * c) ** 4
        + 10.0 * (a - e) ** 4,
        axis=1,
    )


def _styblinski_tang(X: np.ndarray) -> np.ndarray:
    return 0.5 * np.sum(X**4 - 16.0 * X**2 + 5.0 * X, axis=1)


def _trid_f_star(d: int) -> float:
    return -d * (d + 4) * (d - 1) / 6.0


def _trid_x_star(d: int) -> tuple | None:
    # Closed-form minimizer x_i = i (d + 1 - i); inside [-5, 5] only for d <= 3.
    xs = tuple(float(i * (d + 1 - i)) for i in range(1, d + 1))
    if max(abs(v) for v in xs) > 5.0:
        return None
    return xs


def _dixon_price_x_star(d: int) -> tuple:
    return tuple(2.0 ** (-(2.0**i - 2.0) / 2.0**i) for i in range(1, d + 1))


# name -> (function, lower, upper, f_star(d), x_star(d) or None)
_SPECS = {
    "ackley": (_ackley, -5.0, 5.0, lambda d: 0.0, lambda d: (0.0,) * d),
    "rastrigin": (_rastrigin, -5.12, 5.12, lambda d: 0.0, lambda d: (0.0,) * d),
    "levy": (_levy, -10.0, 10.0, lambda d: 0.0, lambda d: (1.0,) * d),
    "griewank": (_griewank, -600.0, 600.0, lambda d: 0.0, lambda d: (0.0,) * d),
    "schwefel": (
        _schwefel,
        -500.0,
        500.0,
        lambda d: 0.0,
        lambda d: (_SCHWEFEL_MINIMIZER,) * d,
    ),
    "sphere": (_sphere, -5.0, 5.0, lambda d: 0.0, lambda d: (0.0,) * d),
    "rotated_hyper_ellipsoid": (
        _rotated_hyper_ellipsoid,
        -5.0,
        5.0,
        lambda d: 0.0,
        lambda d: (0.0,) * d,
    ),
    "sum_of_different_powers": (
        _sum_of_different_powers,
        -5.0,
        5.0,
        lambda d: 0.0,
        lambda d: (0.0,) * d,
    ),
    "trid": (_trid, -5.0, 5.0, _trid_f_star, _trid_x_star),
    "zakharov": (_zakharov, -5.0, 10.0, lambda d: 0.0, lambda d: (0.0,) * d),
    "rosenbrock": (_rosenbrock, -2.0, 2.0, lambda d: 0.0, lambda d: (1.0,) * d),
    "dixon_price": (_dixon_price, -10.0, 10.0, lambda d: 0.0, _dixon_price_x_star),
    "michalewicz": (_michalewicz, 0.0, math.pi, None, None),
    "powell": (_powell, -4.0, 5.0, lambda d: 0.0, lambda d: (0.0,) * d),
    "styblinski_tang": (
        _styblinski_tang,
        -5.0,
        5.0,
        lambda d: _STYBLINSKI_TANG_PER_DIM * d,
        None,
    ),
}

BENCHMARK_NAMES = tuple(_SPECS)


def optimum_value(name: str, dim: int) -> float:
    """Known global minimum value of the named function at the given dimension.

    Michalewicz has a published optimum only for dim = 10 (with m = 10);
    other dimensions raise ConfigurationError instead of guessing.
    """
    if name not in _SPECS:
        raise ConfigurationError(f"unknown benchmark {name!r}")
    if dim < 1:
        raise ConfigurationError("dim must be >= 1")
    if name == "michalewicz":
        if dim != 10:
            raise ConfigurationError(
                "michalewicz has a published optimum only for dim = 10"
            )
        return _MICHALEWICZ_10D_OPTIMUM
    f_star = _SPECS[name][3]
    return float(f_star(dim))


def make_benchmark(name: str, dim: int) -> Benchmark:
    """Build the Benchmark record for the named function at the given dimension.

    dim >= 1; the one-dimensional case exists for the 1D surrogate
    visualization path. Powell additionally requires dim divisible by 4.
    """
    if name not in _SPECS:
        raise ConfigurationError(f"unknown benchmark {name!r}")
    if dim < 1:
        raise ConfigurationError("dim must be >= 1")
    if name == "powell" and dim % 4 != 0:
        raise ConfigurationError("powell requires dim divisible by 4")
    _, lo, hi, _, x_star_fn = _SPECS[name]
    box = BoxDomain(lower=(lo,) * dim, upper=(hi,) * dim)
    f_star = optimum_value(name, dim)
    x_star = x_star_fn(dim) if x_star_fn is not None else None
    return Benchmark(name=name, dim=dim, box=box, f_star=f_star, x_star=x_star)


def evaluate_batch(b: Benchmark, X, strict: bool = True) -> np.ndarray:
    """Evaluate the benchmark on each row of X.

    strict mode rejects rows outside the box; the lenient mode exists for
    plotting the analytic formula beyond the domain.
    """
    pts = np.atleast_2d(np.asarray(X, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != b.dim:
        raise InputError(f"points must have dimension {b.dim}")
    if strict:
        lo = b.box.lower_array
        hi = b.box.upper_array
        if np.any(pts < lo) or np.any(pts > hi):
            raise InputError("point outside the benchmark domain")
    values = _SPECS[b.name][0](pts)
    if not np.all(np.isfinite(values)):
        raise InputError("benchmark evaluation produced a non-finite value")
    return values


def evaluate(b: Benchmark, x, strict: bool = True) -> float:
    """Evaluate the benchmark at a single point."""
    pt = np.asarray(x, dtype=float)
    if pt.ndim != 1:
        raise InputError("x must be a single point (1-d array)")
    return float(evaluate_batch(b, pt[None, :], strict=strict)[0])
