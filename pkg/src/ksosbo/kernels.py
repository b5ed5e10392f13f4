"""Positive-definite kernels shared by the surrogate model and the SOS solver.

All distances are Euclidean in the raw (un-normalized) input space: the
bandwidth heuristics used elsewhere in the package are stated in domain
units, so no internal rescaling may happen here. Jitter is deliberately not
added to kernel matrices; each consumer owns its own regularization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

KERNEL_KINDS = ("gaussian", "laplace", "matern25")

_SQRT5 = np.sqrt(5.0)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its scale parameters.

    Parameters
    ----------
    kind : str
        One of ``gaussian``, ``laplace``, ``matern25``.
    lengthscale_or_sigma : float
        Bandwidth sigma for gaussian/laplace, lengthscale ell for matern25.
        Must be positive, in input-space units.
    output_variance : float, optional
        Signal variance v multiplying the matern25 kernel. Ignored by the
        other kinds (their range is (0, 1]). Must be positive.
    """

    kind: str
    lengthscale_or_sigma: float
    output_variance: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InputError(f"unknown kernel kind {self.kind!r}")
        if not self.lengthscale_or_sigma > 0:
            raise InputError("lengthscale_or_sigma must be > 0")
        if not self.output_variance > 0:
            raise InputError("output_variance must be > 0")


def _as_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise InputError("points must be a vector or a 2-d array")
    return arr


def _from_distance(spec: KernelSpec, r: np.ndarray) -> np.ndarray:
    if spec.kind == "gaussian":
        s = spec.lengthscale_or_sigma
        return np.exp(-(r * r) / (2.0 * s * s))
    if spec.kind == "laplace":
        return np.exp(-r / spec.lengthscale_or_sigma)
    ell = spec.lengthscale_or_sigma
    z = _SQRT5 * r / ell
    poly = 1.0 + z + 5.0 * r * r / (3.0 * ell * ell)
    return spec.output_variance * poly * np.exp(-z)


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for a single pair of points.

    Parameters
    ----------
    spec : KernelSpec
    x, y : array_like
        Points of equal dimension.

    Returns
    -------
    float
        Kernel value, in (0, v] for matern25 and (0, 1] otherwise.

    Raises
    ------
    InputError
        If the two points differ in dimension.
    """
    xv = np.asarray(x, dtype=float).ravel()
    yv = np.asarray(y, dtype=float).ravel()
    if xv.shape != yv.shape:
        raise InputError(f"dimension mismatch: {xv.shape} vs {yv.shape}")
    r = float(np.linalg.norm(xv - yv))
    return float(_from_distance(spec, np.asarray(r)))


def kernel_matrix(spec: KernelSpec, points) -> np.ndarray:
    """Assemble the symmetric kernel matrix K with K[i, j] = k(x_i, x_j).

    Each unordered pair is evaluated once and mirrored, so the output is
    exactly symmetric (not merely up to rounding).

    Parameters
    ----------
    spec : KernelSpec
    points : array_like, shape (n, d) or (d,)

    Returns
    -------
    ndarray, shape (n, n)

    Raises
    ------
    InputError
        If the point list is empty.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if n == 0:
        raise InputError("kernel_matrix needs at least one point")
    iu, ju = np.triu_indices(n, k=1)
    diff = pts[iu] - pts[ju]
    r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    vals = _from_distance(spec, r)
    K = np.empty((n, n), dtype=float)
    diag = eval_kernel(spec, pts[0], pts[0])
    np.fill_diagonal(K, diag)
    K[iu, ju] = vals
    K[ju, iu] = vals
    return K


def cross_kernel(spec: KernelSpec, xs, ys) -> np.ndarray:
    """Rectangular kernel matrix k(xs_i, ys_j), vectorized over both sets."""
    a = _as_points(xs)
    b = _as_points(ys)
    if a.shape[1] != b.shape[1]:
        raise InputError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    # Squared distances via the expansion ||a-b||^2 = ||a||^2 + ||b||^2 - 2ab;
    # clip small negatives produced by cancellation before the sqrt.
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    r = np.sqrt(np.maximum(sq, 0.0))
    return _from_distance(spec, r)
