"""Acquisition functions over the GP posterior, in minimization form.

Everything downstream minimizes: EI is evaluated through its negation and
LCB is minimized directly, so a single "lower is better" objective covers
both kinds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import InputError
from .gp import GPModel, posterior, posterior_batch

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _normal_cdf(z):
    return 0.5 * (1.0 + erf(np.asarray(z) * _INV_SQRT2))


def _normal_pdf(z):
    # beyond |z| = 40 the density underflows to 0.0 exactly; clipping keeps
    # the square from overflowing first
    z = np.clip(np.asarray(z), -40.0, 40.0)
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def ei_value(mean: float, std: float, f_best: float, xi: float) -> float:
    """Expected improvement below the incumbent, with exploration offset xi.

    For std > 0: z = (f_best - mean - xi)/std and
    EI = (f_best - mean - xi) * Phi(z) + std * phi(z).
    For std = 0 the limiting value max(f_best - mean - xi, 0) is returned.
    Always non-negative.
    """
    if std < 0:
        raise InputError("std must be >= 0")
    if xi < 0:
        raise InputError("xi must be >= 0")
    gap = f_best - mean - xi
    if std == 0.0:
        return max(gap, 0.0)
    z = gap / std
    # the two terms cancel to rounding error deep in the tail; EI is >= 0
    return max(float(gap * _normal_cdf(z) + std * _normal_pdf(z)), 0.0)


def ei_value_batch(mean: np.ndarray, std: np.ndarray, f_best: float, xi: float) -> np.ndarray:
    """Vectorized ei_value with the same std = 0 convention."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    gap = f_best - mean - xi
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(std > 0, gap / np.where(std > 0, std, 1.0), 0.0)
    ei = np.maximum(gap * _normal_cdf(z) + std * _normal_pdf(z), 0.0)
    return np.where(std > 0, ei, np.maximum(gap, 0.0))


def lcb_value(mean: float, std: float, beta: float) -> float:
    """Lower confidence bound mean - beta * std, minimized directly."""
    if std < 0:
        raise InputError("std must be >= 0")
    if not beta > 0:
        raise InputError("beta must be > 0")
    return mean - beta * std


@dataclass(frozen=True)
class AcquisitionObjective:
    """Deterministic acquisition score induced by a fitted model.

    kind "ei" scores a point as -EI (so lower is better, matching "lcb"),
    using f_best as the incumbent. f_best must equal the minimum observed
    value in the model's dataset.
    """

    model: GPModel
    kind: str
    f_best: float
    xi: float = 0.01
    beta: float = 2.0

    def __post_init__(self):
        if self.kind not in ("ei", "lcb"):
            raise InputError(f"unknown acquisition kind {self.kind!r}")
        if self.xi < 0:
            raise InputError("xi must be >= 0")
        if not self.beta > 0:
            raise InputError("beta must be > 0")
        y_min = float(np.min(self.model.dataset.y))
        if not math.isclose(self.f_best, y_min, rel_tol=0.0, abs_tol=1e-12 * (1 + abs(y_min))):
            raise InputError("f_best must be the minimum observed value of the dataset")


def acquisition_min_objective(obj: AcquisitionObjective, x) -> float:
    """Score one point; lower is better for both acquisition kinds."""
    mean, std = posterior(obj.model, x)
    if obj.kind == "ei":
        return -ei_value(mean, std, obj.f_best, obj.xi)
    return lcb_value(mean, std, obj.beta)


def acquisition_min_batch(obj: AcquisitionObjective, X) -> np.ndarray:
    """Vectorized acquisition_min_objective over rows of X."""
    mean, std = posterior_batch(obj.model, X)
    if obj.kind == "ei":
        return -ei_value_batch(mean, std, obj.f_best, obj.xi)
    return mean - obj.beta * std
