"""Low-discrepancy and uniform point generation over box domains.

The Sobol generator is self-contained: direction numbers are derived from the
bundled primitive-polynomial table, points advance by Gray-code increments,
the initial all-zeros point is skipped, and an optional random digital shift
(XOR on the integer state) decorrelates point sets across seeds without
losing the low-discrepancy structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._sobol_data import DIRECTION_TABLE, MAX_DIM
from .errors import ConfigurationError, InputError

_NBITS = 32
_SCALE = float(2**_NBITS)
_MAX_POINTS = 2**20


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box [lower_1, upper_1] x ... x [lower_d, upper_d]."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise InputError("lower and upper must be 1-d and of equal length")
        if not np.all(lo < hi):
            raise InputError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", tuple(float(v) for v in lo))
        object.__setattr__(self, "upper", tuple(float(v) for v in hi))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def range_array(self) -> np.ndarray:
        return self.upper_array - self.lower_array

    def contains(self, x, atol: float = 0.0) -> bool:
        pt = np.asarray(x, dtype=float)
        return bool(
            np.all(pt >= self.lower_array - atol) and np.all(pt <= self.upper_array + atol)
        )

    def clip(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower_array, self.upper_array)


def _direction_integers(dim_index: int) -> list[int]:
    """32-bit direction integers v_1..v_32 for 1-based dimension dim_index."""
    if dim_index == 1:
        m = [1] * _NBITS
    else:
        s, a, m_init = DIRECTION_TABLE[dim_index]
        m = list(m_init)
        for k in range(s, _NBITS):
            new = m[k - s] ^ (m[k - s] << s)
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    new ^= m[k - i] << i
            m.append(new)
    return [m[k] << (_NBITS - (k + 1)) for k in range(_NBITS)]


class SobolEngine:
    """Stateful Sobol stream over [0,1)^d.

    One instance per run; the internal counter is mutable, so instances must
    not be shared across concurrent runs. ``shift`` is a per-dimension 32-bit
    digital shift applied to the output only (the underlying recurrence stays
    unscrambled, preserving its net structure).
    """

    def __init__(self, d: int, shift: np.ndarray | None = None):
        if not 1 <= d <= MAX_DIM:
            raise ConfigurationError(f"Sobol dimension must be in [1, {MAX_DIM}], got {d}")
        self.d = d
        self._v = np.array(
            [_direction_integers(j + 1) for j in range(d)], dtype=np.uint64
        )
        self._state = np.zeros(d, dtype=np.uint64)
        self._count = 0
        if shift is None:
            self._shift = np.zeros(d, dtype=np.uint64)
        else:
            self._shift = np.asarray(shift, dtype=np.uint64)

    def next_points(self, n: int) -> np.ndarray:
        out = np.empty((n, self.d), dtype=float)
        for row in range(n):
            # Gray-code step: flip along the direction of the lowest zero bit
            # of the counter; the counter starts at 0 so the zero point is
            # never emitted.
            c = 0
            i = self._count
            while (i >> c) & 1:
                c += 1
            self._state ^= self._v[:, c]
            self._count += 1
            out[row] = (self._state ^ self._shift) / _SCALE
        return out


def sobol_points(n: int, d: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Generate n Sobol points in [0,1)^d.

    Parameters
    ----------
    n : int
        Number of points, 1 <= n <= 2**20.
    d : int
        Dimension, 1 <= d <= 16.
    rng : numpy Generator, optional
        When given, draws one random digital shift for the whole set, making
        the stream seed-dependent. None gives the unscrambled sequence.

    Returns
    -------
    ndarray, shape (n, d)
        Deterministic for a fixed (n, d, rng state); coordinates in [0, 1).
    """
    if not 1 <= n <= _MAX_POINTS:
        raise InputError(f"n must be in [1, {_MAX_POINTS}], got {n}")
    shift = None
    if rng is not None:
        shift = rng.integers(0, 2**_NBITS, size=d, dtype=np.uint64)
    return SobolEngine(d, shift=shift).next_points(n)


def uniform_points(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform points in [0,1)^d, deterministic per rng state."""
    if n < 0:
        raise InputError("n must be non-negative")
    return rng.random((n, d))


def scale_to_box(points, box: BoxDomain) -> np.ndarray:
    """Affine map of unit-cube points onto the box: lower + u * (upper - lower)."""
    u = np.asarray(points, dtype=float)
    if u.ndim == 1:
        u = u[None, :]
    if u.shape[1] != box.dim:
        raise InputError(f"dimension mismatch: points are {u.shape[1]}-d, box is {box.dim}-d")
    return box.lower_array[None, :] + u * box.range_array[None, :]
