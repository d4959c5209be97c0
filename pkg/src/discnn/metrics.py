"""Recovery metrics on the sparse support.

``output_snr`` can be undefined: +inf when the off-support power is zero and NaN for
the all-zero vector. Both are kept in per-instance results and skipped (but counted)
when averaging; see :func:`finite_mean`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from discnn.errors import DimensionMismatchError, IllPosedInstanceError


def _split(x: ArrayLike, support: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    idx = np.asarray(support, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise DimensionMismatchError(f"support indices out of range for length {x.shape[0]}")
    mask = np.zeros(x.shape[0], dtype=bool)
    mask[idx] = True
    return x[mask], x[~mask]


def output_snr(x: ArrayLike, support: ArrayLike) -> float:
    """Power on the support over power off it (linear)."""
    on, off = _split(x, support)
    p_on, p_off = float(on @ on), float(off @ off)
    if p_off == 0.0:
        return math.nan if p_on == 0.0 else math.inf
    return p_on / p_off


def support_recovered(x: ArrayLike, support: ArrayLike) -> bool:
    """True iff every off-support entry is strictly below every on-support entry."""
    on, off = _split(x, support)
    if not on.size or not off.size:
        raise ValueError("support must be a non-empty proper subset of the indices")
    return bool(off.max() < on.min())


def rel_err_support(x: ArrayLike, x0: ArrayLike, support: ArrayLike) -> float:
    """||x_S - x0_S||_2 / ||x0_S||_2."""
    on, _ = _split(x, support)
    on0, _ = _split(x0, support)
    ref = float(np.linalg.norm(on0))
    if ref == 0.0:
        raise IllPosedInstanceError("ground truth is zero on the support")
    return float(np.linalg.norm(on - on0)) / ref


def mse_support(x: ArrayLike, x0: ArrayLike, support: ArrayLike) -> float:
    on, _ = _split(x, support)
    on0, _ = _split(x0, support)
    if not on.size:
        raise ValueError("support must be non-empty")
    d = on - on0
    return float(d @ d) / on.size


def mse(x: ArrayLike, x0: ArrayLike) -> float:
    d = np.asarray(x, dtype=np.float64) - np.asarray(x0, dtype=np.float64)
    return float(d @ d) / d.size


def to_db(value: float) -> float:
    if math.isnan(value) or value < 0:
        return math.nan
    if value == 0.0:
        return -math.inf
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class RecoveryMetrics:
    rel_err_support: float
    mse_support: float
    output_snr: float
    support_recovered: bool

    @classmethod
    def evaluate(cls, x: ArrayLike, x0: ArrayLike, support: ArrayLike) -> RecoveryMetrics:
        return cls(
            rel_err_support=rel_err_support(x, x0, support),
            mse_support=mse_support(x, x0, support),
            output_snr=output_snr(x, support),
            support_recovered=support_recovered(x, support),
        )


@dataclass(frozen=True)
class FiniteMean:
    mean: float
    stderr: float
    n: int  # values averaged
    excluded: int  # inf / nan values skipped


def finite_mean(values: ArrayLike) -> FiniteMean:
    """Arithmetic mean and standard error over the finite values only."""
    v = np.asarray(values, dtype=np.float64)
    finite = v[np.isfinite(v)]
    n = int(finite.size)
    excluded = int(v.size) - n
    if n == 0:
        return FiniteMean(mean=math.nan, stderr=math.nan, n=0, excluded=excluded)
    mean = float(np.mean(finite))
    stderr = float(np.std(finite, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return FiniteMean(mean=mean, stderr=stderr, n=n, excluded=excluded)
