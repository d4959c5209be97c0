"""Dense linear-algebra substrate.

Matrices and vectors are float64 numpy arrays. The ``as_matrix`` / ``as_vector``
constructors validate shape and finiteness and return read-only copies, so a
validated value can be shared freely between solves and threads.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from discnn.errors import DegenerateInstanceError, DimensionMismatchError, NonFiniteValueError

RealMatrix = NDArray[np.float64]
RealVector = NDArray[np.float64]


def _freeze(a: NDArray[np.float64]) -> NDArray[np.float64]:
    a.flags.writeable = False
    return a


def as_matrix(data: ArrayLike, *, name: str = "matrix") -> RealMatrix:
    """Validate and copy ``data`` into a read-only row-major float64 matrix."""
    a = np.array(data, dtype=np.float64, order="C", copy=True)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatchError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteValueError(f"{name} contains NaN or Inf")
    return _freeze(a)


def as_vector(data: ArrayLike, *, name: str = "vector", length: int | None = None) -> RealVector:
    """Validate and copy ``data`` into a read-only float64 vector."""
    v = np.atleast_1d(np.array(data, dtype=np.float64, copy=True))
    if v.ndim != 1 or v.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise DimensionMismatchError(f"{name} has length {v.shape[0]}, expected {length}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteValueError(f"{name} contains NaN or Inf")
    return _freeze(v)


def matvec(A: RealMatrix, v: RealVector) -> RealVector:
    if A.shape[1] != v.shape[0]:
        raise DimensionMismatchError(
            f"cannot multiply {A.shape[0]}x{A.shape[1]} matrix by vector of length {v.shape[0]}"
        )
    return _freeze(A @ v)


def gram(A: RealMatrix) -> RealMatrix:
    """Return A^T A, exactly symmetric (upper triangle mirrored)."""
    G = A.T @ A
    upper = np.triu(G)
    G = upper + np.triu(G, 1).T
    return _freeze(np.ascontiguousarray(G))


def normalize_columns(A: RealMatrix) -> RealMatrix:
    norms = np.linalg.norm(A, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInstanceError(f"column {int(zero[0])} is the zero vector")
    return _freeze(np.ascontiguousarray(A / norms))


def gershgorin_bound(G: RealMatrix) -> float:
    """Upper bound on the largest eigenvalue of a symmetric matrix."""
    return float(np.max(np.sum(np.abs(G), axis=1)))
