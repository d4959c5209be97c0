"""Lawson-Hanson active-set NNLS, run on the Gram matrix.

Coordinates in the passive set are free (positive); all others are held at exactly
zero. The multiplier returned with the solution is exactly zero on the passive set, so
complementary slackness holds bit for bit.
"""

from __future__ import annotations

import logging
import time

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lstsq

from discnn.dynamics.trajectory import SolveResult
from discnn.errors import ActiveSetCyclingError
from discnn.kkt import nnls_kkt_gram
from discnn.numerics import RealMatrix, RealVector, as_matrix, as_vector, gram

logger = logging.getLogger(__name__)


def _passive_solve(G: RealMatrix, atb: RealVector, passive: np.ndarray) -> RealVector:
    z = np.zeros_like(atb)
    idx = np.flatnonzero(passive)
    if not idx.size:
        return z
    Gpp = G[np.ix_(idx, idx)]
    try:
        z[idx] = cho_solve(cho_factor(Gpp), atb[idx])
    except LinAlgError:
        z[idx] = lstsq(Gpp, atb[idx])[0]
    return z


def lawson_hanson(
    G: RealMatrix, atb: RealVector, tol: float = 1e-10
) -> tuple[RealVector, int]:
    """Active-set iterations on min 1/2 x^T G x - atb^T x, x >= 0.

    Returns the solution and the number of passive-set solves. Raises
    :class:`ActiveSetCyclingError` after 3N solves.
    """
    n = atb.shape[0]
    cap = 3 * n
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    solves = 0

    while True:
        w = atb - G @ x
        free = ~passive
        if not free.any() or w[free].max() <= tol:
            break
        j = int(np.flatnonzero(free)[np.argmax(w[free])])
        passive[j] = True

        while True:
            solves += 1
            if solves > cap:
                raise ActiveSetCyclingError(
                    f"active set did not settle within {cap} solves (N={n}); "
                    f"passive set size {int(passive.sum())}"
                )
            z = _passive_solve(G, atb, passive)
            if np.all(z[passive] > 0.0):
                x = z
                break
            # Move toward z until the first passive coordinate hits zero, then drop it.
            blocked = passive & (z <= 0.0)
            alpha = np.min(x[blocked] / (x[blocked] - z[blocked]))
            x = x + alpha * (z - x)
            passive &= x > tol * max(1.0, float(np.max(np.abs(x), initial=0.0)))
            x[~passive] = 0.0

    logger.debug("lawson-hanson finished: %d solves, %d positive", solves, int(passive.sum()))
    return x, solves


def nnls_active_set(A: ArrayLike, y: ArrayLike, tol: float = 1e-10) -> SolveResult:
    """Solve min ||Ax - y||^2 subject to x >= 0 with the Lawson-Hanson method."""
    A = as_matrix(A, name="A")
    y = as_vector(y, name="y", length=A.shape[0])
    start = time.perf_counter()
    G = gram(A)
    atb = A.T @ y
    x, solves = lawson_hanson(G, atb, tol)

    report, lam = nnls_kkt_gram(G, atb, x)
    lam = lam.copy()
    lam[x > 0.0] = 0.0
    converged = report.total <= tol
    if not converged:
        logger.warning("lawson-hanson KKT residual %.3e exceeds tol %.1e", report.total, tol)
    x.flags.writeable = False
    lam.flags.writeable = False
    return SolveResult(
        x_eq=x,
        lambda_eq=lam,
        kkt_residual=report.total,
        switches=0,
        steps=solves,
        converged=converged,
        wall_time=time.perf_counter() - start,
        method="lawson-hanson",
    )
