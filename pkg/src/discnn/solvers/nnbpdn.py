"""Non-negative basis pursuit denoising by projected proximal gradient.

Solves min 1/2 ||Ax - y||^2 + alpha * sum(x) subject to x >= 0. On the non-negative
orthant the l1 penalty is linear, so the proximal map is a shift followed by
projection: x <- max(0, x - s (A^T A x - A^T y + alpha)).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from discnn.config import OracleOptions
from discnn.errors import DegenerateInstanceError
from discnn.numerics import RealMatrix, RealVector, as_matrix, as_vector, gershgorin_bound, gram

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProxSolution:
    x: RealVector
    iterations: int
    converged: bool
    objective: float


@dataclass(frozen=True)
class NnbpdnPath:
    """Solutions along a descending grid of regularization parameters."""

    alphas: RealVector
    solutions: list[RealVector] = field(repr=False)
    converged: list[bool] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.solutions)


def nnbpdn_objective(A: RealMatrix, y: RealVector, x: RealVector, alpha: float) -> float:
    r = A @ x - y
    return 0.5 * float(r @ r) + alpha * float(np.sum(x))


def _prox_gradient(
    G: RealMatrix,
    atb: RealVector,
    alpha: float,
    x: RealVector,
    opts: OracleOptions,
) -> tuple[RealVector, int, bool]:
    step = 1.0 / gershgorin_bound(G)
    shift = atb - alpha
    for it in range(1, opts.max_iter + 1):
        x_new = np.maximum(x - step * (G @ x - shift), 0.0)
        delta = float(np.max(np.abs(x_new - x)))
        x = x_new
        if delta <= opts.tol:
            return x, it, True
    return x, opts.max_iter, False


def nnbpdn_prox(
    A: ArrayLike,
    y: ArrayLike,
    alpha: float,
    opts: OracleOptions | None = None,
    x_init: ArrayLike | None = None,
) -> ProxSolution:
    """Solve one NNBPDN problem; starts from zero unless ``x_init`` is given.

    Hitting ``opts.max_iter`` returns the last iterate with ``converged=False``.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    opts = opts or OracleOptions()
    A = as_matrix(A, name="A")
    y = as_vector(y, name="y", length=A.shape[0])
    x0 = np.zeros(A.shape[1]) if x_init is None else np.array(as_vector(x_init, length=A.shape[1]))
    x, iterations, converged = _prox_gradient(gram(A), A.T @ y, alpha, x0, opts)
    if not converged:
        logger.warning("nnbpdn alpha=%.3e stopped at the %d-iteration cap", alpha, iterations)
    return ProxSolution(
        x=x,
        iterations=iterations,
        converged=converged,
        objective=nnbpdn_objective(A, y, x, alpha),
    )


def alpha_grid(A: RealMatrix, y: RealVector, n_alphas: int, span: float) -> RealVector:
    """Logarithmic grid from ||A^T y||_inf down to ``span`` times that."""
    alpha_max = float(np.max(np.abs(A.T @ y)))
    if alpha_max == 0.0:
        raise DegenerateInstanceError("A^T y is zero; the regularization path is empty")
    return np.geomspace(alpha_max, alpha_max * span, n_alphas)


def nnbpdn_path(
    A: ArrayLike, y: ArrayLike, n_alphas: int | None = None, opts: OracleOptions | None = None
) -> NnbpdnPath:
    """Warm-started solves over a descending alpha grid."""
    opts = opts or OracleOptions()
    n_alphas = opts.n_alphas if n_alphas is None else n_alphas
    if n_alphas < 2:
        raise ValueError(f"n_alphas must be at least 2, got {n_alphas}")
    A = as_matrix(A, name="A")
    y = as_vector(y, name="y", length=A.shape[0])
    G = gram(A)
    atb = A.T @ y
    alphas = alpha_grid(A, y, n_alphas, opts.alpha_span)

    x = np.zeros(A.shape[1])
    solutions: list[RealVector] = []
    flags: list[bool] = []
    for alpha in alphas:
        x, iterations, converged = _prox_gradient(G, atb, float(alpha), x, opts)
        if not converged:
            logger.warning("nnbpdn path: alpha=%.3e hit the %d-iteration cap", alpha, iterations)
        solutions.append(x.copy())
        flags.append(converged)
    alphas.flags.writeable = False
    return NnbpdnPath(alphas=alphas, solutions=solutions, converged=flags)
