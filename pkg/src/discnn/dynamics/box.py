"""Limited integrators with general lower and upper bounds.

The network solves min 1/2 x^T Q x - q^T x subject to lo <= x <= hi. Each coordinate
integrates x^ = q - Q x while strictly inside its box, integrates only the inward part
of x^ at a bound, and returns to the box at constant rate xi from outside.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import LinAlgError, cho_factor

from discnn.config import SolverOptions
from discnn.dynamics.trajectory import SolveResult
from discnn.errors import (
    DimensionMismatchError,
    IntegrationDivergedError,
    NonFiniteValueError,
    NotPositiveDefiniteError,
)
from discnn.kkt import box_kkt
from discnn.numerics import RealMatrix, RealVector, as_matrix, as_vector, gershgorin_bound, gram

logger = logging.getLogger(__name__)

# Position classes used to count switches.
INSIDE, AT_LO, AT_HI, BELOW, ABOVE = 0, 1, 2, 3, 4


def _bounds(data: ArrayLike, name: str, n: int) -> RealVector:
    b = np.atleast_1d(np.array(data, dtype=np.float64, copy=True))
    if b.shape != (n,):
        raise DimensionMismatchError(f"{name} has shape {b.shape}, expected ({n},)")
    if np.any(np.isnan(b)):
        raise NonFiniteValueError(f"{name} contains NaN")
    b.flags.writeable = False
    return b


@dataclass(frozen=True)
class BoxSystem:
    """Quadratic program data; bounds may be infinite."""

    Q: RealMatrix
    q: RealVector
    lo: RealVector
    hi: RealVector
    xi: float = 1.0

    @classmethod
    def build(
        cls, Q: ArrayLike, q: ArrayLike, lo: ArrayLike, hi: ArrayLike, xi: float = 1.0
    ) -> BoxSystem:
        Q = as_matrix(Q, name="Q")
        n = Q.shape[0]
        if Q.shape != (n, n):
            raise DimensionMismatchError(f"Q must be square, got {Q.shape}")
        if not np.allclose(Q, Q.T, rtol=1e-10, atol=1e-12):
            raise NotPositiveDefiniteError("Q is not symmetric")
        try:
            cho_factor(Q)
        except LinAlgError as exc:
            raise NotPositiveDefiniteError(f"Q is not positive definite: {exc}") from exc
        q = as_vector(q, name="q", length=n)
        lo = _bounds(lo, "lo", n)
        hi = _bounds(hi, "hi", n)
        if not np.all(lo < hi):
            bad = int(np.flatnonzero(~(lo < hi))[0])
            raise ValueError(f"lo must be below hi; coordinate {bad} has [{lo[bad]}, {hi[bad]}]")
        if not xi > 0:
            raise ValueError(f"xi must be positive, got {xi}")
        sym = 0.5 * (Q + Q.T)
        sym.flags.writeable = False
        return cls(Q=sym, q=q, lo=lo, hi=hi, xi=float(xi))

    @classmethod
    def from_nnls(cls, A: ArrayLike, y: ArrayLike, xi: float = 1.0) -> BoxSystem:
        """The NNLS problem for full column-rank ``A``: Q = A^T A, q = A^T y, x >= 0."""
        A = as_matrix(A, name="A")
        y = as_vector(y, name="y", length=A.shape[0])
        n = A.shape[1]
        return cls.build(gram(A), A.T @ y, np.zeros(n), np.full(n, np.inf), xi=xi)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def default_dt(self) -> float:
        return 1.0 / (2.0 * gershgorin_bound(self.Q))

    def classify(self, x: RealVector, zero_tol: float = 1e-12) -> np.ndarray:
        at_lo = np.abs(x - self.lo) <= zero_tol
        at_hi = np.abs(x - self.hi) <= zero_tol
        labels = np.full(x.shape[0], INSIDE, dtype=np.int8)
        labels[x < self.lo - zero_tol] = BELOW
        labels[x > self.hi + zero_tol] = ABOVE
        labels[at_lo] = AT_LO
        labels[at_hi] = AT_HI
        return labels


def box_rhs(sys: BoxSystem, x: ArrayLike, zero_tol: float = 1e-12) -> RealVector:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (sys.n,):
        raise DimensionMismatchError(f"state has shape {x.shape}, expected ({sys.n},)")
    xhat = sys.q - sys.Q @ x
    labels = sys.classify(x, zero_tol)
    xdot = xhat.copy()
    xdot[labels == AT_LO] = np.maximum(xhat[labels == AT_LO], 0.0)
    xdot[labels == AT_HI] = np.minimum(xhat[labels == AT_HI], 0.0)
    xdot[labels == BELOW] = sys.xi
    xdot[labels == ABOVE] = -sys.xi
    return xdot


def step_box_euler(
    sys: BoxSystem, x: ArrayLike, dt: float, zero_tol: float = 1e-12
) -> RealVector:
    """One projected-Euler step; a coordinate never overshoots a bound it reaches."""
    x = np.asarray(x, dtype=np.float64)
    x_new = x + dt * box_rhs(sys, x, zero_tol)
    inside = (x >= sys.lo - zero_tol) & (x <= sys.hi + zero_tol)
    x_new = np.where(inside, np.clip(x_new, sys.lo, sys.hi), x_new)
    x_new = np.where(x < sys.lo - zero_tol, np.minimum(x_new, sys.lo), x_new)
    x_new = np.where(x > sys.hi + zero_tol, np.maximum(x_new, sys.hi), x_new)
    x_new = np.where(np.abs(x_new - sys.lo) <= zero_tol, sys.lo, x_new)
    x_new = np.where(np.abs(x_new - sys.hi) <= zero_tol, sys.hi, x_new)
    if not np.all(np.isfinite(x_new)):
        raise IntegrationDivergedError("box state became non-finite")
    return x_new


def box_solve(sys: BoxSystem, x0: ArrayLike, opts: SolverOptions | None = None) -> SolveResult:
    """Integrate the box network to its KKT point.

    Only the projected-Euler integrator exists for the box network; ``integrator="auto"``
    selects it and ``"exact"`` is rejected.
    """
    opts = opts or SolverOptions()
    if opts.integrator == "exact":
        raise ValueError("the box network supports only the projected-Euler integrator")
    x = np.array(as_vector(x0, name="x0", length=sys.n))
    dt = opts.dt if opts.dt is not None else sys.default_dt()
    start = time.perf_counter()

    labels = sys.classify(x, opts.zero_tol)
    switches = 0
    steps = 0
    t = 0.0
    report = box_kkt(sys, x, active_tol=opts.zero_tol)
    converged = report.total <= opts.kkt_tol

    while t < opts.max_time and not (converged and opts.stop_on_convergence):
        for _ in range(opts.check_every):
            h = min(dt, opts.max_time - t)
            if h <= 0:
                break
            x = step_box_euler(sys, x, h, opts.zero_tol)
            new_labels = sys.classify(x, opts.zero_tol)
            switches += int(np.count_nonzero(new_labels != labels))
            labels = new_labels
            t += h
            steps += 1
        report = box_kkt(sys, x, active_tol=opts.zero_tol)
        converged = report.total <= opts.kkt_tol

    if not converged:
        logger.warning(
            "box solve did not converge by t=%.4g (KKT residual %.3e > %.1e)",
            t,
            report.total,
            opts.kkt_tol,
        )

    lam = sys.Q @ x - sys.q
    x.flags.writeable = False
    lam.flags.writeable = False
    return SolveResult(
        x_eq=x,
        lambda_eq=lam,
        kkt_residual=report.total,
        switches=switches,
        steps=steps,
        converged=converged,
        wall_time=time.perf_counter() - start,
        t_final=t,
        method="box-euler",
    )
