from __future__ import annotations

import logging
import time

import numpy as np
from numpy.typing import ArrayLike

from discnn.config import OracleOptions
from discnn.dynamics.box import BoxSystem
from discnn.dynamics.trajectory import SolveResult
from discnn.kkt import box_kkt
from discnn.numerics import RealVector, as_vector, gershgorin_bound

logger = logging.getLogger(__name__)


def projected_gradient_norm(sys: BoxSystem, x: RealVector) -> float:
    """||x - clip(x - (Qx - q), lo, hi)||_inf; zero exactly at the QP solution."""
    g = sys.Q @ x - sys.q
    return float(np.max(np.abs(x - np.clip(x - g, sys.lo, sys.hi))))


def box_projected_gradient(
    sys: BoxSystem, opts: OracleOptions | None = None, x0: ArrayLike | None = None
) -> SolveResult:
    """Projected gradient with fixed step 1 / (Gershgorin bound of Q)."""
    opts = opts or OracleOptions()
    start = time.perf_counter()
    step = 1.0 / gershgorin_bound(sys.Q)
    x = np.zeros(sys.n) if x0 is None else np.array(as_vector(x0, name="x0", length=sys.n))
    x = np.clip(x, sys.lo, sys.hi)

    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        x = np.clip(x - step * (sys.Q @ x - sys.q), sys.lo, sys.hi)
        if projected_gradient_norm(sys, x) <= opts.tol:
            converged = True
            break
    if not converged:
        logger.warning(
            "box projected gradient stopped at the %d-iteration cap (residual %.3e)",
            opts.max_iter,
            projected_gradient_norm(sys, x),
        )

    lam = sys.Q @ x - sys.q
    x.flags.writeable = False
    lam.flags.writeable = False
    return SolveResult(
        x_eq=x,
        lambda_eq=lam,
        kkt_residual=box_kkt(sys, x).total,
        switches=0,
        steps=iterations,
        converged=converged,
        wall_time=time.perf_counter() - start,
        method="projected-gradient",
    )
