from __future__ import annotations

import logging
import time

import numpy as np
from numpy.typing import ArrayLike

from discnn.config import SolverOptions
from discnn.dynamics.integrators import Integrator, make_integrator
from discnn.dynamics.system import DiscSystem, SystemState
from discnn.dynamics.trajectory import SolveResult, Trajectory
from discnn.errors import DimensionMismatchError
from discnn.kkt import nnls_kkt_gram
from discnn.numerics import RealVector, as_vector

logger = logging.getLogger(__name__)


def solve(
    sys: DiscSystem,
    x0: ArrayLike,
    opts: SolverOptions | None = None,
    reference: ArrayLike | None = None,
) -> tuple[SolveResult, Trajectory]:
    """Integrate the network from ``x0`` until the NNLS KKT residual drops below tolerance.

    With ``reference`` given (typically an oracle solution), the trajectory also records
    the Lyapunov value 1/2 ||x - reference||^2 at every sample. Non-convergence within
    ``opts.max_time`` is reported through ``converged=False``, never raised.
    """
    opts = opts or SolverOptions()
    x0 = as_vector(x0, name="x0", length=sys.n)
    ref = as_vector(reference, name="reference", length=sys.n) if reference is not None else None

    return _integrate(sys, x0, opts, make_integrator(opts.integrator, opts), ref)


def _integrate(
    sys: DiscSystem,
    x0: RealVector,
    opts: SolverOptions,
    integrator: Integrator,
    reference: RealVector | None,
) -> tuple[SolveResult, Trajectory]:
    start = time.perf_counter()
    state = SystemState.at(sys, x0, t=0.0, zero_tol=opts.zero_tol)
    traj = Trajectory.start(state, reference)

    report, lam = nnls_kkt_gram(sys.gramA, sys.atb, state.x)
    converged = report.total <= opts.kkt_tol
    chunk = integrator.first_chunk(sys)
    chunks = 0

    while state.t < opts.max_time and not (converged and opts.stop_on_convergence):
        t_end = min(state.t + chunk, opts.max_time)
        state, events = integrator.advance(sys, state, t_end)
        traj.extend_events(events)
        chunks += 1
        if chunks % integrator.sample_stride == 0:
            traj.record(state)
        report, lam = nnls_kkt_gram(sys.gramA, sys.atb, state.x)
        converged = report.total <= opts.kkt_tol
        chunk *= integrator.growth

    traj.record(state)
    wall = time.perf_counter() - start

    if converged:
        logger.debug(
            "%s solve converged at t=%.4g after %d steps, %d switches",
            integrator.name,
            state.t,
            integrator.steps,
            len(traj.switch_events),
        )
    else:
        logger.warning(
            "%s solve did not converge by t=%.4g (KKT residual %.3e > %.1e)",
            integrator.name,
            state.t,
            report.total,
            opts.kkt_tol,
        )

    lam = lam.copy()
    lam.flags.writeable = False
    result = SolveResult(
        x_eq=state.x,
        lambda_eq=lam,
        kkt_residual=report.total,
        switches=len(traj.switch_events),
        steps=integrator.steps,
        converged=converged,
        wall_time=wall,
        t_final=state.t,
        method=integrator.name,
    )
    return result, traj


def lyapunov_value(x: ArrayLike, x_eq: ArrayLike) -> float:
    """V = 1/2 ||x - x_eq||^2."""
    z = np.asarray(x, dtype=np.float64) - _same_length(x, x_eq)
    return 0.5 * float(z @ z)


def _same_length(x: ArrayLike, x_eq: ArrayLike) -> np.ndarray:
    a, b = np.asarray(x), np.asarray(x_eq, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"x has shape {a.shape} but x_eq has shape {b.shape}")
    return b


def count_switches(traj: Trajectory) -> int:
    return len(traj.switch_events)
