"""Time integrators for the discontinuous network.

Two interchangeable integrators advance a :class:`SystemState` to a target time:

* :class:`EulerIntegrator` takes fixed projected-Euler steps. Coordinates that would
  cross zero inside a step are clamped to exactly 0 and the crossing time is
  interpolated linearly.
* :class:`ExactIntegrator` follows the piecewise-analytic solution. On each interval
  of constant partition the active block is a linear ODE solved in the eigenbasis of
  its Gram block; the interval ends at the earliest switch, located by a grid scan
  and ``brentq``.
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Protocol, runtime_checkable

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from discnn.config import SolverOptions
from discnn.dynamics.system import DiscSystem, IndexPartition, SystemState, _rhs, switch_events
from discnn.errors import IntegrationDivergedError, SingularSubsystemError
from discnn.events import NEG, PLUS, ZERO, PartitionSet, SwitchEvent, label_name
from discnn.numerics import RealVector, gershgorin_bound

logger = logging.getLogger(__name__)

# Relative eigenvalue floor below which the active Gram block counts as singular.
SINGULAR_RTOL = 1e-10


@runtime_checkable
class Integrator(Protocol):
    """Advances a state of a :class:`DiscSystem` to a later time."""

    @property
    def name(self) -> str: ...

    @property
    def steps(self) -> int:
        """Steps (Euler) or constant-partition intervals (exact) taken so far."""
        ...

    def first_chunk(self, sys: DiscSystem) -> float:
        """Simulated time between the first two convergence checks."""
        ...

    @property
    def growth(self) -> float:
        """Factor applied to the chunk length after every check."""
        ...

    @property
    def sample_stride(self) -> int:
        """Chunks between trajectory samples."""
        ...

    def advance(
        self, sys: DiscSystem, state: SystemState, t_end: float
    ) -> tuple[SystemState, list[SwitchEvent]]: ...


# ── Projected Euler ──────────────────────────────────────────────


def _euler_kernel(
    sys: DiscSystem, x: RealVector, xtilde: RealVector, dt: float, zero_tol: float
) -> tuple[RealVector, RealVector]:
    """One step on raw arrays. Returns the new state and per-coordinate crossing fractions."""
    xdot = _rhs(x, xtilde, sys.xi, zero_tol)
    x_new = x + dt * xdot
    frac = np.ones_like(x)

    down = (x > zero_tol) & (x_new < 0.0)
    frac[down] = x[down] / (-xdot[down] * dt)
    up = (x < -zero_tol) & (x_new >= -zero_tol)
    frac[up] = -x[up] / (sys.xi * dt)
    x_new[down | up] = 0.0
    x_new[np.abs(x_new) <= zero_tol] = 0.0

    if not np.all(np.isfinite(x_new)):
        raise IntegrationDivergedError("projected-Euler state became non-finite")
    return x_new, np.clip(frac, 0.0, 1.0)


def _state(x: RealVector, xtilde: RealVector, t: float, labels: np.ndarray) -> SystemState:
    x = x.copy()
    xtilde = xtilde.copy()
    x.flags.writeable = False
    xtilde.flags.writeable = False
    return SystemState(t=t, x=x, xtilde=xtilde, partition=IndexPartition(labels))


def step_projected_euler(
    sys: DiscSystem, state: SystemState, dt: float, zero_tol: float = 1e-12
) -> tuple[SystemState, list[SwitchEvent]]:
    """Advance by one projected-Euler step of length ``dt``.

    Returns the new state (input and partition recomputed at step end) and the switch
    events of the step, timed at the interpolated crossing for clamped coordinates and
    at step end otherwise.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x_new, frac = _euler_kernel(sys, state.x, state.xtilde, dt, zero_tol)
    xtilde_new = sys.integrator_input(x_new)
    after = IndexPartition.classify(x_new, xtilde_new, zero_tol)
    events = switch_events(state.partition, after, state.t + frac * dt)
    return _state(x_new, xtilde_new, state.t + dt, after.labels), events


class EulerIntegrator:
    """Fixed-step projected Euler; convergence is checked every ``check_every`` steps."""

    name = "euler"
    growth = 1.0

    def __init__(
        self,
        dt: float | None = None,
        zero_tol: float = 1e-12,
        check_every: int = 20,
        sample_every: int = 50,
    ) -> None:
        self.dt = dt
        self.zero_tol = zero_tol
        self.check_every = check_every
        self.sample_stride = max(1, sample_every // check_every)
        self.steps = 0

    def step_size(self, sys: DiscSystem) -> float:
        return self.dt if self.dt is not None else sys.default_dt()

    def first_chunk(self, sys: DiscSystem) -> float:
        return self.check_every * self.step_size(sys)

    def advance(
        self, sys: DiscSystem, state: SystemState, t_end: float
    ) -> tuple[SystemState, list[SwitchEvent]]:
        dt = self.step_size(sys)
        t = state.t
        x, xtilde = state.x, state.xtilde
        labels = state.partition.labels
        events: list[SwitchEvent] = []

        while t < t_end:
            h = min(dt, t_end - t)
            # Guard against a sliver step from accumulated rounding.
            if t_end - (t + h) < 1e-12 * dt:
                h = t_end - t
            x, frac = _euler_kernel(sys, x, xtilde, h, self.zero_tol)
            xtilde = sys.integrator_input(x)
            new_labels = IndexPartition.classify(x, xtilde, self.zero_tol).labels
            changed = np.flatnonzero(new_labels != labels)
            for i in changed:
                events.append(
                    SwitchEvent(
                        time=float(t + frac[i] * h),
                        index=int(i),
                        from_set=label_name(int(labels[i])),
                        to_set=label_name(int(new_labels[i])),
                    )
                )
            labels = new_labels
            t = t_end if h == t_end - t else t + h
            self.steps += 1

        return _state(x, xtilde, t, labels), events


# ── Exact subsystem ──────────────────────────────────────────────

# Input and state offsets within this many units of roundoff of zero count as zero.
ROUNDOFF_RTOL = 1e-12
# Intervals shorter than this fraction of the advance count toward a stall.
STALL_RTOL = 1e-9
# Euler steps used to carry an auto run past a stalled stretch.
BRIDGE_STEPS = 256


def _phi(lam: np.ndarray, tau: float | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (1 - e^{-l t}) / l and (t - (1 - e^{-l t}) / l) / l, stable for small l t.

    ``tau`` may be a column of times, giving one row per time.
    """
    z = lam * tau
    small = z < 1e-4
    safe = np.where(small, 1.0, lam)
    e1 = np.where(small, tau * (1.0 - z / 2.0 + z * z / 6.0), -np.expm1(-z) / safe)
    e2 = np.where(small, tau * tau * (0.5 - z / 6.0 + z * z / 24.0), (tau - e1) / safe)
    return e1, e2


class _Interval:
    """Closed-form motion on one interval of constant partition.

    Active block: x_P' = c0 + c1 t - G_PP x_P with c0 = b_P - G_PN x_N(0) and
    c1 = -xi G_PN 1, solved in the eigenbasis of G_PP. Negative block: x_N(0) + xi t.
    Zero block: identically 0.

    With ``allow_singular`` a rank-deficient G_PP is accepted: the forcing has no
    component along null(A_P), so those modes stay at their initial value.
    """

    def __init__(
        self, sys: DiscSystem, x: RealVector, labels: np.ndarray, allow_singular: bool = False
    ) -> None:
        G = sys.gramA
        self.sys = sys
        self.P = np.flatnonzero(labels == PLUS)
        self.Z = np.flatnonzero(labels == ZERO)
        self.N = np.flatnonzero(labels == NEG)
        self.x0 = x
        self.xn0 = x[self.N]
        self.rate = 0.0

        if self.P.size:
            lam, V = eigh(G[np.ix_(self.P, self.P)])
            null = lam <= SINGULAR_RTOL * max(1.0, lam[-1])
            if null.any() and not allow_singular:
                raise SingularSubsystemError(
                    f"Gram block of {self.P.size} active coordinates is singular "
                    f"(smallest eigenvalue {lam[0]:.3e}); use integrator='euler'"
                )
            lam = np.where(null, 0.0, lam)
            Gpn = G[np.ix_(self.P, self.N)]
            self.lam, self.V = lam, V
            self.rate = float(lam[-1])
            self.w0 = V.T @ x[self.P]
            self.d0 = np.where(null, 0.0, V.T @ (sys.atb[self.P] - Gpn @ self.xn0))
            self.d1 = np.where(null, 0.0, V.T @ (-sys.xi * Gpn.sum(axis=1)))

    def plus_block(self, tau: float) -> RealVector:
        if not self.P.size:
            return np.empty(0)
        e1, e2 = _phi(self.lam, tau)
        return self.V @ (self.w0 * np.exp(-self.lam * tau) + self.d0 * e1 + self.d1 * e2)

    def plus_grid(self, taus: np.ndarray) -> np.ndarray:
        """Active block at every time of ``taus``, one row per time."""
        if not self.P.size:
            return np.empty((taus.size, 0))
        col = taus[:, None]
        e1, e2 = _phi(self.lam[None, :], col)
        modes = self.w0 * np.exp(-self.lam[None, :] * col) + self.d0 * e1 + self.d1 * e2
        return modes @ self.V.T

    def neg_block(self, tau: float) -> RealVector:
        return self.xn0 + self.sys.xi * tau

    def state_at(self, tau: float) -> RealVector:
        x = np.zeros_like(self.x0)
        x[self.P] = self.plus_block(tau)
        x[self.N] = self.neg_block(tau)
        return x

    def zero_input(self, tau: float) -> RealVector:
        """Integrator input of the coordinates held at zero."""
        return self.zero_grid(np.array([tau]), self.plus_block(tau)[None, :])[0]

    def zero_grid(self, taus: np.ndarray, xp_grid: np.ndarray) -> np.ndarray:
        G = self.sys.gramA
        out = np.broadcast_to(self.sys.atb[self.Z], (taus.size, self.Z.size)).copy()
        if self.P.size:
            out -= xp_grid @ G[np.ix_(self.Z, self.P)].T
        if self.N.size:
            xn = self.xn0[None, :] + self.sys.xi * taus[:, None]
            out -= xn @ G[np.ix_(self.Z, self.N)].T
        return out


def _scan_grid(tau_max: float, rate: float = 0.0) -> np.ndarray:
    """Event-scan times on [0, tau_max].

    Uniform over the whole span, uniform at spacing 1 / (2 rate) over the first 64
    such cells, and geometric with ratio at most 1.25 from well inside the first cell.
    """
    cell = 0.5 / rate if rate > 0.0 else tau_max
    head = min(tau_max, 64.0 * cell)
    start = min(1e-6 * tau_max, 1e-2 * cell)
    n_geo = int(min(512, np.ceil(np.log(tau_max / start) / np.log(1.25)) + 2))
    return np.unique(
        np.concatenate(
            [
                np.linspace(0.0, tau_max, 33),
                np.linspace(0.0, head, 65),
                np.geomspace(start, tau_max, n_geo),
            ]
        )
    )


class _Candidate(NamedTuple):
    lo: float
    hi: float
    index: int
    kind: PartitionSet  # set the coordinate leaves
    level: float = 0.0  # root of the watched quantity minus this


def _falling(values: np.ndarray, grid: np.ndarray, tol: float) -> tuple[float, float, float] | None:
    """Bracket of the first genuine drop of an active coordinate below zero.

    A drop counts once the coordinate passes ``-tol``. The bracket is the last
    positive-to-non-positive step before that; a coordinate that starts at zero is
    bracketed at the ``-tol`` crossing instead.
    """
    below = np.flatnonzero(values < -tol)
    if not below.size or below[0] == 0:
        return None
    j = int(below[0])
    positive = np.flatnonzero(values[:j] > 0.0)
    if positive.size:
        k = int(positive[-1])
        return float(grid[k]), float(grid[k + 1]), 0.0
    return float(grid[j - 1]), float(grid[j]), -tol


def _rising(values: np.ndarray, grid: np.ndarray, tol: float) -> tuple[float, float, float] | None:
    """Bracket of the first genuine rise of a held coordinate's input above zero."""
    above = np.flatnonzero(values > tol)
    if not above.size or above[0] == 0:
        return None
    j = int(above[0])
    negative = np.flatnonzero(values[:j] < 0.0)
    if negative.size:
        k = int(negative[-1])
        return float(grid[k]), float(grid[k + 1]), 0.0
    return float(grid[j - 1]), float(grid[j]), tol


def _candidates(
    seg: _Interval,
    tau_max: float,
    grid: np.ndarray,
    xp_grid: np.ndarray,
    xtol: float,
    input_tol: float,
) -> list[_Candidate]:
    found: list[_Candidate] = []
    for k, i in enumerate(seg.P):
        bracket = _falling(xp_grid[:, k], grid, xtol)
        if bracket is not None:
            found.append(_Candidate(bracket[0], bracket[1], int(i), "plus", bracket[2]))
    # A negative coordinate reaches zero at exactly -x / xi.
    for k, i in enumerate(seg.N):
        hit = float(-seg.xn0[k] / seg.sys.xi)
        if hit <= tau_max:
            found.append(_Candidate(hit, hit, int(i), "neg"))
    if seg.Z.size:
        xz_grid = seg.zero_grid(grid, xp_grid)
        for k, i in enumerate(seg.Z):
            bracket = _rising(xz_grid[:, k], grid, input_tol)
            if bracket is not None:
                found.append(_Candidate(bracket[0], bracket[1], int(i), "zero", bracket[2]))
    return found


def _refine(seg: _Interval, cand: _Candidate) -> float:
    if cand.lo == cand.hi:
        return cand.lo
    if cand.kind == "plus":
        k = int(np.flatnonzero(seg.P == cand.index)[0])
        return float(
            brentq(lambda s: seg.plus_block(s)[k] - cand.level, cand.lo, cand.hi, xtol=1e-14)
        )
    k = int(np.flatnonzero(seg.Z == cand.index)[0])
    return float(
        brentq(lambda s: seg.zero_input(s)[k] - cand.level, cand.lo, cand.hi, xtol=1e-14)
    )


def _roundoff(sys: DiscSystem, x: RealVector, gersh: float, zero_tol: float) -> tuple[float, float]:
    """Tolerances below which a coordinate and an input are indistinguishable from zero."""
    xmax = float(np.max(np.abs(x), initial=0.0))
    amax = float(np.max(np.abs(sys.atb), initial=0.0))
    return max(zero_tol, ROUNDOFF_RTOL * xmax), ROUNDOFF_RTOL * (amax + gersh * xmax)


def _settle_at_zero(
    labels: np.ndarray, x: RealVector, xtilde: RealVector, input_tol: float
) -> np.ndarray:
    """Labels of coordinates sitting at zero whose input is clearly signed.

    An active coordinate is held once its input is clearly negative and a held one is
    released once its input is clearly positive. Inputs within roundoff of zero keep
    the current label.
    """
    at_zero = x == 0.0
    settled = labels.copy()
    settled[at_zero & (labels == PLUS) & (xtilde < -input_tol)] = ZERO
    settled[at_zero & (labels == ZERO) & (xtilde > input_tol)] = PLUS
    return settled


class _ExactRun(NamedTuple):
    state: SystemState
    events: list[SwitchEvent]
    intervals: int
    stalled: str | None  # why the run stopped short of t_end


def _advance_exact(
    sys: DiscSystem,
    state: SystemState,
    t_end: float,
    zero_tol: float,
    max_intervals: int,
    allow_singular: bool = False,
) -> _ExactRun:
    t = state.t
    x = state.x.copy()
    labels = state.partition.labels.copy()
    x[labels == ZERO] = 0.0
    x[(labels == PLUS) & (x < 0.0) & (x >= -zero_tol)] = 0.0
    events: list[SwitchEvent] = []
    intervals = 0
    short_run = 0
    stalled: str | None = None
    gersh = gershgorin_bound(sys.gramA)
    span = max(t_end - t, 1.0)

    while t < t_end:
        xtol, input_tol = _roundoff(sys, x, gersh, zero_tol)
        xtilde = sys.integrator_input(x)
        settled = _settle_at_zero(labels, x, xtilde, input_tol)
        if np.any(settled != labels):
            events.extend(switch_events(IndexPartition(labels), IndexPartition(settled), t))
            labels = settled

        intervals += 1
        if intervals > max_intervals:
            stalled = f"more than {max_intervals} switch intervals before t={t_end}"
            break

        seg = _Interval(sys, x, labels, allow_singular)
        tau_max = t_end - t
        grid = _scan_grid(tau_max, seg.rate)
        xp_grid = seg.plus_grid(grid)

        candidates = _candidates(seg, tau_max, grid, xp_grid, xtol, input_tol)
        if not candidates:
            x = seg.state_at(tau_max)
            t = t_end
            break

        horizon = min(c.hi for c in candidates)
        best_tau, best = min(
            ((_refine(seg, c), c) for c in candidates if c.lo <= horizon), key=lambda p: p[0]
        )

        x = seg.state_at(best_tau)
        if not np.all(np.isfinite(x)):
            raise IntegrationDivergedError("exact-subsystem state became non-finite")
        t += best_tau
        xtilde = sys.integrator_input(x)

        # The triggering coordinate plus any that reached a boundary at the same instant.
        fell = (labels == PLUS) & ((x < -xtol) | ((seg.x0 > 0.0) & (x <= zero_tol)))
        rose = (labels == NEG) & (x >= -zero_tol)
        released = (labels == ZERO) & (xtilde > input_tol)
        if best.kind == "plus":
            fell[best.index] = True
        elif best.kind == "neg":
            rose[best.index] = True
        else:
            released[best.index] = True

        new_labels = labels.copy()
        hit_zero = fell | rose
        x[hit_zero] = 0.0
        x[(labels == PLUS) & (x < 0.0)] = 0.0
        new_labels[hit_zero] = np.where(xtilde[hit_zero] < -input_tol, ZERO, PLUS)
        new_labels[released] = PLUS

        events.extend(switch_events(IndexPartition(labels), IndexPartition(new_labels), t))
        labels = new_labels
        logger.debug(
            "exact interval %d ends at t=%.6g (%s index %d)", intervals, t, best.kind, best.index
        )

        short_run = short_run + 1 if best_tau <= STALL_RTOL * span else 0
        if short_run > sys.n + 16:
            stalled = f"{short_run} consecutive vanishing intervals at t={t:.6g}"
            break

    x[np.abs(x) <= zero_tol] = 0.0
    xtilde = sys.integrator_input(x)
    _, input_tol = _roundoff(sys, x, gersh, zero_tol)
    fresh = IndexPartition.classify(x, xtilde, zero_tol).labels
    # Coordinates at zero with an input within roundoff of zero keep the tracked label.
    undecided = (x == 0.0) & (np.abs(xtilde) <= input_tol) & (labels != NEG)
    final_labels = np.where(undecided, labels, fresh)
    events.extend(switch_events(IndexPartition(labels), IndexPartition(final_labels), t))
    return _ExactRun(_state(x, xtilde, t, final_labels), events, intervals, stalled)


def step_exact_subsystem(
    sys: DiscSystem,
    state: SystemState,
    t_end: float,
    zero_tol: float = 1e-12,
    max_intervals: int = 100_000,
) -> tuple[SystemState, list[SwitchEvent]]:
    """Advance along the exact piecewise solution to ``t_end``.

    Raises :class:`SingularSubsystemError` when the Gram block of the active set is
    singular on some interval (``A`` lacks full column rank there), and
    :class:`IntegrationDivergedError` when the switches do not let time advance.
    """
    if t_end < state.t:
        raise ValueError(f"t_end={t_end} is before the state time {state.t}")
    run = _advance_exact(sys, state, t_end, zero_tol, max_intervals)
    if run.stalled is not None:
        raise IntegrationDivergedError(run.stalled)
    return run.state, run.events


class ExactIntegrator:
    """Piecewise-analytic integration; checks convergence over doubling time chunks."""

    name = "exact"
    growth = 2.0
    sample_stride = 1

    def __init__(self, zero_tol: float = 1e-12, max_intervals: int = 100_000) -> None:
        self.zero_tol = zero_tol
        self.max_intervals = max_intervals
        self.steps = 0

    def first_chunk(self, sys: DiscSystem) -> float:
        return 1.0 / gershgorin_bound(sys.gramA)

    def advance(
        self, sys: DiscSystem, state: SystemState, t_end: float
    ) -> tuple[SystemState, list[SwitchEvent]]:
        run = _advance_exact(sys, state, t_end, self.zero_tol, self.max_intervals)
        self.steps += run.intervals
        if run.stalled is not None:
            raise IntegrationDivergedError(run.stalled)
        return run.state, run.events


class AutoIntegrator(ExactIntegrator):
    """Exact integration that accepts singular active blocks.

    Null directions of the active block are carried unchanged. Where the switches
    stop time from advancing, a short projected-Euler bridge takes the run past the
    stretch and exact integration resumes.
    """

    def __init__(self, opts: SolverOptions) -> None:
        super().__init__(zero_tol=opts.zero_tol, max_intervals=opts.max_intervals)
        self.bridge = EulerIntegrator(dt=opts.dt, zero_tol=opts.zero_tol)

    @property
    def name(self) -> str:  # type: ignore[override]
        return "exact+euler" if self.bridge.steps else "exact"

    def advance(
        self, sys: DiscSystem, state: SystemState, t_end: float
    ) -> tuple[SystemState, list[SwitchEvent]]:
        events: list[SwitchEvent] = []
        while state.t < t_end:
            run = _advance_exact(
                sys, state, t_end, self.zero_tol, self.max_intervals, allow_singular=True
            )
            self.steps += run.intervals
            events.extend(run.events)
            state = run.state
            if run.stalled is None:
                break
            bridge_end = min(t_end, state.t + BRIDGE_STEPS * self.bridge.step_size(sys))
            logger.debug(
                "exact integration stalled (%s); projected Euler to t=%.6g",
                run.stalled,
                bridge_end,
            )
            before = self.bridge.steps
            state, bridged = self.bridge.advance(sys, state, bridge_end)
            self.steps += self.bridge.steps - before
            events.extend(bridged)
        return state, events


def make_integrator(name: str, opts: SolverOptions) -> Integrator:
    if name == "euler":
        return EulerIntegrator(
            dt=opts.dt,
            zero_tol=opts.zero_tol,
            check_every=opts.check_every,
            sample_every=opts.sample_every,
        )
    if name == "exact":
        return ExactIntegrator(zero_tol=opts.zero_tol, max_intervals=opts.max_intervals)
    if name == "auto":
        return AutoIntegrator(opts)
    raise ValueError(f"unknown integrator {name!r}")
