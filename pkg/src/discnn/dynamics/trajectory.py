from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from discnn.csvio import write_csv
from discnn.dynamics.system import SystemState
from discnn.events import SwitchEvent
from discnn.numerics import RealVector


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a dynamical or classical solve."""

    x_eq: RealVector
    lambda_eq: RealVector
    kkt_residual: float
    switches: int
    steps: int
    converged: bool
    wall_time: float
    t_final: float = 0.0  # simulated time; 0 for classical solvers
    method: str = ""


@dataclass
class Trajectory:
    """Sampled states, switch events and (optionally) Lyapunov values."""

    samples: list[SystemState] = field(default_factory=list)
    switch_events: list[SwitchEvent] = field(default_factory=list)
    lyapunov: list[tuple[float, float]] | None = None
    reference: RealVector | None = None

    @classmethod
    def start(cls, state: SystemState, reference: RealVector | None = None) -> Trajectory:
        traj = cls(lyapunov=[] if reference is not None else None, reference=reference)
        traj.record(state)
        return traj

    def record(self, state: SystemState) -> None:
        """Append a sample; samples at or before the last recorded time are dropped."""
        if self.samples and state.t <= self.samples[-1].t:
            return
        self.samples.append(state)
        if self.reference is not None and self.lyapunov is not None:
            z = state.x - self.reference
            self.lyapunov.append((state.t, 0.5 * float(z @ z)))

    def extend_events(self, events: list[SwitchEvent]) -> None:
        self.switch_events.extend(events)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def states(self) -> np.ndarray:
        return np.vstack([s.x for s in self.samples]) if self.samples else np.empty((0, 0))

    def to_csv(self, path: str) -> None:
        """One row per sample: t, x_1..x_N and V when a reference is set."""
        n = self.samples[0].x.shape[0] if self.samples else 0
        header = ["t"] + [f"x_{i + 1}" for i in range(n)]
        with_v = self.lyapunov is not None
        if with_v:
            header.append("V")
        rows = []
        for k, s in enumerate(self.samples):
            row: dict[str, float] = {"t": s.t}
            row.update({f"x_{i + 1}": float(v) for i, v in enumerate(s.x)})
            if with_v:
                row["V"] = self.lyapunov[k][1]
            rows.append(row)
        write_csv(path, header, rows)

    def events_to_csv(self, path: str) -> None:
        write_csv(path, ["t", "index", "from", "to"], self.switch_events)
