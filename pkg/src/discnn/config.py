from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Literal

from discnn.errors import ConfigError

IntegratorName = Literal["euler", "exact", "auto"]

INTEGRATORS: tuple[IntegratorName, ...] = ("euler", "exact", "auto")


@dataclass(frozen=True)
class SolverOptions:
    """Options for the dynamical solvers (NNLS network and box network)."""

    integrator: IntegratorName = "euler"
    kkt_tol: float = 1e-8
    max_time: float = 1e3  # simulated seconds
    dt: float | None = None  # None = 1 / (2 * Gershgorin bound of the Gram matrix)
    zero_tol: float = 1e-12
    check_every: int = 20  # Euler steps between KKT checks
    sample_every: int = 50  # Euler steps between trajectory samples
    stop_on_convergence: bool = True
    max_intervals: int = 100_000  # exact integrator

    def __post_init__(self) -> None:
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.kkt_tol <= 0 or self.max_time <= 0 or self.zero_tol < 0:
            raise ValueError("kkt_tol and max_time must be positive, zero_tol non-negative")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.check_every < 1 or self.sample_every < 1:
            raise ValueError("check_every and sample_every must be >= 1")


@dataclass(frozen=True)
class OracleOptions:
    """Options for the classical iterative oracles."""

    tol: float = 1e-10
    max_iter: int = 20_000
    alpha_span: float = 1e-4  # smallest / largest alpha on a path
    n_alphas: int = 50


@dataclass
class RuntimeSettings:
    threads: int = 1
    log_level: str = "INFO"
    output_dir: str = "results"

    @staticmethod
    def from_env() -> RuntimeSettings:
        raw = os.environ.get("DISCNN_THREADS", "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"DISCNN_THREADS must be an integer, got {raw!r}") from None
        return RuntimeSettings(
            threads=max(1, threads),
            log_level=os.environ.get("DISCNN_LOG_LEVEL", "INFO").upper(),
            output_dir=os.environ.get("DISCNN_OUTPUT_DIR", "results"),
        )
