"""KKT residuals for NNLS and the box-constrained QP.

The residual is the shared convergence certificate of the dynamical solvers and
the classical oracles. All components are infinity norms so a violation can be
traced to a single coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from discnn.errors import DimensionMismatchError
from discnn.numerics import RealMatrix, RealVector

if TYPE_CHECKING:
    from discnn.dynamics.box import BoxSystem


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


@dataclass(frozen=True)
class KktReport:
    stationarity: float
    primal_violation: float
    dual_violation: float
    comp_slack: float
    total: float

    @classmethod
    def from_components(
        cls,
        stationarity: float,
        primal_violation: float,
        dual_violation: float,
        comp_slack: float,
    ) -> KktReport:
        return cls(
            stationarity=stationarity,
            primal_violation=primal_violation,
            dual_violation=dual_violation,
            comp_slack=comp_slack,
            total=max(stationarity, primal_violation, dual_violation, comp_slack),
        )

    def as_row(self) -> dict[str, float]:
        return {
            "kkt_stationarity": self.stationarity,
            "kkt_primal": self.primal_violation,
            "kkt_dual": self.dual_violation,
            "kkt_comp_slack": self.comp_slack,
            "kkt_total": self.total,
        }


def nnls_kkt_gram(G: RealMatrix, atb: RealVector, x: RealVector) -> tuple[KktReport, RealVector]:
    """KKT report from the cached Gram matrix and A^T y; also returns the multiplier.

    The multiplier is lambda = G x - A^T y, so stationarity vanishes identically.
    """
    if G.shape[0] != x.shape[0] or atb.shape[0] != x.shape[0]:
        raise DimensionMismatchError(
            f"Gram matrix {G.shape}, A^T y {atb.shape} and x {x.shape} do not agree"
        )
    grad = G @ x - atb
    lam = grad
    report = KktReport.from_components(
        stationarity=_inf_norm(grad - lam),
        primal_violation=_inf_norm(np.minimum(x, 0.0)),
        dual_violation=_inf_norm(np.minimum(lam, 0.0)),
        comp_slack=_inf_norm(lam * x),
    )
    return report, lam


def nnls_kkt(A: RealMatrix, y: RealVector, x: RealVector) -> KktReport:
    if A.shape[0] != y.shape[0] or A.shape[1] != x.shape[0]:
        raise DimensionMismatchError(
            f"A is {A.shape[0]}x{A.shape[1]} but y has length {y.shape[0]} "
            f"and x has length {x.shape[0]}"
        )
    report, _ = nnls_kkt_gram(A.T @ A, A.T @ y, x)
    return report


def box_kkt(sys: BoxSystem, x: RealVector, active_tol: float = 1e-12) -> KktReport:
    """KKT report for min 1/2 x^T Q x - q^T x subject to lo <= x <= hi.

    Coordinates within ``active_tol`` of a bound are treated as active there: the
    gradient g = Qx - q must be >= 0 at the lower bound and <= 0 at the upper bound.
    Interior coordinates need g_i = 0. Multipliers are read off active coordinates
    only, so complementary slackness holds by construction.
    """
    if x.shape[0] != sys.q.shape[0]:
        raise DimensionMismatchError(f"x has length {x.shape[0]}, expected {sys.q.shape[0]}")
    g = sys.Q @ x - sys.q
    at_lo = np.abs(x - sys.lo) <= active_tol
    at_hi = np.abs(x - sys.hi) <= active_tol
    outside = np.maximum(sys.lo - x, 0.0) + np.maximum(x - sys.hi, 0.0)
    interior = ~(at_lo | at_hi) & (outside == 0.0)
    return KktReport.from_components(
        stationarity=_inf_norm(g[interior]),
        primal_violation=_inf_norm(outside),
        dual_violation=max(
            _inf_norm(np.minimum(g[at_lo], 0.0)), _inf_norm(np.maximum(g[at_hi], 0.0))
        ),
        comp_slack=0.0,
    )
