"""Per-instance result rows and their per-point aggregates."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, fields
from itertools import groupby

from discnn.metrics import RecoveryMetrics, finite_mean, to_db

# Order in which solvers appear within one instance.
SOLVER_ORDER = {"dynamical": 0, "nnbpdn": 1}


@dataclass(frozen=True)
class SweepPoint:
    kind: str
    M: int
    N: int
    s: int
    snr_db: float
    ratio: float = 0.0

    def as_row(self) -> dict[str, object]:
        return {
            "kind": self.kind,
            "M": self.M,
            "N": self.N,
            "s": self.s,
            "snr_db": self.snr_db,
            "ratio": self.ratio,
        }


@dataclass(frozen=True)
class McRecord:
    """One row per (instance, sweep point, solver)."""

    study: str
    point: SweepPoint
    instance: int
    seed: int
    solver: str
    failed: bool = False
    error: str = ""
    rel_err_support: float = math.nan
    mse_support: float = math.nan
    output_snr: float = math.nan
    support_recovered: bool = False
    kkt_residual: float = math.nan
    converged: bool = False
    switches: int = 0
    steps: int = 0
    alpha: float = math.nan  # selected regularization (nnbpdn only)
    wall_time: float = 0.0

    @classmethod
    def from_metrics(
        cls,
        study: str,
        point: SweepPoint,
        instance: int,
        seed: int,
        solver: str,
        metrics: RecoveryMetrics,
        **extra: object,
    ) -> McRecord:
        return cls(
            study=study,
            point=point,
            instance=instance,
            seed=seed,
            solver=solver,
            rel_err_support=metrics.rel_err_support,
            mse_support=metrics.mse_support,
            output_snr=metrics.output_snr,
            support_recovered=metrics.support_recovered,
            **extra,  # type: ignore[arg-type]
        )

    @property
    def sort_key(self) -> tuple:
        return (self.instance, SOLVER_ORDER.get(self.solver, 99), self.solver)

    def as_row(self) -> dict[str, object]:
        row: dict[str, object] = {"study": self.study}
        row.update(self.point.as_row())
        row.update(
            {
                "instance": self.instance,
                "seed": self.seed,
                "solver": self.solver,
                "failed": self.failed,
                "error": self.error,
                "rel_err_support": self.rel_err_support,
                "mse_support": self.mse_support,
                "output_snr": self.output_snr,
                "output_snr_db": to_db(self.output_snr),
                "support_recovered": self.support_recovered,
                "kkt_residual": self.kkt_residual,
                "converged": self.converged,
                "switches": self.switches,
                "steps": self.steps,
                "alpha": self.alpha,
                "wall_time": self.wall_time,
            }
        )
        return row

    @classmethod
    def from_row(cls, row: Mapping[str, str]) -> McRecord:
        """Rebuild a record from a per-instance CSV row."""

        def flag(v: str) -> bool:
            return v == "true"

        point = SweepPoint(
            kind=row["kind"],
            M=int(row["M"]),
            N=int(row["N"]),
            s=int(row["s"]),
            snr_db=float(row["snr_db"]),
            ratio=float(row["ratio"]),
        )
        return cls(
            study=row["study"],
            point=point,
            instance=int(row["instance"]),
            seed=int(row["seed"]),
            solver=row["solver"],
            failed=flag(row["failed"]),
            error=row.get("error", ""),
            rel_err_support=float(row["rel_err_support"]),
            mse_support=float(row["mse_support"]),
            output_snr=float(row["output_snr"]),
            support_recovered=flag(row["support_recovered"]),
            kkt_residual=float(row["kkt_residual"]),
            converged=flag(row["converged"]),
            switches=int(row["switches"]),
            steps=int(row["steps"]),
            alpha=float(row["alpha"]),
            wall_time=float(row.get("wall_time") or 0.0),
        )


INSTANCE_COLUMNS = [
    "study",
    "kind",
    "M",
    "N",
    "s",
    "snr_db",
    "ratio",
    "instance",
    "seed",
    "solver",
    "failed",
    "error",
    "rel_err_support",
    "mse_support",
    "output_snr",
    "output_snr_db",
    "support_recovered",
    "kkt_residual",
    "converged",
    "switches",
    "steps",
    "alpha",
]
TIMING_COLUMNS = ["wall_time"]


@dataclass(frozen=True)
class AggregateRow:
    study: str
    kind: str
    M: int
    N: int
    s: int
    snr_db: float
    ratio: float
    solver: str
    n: int
    failures: int
    converged: int
    rel_err_mean: float
    rel_err_stderr: float
    mse_mean: float
    mse_stderr: float
    output_snr_mean: float
    output_snr_stderr: float
    output_snr_db: float
    output_snr_excluded: int
    recovery_fraction: float
    switches_mean: float
    kkt_max: float


AGGREGATE_COLUMNS = [f.name for f in fields(AggregateRow)]


def _point_solver(rec: McRecord) -> tuple:
    return (rec.point, rec.solver)


def aggregate(records: Iterable[McRecord], point_order: list[SweepPoint]) -> list[AggregateRow]:
    """Means and standard errors per (sweep point, solver), in ``point_order``.

    Failed rows count toward ``failures`` and are otherwise ignored; infinite and
    undefined output SNRs are skipped in the mean and counted in
    ``output_snr_excluded``.
    """
    rank = {p: i for i, p in enumerate(point_order)}

    def order(r: McRecord) -> tuple:
        return (rank[r.point], SOLVER_ORDER.get(r.solver, 99), r.solver, r.instance)

    ordered = sorted(records, key=order)
    rows: list[AggregateRow] = []
    for (point, solver), group in groupby(ordered, key=_point_solver):
        recs = list(group)
        ok = [r for r in recs if not r.failed]
        rel = finite_mean([r.rel_err_support for r in ok])
        mse = finite_mean([r.mse_support for r in ok])
        snr = finite_mean([r.output_snr for r in ok])
        rows.append(
            AggregateRow(
                study=recs[0].study,
                kind=point.kind,
                M=point.M,
                N=point.N,
                s=point.s,
                snr_db=point.snr_db,
                ratio=point.ratio,
                solver=solver,
                n=len(ok),
                failures=len(recs) - len(ok),
                converged=sum(r.converged for r in ok),
                rel_err_mean=rel.mean,
                rel_err_stderr=rel.stderr,
                mse_mean=mse.mean,
                mse_stderr=mse.stderr,
                output_snr_mean=snr.mean,
                output_snr_stderr=snr.stderr,
                output_snr_db=to_db(snr.mean),
                output_snr_excluded=snr.excluded,
                recovery_fraction=(
                    sum(r.support_recovered for r in ok) / len(ok) if ok else math.nan
                ),
                switches_mean=(sum(r.switches for r in ok) / len(ok) if ok else math.nan),
                kkt_max=max((r.kkt_residual for r in ok), default=math.nan),
            )
        )
    return rows
