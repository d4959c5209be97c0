"""Monte-Carlo studies.

Every study is a grid of sweep points times ``n_instances`` instance indices. The
instance drawn for index ``i`` depends only on ``(master_seed, i)`` and the point's
data-model parameters, so points share random numbers: the same support, ground truth
and matrix stream reappear at every SNR and pruning ratio.

A failing instance is logged and recorded as a failed row. A study aborts with
:class:`StudyAbortedError` when more than 10% of the instances of any point fail.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from itertools import product

import numpy as np

from discnn.datagen import Instance, generate, prune
from discnn.dynamics.solve import solve
from discnn.dynamics.system import DiscSystem
from discnn.errors import DiscnnError, StudyAbortedError
from discnn.experiments.config import ExperimentConfig
from discnn.experiments.pool import InstancePool
from discnn.experiments.records import AggregateRow, McRecord, SweepPoint, aggregate
from discnn.metrics import RecoveryMetrics, mse
from discnn.solvers.nnbpdn import nnbpdn_path

logger = logging.getLogger(__name__)

ABORT_FRACTION = 0.10


@dataclass(frozen=True)
class StudyResult:
    config: ExperimentConfig
    points: list[SweepPoint]
    records: list[McRecord]
    aggregates: list[AggregateRow]


Job = tuple[SweepPoint, int]


# ── Instance jobs ────────────────────────────────────────────────


def _instance(cfg: ExperimentConfig, point: SweepPoint, index: int) -> Instance:
    spec = cfg.data_spec(point.kind, point.M, point.s, point.snr_db)  # type: ignore[arg-type]
    return generate(spec, cfg.master_seed, index)


def _dynamical_record(
    cfg: ExperimentConfig, point: SweepPoint, inst: Instance, A: np.ndarray
) -> McRecord:
    sys = DiscSystem.build(A, inst.y, xi=cfg.xi)
    result, _ = solve(sys, np.zeros(sys.n), cfg.solver_options())
    return McRecord.from_metrics(
        cfg.study,
        point,
        inst.index,
        inst.seed,
        "dynamical",
        RecoveryMetrics.evaluate(result.x_eq, inst.x0, inst.support),
        kkt_residual=result.kkt_residual,
        converged=result.converged,
        switches=result.switches,
        steps=result.steps,
        wall_time=result.wall_time,
    )


def _nnbpdn_record(cfg: ExperimentConfig, point: SweepPoint, inst: Instance) -> McRecord:
    """Best point of the regularization path by full-vector MSE against the truth."""
    path = nnbpdn_path(inst.A, inst.y, opts=cfg.oracle_options())
    errors = [mse(x, inst.x0) for x in path.solutions]
    best = int(np.argmin(errors))
    return McRecord.from_metrics(
        cfg.study,
        point,
        inst.index,
        inst.seed,
        "nnbpdn",
        RecoveryMetrics.evaluate(path.solutions[best], inst.x0, inst.support),
        converged=path.converged[best],
        alpha=float(path.alphas[best]),
    )


def _olfactory_job(cfg: ExperimentConfig, job: Job) -> list[McRecord]:
    point, index = job
    inst = _instance(cfg, point, index)
    return [_dynamical_record(cfg, point, inst, inst.A)]


def _pruning_job(cfg: ExperimentConfig, job: Job) -> list[McRecord]:
    # The input keeps the intact matrix; only the network is damaged.
    point, index = job
    inst = _instance(cfg, point, index)
    return [_dynamical_record(cfg, point, inst, prune(inst.A, point.ratio))]


def _comparison_job(cfg: ExperimentConfig, job: Job) -> list[McRecord]:
    point, index = job
    inst = _instance(cfg, point, index)
    if np.any(inst.A <= 0.0):
        logger.warning(
            "instance %d at %s: matrix is not entry-wise positive", index, point.as_row()
        )
    return [_dynamical_record(cfg, point, inst, inst.A), _nnbpdn_record(cfg, point, inst)]


def _guarded(
    cfg: ExperimentConfig,
    job_fn: Callable[[ExperimentConfig, Job], list[McRecord]],
    solvers: list[str],
) -> Callable[[Job], list[McRecord]]:
    def run(job: Job) -> list[McRecord]:
        point, index = job
        try:
            return job_fn(cfg, job)
        except (DiscnnError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            logger.warning("instance %d at %s failed: %s", index, point.as_row(), exc)
            return [
                McRecord(
                    study=cfg.study,
                    point=point,
                    instance=index,
                    seed=cfg.master_seed,
                    solver=solver,
                    failed=True,
                    error=f"{type(exc).__name__}: {exc}",
                )
                for solver in solvers
            ]

    return run


# ── Grids ────────────────────────────────────────────────────────


def _points(cfg: ExperimentConfig) -> list[SweepPoint]:
    if cfg.study == "olfactory":
        return [
            SweepPoint(kind, cfg.N, cfg.N, s, snr)
            for kind, s, snr in product(cfg.kinds, cfg.sparsities, cfg.snr_db)
        ]
    if cfg.study == "pruning":
        return [
            SweepPoint(kind, cfg.N, cfg.N, s, snr, ratio)
            for kind, s, snr, ratio in product(cfg.kinds, cfg.sparsities, cfg.snr_db, cfg.ratios)
        ]
    return [
        SweepPoint(kind, M, cfg.N, s, snr)
        for kind, M, s, snr in product(cfg.kinds, cfg.matrix_rows, cfg.sparsities, cfg.snr_db)
    ]


def _run(
    cfg: ExperimentConfig,
    job_fn: Callable[[ExperimentConfig, Job], list[McRecord]],
    solvers: list[str],
) -> StudyResult:
    points = _points(cfg)
    jobs: list[Job] = [(p, i) for p in points for i in range(cfg.n_instances)]
    logger.info(
        "study %s: %d sweep points x %d instances on %d thread(s)",
        cfg.study,
        len(points),
        cfg.n_instances,
        cfg.threads,
    )
    results = InstancePool(cfg.threads).run(_guarded(cfg, job_fn, solvers), jobs)

    records: list[McRecord] = []
    for point, rows in zip(points, _chunks(results, cfg.n_instances), strict=True):
        failed = sum(any(r.failed for r in inst_rows) for inst_rows in rows)
        if failed > ABORT_FRACTION * cfg.n_instances:
            raise StudyAbortedError(
                f"{failed} of {cfg.n_instances} instances failed at {point.as_row()}"
            )
        for inst_rows in rows:
            records.extend(sorted(inst_rows, key=lambda r: r.sort_key))
        logger.info("study %s: point %s done (%d failed)", cfg.study, point.as_row(), failed)

    return StudyResult(
        config=cfg, points=points, records=records, aggregates=aggregate(records, points)
    )


def _chunks(items: list, size: int) -> list[list]:
    return [items[i : i + size] for i in range(0, len(items), size)]


# ── Studies ──────────────────────────────────────────────────────


def run_olfactory(cfg: ExperimentConfig) -> StudyResult:
    """Relative error and output SNR of the square olfactory system over (s, SNR)."""
    return _run(cfg, _olfactory_job, ["dynamical"])


def run_pruning(cfg: ExperimentConfig) -> StudyResult:
    """Output SNR as the smallest matrix entries are zeroed."""
    return _run(cfg, _pruning_job, ["dynamical"])


def run_sparse_comparison(cfg: ExperimentConfig) -> StudyResult:
    """Dynamical NNLS against the best point of the NNBPDN path over M."""
    return _run(cfg, _comparison_job, ["dynamical", "nnbpdn"])


def run_sparsity_sweep(cfg: ExperimentConfig) -> StudyResult:
    """The NNLS-vs-NNBPDN comparison over sparsity at fixed M."""
    return _run(cfg, _comparison_job, ["dynamical", "nnbpdn"])


def run_model_comparison(cfg: ExperimentConfig) -> StudyResult:
    """The NNLS-vs-NNBPDN comparison for both data models side by side."""
    if set(cfg.kinds) != {"rect", "gaussian"}:
        logger.info("model comparison with kinds %s only", cfg.kinds)
    return _run(cfg, _comparison_job, ["dynamical", "nnbpdn"])


STUDY_RUNNERS: dict[str, Callable[[ExperimentConfig], StudyResult]] = {
    "olfactory": run_olfactory,
    "pruning": run_pruning,
    "sparse-comparison": run_sparse_comparison,
    "sparsity-sweep": run_sparsity_sweep,
    "model-comparison": run_model_comparison,
}


def run_study(cfg: ExperimentConfig) -> StudyResult:
    return STUDY_RUNNERS[cfg.study](cfg)
