from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import tomli_w

from discnn.csvio import write_csv
from discnn.experiments.records import AGGREGATE_COLUMNS, INSTANCE_COLUMNS, TIMING_COLUMNS
from discnn.experiments.studies import StudyResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StudyFiles:
    instances: str
    aggregate: str
    config: str


def study_paths(out_dir: str, study: str) -> StudyFiles:
    return StudyFiles(
        instances=os.path.join(out_dir, f"{study}_instances.csv"),
        aggregate=os.path.join(out_dir, f"{study}_aggregate.csv"),
        config=os.path.join(out_dir, f"{study}_config.toml"),
    )


def write_study(result: StudyResult, out_dir: str | None = None) -> StudyFiles:
    """Write the per-instance table, the aggregate table and the resolved config."""
    cfg = result.config
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    paths = study_paths(out_dir, cfg.study)

    columns = INSTANCE_COLUMNS + (TIMING_COLUMNS if cfg.include_timings else [])
    write_csv(paths.instances, columns, result.records)
    write_csv(paths.aggregate, AGGREGATE_COLUMNS, result.aggregates)
    with open(paths.config, "wb") as f:
        tomli_w.dump(cfg.to_toml_dict(), f)

    logger.info(
        "wrote %d instance rows and %d aggregate rows to %s",
        len(result.records),
        len(result.aggregates),
        out_dir,
    )
    return paths
