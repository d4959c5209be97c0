"""discnn run: run a Monte-Carlo study and write its CSV tables."""

from __future__ import annotations

import math
from typing import Any

import click

from discnn.config import INTEGRATORS, RuntimeSettings
from discnn.datagen import DATA_KINDS
from discnn.errors import OutputPathError
from discnn.experiments.config import PRESETS, STUDIES, load_config_file, resolve_config
from discnn.experiments.output import write_study
from discnn.experiments.records import AggregateRow
from discnn.experiments.studies import run_study


@click.command()
@click.option("--study", type=click.Choice(STUDIES), help="Study to run")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Named parameter set")
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    help="Flat TOML file with the same keys as the flags",
)
@click.option("--n", "n_instances", type=int, help="Monte-Carlo instances per sweep point")
@click.option("--m", "m_values", type=int, multiple=True, help="Matrix rows (repeatable)")
@click.option("--nn", "N", type=int, help="Matrix columns / signal length")
@click.option("--s", "sparsities", type=int, multiple=True, help="Sparsity (repeatable)")
@click.option("--snr-db", "snr_db", type=float, multiple=True, help="Input SNR in dB (repeatable)")
@click.option("--ratios", type=float, multiple=True, help="Pruning ratio (repeatable)")
@click.option("--kind", "kinds", type=click.Choice(DATA_KINDS), multiple=True, help="Data model")
@click.option("--seed", "master_seed", type=int, help="Master seed")
@click.option("--out", "output_dir", type=click.Path(file_okay=False), help="Output directory")
@click.option("--integrator", type=click.Choice(INTEGRATORS), help="Time integrator")
@click.option("--threads", type=int, help="Concurrent instance jobs [env: DISCNN_THREADS]")
@click.option("--kkt-tol", "kkt_tol", type=float, help="KKT residual tolerance")
@click.option("--max-time", "max_time", type=float, help="Simulated-time limit per solve")
@click.option(
    "--include-timings/--no-include-timings", default=None, help="Add a wall_time column"
)
def run(config_path: str | None, **options: Any) -> None:
    """Run a study and write <study>_instances.csv and <study>_aggregate.csv."""
    cli_values = {k: (v or None) if isinstance(v, tuple) else v for k, v in options.items()}
    file_values = load_config_file(config_path) if config_path else {}

    env = RuntimeSettings.from_env()
    if cli_values.get("threads") is None and "threads" not in file_values:
        cli_values["threads"] = env.threads
    if cli_values.get("output_dir") is None and "output_dir" not in file_values:
        cli_values["output_dir"] = env.output_dir

    cfg = resolve_config(None, file_values=file_values, cli_values=cli_values)
    click.echo(
        f"Running {cfg.study}: {cfg.n_instances} instances per point, "
        f"N={cfg.N}, seed={cfg.master_seed}"
    )
    result = run_study(cfg)

    try:
        paths = write_study(result)
    except OSError as e:
        raise OutputPathError(f"cannot write results to {cfg.output_dir}: {e}") from e

    _print_summary(result.aggregates)
    click.echo(f"Wrote {paths.instances}")
    click.echo(f"Wrote {paths.aggregate}")


def _fmt(value: float, spec: str = ".3g") -> str:
    return "-" if math.isnan(value) else format(value, spec)


def _print_summary(rows: list[AggregateRow]) -> None:
    click.echo(
        f"{'KIND':<9} {'M':>4} {'S':>3} {'SNR':>6} {'RATIO':>5} {'SOLVER':<10} "
        f"{'REL_ERR':>9} {'MSE':>9} {'OUT_SNR_DB':>10} {'RECOV':>6} {'FAIL':>4}"
    )
    click.echo("-" * 86)
    for r in rows:
        click.echo(
            f"{r.kind:<9} {r.M:>4} {r.s:>3} {_fmt(r.snr_db, '.0f'):>6} {r.ratio:>5.2f} "
            f"{r.solver:<10} {_fmt(r.rel_err_mean):>9} {_fmt(r.mse_mean):>9} "
            f"{_fmt(r.output_snr_db, '.1f'):>10} {_fmt(r.recovery_fraction, '.2f'):>6} "
            f"{r.failures:>4}"
        )
