"""discnn generate / discnn solve: single-instance tooling."""

from __future__ import annotations

import math
import os

import click
import numpy as np

from discnn.config import INTEGRATORS, SolverOptions
from discnn.datagen import DATA_KINDS, DataModelSpec, generate, load_instance, save_instance
from discnn.dynamics.solve import solve
from discnn.dynamics.system import DiscSystem
from discnn.errors import OutputPathError
from discnn.metrics import RecoveryMetrics, to_db
from discnn.solvers.nnls import nnls_active_set


@click.command("generate")
@click.option("--kind", type=click.Choice(DATA_KINDS), default="rect", show_default=True)
@click.option("--m", "M", type=int, required=True, help="Matrix rows")
@click.option("--nn", "N", type=int, required=True, help="Matrix columns")
@click.option("--s", type=int, default=5, show_default=True, help="Sparsity")
@click.option(
    "--snr-db", type=float, default=40.0, show_default=True, help="Input SNR, inf = noiseless"
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--index", type=int, default=0, show_default=True, help="Instance index")
@click.option(
    "--out", "out_path", type=click.Path(dir_okay=False), required=True, help="Target .npz"
)
def generate_cmd(
    kind: str, M: int, N: int, s: int, snr_db: float, seed: int, index: int, out_path: str
) -> None:
    """Draw one instance and save it as an .npz archive."""
    spec = DataModelSpec(kind=kind, M=M, N=N, s=s, input_snr_db=snr_db)  # type: ignore[arg-type]
    inst = generate(spec, seed, index)
    try:
        save_instance(inst, out_path)
    except OSError as e:
        raise OutputPathError(f"cannot write {out_path}: {e}") from e
    click.echo(f"Wrote {out_path} ({kind}, {M}x{N}, s={s}, support={inst.support.tolist()})")


@click.command("solve")
@click.argument("instance_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--integrator", type=click.Choice(INTEGRATORS), default="euler", show_default=True)
@click.option("--kkt-tol", type=float, default=1e-8, show_default=True)
@click.option("--max-time", type=float, default=1e3, show_default=True)
@click.option("--xi", type=float, default=1.0, show_default=True, help="Recovery rate")
@click.option(
    "--trajectory", "trajectory_path", type=click.Path(dir_okay=False), help="Trajectory CSV"
)
@click.option("--events", "events_path", type=click.Path(dir_okay=False), help="Switch-event CSV")
@click.option(
    "--reference/--no-reference",
    default=True,
    show_default=True,
    help="Record Lyapunov values against the Lawson-Hanson solution",
)
def solve_cmd(
    instance_path: str,
    integrator: str,
    kkt_tol: float,
    max_time: float,
    xi: float,
    trajectory_path: str | None,
    events_path: str | None,
    reference: bool,
) -> None:
    """Solve a saved instance with the network and export its trajectory."""
    inst = load_instance(instance_path)
    sys = DiscSystem.build(inst.A, inst.y, xi=xi)
    opts = SolverOptions(
        integrator=integrator,  # type: ignore[arg-type]
        kkt_tol=kkt_tol,
        max_time=max_time,
    )
    oracle = nnls_active_set(inst.A, inst.y) if reference else None
    result, traj = solve(sys, np.zeros(sys.n), opts, reference=oracle.x_eq if oracle else None)

    status = "converged" if result.converged else "NOT converged"
    click.echo(
        f"{status} ({result.method}) at t={result.t_final:.4g}: "
        f"KKT={result.kkt_residual:.3e}, switches={result.switches}, steps={result.steps}"
    )
    if oracle is not None:
        gap = float(np.linalg.norm(result.x_eq - oracle.x_eq))
        click.echo(f"distance to Lawson-Hanson solution: {gap:.3e}")
    if inst.support.size < sys.n:
        m = RecoveryMetrics.evaluate(result.x_eq, inst.x0, inst.support)
        snr_db = to_db(m.output_snr)
        click.echo(
            f"rel_err_support={m.rel_err_support:.4g} mse_support={m.mse_support:.4g} "
            f"output_snr_db={'inf' if math.isinf(snr_db) else f'{snr_db:.2f}'} "
            f"support_recovered={m.support_recovered}"
        )

    for path, writer in ((trajectory_path, traj.to_csv), (events_path, traj.events_to_csv)):
        if not path:
            continue
        try:
            writer(path)
        except OSError as e:
            raise OutputPathError(f"cannot write {path}: {e}") from e
        click.echo(f"Wrote {os.path.abspath(path)}")
