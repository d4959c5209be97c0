from discnn.dynamics.integrators import step_exact_subsystem, step_projected_euler
from discnn.dynamics.solve import lyapunov_value, solve
from discnn.dynamics.system import DiscSystem, IndexPartition, SystemState, integrator_rhs
from discnn.dynamics.trajectory import SolveResult, Trajectory

__all__ = [
    "DiscSystem",
    "IndexPartition",
    "SolveResult",
    "SystemState",
    "Trajectory",
    "integrator_rhs",
    "lyapunov_value",
    "solve",
    "step_exact_subsystem",
    "step_projected_euler",
]
