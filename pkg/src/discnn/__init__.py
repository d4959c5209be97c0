from discnn.config import OracleOptions, SolverOptions
from discnn.datagen import DataModelSpec, generate, prune
from discnn.dynamics.box import BoxSystem, box_solve
from discnn.dynamics.solve import solve
from discnn.dynamics.system import DiscSystem
from discnn.solvers.nnbpdn import nnbpdn_path, nnbpdn_prox
from discnn.solvers.nnls import nnls_active_set

__all__ = [
    "BoxSystem",
    "DataModelSpec",
    "DiscSystem",
    "OracleOptions",
    "SolverOptions",
    "box_solve",
    "generate",
    "nnbpdn_path",
    "nnbpdn_prox",
    "nnls_active_set",
    "prune",
    "solve",
]
