from discnn.solvers.boxqp import box_projected_gradient
from discnn.solvers.nnbpdn import nnbpdn_path, nnbpdn_prox
from discnn.solvers.nnls import nnls_active_set

__all__ = ["box_projected_gradient", "nnbpdn_path", "nnbpdn_prox", "nnls_active_set"]
