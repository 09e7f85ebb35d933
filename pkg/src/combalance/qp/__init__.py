"""Dense convex QP solver with a compiled core and a pure-Python fallback."""

from .problem import (
    QpProblem,
    QpSolution,
    SolverStatus,
    dump_problem,
    kkt_residuals,
    load_problem,
)
from .solver import HAVE_COMPILED, kernel_name, solve_qp

__all__ = [
    "QpProblem",
    "QpSolution",
    "SolverStatus",
    "solve_qp",
    "kkt_residuals",
    "dump_problem",
    "load_problem",
    "kernel_name",
    "HAVE_COMPILED",
]
