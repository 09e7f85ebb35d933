"""Problem and solution containers for the dense QP solver."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch

_MAX_N = 64
_MAX_M = 256
_MAX_P = 64
_SYM_TOL = 1e-12


class SolverStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"


def _arr(a, shape_hint, name):
    out = np.ascontiguousarray(np.asarray(a, dtype=float))
    if out.ndim != len(shape_hint):
        raise DimensionMismatch(f"{name} must be {len(shape_hint)}-dimensional")
    if not np.all(np.isfinite(out)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return out


@dataclass(frozen=True)
class QpProblem:
    """min 1/2 y'Py + q'y  s.t.  Gy <= h, Ay = b.

    G/h and A/b may be empty (shape (0, n) and (0,)).
    """

    P: np.ndarray
    q: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        P = _arr(self.P, (0, 0), "P")
        q = _arr(self.q, (0,), "q")
        n = q.shape[0]
        if P.shape != (n, n):
            raise DimensionMismatch(f"P must be {n}x{n}, got {P.shape}")
        if n > _MAX_N:
            raise DimensionMismatch(f"n = {n} exceeds the supported size {_MAX_N}")
        asym = np.max(np.abs(P - P.T)) if n else 0.0
        if asym > _SYM_TOL:
            raise DimensionMismatch(f"P is not symmetric (max asymmetry {asym:.3e})")
        G = _arr(self.G, (0, 0), "G")
        h = _arr(self.h, (0,), "h")
        if G.shape != (h.shape[0], n):
            raise DimensionMismatch(f"G must be {h.shape[0]}x{n}, got {G.shape}")
        if h.shape[0] > _MAX_M:
            raise DimensionMismatch(f"m = {h.shape[0]} exceeds {_MAX_M}")
        A = _arr(self.A, (0, 0), "A")
        b = _arr(self.b, (0,), "b")
        if A.shape != (b.shape[0], n):
            raise DimensionMismatch(f"A must be {b.shape[0]}x{n}, got {A.shape}")
        if b.shape[0] > _MAX_P:
            raise DimensionMismatch(f"p = {b.shape[0]} exceeds {_MAX_P}")
        for name, val in (("P", P), ("q", q), ("G", G), ("h", h), ("A", A), ("b", b)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def m(self) -> int:
        return self.h.shape[0]

    @property
    def p(self) -> int:
        return self.b.shape[0]

    def objective(self, y) -> float:
        y = np.asarray(y, dtype=float)
        return float(0.5 * y @ self.P @ y + self.q @ y)


@dataclass(frozen=True)
class QpSolution:
    y: np.ndarray
    duals_ineq: np.ndarray
    duals_eq: np.ndarray
    status: SolverStatus
    kkt_residual: float
    iterations: int = 0
    objective: float = float("nan")
    diagnostics: tuple = field(default_factory=tuple)


def kkt_residuals(problem: QpProblem, solution: QpSolution):
    """Max-norm KKT residuals: (stationarity, primal_ineq, primal_eq, complementarity)."""
    y = solution.y
    lam = solution.duals_ineq
    nu = solution.duals_eq
    if y.shape != (problem.n,) or lam.shape != (problem.m,) or nu.shape != (problem.p,):
        raise DimensionMismatch("solution shapes do not match the problem")
    grad = problem.P @ y + problem.q
    if problem.m:
        grad = grad + problem.G.T @ lam
    if problem.p:
        grad = grad + problem.A.T @ nu
    stationarity = float(np.max(np.abs(grad))) if problem.n else 0.0
    slack = problem.h - problem.G @ y if problem.m else np.zeros(0)
    primal_ineq = float(max(0.0, np.max(-slack))) if problem.m else 0.0
    primal_eq = float(np.max(np.abs(problem.A @ y - problem.b))) if problem.p else 0.0
    complementarity = float(np.max(np.abs(lam * slack))) if problem.m else 0.0
    return stationarity, primal_ineq, primal_eq, complementarity


# Plain-text dump format, one problem per file:
#   line 1: "qp-dump 1"
#   line 2: "n m p" (three integers)
#   then the entries of P, q, G, h, A, b in that order, row-major,
#   whitespace-separated repr-precision floats.
_DUMP_MAGIC = "qp-dump 1"


def dump_problem(problem: QpProblem, path_or_file):
    """Write the problem in the documented plain-text format."""

    def _write(f):
        f.write(_DUMP_MAGIC + "\n")
        f.write(f"{problem.n} {problem.m} {problem.p}\n")
        for block in (problem.P, problem.q, problem.G, problem.h, problem.A, problem.b):
            flat = np.asarray(block).ravel()
            f.write(" ".join(repr(float(v)) for v in flat))
            f.write("\n")

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w") as f:
            _write(f)
    else:
        _write(path_or_file)


def load_problem(path_or_file) -> QpProblem:
    """Read a problem written by dump_problem."""

    def _read(f):
        magic = f.readline().strip()
        if magic != _DUMP_MAGIC:
            raise DimensionMismatch(f"not a qp dump file (header {magic!r})")
        n, m, p = (int(tok) for tok in f.readline().split())

        def block(rows, cols=None):
            vals = np.array([float(tok) for tok in f.readline().split()])
            want = rows * cols if cols is not None else rows
            if vals.size != want:
                raise DimensionMismatch(f"dump block has {vals.size} entries, expected {want}")
            return vals.reshape(rows, cols) if cols is not None else vals

        P = block(n, n)
        q = block(n)
        G = block(m, n)
        h = block(m)
        A = block(p, n)
        b = block(p)
        return QpProblem(P=P, q=q, G=G, h=h, A=A, b=b)

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file) as f:
            return _read(f)
    return _read(path_or_file)
