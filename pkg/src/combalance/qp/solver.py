"""Dense QP solve pipeline: equality preprocessing, kernel dispatch, polish.

The heavy per-iteration work lives in a kernel module with a single entry
point ``ipm_solve``.  A compiled kernel is preferred when the extension
built; the pure-numpy kernel is the fallback and can be forced with the
COMBALANCE_PURE_PYTHON environment variable.
"""

from __future__ import annotations

import os
import warnings
from types import SimpleNamespace

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.linalg import cho_factor, cho_solve

from ..errors import DimensionMismatch, NumericalBreakdown
from .problem import QpProblem, QpSolution, SolverStatus

try:
    from . import _ipm_core
except ImportError:
    _ipm_core = None

from . import _ipm_py

HAVE_COMPILED = _ipm_core is not None

_TOL_STAT = 1e-6
_TOL_PRIMAL = 1e-8
_TOL_COMP = 1e-8
_RANK_TOL = 1e-10
_STATIC_REG = 1e-10


def kernel_name() -> str:
    """Name of the kernel solve_qp will use by default."""
    if HAVE_COMPILED and not os.environ.get("COMBALANCE_PURE_PYTHON"):
        return "compiled"
    return "python"


def _kernel_module(name):
    if name == "compiled":
        if _ipm_core is None:
            raise NumericalBreakdown("compiled kernel requested but the extension is not built")
        return _ipm_core
    if name == "python":
        return _ipm_py
    raise ValueError(f"unknown kernel {name!r}")


def _residuals(problem, y, lam, nu):
    grad = problem.P @ y + problem.q
    if problem.m:
        grad = grad + problem.G.T @ lam
    if problem.p:
        grad = grad + problem.A.T @ nu
    stationarity = float(np.max(np.abs(grad)))
    if problem.m:
        slack = problem.h - problem.G @ y
        primal_ineq = float(max(0.0, np.max(-slack)))
        complementarity = float(np.max(np.abs(lam * slack)))
    else:
        primal_ineq = 0.0
        complementarity = 0.0
    primal_eq = float(np.max(np.abs(problem.A @ y - problem.b))) if problem.p else 0.0
    return stationarity, primal_ineq, primal_eq, complementarity


def _contract_ok(res):
    stat, pin, peq, comp = res
    return (
        stat <= _TOL_STAT and pin <= _TOL_PRIMAL and peq <= _TOL_PRIMAL and comp <= _TOL_COMP
    )


def _reduce_equalities(A, b):
    """Drop linearly dependent equality rows; flag inconsistent ones.

    All-zero rows with a zero target are structural padding and vanish
    silently; every other dependent row is reported.  Returns
    (A_red, b_red, kept_indices, diagnostics, infeasible).
    """
    p = A.shape[0]
    if p == 0:
        return A, b, np.zeros(0, dtype=int), (), False
    b_scale = 1.0 + float(np.max(np.abs(b)))
    zero_rows = ~np.any(A != 0.0, axis=1)
    idx = np.arange(p)
    if np.any(zero_rows):
        for i in np.where(zero_rows)[0]:
            if abs(b[i]) > 1e-12 * b_scale:
                note = f"equality row {i} has no coefficients but target {b[i]:.3e}"
                live = np.where(~zero_rows)[0]
                return A[live], b[live], live, (note,), True
        idx = np.where(~zero_rows)[0]
        A = A[idx]
        b = b[idx]
        if A.shape[0] == 0:
            return A, b, idx, (), False
    R, piv = scipy.linalg.qr(A.T, mode="r", pivoting=True)
    diag = np.abs(np.diag(R))
    scale = max(float(diag[0]) if diag.size else 0.0, 1.0)
    rank = int(np.sum(diag > _RANK_TOL * scale))
    if rank == A.shape[0]:
        return np.ascontiguousarray(A), np.ascontiguousarray(b), idx, (), False
    keep_local = np.sort(piv[:rank])
    drop_local = np.sort(piv[rank:])
    A_red = np.ascontiguousarray(A[keep_local])
    b_red = np.ascontiguousarray(b[keep_local])
    notes = []
    for i in drop_local:
        coeff, *_ = np.linalg.lstsq(A_red.T, A[i], rcond=None)
        mismatch = abs(float(b[i] - coeff @ b_red))
        if mismatch > 1e-8 * b_scale:
            notes.append(
                f"equality row {idx[i]} depends on the kept rows but its target "
                f"disagrees by {mismatch:.3e}"
            )
            return A_red, b_red, idx[keep_local], tuple(notes), True
        notes.append(f"dropped dependent equality row {idx[i]}")
    return A_red, b_red, idx[keep_local], tuple(notes), False


def _equality_solve(P, q, A, b):
    """Direct KKT solve for problems without inequalities."""
    n = q.shape[0]
    cf = cho_factor(P + _STATIC_REG * np.eye(n), lower=True)
    if A.shape[0]:
        W = cho_solve(cf, A.T)
        S = A @ W + _STATIC_REG * np.eye(A.shape[0])
        sf = cho_factor(S, lower=True)

        def step(rq, rb):
            dnu = -cho_solve(sf, rb + A @ cho_solve(cf, rq))
            dy = cho_solve(cf, -rq - A.T @ dnu)
            return dy, dnu

        y, nu = step(q, b)
        # One round of iterative refinement soaks up the regularization.
        rq = P @ y + q + A.T @ nu
        rb = b - A @ y
        dy, dnu = step(rq, rb)
        return y + dy, nu + dnu
    y = cho_solve(cf, -q)
    rq = P @ y + q
    return y + cho_solve(cf, -rq), np.zeros(0)


def _solve_on_working_set(problem, A_red, b_red, act_idx):
    """Minimize over {Ay = b, G[act] y = h[act]} via a nullspace reduction.

    Robust to linearly dependent working sets; returns None when the
    working-set targets are mutually inconsistent.
    """
    n = problem.n
    pr = A_red.shape[0]
    C = np.vstack([A_red, problem.G[act_idx]])
    d = np.concatenate([b_red, problem.h[act_idx]])
    if C.shape[0]:
        y0, *_ = np.linalg.lstsq(C, d, rcond=None)
        Z = scipy.linalg.null_space(C)
    else:
        y0 = np.zeros(n)
        Z = np.eye(n)
    if Z.shape[1]:
        H = Z.T @ problem.P @ Z
        rhs = -Z.T @ (problem.P @ y0 + problem.q)
        try:
            z = np.linalg.solve(H, rhs)
        except np.linalg.LinAlgError:
            z, *_ = np.linalg.lstsq(H, rhs, rcond=None)
        y = y0 + Z @ z
    else:
        y = y0
    if C.shape[0]:
        scale = 1.0 + (float(np.max(np.abs(d))) if d.size else 0.0)
        if float(np.max(np.abs(C @ y - d))) > 1e-7 * scale:
            return None
        w, *_ = np.linalg.lstsq(C.T, -(problem.P @ y + problem.q), rcond=None)
    else:
        w = np.zeros(0)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        return None
    return y, w[:pr], w[pr:]


def _polish(problem, A_red, b_red, lam, s):
    """Re-solve on the active set guessed from the interior-point iterate.

    Rows whose multiplier comes out meaningfully negative are dropped one
    at a time, so a slightly over-full guess still lands on a working set
    with consistent signs.
    """
    act_idx = [int(i) for i in np.where(lam > s)[0]]
    for _ in range(len(act_idx) + 1):
        solved = _solve_on_working_set(problem, A_red, b_red, act_idx)
        if solved is None:
            return None
        y, nu_red, lam_act = solved
        if lam_act.size:
            worst = int(np.argmin(lam_act))
            floor = -1e-9 * (1.0 + float(np.max(np.abs(lam_act))))
            if lam_act[worst] < floor:
                act_idx.pop(worst)
                continue
        lam_full = np.zeros(problem.m)
        if act_idx:
            lam_full[act_idx] = np.maximum(lam_act, 0.0)
        return y, nu_red, lam_full
    return None


def _active_set_solve(problem, A_red, b_red, seed_idx):
    """Primal active-set loop seeded from a near-feasible point.

    Adds the most violated row, drops the most negative multiplier, and
    stops on a sign-consistent feasible working set.  This covers problems
    whose feasible set has too thin an interior for the barrier kernel.
    """
    act = list(dict.fromkeys(int(i) for i in seed_idx))
    h_scale = 1.0 + (float(np.max(np.abs(problem.h))) if problem.m else 0.0)
    for _ in range(4 * problem.m + 8):
        solved = _solve_on_working_set(problem, A_red, b_red, act)
        if solved is None:
            return None
        y, nu_red, lam_act = solved
        slack = problem.h - problem.G @ y
        candidates = slack.copy()
        if act:
            candidates[np.asarray(act, dtype=int)] = np.inf
        worst_row = int(np.argmin(candidates))
        if candidates[worst_row] < -1e-9 * h_scale:
            act.append(worst_row)
            continue
        if lam_act.size:
            worst = int(np.argmin(lam_act))
            floor = -1e-9 * (1.0 + float(np.max(np.abs(lam_act))))
            if lam_act[worst] < floor:
                act.pop(worst)
                continue
        lam_full = np.zeros(problem.m)
        if act:
            lam_full[act] = np.maximum(lam_act, 0.0)
        return y, nu_red, lam_full
    return None


def _phase1(problem, A_red, b_red, mod, max_iter):
    """Minimize the uniform constraint violation t over (y, t).

    The relaxed problem is strictly feasible by construction, so the kernel
    converges on it even when the original problem is not solvable.  Returns
    (t_star, lam_G, nu_signed) or None when the probe itself fails.
    """
    n = problem.n
    m = problem.m
    pr = A_red.shape[0]
    eps = 1e-14
    P1 = np.zeros((n + 1, n + 1))
    P1[:n, :n] = eps * np.eye(n)
    P1[n, n] = 1.0
    q1 = np.zeros(n + 1)
    G1 = np.zeros((m + 2 * pr, n + 1))
    G1[:m, :n] = problem.G
    G1[m : m + pr, :n] = A_red
    G1[m + pr :, :n] = -A_red
    G1[:, n] = -1.0
    h1 = np.concatenate([problem.h, b_red, -b_red])
    A1 = np.zeros((0, n + 1))
    b1 = np.zeros(0)
    y1, _, lam1, s1, _, code = mod.ipm_solve(
        P1, q1, G1, h1, A1, b1, max_iter, 1e-9, 1e-10, 1e-10, 1e-10, _STATIC_REG
    )
    if code not in (0, 1):
        return None
    relaxed = SimpleNamespace(P=P1, q=q1, G=G1, h=h1, n=n + 1, m=G1.shape[0])
    pol = _polish(relaxed, A1, b1, lam1, s1)
    if pol is not None:
        # The polished point only replaces the iterate if it actually stays
        # feasible for the relaxed problem; a wrong working-set guess would
        # otherwise understate the violation and mask infeasibility.
        py, _, plam = pol
        h_scale = 1.0 + float(np.max(np.abs(h1)))
        if float(np.max(G1 @ py - h1)) <= 1e-9 * h_scale:
            y1, lam1 = py, plam
    t_star = float(y1[n])
    lam_g = lam1[:m]
    nu_signed = lam1[m : m + pr] - lam1[m + pr :]
    return t_star, y1[:n], lam_g, nu_signed


def _refine_certificate(problem, A_red, b_red, y_scale_point):
    """Search for a sharp Farkas direction by nonnegative least squares.

    Any infeasibility witness can be scaled so its constraint offset equals
    -1; with that pinned, NNLS over all rows (equalities get both signs)
    drives the gradient of the combination to zero.  Either the fit comes
    back near-exact, proving infeasibility, or the gate rejects it.
    """
    if problem.m == 0:
        return None
    pr = A_red.shape[0]
    cols = [problem.G.T]
    offs = [problem.h]
    if pr:
        cols.extend([A_red.T, -A_red.T])
        offs.extend([b_red, -b_red])
    M = np.hstack(cols)
    c = np.concatenate(offs)
    hb_scale = 1.0 + float(np.max(np.abs(c)))
    beta = 1.0 / hb_scale
    M_aug = np.vstack([M, beta * c])
    v_aug = np.zeros(M.shape[0] + 1)
    v_aug[-1] = -beta
    try:
        x, _ = scipy.optimize.nnls(M_aug, v_aug)
    except RuntimeError:
        return None
    cert_val = float(c @ x)
    cert_res = float(np.max(np.abs(M @ x))) if np.any(x) else float("inf")
    y_scale = 1.0 + float(np.sum(np.abs(y_scale_point)))
    if cert_val < -1e-12 * hb_scale and cert_res * y_scale <= 0.01 * (-cert_val):
        lam_full = x[: problem.m]
        nu_ref = (
            x[problem.m : problem.m + pr] - x[problem.m + pr :] if pr else np.zeros(0)
        )
        return cert_val, cert_res, lam_full, nu_ref
    return None


def _certificate(problem, A_red, b_red, y, lam, nu_red, factor):
    """Check a Farkas-style infeasibility certificate at the given duals."""
    if problem.m == 0:
        return None
    hb_scale = 1.0 + max(
        float(np.max(np.abs(problem.h))),
        float(np.max(np.abs(b_red))) if b_red.size else 0.0,
    )
    cert_val = float(problem.h @ lam)
    if b_red.size:
        cert_val += float(b_red @ nu_red)
    if cert_val >= -1e-8 * hb_scale:
        return None
    grad = problem.G.T @ lam
    if b_red.size:
        grad = grad + A_red.T @ nu_red
    cert_res = float(np.max(np.abs(grad)))
    y_scale = 1.0 + float(np.max(np.abs(y)))
    if cert_res * y_scale <= factor * (-cert_val):
        return cert_val, cert_res
    return None


def solve_qp(problem: QpProblem, *, max_iter: int = 100, kernel: str | None = None) -> QpSolution:
    """Solve the QP and classify the outcome.

    The returned status is Optimal only when the polished (or raw) iterate
    meets the documented KKT tolerances; an iterate that stalls keeps the
    max-iterations status no matter how close it looks.
    """
    if problem.n == 0:
        raise DimensionMismatch("problem has no decision variables")
    mod = _kernel_module(kernel or kernel_name())
    diags = []

    A_red, b_red, keep, red_notes, inconsistent = _reduce_equalities(problem.A, problem.b)
    diags.extend(red_notes)
    if inconsistent:
        return QpSolution(
            y=np.zeros(problem.n),
            duals_ineq=np.zeros(problem.m),
            duals_eq=np.zeros(problem.p),
            status=SolverStatus.INFEASIBLE,
            kkt_residual=float("inf"),
            iterations=0,
            objective=float("nan"),
            diagnostics=tuple(diags),
        )
    if red_notes:
        warnings.warn("; ".join(red_notes), RuntimeWarning, stacklevel=2)

    def expand_nu(nu_red):
        nu = np.zeros(problem.p)
        if keep.size:
            nu[keep] = nu_red
        return nu

    if problem.m == 0:
        y, nu_red = _equality_solve(problem.P, problem.q, A_red, b_red)
        nu = expand_nu(nu_red)
        res = _residuals(problem, y, np.zeros(0), nu)
        status = SolverStatus.OPTIMAL if _contract_ok(res) else SolverStatus.MAX_ITER
        if status is SolverStatus.MAX_ITER:
            diags.append("direct equality solve left residuals above tolerance")
        return QpSolution(
            y=y,
            duals_ineq=np.zeros(0),
            duals_eq=nu,
            status=status,
            kkt_residual=max(res),
            iterations=1,
            objective=problem.objective(y),
            diagnostics=tuple(diags),
        )

    qn = float(np.max(np.abs(problem.q)))
    hn = float(np.max(np.abs(problem.h)))
    bn = float(np.max(np.abs(b_red))) if b_red.size else 0.0
    tol_stat = max(1e-11 * (1.0 + qn), 1e-9)
    tol_eq = max(1e-12 * (1.0 + bn), 1e-10)
    tol_ineq = max(1e-12 * (1.0 + hn), 1e-10)
    tol_gap = max(1e-13 * (1.0 + hn), 1e-10)

    y, nu_red, lam, s, iters, code = mod.ipm_solve(
        np.ascontiguousarray(problem.P),
        np.ascontiguousarray(problem.q),
        np.ascontiguousarray(problem.G),
        np.ascontiguousarray(problem.h),
        np.ascontiguousarray(A_red),
        np.ascontiguousarray(b_red),
        int(max_iter),
        tol_stat,
        tol_eq,
        tol_ineq,
        tol_gap,
        _STATIC_REG,
    )
    if code == 2:
        cert = _certificate(problem, A_red, b_red, y, lam, nu_red, factor=1e-6)
        if cert is not None:
            diags.append(
                f"infeasibility certificate: offset {cert[0]:.6e}, "
                f"combination residual {cert[1]:.3e}"
            )
        res = _residuals(problem, y, lam, expand_nu(nu_red))
        return QpSolution(
            y=y,
            duals_ineq=lam,
            duals_eq=expand_nu(nu_red),
            status=SolverStatus.INFEASIBLE,
            kkt_residual=max(res),
            iterations=iters,
            objective=float("nan"),
            diagnostics=tuple(diags),
        )

    candidates = []
    pol = _polish(problem, A_red, b_red, lam, s)
    if pol is not None:
        py, pnu_red, plam = pol
        candidates.append((py, plam, expand_nu(pnu_red), "polished"))
    candidates.append((y, lam, expand_nu(nu_red), "interior"))

    best = None
    for cy, clam, cnu, tag in candidates:
        res = _residuals(problem, cy, clam, cnu)
        entry = (max(res), res, cy, clam, cnu, tag)
        if _contract_ok(res):
            best = entry
            optimal = True
            break
        if best is None or entry[0] < best[0]:
            best = entry
            optimal = False
    _, res, cy, clam, cnu, tag = best

    if optimal:
        status = SolverStatus.OPTIMAL
        if tag == "interior":
            diags.append("polish rejected; interior iterate meets tolerances")
    else:
        status = None
        cert = _certificate(problem, A_red, b_red, y, lam, nu_red, factor=1e-6)
        if code != 0 and cert is not None:
            status = SolverStatus.INFEASIBLE
            diags.append(
                f"infeasibility certificate after early stop: offset {cert[0]:.6e}, "
                f"combination residual {cert[1]:.3e}"
            )
        probe = None
        if status is None and code != 0:
            probe = _phase1(problem, A_red, b_red, mod, max_iter)
        if status is None:
            if probe is not None:
                slack1 = problem.h - problem.G @ probe[1]
                seed = np.where(slack1 <= max(probe[0], 0.0) + 1e-7 * (1.0 + hn))[0]
            else:
                seed = np.where(lam > s)[0]
            asol = _active_set_solve(problem, A_red, b_red, seed)
            if asol is not None:
                ay, anu_red, alam = asol
                anu = expand_nu(anu_red)
                ares = _residuals(problem, ay, alam, anu)
                if _contract_ok(ares):
                    status = SolverStatus.OPTIMAL
                    cy, clam, cnu, res = ay, alam, anu, ares
                    diags.append("recovered by active-set restart after interior-point stall")
        if status is None and probe is not None and probe[0] > 0.0:
            t_star, y1, lam_g, nu_signed = probe
            cert = _certificate(
                problem, A_red, b_red, y1, lam_g / t_star, nu_signed / t_star, factor=1e-4
            )
            if cert is not None:
                status = SolverStatus.INFEASIBLE
                diags.append(
                    f"minimum uniform violation {t_star:.6e}; certificate "
                    f"offset {cert[0]:.6e}, combination residual {cert[1]:.3e}"
                )
            else:
                refined = _refine_certificate(problem, A_red, b_red, y1)
                if refined is not None:
                    status = SolverStatus.INFEASIBLE
                    clam, cnu = refined[2], expand_nu(refined[3])
                    diags.append(
                        f"minimum uniform violation {t_star:.6e}; refined certificate "
                        f"offset {refined[0]:.6e}, combination residual {refined[1]:.3e}"
                    )
        if status is None:
            if code == 3:
                raise NumericalBreakdown(
                    "interior-point factorization failed beyond recoverable regularization"
                )
            status = SolverStatus.MAX_ITER
            diags.append(
                f"best iterate ({tag}) residuals {tuple(f'{v:.2e}' for v in res)}"
            )

    return QpSolution(
        y=cy,
        duals_ineq=clam,
        duals_eq=cnu,
        status=status,
        kkt_residual=max(res),
        iterations=iters,
        objective=problem.objective(cy) if status is not SolverStatus.INFEASIBLE else float("nan"),
        diagnostics=tuple(diags),
    )
