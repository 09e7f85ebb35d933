"""Reference implementations the solver tests compare against.

These are deliberately slow and independent of the production code paths:
the QP oracle enumerates candidate active sets exhaustively and keeps the
best KKT-consistent feasible point.
"""

import itertools

import numpy as np
import scipy.optimize


def enumerate_qp(P, q, G, h, A, b, tol=1e-9):
    """Global minimum of a strictly convex QP by active-set enumeration.

    Returns (objective, y) or None when no feasible KKT point exists.
    """
    n, m = len(q), len(h)
    p = len(b)
    rank_a = np.linalg.matrix_rank(A) if p else 0
    best = None
    for r in range(0, n - rank_a + 1):
        for S in itertools.combinations(range(m), r):
            S = list(S)
            dim = n + p + r
            K = np.zeros((dim, dim))
            K[:n, :n] = P
            if p:
                K[:n, n : n + p] = A.T
                K[n : n + p, :n] = A
            if r:
                K[:n, n + p :] = G[S].T
                K[n + p :, :n] = G[S]
            rhs = np.concatenate([-q, b, h[S]])
            sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            if np.max(np.abs(K @ sol - rhs)) > 1e-7 * (1.0 + np.max(np.abs(rhs))):
                continue
            y = sol[:n]
            lam = sol[n + p :]
            if r and np.min(lam) < -tol:
                continue
            if m and np.max(G @ y - h) > 1e-7 * (1.0 + np.max(np.abs(h))):
                continue
            if p and np.max(np.abs(A @ y - b)) > 1e-7 * (1.0 + np.max(np.abs(b))):
                continue
            obj = 0.5 * y @ P @ y + q @ y
            if best is None or obj < best[0] - 1e-12:
                best = (obj, y)
    return best


def lp_feasible(G, h, A, b):
    """True when the constraint polytope is nonempty (LP phase check)."""
    n = G.shape[1]
    res = scipy.optimize.linprog(
        np.zeros(n),
        A_ub=G if len(h) else None,
        b_ub=h if len(h) else None,
        A_eq=A if len(b) else None,
        b_eq=b if len(b) else None,
        bounds=[(None, None)] * n,
        method="highs",
    )
    return res.status == 0


def subset_count(n, m, p):
    """Number of candidate active sets enumerate_qp would visit."""
    total = 0
    pick = 1
    for r in range(0, max(n - p, 0) + 1):
        total += pick
        pick = pick * (m - r) // (r + 1) if m > r else 0
    return total


def random_qp(rng, n, m, p, feasible_bias=0.75):
    """One random strictly convex problem with the given dimensions."""
    Q = rng.normal(size=(n, n))
    P = Q.T @ Q + (0.1 + rng.random()) * np.eye(n)
    q = rng.normal(size=n)
    G = rng.normal(size=(m, n))
    y0 = rng.normal(size=n)
    if rng.random() < feasible_bias:
        h = G @ y0 + np.abs(rng.normal(size=m)) + 0.01
    else:
        h = rng.normal(size=m)
    A = rng.normal(size=(p, n)) if p else np.zeros((0, n))
    b = (A @ y0 if rng.random() < 0.8 else rng.normal(size=p)) if p else np.zeros(0)
    return P, q, G, h, A, b


def corner_force_feasible(feet, hand_pos, hand_force, hand_torque, mass, point):
    """Linear-feasibility reference for CoM support: nonnegative vertical
    corner forces meeting the vertical force balance and the horizontal
    torque balance for the queried CoM position."""
    mg = mass * 9.81
    corners = np.vstack([f.corners_world()[:, :2] for f in feet])
    m = corners.shape[0]
    hand_term = hand_force[2] * np.asarray(hand_pos[:2]) - hand_pos[2] * np.asarray(
        hand_force[:2]
    )
    hand_term = hand_term + np.array([-hand_torque[1], hand_torque[0]])
    A_eq = np.vstack([np.ones(m), corners.T])
    b_eq = np.concatenate([[mg - hand_force[2]], mg * np.asarray(point) - hand_term])
    res = scipy.optimize.linprog(
        np.zeros(m),
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=[(0.0, None)] * m,
        method="highs",
    )
    return res.status == 0
