"""Pure-numpy predictor-corrector interior-point kernel.

This module mirrors the compiled kernel in ``_ipm_core.pyx``; both expose
``ipm_solve`` with the same contract so the wrapper can pick either at
import time.  Keep the two implementations in lockstep.

Return codes: 0 converged, 1 iteration cap hit, 2 primal infeasibility
certificate found, 3 numerical breakdown.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

_REG_MAX = 1e-6
_STEP_SHRINK = 0.99
_D_CAP = 1e14


def _initial_point(P, q, G, h, A, b, reg):
    n = q.shape[0]
    p = b.shape[0]
    M = P + reg * np.eye(n)
    cf = cho_factor(M, lower=True)
    if p:
        W = cho_solve(cf, A.T)
        S = A @ W + reg * np.eye(p)
        sf = cho_factor(S, lower=True)
        nu = -cho_solve(sf, b + A @ cho_solve(cf, q))
        y = cho_solve(cf, -q - A.T @ nu)
    else:
        nu = np.zeros(0)
        y = cho_solve(cf, -q)
    resid = h - G @ y
    shift = max(-1.5 * float(np.min(resid)), 0.0)
    s = resid + shift
    lam = np.ones_like(s)
    # Mehrotra-style recentring of the initial pair.
    ds = 0.5 * float(s @ lam) / max(float(np.sum(lam)), 1e-12)
    s = s + ds
    lam = lam + ds
    floor = 1e-8
    s = np.maximum(s, floor)
    lam = np.maximum(lam, floor)
    return y, nu, s, lam


def ipm_solve(P, q, G, h, A, b, max_iter, tol_stat, tol_eq, tol_ineq, tol_gap, reg):
    """Solve min 1/2 y'Py + q'y s.t. Gy <= h, Ay = b with m >= 1 rows in G."""
    n = q.shape[0]
    m = h.shape[0]
    p = b.shape[0]
    eye_n = np.eye(n)
    eye_p = np.eye(p)

    try:
        y, nu, s, lam = _initial_point(P, q, G, h, A, b, max(reg, 1e-12))
    except np.linalg.LinAlgError:
        return np.zeros(n), np.zeros(p), np.zeros(m), np.ones(m), 0, 3

    hb_scale = 1.0 + max(
        float(np.max(np.abs(h))) if m else 0.0, float(np.max(np.abs(b))) if p else 0.0
    )

    for it in range(1, max_iter + 1):
        r_d = P @ y + q + G.T @ lam
        if p:
            r_d = r_d + A.T @ nu
        r_p = A @ y - b if p else np.zeros(0)
        r_g = G @ y + s - h
        gap = float(s @ lam)
        mu = gap / m

        stat = float(np.max(np.abs(r_d))) if n else 0.0
        eq = float(np.max(np.abs(r_p))) if p else 0.0
        ineq = float(np.max(np.abs(r_g)))
        if stat <= tol_stat and eq <= tol_eq and ineq <= tol_ineq and mu <= tol_gap:
            return y, nu, lam, s, it - 1, 0

        # Farkas-style certificate: a nonnegative combination of the
        # constraints with vanishing gradient and negative offset proves
        # that no feasible point exists.
        cert_val = float(h @ lam) + (float(b @ nu) if p else 0.0)
        if cert_val < -1e-8 * hb_scale:
            cert_grad = G.T @ lam
            if p:
                cert_grad = cert_grad + A.T @ nu
            cert_res = float(np.max(np.abs(cert_grad)))
            y_scale = 1.0 + float(np.max(np.abs(y)))
            if cert_res * y_scale <= 1e-8 * (-cert_val):
                return y, nu, lam, s, it - 1, 2

        # Cap the barrier diagonal so near-active rows cannot poison the
        # factorization when the feasible set has (almost) no interior.
        d = np.minimum(lam / s, _D_CAP)
        current_reg = max(reg, 1e-12)
        while True:
            try:
                M = P + current_reg * eye_n + (G.T * d) @ G
                cf = cho_factor(M, lower=True)
                if p:
                    W = cho_solve(cf, A.T)
                    S = A @ W + current_reg * eye_p
                    sf = cho_factor(S, lower=True)
                break
            except np.linalg.LinAlgError:
                current_reg *= 10.0
                if current_reg > _REG_MAX:
                    return y, nu, lam, s, it - 1, 3

        def kkt_step(f, g):
            if p:
                dnu = cho_solve(sf, A @ cho_solve(cf, f) - g)
                dy = cho_solve(cf, f - A.T @ dnu)
            else:
                dnu = np.zeros(0)
                dy = cho_solve(cf, f)
            return dy, dnu

        # Affine (predictor) direction.
        rc = -lam * s
        f = -r_d - G.T @ ((rc + lam * r_g) / s)
        g = -r_p
        dy_a, dnu_a = kkt_step(f, g)
        ds_a = -r_g - G @ dy_a
        dlam_a = (rc - lam * ds_a) / s

        alpha_a = _max_step(s, ds_a, lam, dlam_a)
        mu_aff = float((s + alpha_a * ds_a) @ (lam + alpha_a * dlam_a)) / m
        sigma = min(max(mu_aff / mu, 0.0), 1.0) ** 3

        # Combined (corrector) direction.
        rc = sigma * mu - lam * s - dlam_a * ds_a
        f = -r_d - G.T @ ((rc + lam * r_g) / s)
        dy, dnu = kkt_step(f, g)
        ds = -r_g - G @ dy
        dlam = (rc - lam * ds) / s

        alpha = min(1.0, _STEP_SHRINK * _max_step(s, ds, lam, dlam))
        y = y + alpha * dy
        s = s + alpha * ds
        lam = lam + alpha * dlam
        if p:
            nu = nu + alpha * dnu

    return y, nu, lam, s, max_iter, 1


def _max_step(s, ds, lam, dlam):
    """Largest step in [0, 1] keeping s and lam strictly positive."""
    alpha = 1.0
    neg = ds < 0
    if np.any(neg):
        alpha = min(alpha, float(np.min(-s[neg] / ds[neg])))
    neg = dlam < 0
    if np.any(neg):
        alpha = min(alpha, float(np.min(-lam[neg] / dlam[neg])))
    return alpha
