# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled predictor-corrector interior-point kernel.

Mirror of ``_ipm_py.ipm_solve``; the two must implement the same algorithm
step for step so either can back the solver.  Return codes: 0 converged,
1 iteration cap hit, 2 primal infeasibility certificate, 3 numerical
breakdown.
"""

import numpy as np

from libc.math cimport fabs, sqrt

cdef double REG_MAX = 1e-6
cdef double D_CAP = 1e14
cdef double STEP_SHRINK = 0.99


cdef int _cholesky(double[:, ::1] a, Py_ssize_t n) noexcept nogil:
    """In-place lower-triangular Cholesky; nonzero return means failure."""
    cdef Py_ssize_t i, j, k
    cdef double acc
    for j in range(n):
        acc = a[j, j]
        for k in range(j):
            acc -= a[j, k] * a[j, k]
        if acc <= 0.0 or acc != acc:
            return 1
        a[j, j] = sqrt(acc)
        for i in range(j + 1, n):
            acc = a[i, j]
            for k in range(j):
                acc -= a[i, k] * a[j, k]
            a[i, j] = acc / a[j, j]
    return 0


cdef void _chol_solve(double[:, ::1] l, double[::1] x, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = x[i]
        for k in range(i):
            acc -= l[i, k] * x[k]
        x[i] = acc / l[i, i]
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for k in range(i + 1, n):
            acc -= l[k, i] * x[k]
        x[i] = acc / l[i, i]


cdef double _max_step(double[::1] s, double[::1] ds,
                      double[::1] lam, double[::1] dlam,
                      Py_ssize_t m) noexcept nogil:
    cdef double alpha = 1.0
    cdef double cand
    cdef Py_ssize_t i
    for i in range(m):
        if ds[i] < 0.0:
            cand = -s[i] / ds[i]
            if cand < alpha:
                alpha = cand
        if dlam[i] < 0.0:
            cand = -lam[i] / dlam[i]
            if cand < alpha:
                alpha = cand
    return alpha


cdef int _factor(double[:, ::1] P, double[:, ::1] G, double[:, ::1] A,
                 double[::1] d, double reg,
                 double[:, ::1] M, double[:, ::1] S, double[:, ::1] X,
                 Py_ssize_t n, Py_ssize_t m, Py_ssize_t p) noexcept nogil:
    """Form and factor M = P + reg*I + G'DG and the Schur complement."""
    cdef Py_ssize_t i, j, k, r
    cdef double acc
    for i in range(n):
        for j in range(i, n):
            acc = P[i, j]
            for r in range(m):
                acc += G[r, i] * d[r] * G[r, j]
            M[i, j] = acc
            M[j, i] = acc
        M[i, i] += reg
    if _cholesky(M, n):
        return 1
    if p:
        for j in range(p):
            for k in range(n):
                X[k, j] = A[j, k]
        # Solve M x = A' one column at a time.
        for j in range(p):
            _chol_solve_col(M, X, j, n)
        for i in range(p):
            for j in range(i, p):
                acc = 0.0
                for k in range(n):
                    acc += A[i, k] * X[k, j]
                S[i, j] = acc
                S[j, i] = acc
            S[i, i] += reg
        if _cholesky(S, p):
            return 1
    return 0


cdef void _chol_solve_col(double[:, ::1] l, double[:, ::1] x, Py_ssize_t col,
                          Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = x[i, col]
        for k in range(i):
            acc -= l[i, k] * x[k, col]
        x[i, col] = acc / l[i, i]
    for i in range(n - 1, -1, -1):
        acc = x[i, col]
        for k in range(i + 1, n):
            acc -= l[k, i] * x[k, col]
        x[i, col] = acc / l[i, i]


cdef void _kkt_step(double[:, ::1] M, double[:, ::1] S, double[:, ::1] A,
                    double[::1] f, double[::1] g,
                    double[::1] dy, double[::1] dnu, double[::1] work,
                    Py_ssize_t n, Py_ssize_t p) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        work[i] = f[i]
    _chol_solve(M, work, n)
    if p:
        for i in range(p):
            acc = -g[i]
            for k in range(n):
                acc += A[i, k] * work[k]
            dnu[i] = acc
        _chol_solve(S, dnu, p)
        for k in range(n):
            acc = f[k]
            for i in range(p):
                acc -= A[i, k] * dnu[i]
            dy[k] = acc
        _chol_solve(M, dy, n)
    else:
        for i in range(n):
            dy[i] = work[i]


def ipm_solve(double[:, ::1] P, double[::1] q,
              double[:, ::1] G, double[::1] h,
              double[:, ::1] A, double[::1] b,
              int max_iter, double tol_stat, double tol_eq,
              double tol_ineq, double tol_gap, double reg):
    """Solve min 1/2 y'Py + q'y s.t. Gy <= h, Ay = b with m >= 1 rows in G."""
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t m = h.shape[0]
    cdef Py_ssize_t p = b.shape[0]
    cdef Py_ssize_t i, j, k, it

    y_arr = np.zeros(n)
    nu_arr = np.zeros(p)
    s_arr = np.zeros(m)
    lam_arr = np.zeros(m)
    cdef double[::1] y = y_arr
    cdef double[::1] nu = nu_arr
    cdef double[::1] s = s_arr
    cdef double[::1] lam = lam_arr

    M_arr = np.zeros((n, n))
    S_arr = np.zeros((max(p, 1), max(p, 1)))
    X_arr = np.zeros((n, max(p, 1)))
    cdef double[:, ::1] M = M_arr
    cdef double[:, ::1] S = S_arr
    cdef double[:, ::1] X = X_arr

    r_d_arr = np.zeros(n)
    r_p_arr = np.zeros(max(p, 1))
    r_g_arr = np.zeros(m)
    d_arr = np.zeros(m)
    f_arr = np.zeros(n)
    g_arr = np.zeros(max(p, 1))
    rc_arr = np.zeros(m)
    dy_arr = np.zeros(n)
    dnu_arr = np.zeros(max(p, 1))
    ds_arr = np.zeros(m)
    dlam_arr = np.zeros(m)
    dy2_arr = np.zeros(n)
    dnu2_arr = np.zeros(max(p, 1))
    ds2_arr = np.zeros(m)
    dlam2_arr = np.zeros(m)
    work_arr = np.zeros(n)
    cdef double[::1] r_d = r_d_arr
    cdef double[::1] r_p = r_p_arr
    cdef double[::1] r_g = r_g_arr
    cdef double[::1] d = d_arr
    cdef double[::1] f = f_arr
    cdef double[::1] g = g_arr
    cdef double[::1] rc = rc_arr
    cdef double[::1] dy = dy_arr
    cdef double[::1] dnu = dnu_arr
    cdef double[::1] ds = ds_arr
    cdef double[::1] dlam = dlam_arr
    cdef double[::1] dy2 = dy2_arr
    cdef double[::1] dnu2 = dnu2_arr
    cdef double[::1] ds2 = ds2_arr
    cdef double[::1] dlam2 = dlam2_arr
    cdef double[::1] work = work_arr

    cdef double base_reg = reg if reg > 1e-12 else 1e-12
    cdef double current_reg, acc, shift, pair_shift, lam_sum
    cdef double gap, mu, stat, eq, ineq, hb_scale, cert_val, cert_res, y_scale
    cdef double alpha, mu_aff, sigma, ratio
    cdef int fail

    # Initial point: regularized equality-KKT solve, then Mehrotra shifts.
    for i in range(n):
        for j in range(n):
            M[i, j] = P[i, j]
        M[i, i] += base_reg
    if _cholesky(M, n):
        return y_arr, nu_arr, lam_arr, s_arr, 0, 3
    if p:
        for j in range(p):
            for k in range(n):
                X[k, j] = A[j, k]
            _chol_solve_col(M, X, j, n)
        for i in range(p):
            for j in range(i, p):
                acc = 0.0
                for k in range(n):
                    acc += A[i, k] * X[k, j]
                S[i, j] = acc
                S[j, i] = acc
            S[i, i] += base_reg
        if _cholesky(S, p):
            return y_arr, nu_arr, lam_arr, s_arr, 0, 3
        for i in range(n):
            work[i] = q[i]
        _chol_solve(M, work, n)
        for i in range(p):
            acc = b[i]
            for k in range(n):
                acc += A[i, k] * work[k]
            nu[i] = -acc
        _chol_solve(S, nu, p)
        for i in range(n):
            acc = -q[i]
            for j in range(p):
                acc -= A[j, i] * nu[j]
            y[i] = acc
        _chol_solve(M, y, n)
    else:
        for i in range(n):
            y[i] = -q[i]
        _chol_solve(M, y, n)

    shift = 0.0
    for i in range(m):
        acc = h[i]
        for k in range(n):
            acc -= G[i, k] * y[k]
        s[i] = acc
        if -1.5 * acc > shift:
            shift = -1.5 * acc
    lam_sum = 0.0
    pair_shift = 0.0
    for i in range(m):
        s[i] += shift
        lam[i] = 1.0
        pair_shift += s[i]
        lam_sum += 1.0
    pair_shift = 0.5 * pair_shift / lam_sum
    for i in range(m):
        s[i] += pair_shift
        lam[i] += pair_shift
        if s[i] < 1e-8:
            s[i] = 1e-8
        if lam[i] < 1e-8:
            lam[i] = 1e-8

    hb_scale = 0.0
    for i in range(m):
        if fabs(h[i]) > hb_scale:
            hb_scale = fabs(h[i])
    for i in range(p):
        if fabs(b[i]) > hb_scale:
            hb_scale = fabs(b[i])
    hb_scale += 1.0

    for it in range(1, max_iter + 1):
        # Residuals.
        for i in range(n):
            acc = q[i]
            for k in range(n):
                acc += P[i, k] * y[k]
            for k in range(m):
                acc += G[k, i] * lam[k]
            for k in range(p):
                acc += A[k, i] * nu[k]
            r_d[i] = acc
        for i in range(p):
            acc = -b[i]
            for k in range(n):
                acc += A[i, k] * y[k]
            r_p[i] = acc
        gap = 0.0
        for i in range(m):
            acc = s[i] - h[i]
            for k in range(n):
                acc += G[i, k] * y[k]
            r_g[i] = acc
            gap += s[i] * lam[i]
        mu = gap / m

        stat = 0.0
        for i in range(n):
            if fabs(r_d[i]) > stat:
                stat = fabs(r_d[i])
        eq = 0.0
        for i in range(p):
            if fabs(r_p[i]) > eq:
                eq = fabs(r_p[i])
        ineq = 0.0
        for i in range(m):
            if fabs(r_g[i]) > ineq:
                ineq = fabs(r_g[i])
        if stat <= tol_stat and eq <= tol_eq and ineq <= tol_ineq and mu <= tol_gap:
            return y_arr, nu_arr[:p], lam_arr, s_arr, it - 1, 0

        # Infeasibility certificate.
        cert_val = 0.0
        for i in range(m):
            cert_val += h[i] * lam[i]
        for i in range(p):
            cert_val += b[i] * nu[i]
        if cert_val < -1e-8 * hb_scale:
            cert_res = 0.0
            for i in range(n):
                acc = 0.0
                for k in range(m):
                    acc += G[k, i] * lam[k]
                for k in range(p):
                    acc += A[k, i] * nu[k]
                if fabs(acc) > cert_res:
                    cert_res = fabs(acc)
            y_scale = 0.0
            for i in range(n):
                if fabs(y[i]) > y_scale:
                    y_scale = fabs(y[i])
            y_scale += 1.0
            if cert_res * y_scale <= 1e-8 * (-cert_val):
                return y_arr, nu_arr[:p], lam_arr, s_arr, it - 1, 2

        # Cap the barrier diagonal so near-active rows cannot poison the
        # factorization when the feasible set has (almost) no interior.
        for i in range(m):
            d[i] = lam[i] / s[i]
            if d[i] > D_CAP:
                d[i] = D_CAP

        current_reg = base_reg
        fail = _factor(P, G, A, d, current_reg, M, S, X, n, m, p)
        while fail:
            current_reg *= 10.0
            if current_reg > REG_MAX:
                return y_arr, nu_arr[:p], lam_arr, s_arr, it - 1, 3
            fail = _factor(P, G, A, d, current_reg, M, S, X, n, m, p)

        # Affine direction.  rc = -lam*s.
        for i in range(m):
            rc[i] = -lam[i] * s[i]
        for i in range(n):
            acc = -r_d[i]
            for k in range(m):
                acc -= G[k, i] * ((rc[k] + lam[k] * r_g[k]) / s[k])
            f[i] = acc
        for i in range(p):
            g[i] = -r_p[i]
        _kkt_step(M, S, A, f, g, dy, dnu, work, n, p)
        for i in range(m):
            acc = -r_g[i]
            for k in range(n):
                acc -= G[i, k] * dy[k]
            ds[i] = acc
            dlam[i] = (rc[i] - lam[i] * ds[i]) / s[i]

        alpha = _max_step(s, ds, lam, dlam, m)
        mu_aff = 0.0
        for i in range(m):
            mu_aff += (s[i] + alpha * ds[i]) * (lam[i] + alpha * dlam[i])
        mu_aff /= m
        ratio = mu_aff / mu
        if ratio < 0.0:
            ratio = 0.0
        elif ratio > 1.0:
            ratio = 1.0
        sigma = ratio * ratio * ratio

        # Combined direction.
        for i in range(m):
            rc[i] = sigma * mu - lam[i] * s[i] - dlam[i] * ds[i]
        for i in range(n):
            acc = -r_d[i]
            for k in range(m):
                acc -= G[k, i] * ((rc[k] + lam[k] * r_g[k]) / s[k])
            f[i] = acc
        _kkt_step(M, S, A, f, g, dy2, dnu2, work, n, p)
        for i in range(m):
            acc = -r_g[i]
            for k in range(n):
                acc -= G[i, k] * dy2[k]
            ds2[i] = acc
            dlam2[i] = (rc[i] - lam[i] * ds2[i]) / s[i]

        alpha = STEP_SHRINK * _max_step(s, ds2, lam, dlam2, m)
        if alpha > 1.0:
            alpha = 1.0
        for i in range(n):
            y[i] += alpha * dy2[i]
        for i in range(m):
            s[i] += alpha * ds2[i]
            lam[i] += alpha * dlam2[i]
        for i in range(p):
            nu[i] += alpha * dnu2[i]

    return y_arr, nu_arr[:p], lam_arr, s_arr, max_iter, 1
