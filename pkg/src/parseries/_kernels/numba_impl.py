"""JIT backend for the Monte Carlo kernels.

Per-replicate loops compiled with numba.  The matrices are tiny (n of
order 10), so instead of calling LAPACK per replicate the kernels exploit
structure directly: the chain precision is applied through its tridiagonal
band, cross-series systems are solved with hand-rolled pivoted LU or
Cholesky, and the triangular-residual projectors are reduced to small Gram
systems via W Z cross products instead of materialising n x n projectors.
The numpy backend computes the same quantities with batched array algebra;
the two must agree to floating point noise.
"""

import numpy as np
from numba import njit

NAME = "numba"

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_GRID_POINTS = 33
_DEGENERATE_SPREAD = 1e-8


@njit(cache=True)
def _lu_solve_inplace(a, b):
    """Solve a X = b with partial pivoting; a is destroyed, b becomes X."""
    m = a.shape[0]
    q = b.shape[1]
    for col in range(m):
        piv = col
        big = abs(a[col, col])
        for r in range(col + 1, m):
            v = abs(a[r, col])
            if v > big:
                big = v
                piv = r
        if piv != col:
            for c in range(col, m):
                tmp = a[col, c]
                a[col, c] = a[piv, c]
                a[piv, c] = tmp
            for c in range(q):
                tmp = b[col, c]
                b[col, c] = b[piv, c]
                b[piv, c] = tmp
        inv_p = 1.0 / a[col, col]
        for r in range(col + 1, m):
            f = a[r, col] * inv_p
            if f != 0.0:
                for c in range(col + 1, m):
                    a[r, c] -= f * a[col, c]
                for c in range(q):
                    b[r, c] -= f * b[col, c]
    for col in range(m - 1, -1, -1):
        inv_p = 1.0 / a[col, col]
        for c in range(q):
            acc = b[col, c]
            for r in range(col + 1, m):
                acc -= a[col, r] * b[r, c]
            b[col, c] = acc * inv_p


@njit(cache=True)
def _chol_logdet_inplace(m):
    """Lower Cholesky in place; returns log det, or -inf when not PD."""
    k = m.shape[0]
    half = 0.0
    for j in range(k):
        acc = m[j, j]
        for t in range(j):
            acc -= m[j, t] * m[j, t]
        if acc <= 0.0:
            return -np.inf
        ljj = np.sqrt(acc)
        m[j, j] = ljj
        half += np.log(ljj)
        inv = 1.0 / ljj
        for i in range(j + 1, k):
            acc2 = m[i, j]
            for t in range(j):
                acc2 -= m[i, t] * m[j, t]
            m[i, j] = acc2 * inv
    return 2.0 * half


@njit(cache=True)
def batch_scores(y, p_mat, a_mat, tr_pd, n_eff, model_code):
    reps, n, k = y.shape
    out = np.zeros(reps)
    if model_code == 3 and k >= n_eff:
        return out
    py = np.empty((n, k))
    ay = np.empty((n, k))
    m_w = np.empty((k, k))
    m_a = np.empty((k, k))
    for rep in range(reps):
        yr = y[rep]
        for i in range(n):
            for s in range(k):
                accp = 0.0
                acca = 0.0
                for j in range(n):
                    v = yr[j, s]
                    accp += p_mat[i, j] * v
                    acca += a_mat[i, j] * v
                py[i, s] = accp
                ay[i, s] = acca
        if model_code == 1:
            qw = 0.0
            qa = 0.0
            for i in range(n):
                for s in range(k):
                    qw += yr[i, s] * py[i, s]
                    qa += yr[i, s] * ay[i, s]
            out[rep] = -0.5 * k * tr_pd + 0.5 * n_eff * k * qa / qw
        elif model_code == 2:
            acc = 0.0
            for s in range(k):
                qw = 0.0
                qa = 0.0
                for i in range(n):
                    qw += yr[i, s] * py[i, s]
                    qa += yr[i, s] * ay[i, s]
                acc += qa / qw
            out[rep] = -0.5 * k * tr_pd + 0.5 * n_eff * acc
        else:
            for a in range(k):
                for b in range(k):
                    accw = 0.0
                    accq = 0.0
                    for i in range(n):
                        accw += yr[i, a] * py[i, b]
                        accq += yr[i, a] * ay[i, b]
                    m_w[a, b] = accw
                    m_a[a, b] = accq
            _lu_solve_inplace(m_w, m_a)
            t = 0.0
            for j in range(k):
                t += m_a[j, j]
            out[rep] = -0.5 * k * tr_pd + 0.5 * n_eff * t
    return out


@njit(cache=True)
def batch_ut_term_scores(y, x, w, d, n_terms):
    """Per-term triangular-residual scores via small Gram systems.

    With Z = [x | series], the projector quantities for every term reduce
    to blocks of C = Z'WZ and E = (WZ)'D(WZ):
        y_r' P_r y_r = C[t, t] - c' G^{-1} c
        tr(P_r D)    = tr(WD) - tr(G^{-1} E_m)
        P_r y_r      = (WZ)_t - (WZ)_m G^{-1} c
    where G = C[:m, :m], c = C[:m, t], m = p + r - 1 and t indexes the
    target series column.
    """
    reps, n, _ = y.shape
    p = x.shape[1]
    width = p + n_terms
    out = np.empty((reps, n_terms))

    tr_wd = 0.0
    for i in range(n):
        for j in range(n):
            tr_wd += w[i, j] * d[j, i]

    wz = np.empty((n, width))
    dwz = np.empty((n, width))
    cmat = np.empty((width, width))
    emat = np.empty((width, width))
    gbuf = np.empty((width, width))
    rhs = np.empty((width, width + 1))
    u = np.empty(n)
    du = np.empty(n)

    for rep in range(reps):
        yr = y[rep]
        # WZ and D(WZ)
        for i in range(n):
            for a in range(width):
                acc = 0.0
                if a < p:
                    for j in range(n):
                        acc += w[i, j] * x[j, a]
                else:
                    for j in range(n):
                        acc += w[i, j] * yr[j, a - p]
                wz[i, a] = acc
        for i in range(n):
            for a in range(width):
                acc = 0.0
                for j in range(n):
                    acc += d[i, j] * wz[j, a]
                dwz[i, a] = acc
        # C = Z'WZ, E = (WZ)'D(WZ)
        for a in range(width):
            for b in range(width):
                accc = 0.0
                acce = 0.0
                for i in range(n):
                    za = x[i, a] if a < p else yr[i, a - p]
                    accc += za * wz[i, b]
                    acce += wz[i, a] * dwz[i, b]
                cmat[a, b] = accc
                emat[a, b] = acce

        for r in range(1, n_terms + 1):
            m = p + r - 1
            t = p + r - 1  # column of the target series in Z
            rank = n - p - r + 1
            if m == 0:
                quad_w = cmat[t, t]
                tr_prd = tr_wd
                for i in range(n):
                    u[i] = wz[i, t]
            else:
                g = gbuf[:m, :m]
                b = rhs[:m, : m + 1]
                for a in range(m):
                    for bb in range(m):
                        g[a, bb] = cmat[a, bb]
                        b[a, bb] = emat[a, bb]
                    b[a, m] = cmat[a, t]
                _lu_solve_inplace(g, b)
                tr_ge = 0.0
                for a in range(m):
                    tr_ge += b[a, a]
                tr_prd = tr_wd - tr_ge
                quad_w = cmat[t, t]
                for a in range(m):
                    quad_w -= cmat[t, a] * b[a, m]
                for i in range(n):
                    acc = wz[i, t]
                    for a in range(m):
                        acc -= wz[i, a] * b[a, m]
                    u[i] = acc
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += d[i, j] * u[j]
                du[i] = acc
            quad_a = 0.0
            for i in range(n):
                quad_a += u[i] * du[i]
            out[rep, r - 1] = -0.5 * tr_prd + 0.5 * rank * quad_a / quad_w
    return out


@njit(cache=True)
def _loglik_iii_one(yr, beta, gaps, diag, off, mbuf):
    """Full-covariance profile log likelihood through the tridiagonal band
    of the chain precision; no n x n matrices are formed."""
    n, k = yr.shape
    logdet_g = 0.0
    for i in range(n - 1):
        rho = beta ** gaps[i]
        s = 1.0 - rho * rho
        logdet_g += np.log(s)
        off[i] = -rho / s
        if i == 0:
            diag[0] = 1.0 + rho * rho / s
        else:
            diag[i] += rho * rho / s
        diag[i + 1] = 1.0 / s
    for a in range(k):
        for b in range(a, k):
            acc = 0.0
            for i in range(n):
                acc += diag[i] * yr[i, a] * yr[i, b]
            for i in range(n - 1):
                acc += off[i] * (yr[i, a] * yr[i + 1, b] + yr[i + 1, a] * yr[i, b])
            mbuf[a, b] = acc
            mbuf[b, a] = acc
    ld = _chol_logdet_inplace(mbuf)
    return -0.5 * k * logdet_g - 0.5 * n * ld


@njit(cache=True)
def batch_fit_model_iii(y, points, lo, hi, tol):
    reps, n, k = y.shape
    gaps = np.diff(points)
    probe_grid = np.linspace(max(lo, -0.95), min(hi, 0.95), 9)
    grid = np.linspace(lo, hi, _GRID_POINTS)
    beta = np.empty(reps)
    flags = np.zeros(reps, dtype=np.int8)
    vals = np.empty(_GRID_POINTS)
    diag = np.empty(n)
    off = np.empty(n - 1)
    mbuf = np.empty((k, k))
    for rep in range(reps):
        yr = y[rep]
        pmin = np.inf
        pmax = -np.inf
        for g in range(9):
            v = _loglik_iii_one(yr, probe_grid[g], gaps, diag, off, mbuf)
            if v < pmin:
                pmin = v
            if v > pmax:
                pmax = v
        if pmax - pmin < _DEGENERATE_SPREAD:
            flags[rep] = 1
            beta[rep] = np.nan
            continue
        for g in range(_GRID_POINTS):
            vals[g] = _loglik_iii_one(yr, grid[g], gaps, diag, off, mbuf)
        j = 0
        for g in range(_GRID_POINTS):
            if vals[g] > vals[j]:
                j = g
        a = grid[max(j - 1, 0)]
        b = grid[min(j + 1, _GRID_POINTS - 1)]
        while b - a > tol:
            h = _INVPHI * (b - a)
            x1 = b - h
            x2 = a + h
            f1 = _loglik_iii_one(yr, x1, gaps, diag, off, mbuf)
            f2 = _loglik_iii_one(yr, x2, gaps, diag, off, mbuf)
            if f1 < f2:
                a = x1
            else:
                b = x2
        bh = 0.5 * (a + b)
        beta[rep] = bh
        if bh - lo <= 10.0 * tol or hi - bh <= 10.0 * tol:
            flags[rep] = 2
    return beta, flags
