"""Vectorised pure-numpy backend for the Monte Carlo kernels.

Replicates live on the leading axis; every operation below is a batched
matrix product, batched solve or einsum reduction over that axis.
"""

import numpy as np

NAME = "numpy"

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_GRID_POINTS = 33
_DEGENERATE_SPREAD = 1e-8


def batch_scores(y, p_mat, a_mat, tr_pd, n_eff, model_code):
    """Profile scores for a (reps, n, k) stack under a fixed residual
    weight P and its derivative contraction A = PDP."""
    reps, _, k = y.shape
    py = p_mat @ y
    ay = a_mat @ y
    if model_code == 1:
        qw = np.einsum("rnk,rnk->r", y, py)
        qa = np.einsum("rnk,rnk->r", y, ay)
        return -0.5 * k * tr_pd + 0.5 * n_eff * k * qa / qw
    if model_code == 2:
        qw = np.einsum("rnk,rnk->rk", y, py)
        qa = np.einsum("rnk,rnk->rk", y, ay)
        return -0.5 * k * tr_pd + 0.5 * n_eff * np.sum(qa / qw, axis=1)
    if k >= n_eff:
        return np.zeros(reps)
    yt = y.transpose(0, 2, 1)
    m_w = yt @ py
    m_a = yt @ ay
    sol = np.linalg.solve(m_w, m_a)
    t = np.trace(sol, axis1=1, axis2=2)
    return -0.5 * k * tr_pd + 0.5 * n_eff * t


def batch_ut_term_scores(y, x, w, d, n_terms):
    """Per-term triangular-residual scores, shape (reps, n_terms).

    Term r projects series r off span(x, previous series); the projector
    is rebuilt per replicate because it involves the data columns.
    """
    reps, n, _ = y.shape
    p = x.shape[1]
    out = np.empty((reps, n_terms))
    for r in range(1, n_terms + 1):
        m = p + r - 1
        col = y[:, :, r - 1]
        if m == 0:
            u = col @ w
            tr_prd = np.full(reps, np.trace(w @ d))
        else:
            span = np.concatenate(
                [np.broadcast_to(x, (reps, n, p)), y[:, :, : r - 1]], axis=2
            )
            wx = w @ span
            gram = span.transpose(0, 2, 1) @ wx
            coef = np.linalg.solve(gram, wx.transpose(0, 2, 1))
            p_stack = w[None, :, :] - wx @ coef
            p_stack = 0.5 * (p_stack + p_stack.transpose(0, 2, 1))
            tr_prd = np.einsum("rij,ji->r", p_stack, d)
            u = (p_stack @ col[:, :, None])[:, :, 0]
        quad_w = np.einsum("rn,rn->r", col, u)
        quad_a = np.einsum("rn,nm,rm->r", u, d, u)
        rank = n - p - r + 1
        out[:, r - 1] = -0.5 * tr_prd + 0.5 * rank * quad_a / quad_w
    return out


def _precision_stack(betas, gaps, n):
    """(len(betas), n, n) chain precisions and log det Gamma per beta."""
    rho = betas[:, None] ** gaps[None, :]
    s = 1.0 - rho * rho
    logdet = np.sum(np.log(s), axis=1)
    reps = betas.shape[0]
    w = np.zeros((reps, n, n))
    w[:, 0, 0] = 1.0 + rho[:, 0] ** 2 / s[:, 0]
    for i in range(1, n - 1):
        w[:, i, i] = 1.0 / s[:, i - 1] + rho[:, i] ** 2 / s[:, i]
    w[:, n - 1, n - 1] = 1.0 / s[:, n - 2]
    off = -rho / s
    for i in range(n - 1):
        w[:, i, i + 1] = off[:, i]
        w[:, i + 1, i] = off[:, i]
    return w, logdet


def _loglik_iii(y, betas, gaps):
    """Profile log likelihood of the full-covariance model for per-replicate
    betas (no design)."""
    _, n, k = y.shape
    w, logdet = _precision_stack(betas, gaps, n)
    py = w @ y
    m = y.transpose(0, 2, 1) @ py
    _, ld = np.linalg.slogdet(m)
    return -0.5 * k * logdet - 0.5 * n * ld


def batch_fit_model_iii(y, points, lo, hi, tol):
    """Maximum-likelihood beta per replicate for the full-covariance model.

    Mirrors the scalar fit: degeneracy probed on 9 points of the tame range
    |beta| <= 0.95, a 33-point scan brackets the maximum, golden-section
    refinement.  Returns (beta_hat, flags) with flag 0 ok, 1 degenerate
    (beta is nan), 2 boundary.
    """
    reps = y.shape[0]
    gaps = np.diff(np.asarray(points, dtype=float))
    probe_grid = np.linspace(max(lo, -0.95), min(hi, 0.95), 9)
    probe = np.empty((reps, 9))
    for g in range(9):
        probe[:, g] = _loglik_iii(y, np.full(reps, probe_grid[g]), gaps)
    degenerate = probe.max(axis=1) - probe.min(axis=1) < _DEGENERATE_SPREAD
    grid = np.linspace(lo, hi, _GRID_POINTS)
    vals = np.empty((reps, _GRID_POINTS))
    for g in range(_GRID_POINTS):
        vals[:, g] = _loglik_iii(y, np.full(reps, grid[g]), gaps)
    j = np.argmax(vals, axis=1)
    a = grid[np.maximum(j - 1, 0)]
    b = grid[np.minimum(j + 1, _GRID_POINTS - 1)]
    while np.max(b - a) > tol:
        h = _INVPHI * (b - a)
        x1 = b - h
        x2 = a + h
        f1 = _loglik_iii(y, x1, gaps)
        f2 = _loglik_iii(y, x2, gaps)
        move_a = f1 < f2
        a = np.where(move_a, x1, a)
        b = np.where(move_a, b, x2)
    beta = 0.5 * (a + b)
    flags = np.zeros(reps, dtype=np.int8)
    flags[(beta - lo <= 10.0 * tol) | (hi - beta <= 10.0 * tol)] = 2
    flags[degenerate] = 1
    beta[degenerate] = np.nan
    return beta, flags
