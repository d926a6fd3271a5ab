"""Weighted projections that annihilate a design matrix.

Central object: for a positive definite weight W and an n x p design X of
full column rank, ``Q = I - X (X'WX)^{-1} X'W`` is the W-orthogonal
projection onto the W-orthogonal complement of span(X).  ``WQ`` is
symmetric positive semi-definite of rank n - p; its pseudo-determinant
(product of non-zero eigenvalues) is the normalising constant of the
residual likelihood.  An empty design gives Q = I and WQ = W.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Projector",
    "DistancePair",
    "check_design",
    "make_projector",
    "sequential_projectors",
    "distance_pair",
]

# Relative eigenvalue threshold used for every rank / pseudo-determinant
# decision, so rank(Q) and log_pdet always agree.
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class Projector:
    """W-orthogonal projection Q with kernel span(X), and the residual
    weight WQ with its rank and log pseudo-determinant."""

    q: np.ndarray
    wq: np.ndarray
    rank: int
    log_pdet_wq: float


@dataclass(frozen=True)
class DistancePair:
    """Inner-product matrix S = YY' and the squared distances
    dsq_ij = S_ii + S_jj - 2 S_ij it induces."""

    s: np.ndarray
    dsq: np.ndarray
    n_series: int


def check_design(x, n: int) -> np.ndarray:
    """Validate a design matrix: shape (n, p), full column rank.

    ``None`` means an empty design and comes back as an (n, 0) array.
    """
    if x is None:
        return np.zeros((n, 0))
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] != n:
        raise DomainError(f"design matrix must have {n} rows, got shape {x.shape}")
    p = x.shape[1]
    if p > n:
        raise DomainError(f"design has more columns ({p}) than rows ({n})")
    if p > 0:
        sv = np.linalg.svd(x, compute_uv=False)
        if sv[-1] <= RANK_RTOL * sv[0]:
            raise DomainError("design matrix is rank-deficient")
    return x


def _check_weight(w, n: int = None) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DomainError(f"weight matrix must be square, got shape {w.shape}")
    if n is not None and w.shape[0] != n:
        raise DomainError(f"weight matrix must be {n} x {n}, got {w.shape}")
    try:
        np.linalg.cholesky(0.5 * (w + w.T))
    except np.linalg.LinAlgError:
        raise DomainError("weight matrix is not positive definite") from None
    return w


def make_projector(w, x) -> Projector:
    """Build Q = I - X(X'WX)^{-1}X'W and WQ, with rank and log pseudo-det.

    The pseudo-determinant keeps the eigenvalues of WQ above
    RANK_RTOL * max eigenvalue; their count must equal n - p.
    """
    w = _check_weight(w)
    n = w.shape[0]
    x = check_design(x, n)
    p = x.shape[1]
    if p == 0:
        q = np.eye(n)
        wq = 0.5 * (w + w.T)
    else:
        wx = w @ x
        coef = np.linalg.solve(x.T @ wx, wx.T)  # (X'WX)^{-1} X'W
        q = np.eye(n) - x @ coef
        wq = w - wx @ coef
        wq = 0.5 * (wq + wq.T)
    eigs = np.linalg.eigvalsh(wq)
    cut = RANK_RTOL * eigs[-1]
    if eigs[0] < -1e-8 * eigs[-1]:
        raise DomainError("residual weight WQ is not positive semi-definite")
    kept = eigs[eigs > cut]
    if kept.size != n - p:
        raise DomainError(
            f"numerical rank of WQ is {kept.size}, expected {n - p}"
        )
    return Projector(
        q=q, wq=wq, rank=n - p, log_pdet_wq=float(np.sum(np.log(kept)))
    )


def sequential_projectors(w, x, y, mode: str) -> list:
    """Residual projectors for the series taken in the order given.

    mode "ut_full": the r-th projector annihilates span(X, Y_1, ..., Y_{r-1}),
    so ranks fall by one per step; projectors stop when the rank would hit 0.
    mode "markov": the r-th projector annihilates span(X, Y_{r-1}) only
    (with Y_0 = 0), so the rank is n - p for r = 1 and n - p - 1 after.
    """
    w = _check_weight(w)
    n = w.shape[0]
    x = check_design(x, n)
    p = x.shape[1]
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != n:
        raise DomainError(f"series matrix must have {n} rows, got shape {y.shape}")
    k = y.shape[1]
    if mode not in ("ut_full", "markov"):
        raise DomainError(f"unknown mode {mode!r}")

    out = []
    for r in range(1, k + 1):
        if mode == "ut_full":
            if n - p - r + 1 < 1:
                break
            span = np.hstack([x, y[:, : r - 1]])
        else:
            if r == 1:
                span = x
            else:
                if n - p - 1 < 1:
                    break
                span = np.hstack([x, y[:, r - 2 : r - 1]])
        if span.shape[1] > 0:
            sv = np.linalg.svd(span, compute_uv=False)
            if sv[-1] <= RANK_RTOL * sv[0]:
                raise DomainError(f"degenerate span at step r={r}: collinear columns")
        out.append(make_projector(w, span))
    return out


def distance_pair(y) -> DistancePair:
    """Inner products S = YY' and squared distances between the rows of Y."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    s = y @ y.T
    diag = np.diag(s)
    dsq = diag[:, None] + diag[None, :] - 2.0 * s
    np.fill_diagonal(dsq, 0.0)
    dsq = np.maximum(dsq, 0.0)
    return DistancePair(s=s, dsq=0.5 * (dsq + dsq.T), n_series=y.shape[1])
