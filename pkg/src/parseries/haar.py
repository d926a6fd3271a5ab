"""Closed-form moments of Haar-distributed orthogonal matrices.

Fourth moments are sums over bi-partitions: ordered pairs of perfect
matchings, one pairing the row indices and one the column indices.  A
bi-partition contributes only when every matched pair of indices is
actually equal; its coefficient depends only on whether the two matchings
coincide.  The quadratic-form expectations E tr(Z'AZ) and
cov(tr(Z'AZ), tr(Z'BZ)) for Z the first k columns of a Haar matrix are the
targets used to validate the information formulas.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = [
    "haar_second_moment",
    "haar_fourth_moment",
    "haar_fourth_cumulant",
    "trace_moment_expectations",
    "expected_tr_quad",
    "product_and_cov_tr_quad",
    "perfect_matchings",
    "bipartition_pair_counts",
]

# The three perfect matchings of {0, 1, 2, 3}, i.e. 12|34, 13|24, 14|23.
_PAIRINGS4 = (
    ((0, 1), (2, 3)),
    ((0, 2), (1, 3)),
    ((0, 3), (1, 2)),
)


def _check_indices(idx, n: int, what: str):
    if len(idx) != 4:
        raise DomainError(f"{what} must hold 4 indices, got {len(idx)}")
    if any(not (1 <= v <= n) for v in idx):
        raise DomainError(f"{what} indices must lie in 1..{n}")


def _delta(pairing, idx) -> float:
    return 1.0 if all(idx[a] == idx[b] for a, b in pairing) else 0.0


def haar_second_moment(r: int, s: int, i: int, j: int, n: int) -> float:
    """E(H_r^i H_s^j) = [r == s][i == j] / n."""
    if n < 2:
        raise DomainError("need n >= 2")
    for v in (r, s):
        if not 1 <= v <= n:
            raise DomainError(f"row indices must lie in 1..{n}")
    for v in (i, j):
        if not 1 <= v <= n:
            raise DomainError(f"column indices must lie in 1..{n}")
    return (1.0 if (r == s and i == j) else 0.0) / n


def haar_fourth_moment(rows, cols, n: int) -> float:
    """E(H H H H) over the 9 bi-partitions: coefficient n + 1 when the row
    and column matchings coincide, -1 otherwise, all over n(n-1)(n+2)."""
    if n < 2:
        raise DomainError("need n >= 2")
    _check_indices(rows, n, "rows")
    _check_indices(cols, n, "cols")
    total = 0.0
    for sig in _PAIRINGS4:
        dr = _delta(sig, rows)
        if dr == 0.0:
            continue
        for tau in _PAIRINGS4:
            dc = _delta(tau, cols)
            if dc == 0.0:
                continue
            total += (n + 1.0) if sig == tau else -1.0
    return total / (n * (n - 1.0) * (n + 2.0))


def haar_fourth_cumulant(rows, cols, n: int) -> float:
    """Fourth cumulant: coefficient 2 on coinciding matchings and -n
    otherwise, over n^2 (n-1)(n+2)."""
    if n < 2:
        raise DomainError("need n >= 2")
    _check_indices(rows, n, "rows")
    _check_indices(cols, n, "cols")
    total = 0.0
    for sig in _PAIRINGS4:
        dr = _delta(sig, rows)
        if dr == 0.0:
            continue
        for tau in _PAIRINGS4:
            dc = _delta(tau, cols)
            if dc == 0.0:
                continue
            total += 2.0 if sig == tau else -float(n)
    return total / (n * n * (n - 1.0) * (n + 2.0))


def trace_moment_expectations(n: int):
    """(E tr(H^2), E tr^2(H), E tr(H^4), E tr^2(H^2)) = (1, 1, 1, 3),
    independent of n >= 2."""
    if n < 2:
        raise DomainError("need n >= 2")
    return (1.0, 1.0, 1.0, 3.0)


def expected_tr_quad(a, n: int, k: int) -> float:
    """E tr(Z'AZ) = k tr(A) / n for Z the first k Haar columns."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    a = np.asarray(a, dtype=float)
    if a.shape != (n, n):
        raise DomainError(f"matrix must be {n} x {n}, got {a.shape}")
    return k * float(np.trace(a)) / n


def product_and_cov_tr_quad(a, b, n: int, k: int):
    """Product moment and covariance of (tr(Z'AZ), tr(Z'BZ)).

    Returns (product_moment, covariance).  The covariance must equal the
    product moment minus the product of the means; both sides are computed
    and reconciled to 1e-12 relative as a guard against transcription slips.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for m, name in ((a, "a"), (b, "b")):
        if m.shape != (n, n):
            raise DomainError(f"matrix {name} must be {n} x {n}, got {m.shape}")
    tra = float(np.trace(a))
    trb = float(np.trace(b))
    trab = float(np.trace(a @ b))
    denom = n * (n - 1.0) * (n + 2.0)
    product = (k * (n * k + k - 2.0) * tra * trb + 2.0 * k * (n - k) * trab) / denom
    cov = 2.0 * k * (n - k) * (trab - tra * trb / n) / denom
    residual = cov - (product - (k * tra / n) * (k * trb / n))
    scale = max(1.0, abs(product), abs(cov))
    if abs(residual) > 1e-12 * scale:
        raise AssertionError(
            f"covariance identity violated by {residual:.3e} (scale {scale:.3e})"
        )
    return product, cov


def perfect_matchings(order: int):
    """All partitions of {0, ..., order-1} into blocks of size two."""
    if order % 2 != 0 or order < 0:
        raise DomainError("order must be a non-negative even integer")
    items = list(range(order))

    def rec(rest):
        if not rest:
            yield ()
            return
        first = rest[0]
        for idx in range(1, len(rest)):
            pair = (first, rest[idx])
            remaining = rest[1:idx] + rest[idx + 1 :]
            for tail in rec(remaining):
                yield (pair,) + tail

    return list(rec(items))


def _n_components(order: int, sig, tau) -> int:
    parent = list(range(order))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in list(sig) + list(tau):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in range(order)})


def bipartition_pair_counts(order: int) -> dict:
    """Count ordered pairs of perfect matchings by the number of blocks of
    their least upper bound (connected components of the union graph)."""
    matchings = perfect_matchings(order)
    counts: dict = {}
    for sig in matchings:
        for tau in matchings:
            blocks = _n_components(order, sig, tau)
            counts[blocks] = counts.get(blocks, 0) + 1
    return counts
