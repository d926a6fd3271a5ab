"""Seeded generation of matrix-Gaussian data and Haar orthogonal matrices.

All randomness flows through one counter-style construction built on the
splitmix64 finalizer.  A stream with seed ``s`` produces the 64-bit words

    out_j = finalize(s + (j + 1) * 0x9E3779B97F4A7C15)   (mod 2^64)

and replicate ``i`` of a run owns the stream seeded by
``derive_seed(master, i) = finalize(master + (i + 1) * 0x9E3779B97F4A7C15)``.
The derivation is a pure function of (master, i), so serial and parallel
execution produce identical draws in any order.  Uniforms are the top 53
bits of each word, and normals come from the inverse normal CDF, which
consumes exactly one word per variate (no rejection), keeping stream
positions reproducible.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import DomainError

__all__ = [
    "derive_seed",
    "stream_uniforms",
    "stream_normals",
    "sample_gaussian",
    "sample_gaussian_stack",
    "sample_haar_orthogonal",
    "sample_haar_columns",
    "sample_haar_stack",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _finalize(z):
    """splitmix64 finalizer on uint64 scalars or arrays (wraps mod 2^64)."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def derive_seed(master: int, index: int) -> int:
    """Seed of replicate ``index`` under ``master``; pure and order-free."""
    if index < 0:
        raise DomainError("replicate index must be non-negative")
    with np.errstate(over="ignore"):
        z = np.uint64(master & _MASK) + np.uint64(index + 1) * _GOLDEN
    return int(_finalize(z))


def _stream_words(seeds, count: int):
    """(len(seeds), count) uint64 outputs; row i is the stream of seeds[i]."""
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    with np.errstate(over="ignore"):
        steps = (np.arange(1, count + 1, dtype=np.uint64)) * _GOLDEN
        z = seeds[:, None] + steps[None, :]
    return _finalize(z)


def stream_uniforms(seed: int, count: int) -> np.ndarray:
    """``count`` uniforms in the open interval (0, 1) from one stream."""
    words = _stream_words([np.uint64(seed & _MASK)], count)[0]
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def stream_normals(seed: int, shape) -> np.ndarray:
    """Standard normals via the inverse CDF, one stream word per variate."""
    count = int(np.prod(shape))
    return ndtri(stream_uniforms(seed, count)).reshape(shape)


def _normals_stack(master: int, reps: int, shape) -> np.ndarray:
    """(reps, *shape) normals; replicate i uses its derived stream."""
    with np.errstate(over="ignore"):
        seeds = np.uint64(master & _MASK) + (
            np.arange(1, reps + 1, dtype=np.uint64) * _GOLDEN
        )
    seeds = _finalize(seeds)
    count = int(np.prod(shape))
    words = _stream_words(seeds, count)
    u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u).reshape((reps, *shape))


def _chol(mat, what: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(np.asarray(mat, dtype=float))
    except np.linalg.LinAlgError:
        raise DomainError(f"{what} is not positive definite") from None


def sample_gaussian(n: int, k: int, gamma, sigma, seed: int) -> np.ndarray:
    """One n x k draw with cov(Y_ir, Y_js) = Gamma_ij * Sigma_rs."""
    lg = _chol(gamma, "gamma")
    ls = _chol(sigma, "sigma")
    g = stream_normals(seed, (n, k))
    return lg @ g @ ls.T


def sample_gaussian_stack(
    n: int, k: int, gamma, sigma, master: int, reps: int
) -> np.ndarray:
    """(reps, n, k) draws; replicate i is sample_gaussian with its derived seed."""
    lg = _chol(gamma, "gamma")
    ls = _chol(sigma, "sigma")
    g = _normals_stack(master, reps, (n, k))
    return lg @ g @ ls.T


def _qr_sign_fix(q, r):
    """Make the QR-based sample Haar by forcing positive diagonal in R."""
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0.0, 1.0, d)
    return q * d[..., None, :]


def sample_haar_orthogonal(n: int, seed: int) -> np.ndarray:
    """Haar-uniform n x n orthogonal matrix (QR with sign correction)."""
    if n < 1:
        raise DomainError("need n >= 1")
    g = stream_normals(seed, (n, n))
    q, r = np.linalg.qr(g)
    return _qr_sign_fix(q, r)


def sample_haar_columns(n: int, k: int, seed: int) -> np.ndarray:
    """First k columns of a Haar orthogonal matrix (n x k, orthonormal)."""
    if k > n:
        raise DomainError(f"cannot take k={k} orthonormal columns in dimension {n}")
    if k < 1:
        raise DomainError("need k >= 1")
    g = stream_normals(seed, (n, k))
    q, r = np.linalg.qr(g)
    return _qr_sign_fix(q, r)


def sample_haar_stack(n: int, k: int, master: int, reps: int) -> np.ndarray:
    """(reps, n, k) stack of Haar orthonormal-column draws."""
    if k > n:
        raise DomainError(f"cannot take k={k} orthonormal columns in dimension {n}")
    g = _normals_stack(master, reps, (n, k))
    q, r = np.linalg.qr(g)
    return _qr_sign_fix(q, r)
