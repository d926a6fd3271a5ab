"""Correlation model for the observation points and cross-series covariance.

The within-series correlation is the stationary exponential (AR(1)) family
``corr(Y(x_i), Y(x_j)) = beta ** |x_i - x_j|`` on a strictly increasing
coordinate grid, with the convention ``0 ** 0 = 1`` so that ``beta = 0``
gives the identity.  The cross-series covariance comes in four flavours:
a common variance (model I), per-series variances (model II), an arbitrary
positive definite matrix (model III) and a Markov/Green family whose
inverse is tri-diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

__all__ = [
    "Ar1Model",
    "CovBundle",
    "ScalarVar",
    "DiagonalVar",
    "FullPd",
    "GreenMatrix",
    "SigmaSpec",
    "gamma_of",
    "build_sigma",
    "v_factor",
]


@dataclass(frozen=True)
class Ar1Model:
    """Observation grid for the exponential correlation family."""

    n: int
    points: np.ndarray = None

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"need at least two observation points, got n={self.n}")
        pts = self.points
        if pts is None:
            pts = np.arange(1.0, self.n + 1.0)
        pts = np.asarray(pts, dtype=float)
        if pts.shape != (self.n,):
            raise DomainError(f"points must have shape ({self.n},), got {pts.shape}")
        if np.any(np.diff(pts) <= 0.0):
            raise DomainError("points must be strictly increasing")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class CovBundle:
    """Correlation matrix, its inverse and its derivative at a given beta."""

    beta: float
    gamma: np.ndarray
    w: np.ndarray
    d: np.ndarray
    log_det_gamma: float

    @property
    def n(self) -> int:
        return self.gamma.shape[0]


def _chain_precision(rho: np.ndarray) -> np.ndarray:
    """Tri-diagonal precision of a unit-variance Markov chain with
    consecutive correlations ``rho``.

    Comes from the telescoping factorisation of the joint density:
    -2 log f = z_1^2 + sum_i (z_{i+1} - rho_i z_i)^2 / (1 - rho_i^2).
    """
    n = rho.size + 1
    s = 1.0 - rho * rho
    w = np.zeros((n, n))
    idx = np.arange(n - 1)
    w[0, 0] = 1.0 + rho[0] ** 2 / s[0]
    for i in range(1, n - 1):
        w[i, i] = 1.0 / s[i - 1] + rho[i] ** 2 / s[i]
    w[n - 1, n - 1] = 1.0 / s[n - 2]
    off = -rho / s
    w[idx, idx + 1] = off
    w[idx + 1, idx] = off
    return w


def gamma_of(model: Ar1Model, beta: float) -> CovBundle:
    """Correlation matrix Gamma(beta), its inverse W and derivative D.

    W is assembled from the closed-form tri-diagonal precision of the
    underlying Markov chain rather than by dense inversion, so it stays
    accurate up to very strong autocorrelation.
    """
    beta = float(beta)
    if not abs(beta) < 1.0:
        raise DomainError("autocorrelation outside open unit interval")
    pts = model.points
    lag = np.abs(pts[:, None] - pts[None, :])
    gaps = np.diff(pts)
    integer_lags = np.allclose(lag, np.round(lag), atol=1e-12)
    if beta < 0.0 and not integer_lags:
        raise DomainError("negative autocorrelation requires an integer lag grid")

    if beta == 0.0:
        gamma = np.eye(model.n)
        d = (np.abs(lag - 1.0) < 1e-12).astype(float)
        w = np.eye(model.n)
        log_det = 0.0
    else:
        gamma = beta ** lag
        d = np.zeros_like(lag)
        off = lag > 0.0
        d[off] = lag[off] * beta ** (lag[off] - 1.0)
        rho = beta ** gaps
        w = _chain_precision(rho)
        log_det = float(np.sum(np.log1p(-rho * rho)))
    return CovBundle(beta=beta, gamma=gamma, w=w, d=d, log_det_gamma=log_det)


def v_factor(bundle: CovBundle) -> float:
    """n * tr((WD)^2) - tr(WD)^2, the curvature factor of the information
    formulas.  Non-negative by Cauchy-Schwarz."""
    wd = bundle.w @ bundle.d
    n = bundle.n
    return float(n * np.trace(wd @ wd) - np.trace(wd) ** 2)


@dataclass(frozen=True)
class ScalarVar:
    """Common variance across series (model I)."""

    variance: float


@dataclass(frozen=True)
class DiagonalVar:
    """Independent series with per-series variances (model II)."""

    variances: tuple

    def __post_init__(self):
        object.__setattr__(self, "variances", tuple(float(v) for v in self.variances))


@dataclass(frozen=True)
class FullPd:
    """Arbitrary positive definite cross-series covariance (model III)."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))


@dataclass(frozen=True)
class GreenMatrix:
    """Markov cross-series covariance: Sigma_rs = a_r * b_s for r <= s,
    symmetric completion; its inverse is tri-diagonal."""

    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))


SigmaSpec = Union[ScalarVar, DiagonalVar, FullPd, GreenMatrix]


def _check_pd(sigma: np.ndarray) -> None:
    """Cholesky is the PD test; on failure name the first bad leading minor."""
    try:
        np.linalg.cholesky(sigma)
        return
    except np.linalg.LinAlgError:
        pass
    k = sigma.shape[0]
    for j in range(1, k + 1):
        if np.linalg.det(sigma[:j, :j]) <= 0.0:
            raise DomainError(
                f"covariance not positive definite: leading minor of order {j} is non-positive"
            )
    raise DomainError("covariance not positive definite")


def build_sigma(spec: SigmaSpec, k: int) -> np.ndarray:
    """Realize a cross-series covariance specification as a k x k matrix."""
    if k < 1:
        raise DomainError(f"need k >= 1 series, got {k}")
    if isinstance(spec, ScalarVar):
        if spec.variance <= 0.0:
            raise DomainError("variance must be positive")
        return spec.variance * np.eye(k)
    if isinstance(spec, DiagonalVar):
        if len(spec.variances) != k:
            raise DomainError(f"expected {k} variances, got {len(spec.variances)}")
        if any(v <= 0.0 for v in spec.variances):
            raise DomainError("variances must be positive")
        return np.diag(np.asarray(spec.variances))
    if isinstance(spec, FullPd):
        sigma = spec.matrix
        if sigma.shape != (k, k):
            raise DomainError(f"expected a {k} x {k} matrix, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, atol=1e-10 * max(1.0, np.abs(sigma).max())):
            raise DomainError("covariance must be symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        _check_pd(sigma)
        return sigma
    if isinstance(spec, GreenMatrix):
        if len(spec.a) != k or len(spec.b) != k:
            raise DomainError(f"Green factors must both have length {k}")
        a = np.asarray(spec.a)
        b = np.asarray(spec.b)
        upper = np.triu(np.outer(a, b))
        sigma = upper + np.triu(upper, 1).T
        _check_pd(sigma)
        inv = np.linalg.inv(sigma)
        band = np.abs(np.arange(k)[:, None] - np.arange(k)[None, :]) >= 2
        if np.any(np.abs(inv[band]) > 1e-8):
            raise DomainError("Green-matrix inverse is not tri-diagonal")
        return sigma
    raise DomainError(f"unknown covariance specification {type(spec).__name__}")
