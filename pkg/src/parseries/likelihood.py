"""Profile and residual log likelihoods for the series autocorrelation.

For an n x k data matrix Y with separable covariance, the nuisance
cross-series covariance is profiled out in closed form, leaving a
one-parameter log likelihood in beta for each model:

    I   common variance:      -(k/2) log|Gamma| - (nk/2) log tr(Y'WY)
    II  per-series variances: -(k/2) log|Gamma| - (n/2) sum_r log(Y_r'WY_r)
    III arbitrary PD Sigma:   -(k/2) log|Gamma| - (n/2) log det(Y'WY)

with W = Gamma^{-1}.  When a design matrix X is supplied, the residual
(REML) versions replace W by the rank n-p residual weight P = WQ, the
log-determinant term by the log pseudo-determinant of P, and n by n - p.
Everything here flows through that single substitution.

Scores are exact derivatives: d log|Gamma|/d beta = tr(WD) and
dP/d beta = -PDP, so each quadratic form differentiates in closed form.
Model III with k >= n - p is a known degenerate regime: the likelihood is
constant in beta and the score is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import Ar1Model, CovBundle, gamma_of
from .errors import DegenerateLikelihoodError, DomainError
from .projection import RANK_RTOL, DistancePair, check_design, make_projector, sequential_projectors

__all__ = [
    "MODELS",
    "LikelihoodEval",
    "FitResult",
    "profile_loglik",
    "score",
    "expected_info",
    "efficiency_II_vs_I",
    "fit_beta",
    "evaluate",
    "ut_subgroup_loglik",
    "ut_subgroup_score",
    "markov_conditional_loglik",
    "markov_conditional_score",
    "distance_loglik_model_I",
    "distance_score_model_I",
    "distance_loglik_model_II",
    "distance_score_model_II",
]

MODELS = ("I", "II", "III")

BETA_EDGE = 1e-6  # search interval is clipped at +/- (1 - BETA_EDGE)
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LikelihoodEval:
    """Log likelihood, exact score, closed-form expected information and
    finite-difference observed information at one beta."""

    loglik: float
    score: float
    expected_info: float
    observed_info: float


@dataclass(frozen=True)
class FitResult:
    beta_hat: float
    se: float
    loglik_at_max: float
    evaluations: int
    boundary: bool


def _model_code(model) -> int:
    try:
        return {"I": 1, "II": 2, "III": 3}[str(model).upper()]
    except KeyError:
        raise DomainError(f"unknown model {model!r}; expected one of {MODELS}") from None


def _as_data(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2 or y.shape[0] < 2 or y.shape[1] < 1:
        raise DomainError(f"data must be an n x k matrix with n >= 2, got shape {y.shape}")
    return y


def _context(n: int, beta: float, x, points):
    """(bundle, residual weight P, effective size n-p, log pseudo-det of P)."""
    bundle = gamma_of(Ar1Model(n, points), beta)
    if x is None:
        return bundle, bundle.w, n, -bundle.log_det_gamma
    proj = make_projector(bundle.w, check_design(x, n))
    return bundle, proj.wq, proj.rank, proj.log_pdet_wq


def _log_pdet_psd(mat: np.ndarray, full_rank: bool):
    """log det for a PD matrix, or log pseudo-det (relative cut) otherwise."""
    mat = 0.5 * (mat + mat.T)
    if full_rank:
        sign, ld = np.linalg.slogdet(mat)
        if sign <= 0.0:
            raise DegenerateLikelihoodError("cross-series quadratic form is singular")
        return ld
    eigs = np.linalg.eigvalsh(mat)
    kept = eigs[eigs > RANK_RTOL * max(eigs[-1], 0.0)]
    if kept.size == 0:
        raise DegenerateLikelihoodError("cross-series quadratic form vanished")
    return float(np.sum(np.log(kept)))


def profile_loglik(y, beta: float, model, x=None, points=None) -> float:
    """Profile log likelihood at beta (residual version when x is given)."""
    y = _as_data(y)
    n, k = y.shape
    code = _model_code(model)
    _, p_mat, n_eff, log_pdet = _context(n, beta, x, points)
    first = 0.5 * k * log_pdet
    py = p_mat @ y
    if code == 1:
        quad = float(np.sum(y * py))
        if quad <= 0.0:
            raise DegenerateLikelihoodError("non-positive total quadratic form")
        return first - 0.5 * n_eff * k * np.log(quad)
    if code == 2:
        quads = np.sum(y * py, axis=0)
        if np.any(quads <= 0.0):
            raise DegenerateLikelihoodError("non-positive per-series quadratic form")
        return first - 0.5 * n_eff * float(np.sum(np.log(quads)))
    m = y.T @ py
    exponent = max(k, n_eff)
    return first - 0.5 * exponent * _log_pdet_psd(m, full_rank=k <= n_eff)


def score(y, beta: float, model, x=None, points=None) -> float:
    """Exact derivative of profile_loglik with respect to beta."""
    y = _as_data(y)
    n, k = y.shape
    code = _model_code(model)
    bundle, p_mat, n_eff, _ = _context(n, beta, x, points)
    a_mat = p_mat @ bundle.d @ p_mat
    tr_pd = float(np.trace(p_mat @ bundle.d))
    py = p_mat @ y
    ay = a_mat @ y
    if code == 1:
        quad_w = float(np.sum(y * py))
        quad_a = float(np.sum(y * ay))
        if quad_w <= 0.0:
            raise DegenerateLikelihoodError("non-positive total quadratic form")
        return -0.5 * k * tr_pd + 0.5 * n_eff * k * quad_a / quad_w
    if code == 2:
        quads_w = np.sum(y * py, axis=0)
        quads_a = np.sum(y * ay, axis=0)
        if np.any(quads_w <= 0.0):
            raise DegenerateLikelihoodError("non-positive per-series quadratic form")
        return -0.5 * k * tr_pd + 0.5 * n_eff * float(np.sum(quads_a / quads_w))
    if k >= n_eff:
        # constant likelihood: det(Y'PY) factors into beta-free pieces
        return 0.0
    m_w = y.T @ py
    m_a = y.T @ ay
    try:
        t = float(np.trace(np.linalg.solve(0.5 * (m_w + m_w.T), 0.5 * (m_a + m_a.T))))
    except np.linalg.LinAlgError:
        raise DegenerateLikelihoodError("cross-series quadratic form is singular") from None
    return -0.5 * k * tr_pd + 0.5 * n_eff * t


def expected_info(n: int, k: int, bundle: CovBundle, model, x=None) -> float:
    """Closed-form Fisher information for beta.

    With a design the substitution is n -> n - p, W -> P, and the curvature
    factor V = n tr((WD)^2) - tr^2(WD) is recomputed from P.
    """
    code = _model_code(model)
    if bundle.n != n:
        raise DomainError(f"bundle is for n={bundle.n}, expected {n}")
    if k < 1:
        raise DomainError("need k >= 1")
    if x is None:
        p_mat, n_eff = bundle.w, n
    else:
        proj = make_projector(bundle.w, check_design(x, n))
        p_mat, n_eff = proj.wq, proj.rank
    pd = p_mat @ bundle.d
    v = n_eff * float(np.trace(pd @ pd)) - float(np.trace(pd)) ** 2
    if code == 1:
        return v * k * k / (2.0 * (n_eff * k + 2.0))
    if code == 2:
        return v * k / (2.0 * (n_eff + 2.0))
    if k > n_eff:
        raise DomainError("information formula undefined; likelihood degenerate")
    if k == n_eff:
        return 0.0
    return v * k * (n_eff - k) / (2.0 * (n_eff - 1.0) * (n_eff + 2.0))


def efficiency_II_vs_I(n: int, k: int) -> float:
    """(nk + 2) / (nk + 2k): information of model II relative to model I
    under shared-variance data; decreases from 1 at k=1 to n/(n+2)."""
    if n < 1 or k < 1:
        raise DomainError("need n >= 1 and k >= 1")
    return (n * k + 2.0) / (n * k + 2.0 * k)


def _golden_max(fun, lo: float, hi: float, tol: float):
    """Golden-section maximisation; both probes recomputed per iteration so
    the accelerated batch kernels can mirror the exact same arithmetic."""
    a, b = lo, hi
    evals = 0
    while b - a > tol:
        h = _INVPHI * (b - a)
        x1 = b - h
        x2 = a + h
        evals += 2
        if fun(x1) < fun(x2):
            a = x1
        else:
            b = x2
    return 0.5 * (a + b), evals


def fit_beta(y, model, x=None, points=None, search=None, tol: float = 1e-8) -> FitResult:
    """Maximise the profile log likelihood over beta.

    A 33-point scan over the search interval locates the bracket, then
    golden-section search refines to ``tol``.  Degeneracy is probed first:
    the likelihood must move by at least 1e-8 over 9 points of the
    numerically tame range |beta| <= 0.95, where a constant likelihood
    stays constant to far better than that even in floating point.  The
    standard error is expected_info(beta_hat)^{-1/2}.
    """
    y = _as_data(y)
    n, k = y.shape
    if search is None:
        search = (-1.0 + BETA_EDGE, 1.0 - BETA_EDGE)
    lo, hi = float(search[0]), float(search[1])
    if not (-1.0 < lo < hi < 1.0):
        raise DomainError("search interval must satisfy -1 < lo < hi < 1")

    def fun(b):
        return profile_loglik(y, b, model, x, points)

    probe = np.array([fun(b) for b in np.linspace(max(lo, -0.95), min(hi, 0.95), 9)])
    if probe.max() - probe.min() < 1e-8:
        raise DegenerateLikelihoodError("uninformative likelihood")
    grid = np.linspace(lo, hi, 33)
    vals = np.array([fun(b) for b in grid])
    evals = 42
    j = int(np.argmax(vals))
    a = grid[max(j - 1, 0)]
    b = grid[min(j + 1, 32)]
    beta_hat, gevals = _golden_max(fun, float(a), float(b), tol)
    evals += gevals + 1
    loglik = fun(beta_hat)
    boundary = beta_hat - lo <= 10.0 * tol or hi - beta_hat <= 10.0 * tol

    bundle = gamma_of(Ar1Model(n, points), beta_hat)
    info = expected_info(n, k, bundle, model, x)
    se = float(1.0 / np.sqrt(info)) if info > 0.0 else np.inf
    return FitResult(
        beta_hat=float(beta_hat),
        se=se,
        loglik_at_max=float(loglik),
        evaluations=evals,
        boundary=bool(boundary),
    )


def evaluate(y, beta: float, model, x=None, points=None) -> LikelihoodEval:
    """Log likelihood, score, expected and observed information at beta.

    Observed information is the central second difference with step
    h = 1e-5 * max(1, |beta|).  In the degenerate model III regime the
    expected information is reported as zero.
    """
    y = _as_data(y)
    n, k = y.shape
    loglik = profile_loglik(y, beta, model, x, points)
    sc = score(y, beta, model, x, points)
    bundle = gamma_of(Ar1Model(n, points), beta)
    if _model_code(model) == 3:
        n_eff = n if x is None else make_projector(bundle.w, check_design(x, n)).rank
        info = 0.0 if k >= n_eff else expected_info(n, k, bundle, model, x)
    else:
        info = expected_info(n, k, bundle, model, x)
    h = 1e-5 * max(1.0, abs(beta))
    l_plus = profile_loglik(y, beta + h, model, x, points)
    l_minus = profile_loglik(y, beta - h, model, x, points)
    obs = -(l_plus - 2.0 * loglik + l_minus) / (h * h)
    return LikelihoodEval(
        loglik=float(loglik), score=float(sc), expected_info=float(info), observed_info=float(obs)
    )


def _apply_order(y: np.ndarray, order):
    if order is None:
        return y
    k = y.shape[1]
    if sorted(order) != list(range(k)):
        raise DomainError(f"order must be a permutation of 0..{k - 1}")
    return y[:, list(order)]


def ut_subgroup_loglik(y, beta: float, x=None, order=None, points=None) -> float:
    """Triangular-residual marginal log likelihood: series r contributes the
    single-series residual term with design (X, Y_1, ..., Y_{r-1}).

    Terms are included while the residual rank stays positive.  The value
    depends on the series order.
    """
    y = _as_data(y)
    y = _apply_order(y, order)
    n = y.shape[0]
    bundle = gamma_of(Ar1Model(n, points), beta)
    projs = sequential_projectors(bundle.w, x, y, "ut_full")
    total = 0.0
    for r, proj in enumerate(projs):
        col = y[:, r]
        quad = float(col @ proj.wq @ col)
        if quad <= 0.0:
            raise DegenerateLikelihoodError(f"non-positive residual quadratic form at step {r + 1}")
        total += 0.5 * proj.log_pdet_wq - 0.5 * proj.rank * np.log(quad)
    return total


def ut_subgroup_score(y, beta: float, x=None, order=None, points=None) -> float:
    """Exact derivative of ut_subgroup_loglik."""
    y = _as_data(y)
    y = _apply_order(y, order)
    n = y.shape[0]
    bundle = gamma_of(Ar1Model(n, points), beta)
    projs = sequential_projectors(bundle.w, x, y, "ut_full")
    total = 0.0
    for r, proj in enumerate(projs):
        col = y[:, r]
        u = proj.wq @ col
        quad_w = float(col @ u)
        quad_a = float(u @ bundle.d @ u)
        if quad_w <= 0.0:
            raise DegenerateLikelihoodError(f"non-positive residual quadratic form at step {r + 1}")
        total += -0.5 * float(np.trace(proj.wq @ bundle.d)) + 0.5 * proj.rank * quad_a / quad_w
    return total


def markov_conditional_loglik(y, beta: float, x, points=None) -> float:
    """Sum of single-series residual terms where series r is projected off
    (X, Y_{r-1}) only, matching a Markov cross-series dependence."""
    y = _as_data(y)
    n, k = y.shape
    bundle = gamma_of(Ar1Model(n, points), beta)
    projs = sequential_projectors(bundle.w, x, y, "markov")
    if len(projs) < k:
        raise DomainError("residual rank exhausted; design too large for the chain terms")
    total = 0.0
    for r, proj in enumerate(projs):
        col = y[:, r]
        quad = float(col @ proj.wq @ col)
        if quad <= 0.0:
            raise DegenerateLikelihoodError(f"non-positive residual quadratic form at step {r + 1}")
        total += 0.5 * proj.log_pdet_wq - 0.5 * proj.rank * np.log(quad)
    return total


def markov_conditional_score(y, beta: float, x, points=None) -> float:
    """Exact derivative of markov_conditional_loglik."""
    y = _as_data(y)
    n, k = y.shape
    bundle = gamma_of(Ar1Model(n, points), beta)
    projs = sequential_projectors(bundle.w, x, y, "markov")
    if len(projs) < k:
        raise DomainError("residual rank exhausted; design too large for the chain terms")
    total = 0.0
    for r, proj in enumerate(projs):
        col = y[:, r]
        u = proj.wq @ col
        quad_w = float(col @ u)
        quad_a = float(u @ bundle.d @ u)
        if quad_w <= 0.0:
            raise DegenerateLikelihoodError(f"non-positive residual quadratic form at step {r + 1}")
        total += -0.5 * float(np.trace(proj.wq @ bundle.d)) + 0.5 * proj.rank * quad_a / quad_w
    return total


def _require_constant_in_span(x: np.ndarray, n: int) -> None:
    ones = np.ones(n)
    coef, *_ = np.linalg.lstsq(x, ones, rcond=None)
    if np.linalg.norm(ones - x @ coef) > 1e-8 * np.sqrt(n):
        raise DomainError("design must span the constant vector for distance likelihoods")


def _distance_context(n: int, beta: float, x, points):
    x = check_design(x, n)
    if x.shape[1] == 0:
        raise DomainError("distance likelihoods require a design matrix")
    _require_constant_in_span(x, n)
    bundle = gamma_of(Ar1Model(n, points), beta)
    proj = make_projector(bundle.w, x)
    return bundle, proj


def distance_loglik_model_I(dpair: DistancePair, beta: float, x, points=None) -> float:
    """Model I residual log likelihood computed from squared distances alone.

    Because the residual weight annihilates the constant vector,
    tr(P S) = -tr(P dsq) / 2, so the inner-product matrix never needs to be
    observed.
    """
    n = dpair.dsq.shape[0]
    k = dpair.n_series
    _, proj = _distance_context(n, beta, x, points)
    t = -0.5 * float(np.trace(proj.wq @ dpair.dsq))
    if t <= 0.0:
        raise DegenerateLikelihoodError("non-positive distance trace")
    return 0.5 * k * proj.log_pdet_wq - 0.5 * proj.rank * k * np.log(t)


def distance_score_model_I(dpair: DistancePair, beta: float, x, points=None) -> float:
    """Exact derivative of distance_loglik_model_I."""
    n = dpair.dsq.shape[0]
    k = dpair.n_series
    bundle, proj = _distance_context(n, beta, x, points)
    p_mat = proj.wq
    a_mat = p_mat @ bundle.d @ p_mat
    t = -0.5 * float(np.trace(p_mat @ dpair.dsq))
    ta = -0.5 * float(np.trace(a_mat @ dpair.dsq))
    if t <= 0.0:
        raise DegenerateLikelihoodError("non-positive distance trace")
    return k * (-0.5 * float(np.trace(p_mat @ bundle.d)) + 0.5 * proj.rank * ta / t)


def distance_loglik_model_II(dpairs, beta: float, x, points=None) -> float:
    """Model II residual log likelihood from per-series squared distances."""
    if len(dpairs) < 1:
        raise DomainError("need at least one per-series distance matrix")
    n = dpairs[0].dsq.shape[0]
    k = len(dpairs)
    _, proj = _distance_context(n, beta, x, points)
    total = 0.5 * k * proj.log_pdet_wq
    for r, dp in enumerate(dpairs):
        t = -0.5 * float(np.trace(proj.wq @ dp.dsq))
        if t <= 0.0:
            raise DegenerateLikelihoodError(f"non-positive distance trace for series {r + 1}")
        total -= 0.5 * proj.rank * np.log(t)
    return total


def distance_score_model_II(dpairs, beta: float, x, points=None) -> float:
    """Exact derivative of distance_loglik_model_II."""
    if len(dpairs) < 1:
        raise DomainError("need at least one per-series distance matrix")
    n = dpairs[0].dsq.shape[0]
    k = len(dpairs)
    bundle, proj = _distance_context(n, beta, x, points)
    p_mat = proj.wq
    a_mat = p_mat @ bundle.d @ p_mat
    total = -0.5 * k * float(np.trace(p_mat @ bundle.d))
    for r, dp in enumerate(dpairs):
        t = -0.5 * float(np.trace(p_mat @ dp.dsq))
        ta = -0.5 * float(np.trace(a_mat @ dp.dsq))
        if t <= 0.0:
            raise DegenerateLikelihoodError(f"non-positive distance trace for series {r + 1}")
        total += 0.5 * proj.rank * ta / t
    return total
