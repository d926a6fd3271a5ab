"""Seeded Monte Carlo experiments for the information theory of parallel
series: Bartlett identity checks, the information hump and collapse of the
full-covariance model, the series-deletion anomaly, invariance to the
cross-series covariance, triangular-residual information curves, and the
efficiency table.

Every experiment is a pure function of its configuration and a 64-bit
seed.  Replicate streams derive from the seed as documented in
``sampling``; multi-arm experiments give arm ``a`` the master seed
``derive_seed(seed, a)``, so results do not depend on evaluation order or
worker count.  Standard errors use batch means over 20 replicate batches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .covariance import Ar1Model, DiagonalVar, ScalarVar, build_sigma, gamma_of
from .errors import DomainError, ExperimentError
from .likelihood import (
    BETA_EDGE,
    _model_code,
    efficiency_II_vs_I,
    expected_info,
    profile_loglik,
)
from .projection import check_design, make_projector
from .sampling import derive_seed, sample_gaussian, sample_gaussian_stack, stream_uniforms

__all__ = [
    "N_BATCHES",
    "Z_LIMIT",
    "McReport",
    "InfoCurve",
    "DeletionReport",
    "DegeneracyReport",
    "SigmaIndependenceReport",
    "UtInfoCurve",
    "EfficiencyTable",
    "bartlett_check",
    "info_curve",
    "deletion_experiment",
    "degeneracy_check",
    "sigma_independence_check",
    "ut_info_curve",
    "efficiency_table",
    "haar_trace_moment_check",
    "polynomial_design",
]

N_BATCHES = 20
Z_LIMIT = 3.0


@dataclass(frozen=True)
class McReport:
    """A Monte Carlo estimate with batch-means standard error and, when a
    closed-form target exists, the z-score against it."""

    label: str
    estimate: float
    std_error: float
    target: float
    z: float
    reps: int
    seed: int

    @property
    def passed(self) -> bool:
        return abs(self.z) <= Z_LIMIT


def _zscore(estimate: float, target: float, se: float) -> float:
    if se > 0.0:
        return (estimate - target) / se
    return 0.0 if estimate == target else np.inf


def _batch_stat(values: np.ndarray, stat) -> float:
    """Batch-means standard error of ``stat`` over N_BATCHES batches."""
    batches = np.array_split(values, N_BATCHES)
    per = np.array([stat(b) for b in batches])
    return float(per.std(ddof=1) / np.sqrt(len(per)))


def _mean_report(values, target, reps, seed, label) -> McReport:
    est = float(values.mean())
    se = _batch_stat(values, np.mean)
    return McReport(label, est, se, float(target), _zscore(est, target, se), reps, seed)


def _var_report(values, target, reps, seed, label) -> McReport:
    est = float(values.var(ddof=1))
    se = _batch_stat(values, lambda b: b.var(ddof=1))
    return McReport(label, est, se, float(target), _zscore(est, target, se), reps, seed)


def polynomial_design(n: int, p: int, points=None) -> np.ndarray:
    """Default design with p columns: powers 0..p-1 of the grid coordinates
    (p = 1 is the constant column); None when p = 0."""
    if p == 0:
        return None
    if p < 0 or p >= n:
        raise DomainError(f"need 0 <= p < n, got p={p}")
    pts = Ar1Model(n, points).points
    return np.column_stack([pts**j for j in range(p)])


def _score_context(n: int, beta: float, x):
    """(bundle, residual weight, PDP, tr(PD), n - p) for score kernels."""
    bundle = gamma_of(Ar1Model(n), beta)
    if x is None:
        p_mat, n_eff = bundle.w, n
    else:
        proj = make_projector(bundle.w, check_design(x, n))
        p_mat, n_eff = proj.wq, proj.rank
    a_mat = p_mat @ bundle.d @ p_mat
    tr_pd = float(np.trace(p_mat @ bundle.d))
    return bundle, p_mat, a_mat, tr_pd, n_eff


def _check_sigma_for_model(model_code: int, sigma_spec) -> None:
    if model_code == 1 and not isinstance(sigma_spec, ScalarVar):
        raise DomainError("model I data require a common-variance sigma")
    if model_code == 2 and not isinstance(sigma_spec, (ScalarVar, DiagonalVar)):
        raise DomainError("model II data require a diagonal sigma")


def bartlett_check(
    n: int,
    k: int,
    beta: float,
    model,
    sigma_spec,
    x=None,
    reps: int = 50_000,
    seed: int = 0,
):
    """Mean and variance of the score at the data-generating beta.

    Returns (mean_report, var_report): the mean targets zero and the
    variance targets the closed-form information.
    """
    code = _model_code(model)
    _check_sigma_for_model(code, sigma_spec)
    bundle, p_mat, a_mat, tr_pd, n_eff = _score_context(n, beta, x)
    if code == 3 and k > n_eff:
        raise DomainError("information formula undefined; likelihood degenerate")
    sigma = build_sigma(sigma_spec, k)
    y = sample_gaussian_stack(n, k, bundle.gamma, sigma, seed, reps)
    scores = _kernels.batch_scores(y, p_mat, a_mat, tr_pd, n_eff, code)
    target = expected_info(n, k, bundle, model, x)
    return (
        _mean_report(scores, 0.0, reps, seed, f"mean-score model {model} n={n} k={k}"),
        _var_report(scores, target, reps, seed, f"var-score model {model} n={n} k={k}"),
    )


@dataclass(frozen=True)
class InfoCurve:
    """Closed-form and Monte Carlo information per number of series."""

    n: int
    beta: float
    model: str
    reps: int
    seed: int
    rows: tuple  # (k, formula_info, mc_info, mc_se)

    @property
    def passed(self) -> bool:
        return all(
            abs(_zscore(mc, f, se)) <= Z_LIMIT for _, f, mc, se in self.rows
        )


def info_curve(n: int, beta: float, model, reps: int, seed: int) -> InfoCurve:
    """Information against k = 1..n, no design; arm k draws from the master
    seed derive_seed(seed, k)."""
    if n < 2:
        raise DomainError("need n >= 2")
    code = _model_code(model)
    bundle, p_mat, a_mat, tr_pd, n_eff = _score_context(n, beta, None)
    rows = []
    for k in range(1, n + 1):
        formula = expected_info(n, k, bundle, model)
        y = sample_gaussian_stack(
            n, k, bundle.gamma, np.eye(k), derive_seed(seed, k), reps
        )
        scores = _kernels.batch_scores(y, p_mat, a_mat, tr_pd, n_eff, code)
        mc = float(scores.var(ddof=1))
        se = _batch_stat(scores, lambda b: b.var(ddof=1))
        rows.append((k, float(formula), mc, se))
    return InfoCurve(n=n, beta=beta, model=str(model), reps=reps, seed=seed, rows=tuple(rows))


@dataclass(frozen=True)
class DeletionReport:
    """Spread of the estimator with all series against a random subset."""

    n: int
    k_full: int
    k_sub: int
    beta: float
    reps: int
    seed: int
    reps_used: int
    degenerate_full: int
    degenerate_sub: int
    var_full: float
    var_sub: float
    var_ratio: float
    var_ratio_se: float
    mse_full: float
    mse_sub: float
    mse_ratio: float
    formula_ratio: float


def deletion_experiment(
    n: int, k_full: int, k_sub: int, beta: float, reps: int, seed: int
) -> DeletionReport:
    """Fit beta under the full-covariance model with all k_full series and
    with a per-replicate uniformly random subset of k_sub of them; compare
    the spread of the two estimators.

    Past the information peak the subset wins; the asymptotic ratio is
    k_sub (n - k_sub) / (k_full (n - k_full)).
    """
    if not (n / 2 < k_full < n):
        raise DomainError("k_full must lie strictly between n/2 and n")
    if not (1 <= k_sub <= n / 2):
        raise DomainError("k_sub must lie in [1, n/2]")
    bundle = gamma_of(Ar1Model(n), beta)
    y = sample_gaussian_stack(
        n, k_full, bundle.gamma, np.eye(k_full), derive_seed(seed, 0), reps
    )
    lo, hi = -1.0 + BETA_EDGE, 1.0 - BETA_EDGE
    points = Ar1Model(n).points
    beta_full, flags_full = _kernels.batch_fit_model_iii(y, points, lo, hi, 1e-8)

    subset_master = derive_seed(seed, 1)
    subsets = np.empty((reps, k_sub), dtype=np.int64)
    for i in range(reps):
        u = stream_uniforms(derive_seed(subset_master, i), k_sub)
        idx = list(range(k_full))
        for t in range(k_sub):
            j = t + int(u[t] * (k_full - t))
            idx[t], idx[j] = idx[j], idx[t]
        subsets[i] = idx[:k_sub]
    y_sub = np.take_along_axis(y, subsets[:, None, :], axis=2)
    beta_sub, flags_sub = _kernels.batch_fit_model_iii(y_sub, points, lo, hi, 1e-8)

    keep = (flags_full != 1) & (flags_sub != 1)
    n_deg_full = int(np.sum(flags_full == 1))
    n_deg_sub = int(np.sum(flags_sub == 1))
    if reps - int(keep.sum()) > 0.05 * reps:
        raise ExperimentError(
            f"too many degenerate fits: {reps - int(keep.sum())} of {reps}"
        )
    bf = beta_full[keep]
    bs = beta_sub[keep]
    var_full = float(bf.var(ddof=1))
    var_sub = float(bs.var(ddof=1))
    mse_full = float(np.mean((bf - beta) ** 2))
    mse_sub = float(np.mean((bs - beta) ** 2))

    # paired bootstrap over replicates for the ratio's standard error
    n_boot = 200
    m = bf.size
    u = stream_uniforms(derive_seed(seed, 2), n_boot * m).reshape(n_boot, m)
    idx = (u * m).astype(np.int64)
    ratios = np.empty(n_boot)
    for b in range(n_boot):
        ratios[b] = bf[idx[b]].var(ddof=1) / bs[idx[b]].var(ddof=1)
    formula_ratio = (k_sub * (n - k_sub)) / (k_full * (n - k_full))
    return DeletionReport(
        n=n,
        k_full=k_full,
        k_sub=k_sub,
        beta=beta,
        reps=reps,
        seed=seed,
        reps_used=m,
        degenerate_full=n_deg_full,
        degenerate_sub=n_deg_sub,
        var_full=var_full,
        var_sub=var_sub,
        var_ratio=var_full / var_sub,
        var_ratio_se=float(ratios.std(ddof=1)),
        mse_full=mse_full,
        mse_sub=mse_sub,
        mse_ratio=mse_full / mse_sub,
        formula_ratio=float(formula_ratio),
    )


@dataclass(frozen=True)
class DegeneracyReport:
    """Spread of the full-covariance profile log likelihood over a beta grid
    for one draw at each requested k."""

    n: int
    p: int
    seed: int
    beta_grid: tuple
    rows: tuple  # (k, spread, tol, degenerate_claimed, ok_or_None)


def degeneracy_check(
    n: int, beta_grid, sigma_spec, seed: int, x=None, ks=None
) -> DegeneracyReport:
    """Evaluate the full-covariance profile log likelihood over a beta grid.

    Default ks are (n - p, n - p + 2): at k = n - p the likelihood is
    provably constant (asserted via spread <= 1e-8 * (1 + max|l|)); the
    k = n - p + 2 spread is reported without a claim.  Data are drawn at
    the middle grid beta.
    """
    beta_grid = tuple(float(b) for b in beta_grid)
    if len(beta_grid) < 2:
        raise DomainError("beta grid needs at least two points")
    xm = check_design(x, n)
    p = xm.shape[1]
    n_eff = n - p
    if ks is None:
        ks = (n_eff, n_eff + 2)
    beta_true = beta_grid[len(beta_grid) // 2]
    bundle = gamma_of(Ar1Model(n), beta_true)
    rows = []
    for arm, k in enumerate(ks):
        sigma = build_sigma(sigma_spec, k)
        y = sample_gaussian(n, k, bundle.gamma, sigma, derive_seed(seed, arm))
        vals = np.array(
            [profile_loglik(y, b, "III", x if p else None) for b in beta_grid]
        )
        spread = float(vals.max() - vals.min())
        tol = 1e-8 * (1.0 + float(np.abs(vals).max()))
        claimed = k >= n_eff
        ok = (spread <= tol) if k == n_eff else None
        rows.append((k, spread, tol, claimed, ok))
    return DegeneracyReport(
        n=n, p=p, seed=seed, beta_grid=beta_grid, rows=tuple(rows)
    )


@dataclass(frozen=True)
class SigmaIndependenceReport:
    """Score variance of the full-covariance model under two different
    cross-series covariances; the distributions must coincide."""

    n: int
    k: int
    beta: float
    reps: int
    seed: int
    var_a: McReport
    var_b: McReport
    z_diff: float

    @property
    def passed(self) -> bool:
        return abs(self.z_diff) <= Z_LIMIT


def sigma_independence_check(
    n: int, k: int, beta: float, sigma_a, sigma_b, reps: int, seed: int
) -> SigmaIndependenceReport:
    """Two independent arms, one per sigma, compared on score variance."""
    if k > n:
        raise DomainError("need k <= n")
    bundle, p_mat, a_mat, tr_pd, n_eff = _score_context(n, beta, None)
    target = expected_info(n, k, bundle, "III")
    reports = []
    for arm, spec in enumerate((sigma_a, sigma_b)):
        sigma = build_sigma(spec, k)
        y = sample_gaussian_stack(n, k, bundle.gamma, sigma, derive_seed(seed, arm), reps)
        scores = _kernels.batch_scores(y, p_mat, a_mat, tr_pd, n_eff, 3)
        reports.append(
            _var_report(scores, target, reps, seed, f"var-score arm {'ab'[arm]}")
        )
    ra, rb = reports
    denom = np.hypot(ra.std_error, rb.std_error)
    z_diff = (ra.estimate - rb.estimate) / denom if denom > 0.0 else 0.0
    return SigmaIndependenceReport(
        n=n, k=k, beta=beta, reps=reps, seed=seed, var_a=ra, var_b=rb, z_diff=float(z_diff)
    )


@dataclass(frozen=True)
class UtInfoCurve:
    """Monte Carlo information of the triangular-residual likelihood per k,
    with increment tests for monotonicity."""

    n: int
    p: int
    beta: float
    reps: int
    seed: int
    formula_k1: float
    rows: tuple  # (k, mc_info, mc_se)
    increments: tuple  # (k, mean_diff, se_diff, ok)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, _, ok in self.increments)


def ut_info_curve(n: int, p: int, beta: float, reps: int, seed: int) -> UtInfoCurve:
    """Score variance of the triangular-residual likelihood for k = 1..n-p.

    Term scores are conditionally centred, hence uncorrelated, so the true
    information is non-decreasing in k; each Monte Carlo decrement must
    stay within 3 batch-means standard errors.
    """
    if p >= n:
        raise DomainError("need p < n")
    x = polynomial_design(n, p)
    bundle = gamma_of(Ar1Model(n), beta)
    n_terms = n - p
    y = sample_gaussian_stack(n, n_terms, bundle.gamma, np.eye(n_terms), seed, reps)
    x_mat = check_design(x, n)
    terms = _kernels.batch_ut_term_scores(y, x_mat, bundle.w, bundle.d, n_terms)
    cum = np.cumsum(terms, axis=1)
    rows = []
    for k in range(1, n_terms + 1):
        s = cum[:, k - 1]
        rows.append((k, float(s.var(ddof=1)), _batch_stat(s, lambda b: b.var(ddof=1))))
    increments = []
    for k in range(2, n_terms + 1):
        pair_prev = cum[:, k - 2]
        pair_next = cum[:, k - 1]
        bp = np.array_split(pair_prev, N_BATCHES)
        bn = np.array_split(pair_next, N_BATCHES)
        diffs = np.array([bn[i].var(ddof=1) - bp[i].var(ddof=1) for i in range(N_BATCHES)])
        mean_diff = rows[k - 1][1] - rows[k - 2][1]
        se_diff = float(diffs.std(ddof=1) / np.sqrt(N_BATCHES))
        increments.append((k, float(mean_diff), se_diff, mean_diff >= -Z_LIMIT * se_diff))
    formula_k1 = expected_info(n, 1, bundle, "II", x)
    return UtInfoCurve(
        n=n,
        p=p,
        beta=beta,
        reps=reps,
        seed=seed,
        formula_k1=float(formula_k1),
        rows=tuple(rows),
        increments=tuple(increments),
    )


@dataclass(frozen=True)
class EfficiencyTable:
    n: int
    rows: tuple  # (k, efficiency)
    limit: float


def efficiency_table(n: int, k_list) -> EfficiencyTable:
    """Tabulate the model II vs model I efficiency with its k -> inf limit."""
    rows = tuple((int(k), efficiency_II_vs_I(n, int(k))) for k in k_list)
    return EfficiencyTable(n=n, rows=rows, limit=n / (n + 2.0))


def haar_trace_moment_check(n: int, reps: int, seed: int):
    """Monte Carlo trace moments of a Haar orthogonal matrix against the
    constants (1, 1, 1, 3); returns four McReports."""
    from .haar import trace_moment_expectations
    from .sampling import sample_haar_stack

    targets = trace_moment_expectations(n)
    h = sample_haar_stack(n, n, seed, reps)
    h2 = h @ h
    tr_h = np.trace(h, axis1=1, axis2=2)
    tr_h2 = np.trace(h2, axis1=1, axis2=2)
    tr_h4 = np.trace(h2 @ h2, axis1=1, axis2=2)
    stats = (tr_h2, tr_h**2, tr_h4, tr_h2**2)
    labels = ("tr(H^2)", "tr^2(H)", "tr(H^4)", "tr^2(H^2)")
    return tuple(
        _mean_report(v, t, reps, seed, f"E {lab} n={n}")
        for v, t, lab in zip(stats, targets, labels)
    )
