import numpy as np
import pytest

from parseries import (
    Ar1Model,
    DomainError,
    derive_seed,
    gamma_of,
    sample_gaussian,
    sample_gaussian_stack,
    sample_haar_columns,
    sample_haar_orthogonal,
    sample_haar_stack,
)
from parseries.sampling import stream_normals, stream_uniforms


def test_fixed_seed_reproducible():
    g = np.eye(4)
    y1 = sample_gaussian(4, 2, g, np.eye(2), 123)
    y2 = sample_gaussian(4, 2, g, np.eye(2), 123)
    assert np.array_equal(y1, y2)
    y3 = sample_gaussian(4, 2, g, np.eye(2), 124)
    assert not np.array_equal(y1, y3)


def test_derive_seed_pure_and_distinct():
    seeds = {derive_seed(99, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(99, 7) == derive_seed(99, 7)
    with pytest.raises(DomainError):
        derive_seed(99, -1)


def test_stack_matches_per_replicate_draws():
    b = gamma_of(Ar1Model(5), 0.5)
    sigma = np.diag([1.0, 4.0, 0.5])
    stack = sample_gaussian_stack(5, 3, b.gamma, sigma, 2024, 7)
    for i in range(7):
        single = sample_gaussian(5, 3, b.gamma, sigma, derive_seed(2024, i))
        assert np.array_equal(stack[i], single)


def test_uniforms_in_open_interval():
    u = stream_uniforms(5, 100_000)
    assert u.min() > 0.0 and u.max() < 1.0


def test_identity_covariance_moments():
    y = stream_normals(17, (200_000,))
    assert abs(y.mean()) <= 4.0 / np.sqrt(y.size)
    assert abs(y.var() - 1.0) <= 4.0 * np.sqrt(2.0 / y.size)


def test_empirical_covariance_matches_kronecker_structure():
    n, k, reps = 4, 2, 40_000
    b = gamma_of(Ar1Model(n), 0.5)
    sigma = np.diag([1.0, 4.0])
    y = sample_gaussian_stack(n, k, b.gamma, sigma, 31, reps)
    # cov(Y_i1, Y_j1) = Gamma_ij * sigma_11
    emp = (y[:, :, 0].T @ y[:, :, 0]) / reps
    assert np.max(np.abs(emp - b.gamma)) <= 4.0 / np.sqrt(reps) * 3.0
    emp2 = (y[:, :, 1].T @ y[:, :, 1]) / reps
    assert np.max(np.abs(emp2 - 4.0 * b.gamma)) <= 4.0 / np.sqrt(reps) * 12.0
    cross = (y[:, :, 0].T @ y[:, :, 1]) / reps
    assert np.max(np.abs(cross)) <= 4.0 / np.sqrt(reps) * 6.0


def test_gaussian_rejects_non_pd():
    with pytest.raises(DomainError, match="sigma"):
        sample_gaussian(3, 2, np.eye(3), np.diag([1.0, -1.0]), 0)


def test_haar_orthogonality_and_det():
    for seed in range(10):
        h = sample_haar_orthogonal(6, seed)
        assert np.max(np.abs(h.T @ h - np.eye(6))) <= 1e-12
        assert abs(abs(np.linalg.det(h)) - 1.0) <= 1e-10


def test_haar_one_dimensional_sign_balance():
    signs = [float(sample_haar_orthogonal(1, s)[0, 0]) for s in range(200)]
    assert set(signs) == {-1.0, 1.0}
    frac = np.mean([s > 0 for s in signs])
    assert 0.35 <= frac <= 0.65


def test_haar_columns_orthonormal():
    z = sample_haar_columns(6, 3, 5)
    assert z.shape == (6, 3)
    assert np.max(np.abs(z.T @ z - np.eye(3))) <= 1e-12
    full = sample_haar_columns(4, 4, 9)
    assert np.max(np.abs(full @ full.T - np.eye(4))) <= 1e-12
    with pytest.raises(DomainError):
        sample_haar_columns(3, 4, 0)


def test_haar_stack_projection_mean():
    n, k, reps = 5, 2, 30_000
    z = sample_haar_stack(n, k, 77, reps)
    proj_mean = np.einsum("rik,rjk->ij", z, z) / reps
    se = 3.0 / np.sqrt(reps)
    assert np.max(np.abs(proj_mean - (k / n) * np.eye(n))) <= 3.0 * se


def test_haar_trace_and_quadratic_moments():
    n, reps = 4, 50_000
    h = sample_haar_stack(n, n, 13, reps)
    tr_h2 = np.trace(h @ h, axis1=1, axis2=2)
    z = (tr_h2.mean() - 1.0) / (tr_h2.std() / np.sqrt(reps))
    assert abs(z) <= 3.0

    rng = np.random.default_rng(3)
    a = rng.standard_normal((n, n))
    a = a + a.T
    k = 2
    zc = sample_haar_stack(n, k, 19, reps)
    t = np.einsum("rnk,nm,rmk->r", zc, a, zc)
    target = k * np.trace(a) / n
    zscore = (t.mean() - target) / (t.std() / np.sqrt(reps))
    assert abs(zscore) <= 3.0
