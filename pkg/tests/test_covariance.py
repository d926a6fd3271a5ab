import numpy as np
import pytest
import scipy.linalg

from parseries import (
    Ar1Model,
    DiagonalVar,
    DomainError,
    FullPd,
    GreenMatrix,
    ScalarVar,
    build_sigma,
    gamma_of,
    v_factor,
)

BETA_GRID = np.linspace(-0.95, 0.95, 21)


def test_gamma_beta_zero_is_identity_with_path_derivative():
    b = gamma_of(Ar1Model(3), 0.0)
    assert np.array_equal(b.gamma, np.eye(3))
    expected_d = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    assert np.array_equal(b.d, expected_d)


def test_gamma_two_by_two_closed_form():
    b = gamma_of(Ar1Model(2), 0.5)
    assert np.allclose(b.gamma, [[1.0, 0.5], [0.5, 1.0]])
    assert np.isclose(np.linalg.det(b.gamma), 0.75)
    assert np.allclose(b.d, [[0.0, 1.0], [1.0, 0.0]])


def test_inverse_is_tridiagonal_and_matches_dense_oracle():
    b = gamma_of(Ar1Model(4), 0.5)
    # independent dense inversion oracle
    w_oracle = scipy.linalg.solve(b.gamma, np.eye(4), assume_a="pos")
    assert np.allclose(b.w, w_oracle, atol=1e-12)
    assert np.max(np.abs(b.gamma @ b.w - np.eye(4))) <= 1e-12
    band = np.abs(np.arange(4)[:, None] - np.arange(4)[None, :]) >= 2
    assert np.max(np.abs(b.w[band])) <= 1e-12


@pytest.mark.parametrize("beta", [1.0, -1.0, 1.5])
def test_gamma_rejects_unit_autocorrelation(beta):
    with pytest.raises(DomainError, match="open unit interval"):
        gamma_of(Ar1Model(4), beta)


def test_ar1_model_validation():
    with pytest.raises(DomainError):
        Ar1Model(1)
    with pytest.raises(DomainError):
        Ar1Model(3, points=[1.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        Ar1Model(3, points=[1.0, 2.0])


@pytest.mark.parametrize("beta", BETA_GRID)
def test_gamma_grid_invariants(beta):
    model = Ar1Model(6)
    b = gamma_of(model, beta)
    np.linalg.cholesky(b.gamma)  # PD
    assert np.allclose(np.diag(b.gamma), 1.0)
    assert np.max(np.abs(b.gamma @ b.w - np.eye(6))) <= 1e-10
    assert np.allclose(b.d, b.d.T)
    assert np.allclose(np.diag(b.d), 0.0)
    h = 1e-5
    fd = (gamma_of(model, beta + h).gamma - gamma_of(model, beta - h).gamma) / (2 * h)
    scale = max(np.abs(b.d).max(), 1.0)
    assert np.max(np.abs(fd - b.d)) / scale <= 1e-6


def test_log_det_matches_slogdet():
    for beta in (-0.8, -0.2, 0.3, 0.9):
        b = gamma_of(Ar1Model(7), beta)
        assert np.isclose(b.log_det_gamma, np.linalg.slogdet(b.gamma)[1], atol=1e-12)


def test_non_integer_grid():
    model = Ar1Model(4, points=[0.5, 1.7, 3.0, 3.1])
    b = gamma_of(model, 0.6)
    assert np.max(np.abs(b.gamma @ b.w - np.eye(4))) <= 1e-10
    h = 1e-6
    fd = (gamma_of(model, 0.6 + h).gamma - gamma_of(model, 0.6 - h).gamma) / (2 * h)
    assert np.max(np.abs(fd - b.d)) <= 1e-5
    with pytest.raises(DomainError, match="integer lag"):
        gamma_of(model, -0.5)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_v_factor_at_zero(n):
    # at beta=0: W = I, D = path adjacency, so V = n * 2(n-1) exactly
    b = gamma_of(Ar1Model(n), 0.0)
    assert v_factor(b) == 2.0 * n * (n - 1)


def test_v_factor_dense_oracle():
    b = gamma_of(Ar1Model(5), 0.3)
    w = scipy.linalg.solve(b.gamma, np.eye(5), assume_a="pos")
    wd = w @ b.d
    expected = 5 * np.trace(wd @ wd) - np.trace(wd) ** 2
    assert np.isclose(v_factor(b), expected, rtol=1e-10)


@pytest.mark.parametrize("beta", BETA_GRID)
def test_v_factor_nonnegative(beta):
    assert v_factor(gamma_of(Ar1Model(6), beta)) >= 0.0


def test_build_sigma_scalar_and_diag():
    assert np.array_equal(build_sigma(ScalarVar(1.0), 3), np.eye(3))
    assert np.array_equal(
        build_sigma(DiagonalVar((1.0, 4.0)), 2), np.diag([1.0, 4.0])
    )
    with pytest.raises(DomainError):
        build_sigma(ScalarVar(-1.0), 2)
    with pytest.raises(DomainError):
        build_sigma(DiagonalVar((1.0, 2.0)), 3)
    with pytest.raises(DomainError):
        build_sigma(DiagonalVar((1.0, 0.0)), 2)


def test_build_sigma_green_singular_names_minor():
    with pytest.raises(DomainError, match="leading minor of order 2"):
        build_sigma(GreenMatrix((1.0, 1.0, 1.0), (1.0, 1.0, 1.0)), 3)


def test_build_sigma_green_tridiagonal_inverse():
    sigma = build_sigma(GreenMatrix((1.0, 2.0, 4.0), (4.0, 2.0, 1.0)), 3)
    np.linalg.cholesky(sigma)
    inv = np.linalg.inv(sigma)  # direct inversion oracle
    band = np.abs(np.arange(3)[:, None] - np.arange(3)[None, :]) >= 2
    assert np.max(np.abs(inv[band])) <= 1e-8


def test_build_sigma_green_random_property():
    rng = np.random.default_rng(42)
    successes = 0
    for _ in range(50):
        k = int(rng.integers(2, 6))
        a = np.cumsum(rng.uniform(0.2, 1.0, size=k))
        b = np.cumsum(rng.uniform(0.2, 1.0, size=k))[::-1]
        try:
            sigma = build_sigma(GreenMatrix(tuple(a), tuple(b)), k)
        except DomainError:
            continue
        successes += 1
        inv = np.linalg.inv(sigma)
        band = np.abs(np.arange(k)[:, None] - np.arange(k)[None, :]) >= 2
        if band.any():
            assert np.max(np.abs(inv[band])) <= 1e-8
    assert successes >= 10


def test_build_sigma_full_pd():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    sigma = build_sigma(FullPd(a @ a.T + 4 * np.eye(4)), 4)
    np.linalg.cholesky(sigma)
    with pytest.raises(DomainError, match="symmetric"):
        build_sigma(FullPd(a), 4)
    with pytest.raises(DomainError, match="leading minor"):
        build_sigma(FullPd(np.diag([1.0, -1.0])), 2)
