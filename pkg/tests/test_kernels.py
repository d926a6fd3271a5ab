"""Backend agreement: the numba kernels and the vectorised numpy fallbacks
must produce the same numbers, and both must match the scalar API."""

import numpy as np
import pytest

from parseries import Ar1Model, gamma_of, make_projector, sample_gaussian_stack
from parseries._kernels import numpy_impl
from parseries.likelihood import BETA_EDGE, fit_beta, score, ut_subgroup_score

numba_impl = pytest.importorskip("parseries._kernels.numba_impl")


@pytest.fixture(scope="module")
def stack():
    n, k, beta = 8, 3, 0.4
    bundle = gamma_of(Ar1Model(n), beta)
    y = sample_gaussian_stack(n, k, bundle.gamma, np.eye(k), 90, 200)
    return bundle, y


@pytest.mark.parametrize("model_code", [1, 2, 3])
@pytest.mark.parametrize("with_design", [False, True])
def test_batch_scores_backends_agree_and_match_api(stack, model_code, with_design):
    bundle, y = stack
    n = bundle.n
    x = np.ones((n, 1)) if with_design else None
    if x is None:
        p_mat, n_eff = bundle.w, n
    else:
        proj = make_projector(bundle.w, x)
        p_mat, n_eff = proj.wq, proj.rank
    a_mat = p_mat @ bundle.d @ p_mat
    tr_pd = float(np.trace(p_mat @ bundle.d))
    s_np = numpy_impl.batch_scores(y, p_mat, a_mat, tr_pd, n_eff, model_code)
    s_nb = numba_impl.batch_scores(y, p_mat, a_mat, tr_pd, n_eff, model_code)
    assert np.allclose(s_np, s_nb, rtol=1e-12, atol=1e-12)
    model = {1: "I", 2: "II", 3: "III"}[model_code]
    api = np.array([score(y[i], bundle.beta, model, x) for i in range(20)])
    assert np.allclose(s_np[:20], api, rtol=1e-9, atol=1e-10)


def test_batch_scores_degenerate_regime_zero(stack):
    bundle, _ = stack
    n = bundle.n
    y = sample_gaussian_stack(n, n, bundle.gamma, np.eye(n), 4, 50)
    a_mat = bundle.w @ bundle.d @ bundle.w
    tr_pd = float(np.trace(bundle.w @ bundle.d))
    for impl in (numpy_impl, numba_impl):
        s = impl.batch_scores(y, bundle.w, a_mat, tr_pd, n, 3)
        assert np.array_equal(s, np.zeros(50))


def test_ut_term_scores_backends_agree_and_match_api(stack):
    bundle, y = stack
    n = bundle.n
    x = np.ones((n, 1))
    n_terms = min(y.shape[2], n - 1)
    t_np = numpy_impl.batch_ut_term_scores(y, x, bundle.w, bundle.d, n_terms)
    t_nb = numba_impl.batch_ut_term_scores(y, x, bundle.w, bundle.d, n_terms)
    assert np.allclose(t_np, t_nb, rtol=1e-10, atol=1e-12)
    for i in range(10):
        api = ut_subgroup_score(y[i], bundle.beta, x)
        assert np.isclose(t_np[i].sum(), api, rtol=1e-9, atol=1e-10)

    # empty design path
    t_np0 = numpy_impl.batch_ut_term_scores(y, np.zeros((n, 0)), bundle.w, bundle.d, 3)
    t_nb0 = numba_impl.batch_ut_term_scores(y, np.zeros((n, 0)), bundle.w, bundle.d, 3)
    assert np.allclose(t_np0, t_nb0, rtol=1e-10, atol=1e-12)
    for i in range(5):
        api = ut_subgroup_score(y[i], bundle.beta, None)
        assert np.isclose(t_np0[i].sum(), api, rtol=1e-9, atol=1e-10)


def test_batch_fit_backends_agree_and_match_api():
    n, k, beta = 8, 4, 0.5
    bundle = gamma_of(Ar1Model(n), beta)
    y = sample_gaussian_stack(n, k, bundle.gamma, np.eye(k), 1234, 40)
    pts = Ar1Model(n).points
    lo, hi = -1.0 + BETA_EDGE, 1.0 - BETA_EDGE
    b_np, f_np = numpy_impl.batch_fit_model_iii(y, pts, lo, hi, 1e-8)
    b_nb, f_nb = numba_impl.batch_fit_model_iii(y, pts, lo, hi, 1e-8)
    assert np.array_equal(f_np, f_nb)
    assert np.allclose(b_np, b_nb, atol=1e-7)
    for i in range(8):
        res = fit_beta(y[i], "III")
        assert abs(res.beta_hat - b_np[i]) <= 1e-6


def test_batch_fit_flags_degenerate():
    n = 5
    y = sample_gaussian_stack(n, n, np.eye(n), np.eye(n), 8, 10)
    pts = Ar1Model(n).points
    lo, hi = -1.0 + BETA_EDGE, 1.0 - BETA_EDGE
    for impl in (numpy_impl, numba_impl):
        b, f = impl.batch_fit_model_iii(y, pts, lo, hi, 1e-8)
        assert np.all(f == 1)
        assert np.all(np.isnan(b))
