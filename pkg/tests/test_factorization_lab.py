import math

import numpy as np
import pytest

from wordassoc.errors import WordAssocError
from wordassoc.factorization_lab import (
    PROP1_RATIOS,
    SyntheticFactorization,
    bias_residual,
    check_debiasing_instance,
    debias_and_reconstruct,
    debiasing_theorem_suite,
    make_synthetic,
    prop1_check,
    prop1_suite,
)


def test_orthonormal_words_give_identity():
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 5)))
    f = SyntheticFactorization(q, 1.0)
    np.testing.assert_allclose(f.M, np.eye(5), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_construction_symmetric_and_exact(seed):
    f = make_synthetic(12, 4, 1.7, seed)
    assert np.max(np.abs(f.M - f.M.T)) <= 1e-12
    assert np.max(np.abs(f.W @ f.C.T - f.M)) <= 1e-10
    assert np.linalg.matrix_rank(f.M) <= 4


def test_lambda_scales_matrix():
    a, b = make_synthetic(6, 3, 1.0, 9), make_synthetic(6, 3, 2.0, 9)
    np.testing.assert_allclose(b.M, 2 * a.M, rtol=1e-14)


@pytest.mark.parametrize("n, d, lam", [(3, 4, 1.0), (4, 2, 0.0), (4, 2, -1.0)])
def test_make_synthetic_validation(n, d, lam):
    with pytest.raises(WordAssocError):
        make_synthetic(n, d, lam)


def test_bias_residual_hand_matrix():
    M = np.array([[1.0, 0.9, 0.2], [0.9, 2.0, 0.4], [0.2, 0.4, 3.0]])
    assert bias_residual(M, [(1, 2)], 0) == pytest.approx(0.7, abs=1e-15)
    same = np.array([[1.0, 0.5, 0.5], [0.5, 2.0, 1.0], [0.5, 1.0, 2.0]])
    assert bias_residual(same, [(1, 2)], 0) == 0.0


def test_bias_residual_validation():
    M = np.eye(3)
    with pytest.raises(WordAssocError):
        bias_residual(M, [(1, 2)], 1)
    with pytest.raises(WordAssocError):
        bias_residual(M, [(1, 5)], 0)


def test_debias_and_reconstruct_small():
    f = make_synthetic(8, 4, 1.0, seed=1)
    pairs = [(0, 1), (2, 3)]
    Md = debias_and_reconstruct(f, pairs)
    tol = 1e-8 * np.max(np.abs(f.M))
    for w in range(4, 8):
        assert bias_residual(f, pairs, w) > 1e-3  # biased before
        assert bias_residual(Md, pairs, w) <= tol
    np.testing.assert_allclose(Md[:4], f.M[:4], atol=1e-10)


def test_lambda_independence():
    f = make_synthetic(8, 4, 3.5, seed=1)
    pairs = [(0, 1), (2, 3)]
    Md = debias_and_reconstruct(f, pairs)
    assert max(bias_residual(Md, pairs, w) for w in range(4, 8)) <= 1e-8 * np.max(np.abs(f.M))


def test_full_span_zeroes_debiased_rows():
    f = make_synthetic(6, 2, 1.0, seed=4)
    pairs = [(0, 1), (2, 3)]
    Md = debias_and_reconstruct(f, pairs)
    np.testing.assert_allclose(Md[4:], 0.0, atol=1e-12)


def test_tampered_projection_fails():
    inst = check_debiasing_instance(7, 10, 4, 2, 1.0, projector=lambda w, B: 0.5 * (w @ B.basis.T) @ B.basis)
    assert not inst.passed


def test_theorem_suite_small():
    instances = debiasing_theorem_suite(30, seed=3)
    assert all(i.passed for i in instances)
    assert all(i.n <= 32 and i.d <= 16 and 1 <= i.n_pairs <= 4 and 0.5 <= i.lambda_ <= 4 for i in instances)
    grid = debiasing_theorem_suite(6, seed=3, lambdas=[0.5, 4.0])
    assert [i.lambda_ for i in grid] == [0.5, 4.0] * 3 and all(i.passed for i in grid)


def test_prop1_equal_frequency():
    r = prop1_check(0.01, 0.01, -1.0, 10.0, seed=2)
    assert r.equal_freq and abs(r.cos_diff) <= 1e-12


def test_prop1_unequal_frequency():
    r = prop1_check(math.e * 0.01, 0.01, -1.0, 10.0, seed=2)
    assert not r.equal_freq and abs(r.cos_diff) > 1e-6


def test_prop1_direct_evaluation():
    # Rebuild the same construction by hand and compare.
    p_x, p_y, a1, a2 = 0.05, 0.01, -1.0, 10.0
    rng = np.random.default_rng(5)
    ux, uy = rng.standard_normal((2, 8))
    x = ux / np.linalg.norm(ux) * math.sqrt(a1 * math.log(p_x) + a2)
    y = uy / np.linalg.norm(uy) * math.sqrt(a1 * math.log(p_y) + a2)
    r = rng.standard_normal(8)
    A = np.stack([x, y])
    r = r - A.T @ np.linalg.lstsq(A.T, r, rcond=None)[0]
    w = np.linalg.lstsq(A, np.ones(2), rcond=None)[0] + r
    assert abs(w @ x - w @ y) < 1e-12
    cos = lambda u, v: u @ v / (np.linalg.norm(u) * np.linalg.norm(v))
    expected = cos(w, x) - cos(w, y)
    assert prop1_check(p_x, p_y, a1, a2, seed=5).cos_diff == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("c", [0.1, 3.0, 250.0])
def test_prop1_scale_invariant(c):
    base = prop1_check(0.05, 0.01, -1.0, 10.0, seed=1).cos_diff
    assert prop1_check(0.05, 0.01, -1.0, 10.0, seed=1, w_scale=c).cos_diff == pytest.approx(base, abs=1e-14)


def test_prop1_invalid_norms():
    with pytest.raises(WordAssocError):
        prop1_check(0.5, 0.5, 1.0, -5.0)


def test_prop1_suite_grid():
    results = prop1_suite()
    assert [r for r, _, _ in results] == list(PROP1_RATIOS)
    assert all(ok for _, _, ok in results)
