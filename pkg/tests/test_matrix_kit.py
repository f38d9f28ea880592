import math

import numpy as np
import pytest

from contraction_rnn.exceptions import NonFiniteError, ShapeError, SingularMatrixError, UndefinedConditionError
from contraction_rnn.services.matrix_kit import (
    condition_number,
    lemma2_bound,
    spectral_norm,
    sylvester_pair_solve,
    unvec,
    vec,
    woodbury_apply,
    woodbury_factor,
)
from tests.conftest import dense_G_X, kron_sylvester_oracle, random_psd


def test_spectral_norm_examples(rng):
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0)
    assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)
    M = rng.standard_normal((5, 5))
    assert abs(spectral_norm(M) - np.linalg.svd(M, compute_uv=False)[0]) < 1e-10
    assert spectral_norm(np.zeros((0, 3))) == 0.0


def test_spectral_norm_rejects_non_finite():
    with pytest.raises(NonFiniteError):
        spectral_norm(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_condition_number_examples():
    assert condition_number(np.eye(4)) == pytest.approx(1.0)
    assert condition_number(np.diag([4.0, 1.0])) == pytest.approx(4.0)
    assert math.isinf(condition_number(np.array([[1.0, 2.0], [2.0, 4.0]])))
    with pytest.raises(ShapeError):
        condition_number(np.ones((2, 3)))


def test_condition_number_scale_invariant(rng):
    M = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    base = condition_number(M)
    for alpha in (-3.0, 0.01, 250.0):
        assert condition_number(alpha * M) == pytest.approx(base, rel=1e-10)


def test_condition_number_of_rank_one_kronecker(rng):
    beta = np.ones(3)
    Q = random_psd(rng, 4)
    G = dense_G_X(Q, beta)
    expected = 1.0 + 3.0 * spectral_norm(Q)
    assert condition_number(G) == pytest.approx(expected, rel=1e-8)


def test_vec_matches_kronecker_identity(rng):
    A, X, C = rng.standard_normal((3, 4)), rng.standard_normal((4, 2)), rng.standard_normal((2, 5))
    assert np.allclose(vec(A @ X @ C), np.kron(C.T, A) @ vec(X))
    assert np.array_equal(unvec(vec(X), 4, 2), X)


def test_woodbury_trivial_cases(rng):
    B = rng.standard_normal((6, 3))
    assert np.array_equal(woodbury_apply(np.zeros((6, 2)), 1.5, B), B)
    assert np.array_equal(woodbury_apply(rng.standard_normal((6, 2)), 0.0, B), B)


def test_woodbury_matches_dense_solve(rng):
    for _ in range(100):
        n = int(rng.integers(1, 33))
        k = int(rng.integers(1, 5))
        m = int(rng.integers(1, 4))
        X = rng.standard_normal((n, k))
        s = float(rng.uniform(0.0, 2.0))
        B = rng.standard_normal((n, m))
        dense = np.linalg.solve(np.eye(n) + s * X @ X.T, B)
        assert np.max(np.abs(woodbury_apply(X, s, B) - dense)) < 1e-10


def test_woodbury_factor_reuse_and_mismatch(rng):
    X = rng.standard_normal((8, 2))
    B = rng.standard_normal((8, 3))
    factor = woodbury_factor(X, 0.7)
    assert np.allclose(woodbury_apply(X, 0.7, B, factor=factor), woodbury_apply(X, 0.7, B))
    with pytest.raises(ValueError):
        woodbury_apply(X, 0.8, B, factor=factor)


def test_sylvester_decoupled_cases(rng):
    B1, B2 = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
    c = rng.standard_normal(3)
    X1, X2 = sylvester_pair_solve(np.zeros((4, 4)), c, B1, B2)
    assert np.allclose(X1, B1)
    assert np.allclose(X2, B2 - B1 @ np.outer(c, c))

    A = random_psd(rng, 4)
    X1, X2 = sylvester_pair_solve(A, np.zeros(3), B1, B2)
    assert np.allclose(X1, B1 + A @ B2)
    assert np.allclose(X2, B2)


def test_sylvester_random_instances(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 6))
        A = random_psd(rng, n)
        c = rng.standard_normal(m)
        B1, B2 = rng.standard_normal((n, m)), rng.standard_normal((n, m))
        X1, X2 = sylvester_pair_solve(A, c, B1, B2)
        scale = 1.0 + spectral_norm(B1) + spectral_norm(B2)
        cc = np.outer(c, c)
        assert np.max(np.abs(X1 - (A @ X2 + B1))) < 1e-10 * scale * (1.0 + spectral_norm(A))
        assert np.max(np.abs(X2 - (-X1 @ cc + B2))) < 1e-10 * scale * (1.0 + c @ c)
        K1, K2 = kron_sylvester_oracle(A, c, B1, B2)
        assert np.max(np.abs(X1 - K1)) < 1e-9 * scale
        assert np.max(np.abs(X2 - K2)) < 1e-9 * scale


def test_sylvester_singular_system():
    c = np.array([1.0, 1.0])
    A = -0.5 * np.eye(3)  # I + c'c·A = 0
    with pytest.raises(SingularMatrixError) as exc:
        sylvester_pair_solve(A, c, np.ones((3, 2)), np.ones((3, 2)))
    assert exc.value.matrix_name == "I + c'c·A"


def test_lemma2_bound_holds_on_random_instances(rng):
    for _ in range(50):
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        A = random_psd(rng, n)
        c = rng.standard_normal(m)
        B1, B2 = rng.standard_normal((n, m)), rng.standard_normal((n, m))
        X1, X2 = sylvester_pair_solve(A, c, B1, B2)
        lhs = np.linalg.norm(np.vstack([X1, X2]))
        rhs = lemma2_bound(A, c) * np.linalg.norm(np.vstack([B1, B2]))
        assert lhs <= rhs * (1 + 1e-10)


def test_lemma2_bound_undefined_for_zero_inputs(rng):
    with pytest.raises(UndefinedConditionError):
        lemma2_bound(random_psd(rng, 3), np.zeros(2))
    with pytest.raises(UndefinedConditionError):
        lemma2_bound(np.zeros((3, 3)), np.ones(2))
