"""QR factorization, rank detection, and the least-squares solver."""

import numpy as np
import pytest

from parseal import DesignMatrix, qr_factorize, solve_least_squares
from parseal.errors import EmptyMatrix, LengthMismatch, NonFinite, RankDeficient


def philox(seed, stream=0):
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


def test_qr_identity_is_full_rank():
    fact = qr_factorize(DesignMatrix(np.eye(3)))
    assert fact.rank == 3
    np.testing.assert_allclose(np.abs(np.diag(fact.r)), np.ones(3), atol=1e-15)


def test_qr_zero_column_drops_rank():
    x = np.zeros((4, 2))
    x[:, 0] = [1.0, 2.0, 3.0, 4.0]
    assert qr_factorize(DesignMatrix(x)).rank == 1


def test_qr_reconstructs_the_permuted_matrix():
    # Oracle: multiply the factors back together.
    x = philox(101).normal(size=(50, 5))
    design = DesignMatrix(x)
    fact = qr_factorize(design)
    reconstructed = fact.q @ fact.r
    err = np.linalg.norm(reconstructed - x[:, fact.pivot])
    assert err <= 1e-10 * np.linalg.norm(x)
    assert fact.rank == 5


def test_qr_q_has_orthonormal_columns():
    x = philox(102).normal(size=(40, 4))
    fact = qr_factorize(DesignMatrix(x))
    gram = fact.q.T @ fact.q
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)


def test_solve_single_column_exact():
    solution = solve_least_squares(DesignMatrix([[1.0], [2.0]]), [2.0, 4.0])
    np.testing.assert_allclose(solution.coefficients, [2.0], atol=1e-14)
    assert solution.residual_sum_squares <= 1e-28


def test_solve_identity_returns_y():
    solution = solve_least_squares(DesignMatrix(np.eye(2)), [3.0, 5.0])
    np.testing.assert_allclose(solution.coefficients, [3.0, 5.0], atol=1e-14)


def test_solve_matches_normal_equations_oracle():
    rng = philox(103)
    x = rng.normal(size=(100, 4))
    beta_true = np.array([1.0, -2.0, 0.5, 3.0])
    y = x @ beta_true + 0.1 * rng.normal(size=100)
    solution = solve_least_squares(DesignMatrix(x), y)
    oracle = np.linalg.solve(x.T @ x, x.T @ y)
    np.testing.assert_allclose(solution.coefficients, oracle, rtol=1e-10)
    resid = y - x @ oracle
    assert abs(solution.residual_sum_squares - float(resid @ resid)) <= 1e-9


def test_solve_duplicate_column_raises_rank_deficient():
    rng = philox(104)
    col = rng.normal(size=30)
    x = np.column_stack([col, col, rng.normal(size=30)])
    with pytest.raises(RankDeficient) as excinfo:
        solve_least_squares(DesignMatrix(x), rng.normal(size=30))
    assert excinfo.value.rank == 2


def test_residual_is_orthogonal_to_every_column():
    rng = philox(105)
    x = rng.normal(size=(80, 5)) * np.array([1.0, 10.0, 0.1, 100.0, 1.0])
    y = rng.normal(size=80) * 5.0
    solution = solve_least_squares(DesignMatrix(x), y)
    resid = y - x @ solution.coefficients
    norm_y = np.linalg.norm(y)
    for j in range(x.shape[1]):
        bound = 1e-8 * norm_y * np.linalg.norm(x[:, j])
        assert abs(float(x[:, j] @ resid)) <= bound


def test_solution_is_equivariant_under_column_permutation():
    rng = philox(106)
    x = rng.normal(size=(60, 4))
    y = rng.normal(size=60)
    base = solve_least_squares(DesignMatrix(x), y)
    perm = [2, 0, 3, 1]
    permuted = solve_least_squares(DesignMatrix(x[:, perm]), y)
    np.testing.assert_allclose(permuted.coefficients, base.coefficients[perm], rtol=1e-9)
    assert permuted.residual_sum_squares == pytest.approx(base.residual_sum_squares, rel=1e-12)


def test_design_matrix_rejects_nan_and_empty():
    with pytest.raises(NonFinite):
        DesignMatrix([[1.0, np.nan], [2.0, 3.0]])
    with pytest.raises(EmptyMatrix):
        DesignMatrix(np.empty((0, 2)))
    with pytest.raises(EmptyMatrix):
        DesignMatrix(np.empty((3, 0)))


def test_solve_rejects_bad_response():
    design = DesignMatrix(np.eye(3))
    with pytest.raises(NonFinite):
        solve_least_squares(design, [1.0, np.inf, 2.0])
    with pytest.raises(LengthMismatch):
        solve_least_squares(design, [1.0, 2.0])


def test_rank_detection_sweep_against_constructed_deficiency():
    # Build matrices with known rank r by multiplying (n, r) and (r, k) factors.
    rng = philox(107)
    for trial in range(10):
        n, k = 40, 6
        r = 1 + trial % 5
        left = rng.normal(size=(n, r))
        right = rng.normal(size=(r, k))
        fact = qr_factorize(DesignMatrix(left @ right))
        assert fact.rank == r
