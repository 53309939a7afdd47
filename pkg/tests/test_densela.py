"""Dense linear algebra kernels: thin QR, full and truncated SVD."""

import numpy as np
import pytest

from geomint.densela import as_matrix, qr_thin, svd_full, truncated_svd
from geomint.errors import ContractViolationError


def random_matrix(rng, m, n, rank=None):
    if rank is None:
        return rng.standard_normal((m, n))
    left = rng.standard_normal((m, rank))
    right = rng.standard_normal((n, rank))
    return left @ right.T


# ---------------------------------------------------------------- as_matrix


def test_as_matrix_rejects_vectors():
    with pytest.raises(ContractViolationError):
        as_matrix(np.array([1.0, 2.0]), "x")


def test_as_matrix_rejects_non_finite():
    with pytest.raises(ContractViolationError):
        as_matrix(np.array([[np.nan, 1.0], [0.0, 1.0]]), "x")


# ------------------------------------------------------------------ thin QR


def test_qr_identity():
    q, r = qr_thin(np.eye(3))
    assert np.allclose(q, np.eye(3), atol=1e-15)
    assert np.allclose(r, np.eye(3), atol=1e-15)


def test_qr_single_column():
    q, r = qr_thin(np.array([[3.0], [4.0]]))
    assert np.allclose(q, [[0.6], [0.8]], atol=1e-15)
    assert np.allclose(r, [[5.0]], atol=1e-15)


def test_qr_rank_deficient_square():
    a = np.ones((2, 2))
    q, r = qr_thin(a)
    assert r[1, 1] == 0.0
    assert np.linalg.norm(q @ r - a) <= 1e-12
    assert np.linalg.norm(q.T @ q - np.eye(2)) <= 1e-12


def test_qr_rejects_wide_matrices():
    with pytest.raises(ContractViolationError):
        qr_thin(np.ones((2, 3)))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_qr_reconstruction_and_orthogonality(seed):
    rng = np.random.default_rng(seed)
    a = random_matrix(rng, 7, 4)
    q, r = qr_thin(a)
    assert q.shape == (7, 4) and r.shape == (4, 4)
    assert np.linalg.norm(q @ r - a) <= 1e-12 * np.linalg.norm(a)
    assert np.linalg.norm(q.T @ q - np.eye(4)) <= 1e-13
    # R is upper triangular with nonnegative diagonal.
    assert np.allclose(r, np.triu(r))
    assert np.all(np.diag(r) >= 0.0)


def test_qr_completes_degenerate_columns():
    """Repeated columns must still yield a full orthonormal Q."""
    rng = np.random.default_rng(3)
    col = rng.standard_normal(8)
    a = np.tile(col[:, None], (1, 6))
    q, r = qr_thin(a)
    assert np.linalg.norm(q.T @ q - np.eye(6)) <= 1e-12
    assert np.linalg.norm(q @ r - a) <= 1e-12 * np.linalg.norm(a)
    # Only the first column carries weight.
    assert np.all(np.diag(r)[1:] == 0.0)


def test_qr_many_tiny_columns():
    # Forty columns whose scales span fifty orders of magnitude; most fall
    # below the degeneracy threshold, so the basis completion has to find
    # a fresh direction for nearly every column.
    rng = np.random.default_rng(11)
    d = np.array([2.0 ** -(i + 1) for i in range(40)])
    d[8:] *= 1e-6
    a = (rng.standard_normal((40, 40)) @ np.diag(d))[:, :40]
    q, r = qr_thin(a)
    assert np.linalg.norm(q.T @ q - np.eye(40)) <= 1e-11
    assert np.linalg.norm(q @ r - a) <= 1e-11 * max(np.linalg.norm(a), 1.0)


# ----------------------------------------------------------------- full SVD


def test_svd_diagonal():
    res = svd_full(np.diag([3.0, 2.0]))
    assert np.allclose(res.sigma, [3.0, 2.0], atol=1e-14)


def test_svd_antidiagonal():
    res = svd_full(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(res.sigma, [1.0, 1.0], atol=1e-14)


def test_svd_zero_matrix():
    res = svd_full(np.zeros((3, 2)))
    assert np.all(res.sigma == 0.0)
    assert np.linalg.norm(res.left @ np.diag(res.sigma) @ res.right.T) == 0.0


@pytest.mark.parametrize("shape", [(6, 4), (4, 6), (5, 5)])
def test_svd_reconstruction(shape):
    rng = np.random.default_rng(shape[0] * 10 + shape[1])
    a = random_matrix(rng, *shape)
    res = svd_full(a)
    recon = res.left @ np.diag(res.sigma) @ res.right.T
    assert np.linalg.norm(recon - a) <= 1e-12 * np.linalg.norm(a)
    k = min(shape)
    assert np.linalg.norm(res.left.T @ res.left - np.eye(k)) <= 1e-12
    assert np.linalg.norm(res.right.T @ res.right - np.eye(k)) <= 1e-12
    # Singular values descending and nonnegative.
    assert np.all(np.diff(res.sigma) <= 0.0)
    assert np.all(res.sigma >= 0.0)


def test_svd_matches_numpy_singular_values():
    rng = np.random.default_rng(42)
    a = random_matrix(rng, 6, 4)
    ours = svd_full(a).sigma
    ref = np.linalg.svd(a, compute_uv=False)
    assert np.max(np.abs(ours - ref)) <= 1e-10 * ref[0]


def test_svd_transpose_has_same_spectrum():
    rng = np.random.default_rng(7)
    a = random_matrix(rng, 6, 4)
    sa = svd_full(a).sigma
    sat = svd_full(a.T).sigma
    assert np.max(np.abs(sa - sat)) <= 1e-10 * max(sa[0], 1.0)


# ------------------------------------------------------------ truncated SVD


def test_truncated_diagonal():
    a = np.diag([3.0, 2.0, 1.0])
    approx, factors, discarded = truncated_svd(a, 2)
    assert np.allclose(approx, np.diag([3.0, 2.0, 0.0]), atol=1e-12)
    assert np.allclose(factors.sigma, [3.0, 2.0], atol=1e-14)
    assert abs(discarded - 1.0) <= 1e-12


def test_truncated_exact_on_low_rank_input():
    rng = np.random.default_rng(5)
    a = random_matrix(rng, 8, 5, rank=2)
    approx, _, discarded = truncated_svd(a, 2)
    assert np.linalg.norm(approx - a) <= 1e-11 * np.linalg.norm(a)
    assert discarded <= 1e-11 * np.linalg.norm(a)


def test_truncated_handles_rank_deficient_input():
    approx, factors, discarded = truncated_svd(np.diag([5.0, 0.0]), 1)
    assert np.allclose(approx, np.diag([5.0, 0.0]), atol=1e-14)
    assert factors.sigma[0] == pytest.approx(5.0, abs=1e-14)
    assert discarded <= 1e-14


def test_truncation_is_optimal_in_frobenius_norm():
    """No random rank-r competitor beats the truncated SVD."""
    rng = np.random.default_rng(17)
    a = random_matrix(rng, 6, 5)
    r = 2
    approx, _, _ = truncated_svd(a, r)
    err = np.linalg.norm(a - approx)
    for _ in range(100):
        b = random_matrix(rng, 6, 5, rank=r)
        assert err <= np.linalg.norm(a - b) + 1e-9


def test_discarded_norm_equals_tail():
    rng = np.random.default_rng(23)
    a = random_matrix(rng, 7, 6)
    sigma = svd_full(a).sigma
    for r in (1, 3, 5):
        _, _, discarded = truncated_svd(a, r)
        assert discarded == pytest.approx(np.sqrt(np.sum(sigma[r:] ** 2)), rel=1e-12)
