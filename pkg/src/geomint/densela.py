"""Small dense linear algebra kernels.

Deterministic QR and SVD factorizations used by the low-rank integrator
and by diagnostics.  Both are written directly on numpy arrays instead of
delegating to LAPACK so that sign conventions and convergence thresholds
are pinned down exactly:

* ``qr_thin``  -- Householder reflections, R forced to have a nonnegative
  diagonal, which makes the factorization unique for full-rank input.
* ``svd_full`` -- one-sided Jacobi iteration on columns.  Rotations act on
  the matrix itself, so singular values of graded matrices keep high
  relative accuracy, which matters when the low-rank benchmarks push
  singular values down to ~1e-12.

Intended for small dense problems (dimensions up to a few hundred).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError

_EPS = np.finfo(float).eps

# One-sided Jacobi stops once every off-diagonal Gram entry |w_i . w_j| is
# below both thresholds: an absolute one scaled by ||A||_F^2 and a relative
# one scaled by the current column norms.  The relative test is what keeps
# the left vectors orthonormal when singular values span many decades.
_JACOBI_ABS_TOL = 1e-14
_JACOBI_REL_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 60


def as_matrix(a, name="a"):
    """Validate and return ``a`` as a 2-d float array with finite entries."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ContractViolationError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} contains non-finite entries")
    return arr


@dataclass
class SvdResult:
    """Thin singular value decomposition a = left @ diag(sigma) @ right.T.

    ``left`` is m-by-k and ``right`` is n-by-k with orthonormal columns,
    k = min(m, n); ``sigma`` is nonnegative and sorted descending.
    """

    left: np.ndarray
    sigma: np.ndarray
    right: np.ndarray


def _householder_vector(x):
    """Return (v, beta) with (I - beta v v^T) x = -sign(x0) ||x|| e1, v[0] = 1."""
    v = x.copy()
    sigma = float(v[1:] @ v[1:])
    alpha = float(v[0])
    if sigma == 0.0 and alpha == 0.0:
        return v, 0.0
    norm_x = np.hypot(alpha, np.sqrt(sigma))
    # Choose the reflection that avoids cancellation in v[0].
    v0 = alpha + norm_x if alpha >= 0.0 else alpha - norm_x
    v = v / v0
    v[0] = 1.0
    beta = 2.0 / float(v @ v)
    return v, beta


def qr_thin(a):
    """Thin QR factorization via Householder reflections.

    Returns (q, r) with q of shape (m, n) having orthonormal columns and r
    upper triangular with nonnegative diagonal, q @ r = a.  Requires
    m >= n.  Rank-deficient input is allowed; the corresponding diagonal
    entries of r come out zero.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        raise ContractViolationError(f"qr_thin needs m >= n, got shape {a.shape}")
    r = a.copy()
    reflectors = []
    for k in range(n):
        v, beta = _householder_vector(r[k:, k])
        if beta != 0.0:
            r[k:, k:] -= beta * np.outer(v, v @ r[k:, k:])
        reflectors.append((k, v, beta))
    # Accumulate q by applying the reflectors in reverse to the leading
    # columns of the identity.
    q = np.eye(m, n)
    for k, v, beta in reversed(reflectors):
        if beta != 0.0:
            q[k:, :] -= beta * np.outer(v, v @ q[k:, :])
    # Sign fix: flip so that diag(r) >= 0, keeping q @ r unchanged.
    signs = np.where(np.diag(r)[:n] < 0.0, -1.0, 1.0)
    q *= signs
    r = (r[:n, :].T * signs).T
    r = np.triu(r)
    # A diagonal entry below roundoff relative to its own column is pure
    # reflector noise from a linearly dependent column; report it as an
    # exact zero.  The comparison is column-local on purpose: columns that
    # are genuinely tiny but independent keep their diagonal.
    col_norms = np.linalg.norm(a, axis=0)
    noise = np.diag(r) <= m * _EPS * col_norms
    if np.any(noise):
        r[np.flatnonzero(noise), np.flatnonzero(noise)] = 0.0
    return q, r


def _orthonormal_columns(w, sigma):
    """Normalize the columns of ``w`` into an orthonormal basis.

    Columns are expected to be nearly orthogonal already (output of the
    Jacobi sweep, ordered by descending ``sigma``).  A two-pass
    Gram-Schmidt polish removes the residual non-orthogonality; columns
    with negligible norm are replaced by canonical basis vectors so the
    result always has exactly orthonormal columns.
    """
    m, k = w.shape
    q = np.zeros((m, k))
    scale = sigma[0] if k and sigma[0] > 0.0 else 1.0
    for i in range(k):
        x = w[:, i].copy()
        for _ in range(2):
            if i:
                x -= q[:, :i] @ (q[:, :i].T @ x)
        nrm = np.linalg.norm(x)
        if nrm <= m * _EPS * scale:
            # Degenerate direction: complete the basis with the identity
            # column least covered by the columns placed so far (its
            # residual norm is at least sqrt((m - i) / m), never zero).
            covered = np.sum(q[:, :i] ** 2, axis=1) if i else np.zeros(m)
            x = np.zeros(m)
            x[int(np.argmin(covered))] = 1.0
            for _ in range(2):
                if i:
                    x -= q[:, :i] @ (q[:, :i].T @ x)
            nrm = np.linalg.norm(x)
        q[:, i] = x / nrm
    return q


def svd_full(a, max_sweeps=_JACOBI_MAX_SWEEPS):
    """Singular value decomposition by one-sided Jacobi iteration.

    Orthogonal rotations are applied to column pairs of ``a`` until all
    off-diagonal Gram entries are negligible; the column norms are then
    the singular values.  Returns an SvdResult with sigma sorted
    descending and orthonormal singular vector factors.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        res = svd_full(a.T, max_sweeps=max_sweeps)
        return SvdResult(left=res.right, sigma=res.sigma, right=res.left)

    w = a.copy()
    v = np.eye(n)
    fro2 = float(np.sum(a * a))
    if fro2 == 0.0:
        return SvdResult(left=np.eye(m, n), sigma=np.zeros(n), right=v)
    abs_tol = _JACOBI_ABS_TOL * fro2

    for _ in range(max_sweeps):
        converged = True
        for i in range(n - 1):
            for j in range(i + 1, n):
                # Copies, not views: both rotation updates below must read
                # the pre-rotation columns.
                wi = w[:, i].copy()
                wj = w[:, j].copy()
                gij = float(wi @ wj)
                gii = float(wi @ wi)
                gjj = float(wj @ wj)
                rel_tol = _JACOBI_REL_TOL * np.sqrt(gii * gjj)
                if abs(gij) <= min(abs_tol, rel_tol):
                    continue
                converged = False
                zeta = (gjj - gii) / (2.0 * gij)
                t = np.sign(zeta) if zeta != 0.0 else 1.0
                t = t / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                w[:, i] = c * wi - s * wj
                w[:, j] = s * wi + c * wj
                vi = v[:, i].copy()
                v[:, i] = c * vi - s * v[:, j]
                v[:, j] = s * vi + c * v[:, j]
        if converged:
            break

    sigma = np.linalg.norm(w, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    w = w[:, order]
    v = v[:, order]
    left = _orthonormal_columns(w, sigma)
    right = _orthonormal_columns(v, np.ones(n))
    return SvdResult(left=left, sigma=sigma, right=right)


def truncated_svd(a, r):
    """Best rank-r approximation in the Frobenius norm.

    Returns (approx, factors, discarded_norm) where ``factors`` is the
    rank-r SvdResult and ``discarded_norm`` equals
    sqrt(sum of the squared discarded singular values), which is also
    ||a - approx||_F.
    """
    a = as_matrix(a)
    k = min(a.shape)
    if not isinstance(r, (int, np.integer)) or r < 1 or r > k:
        raise ContractViolationError(f"rank r must satisfy 1 <= r <= {k}, got {r!r}")
    res = svd_full(a)
    factors = SvdResult(
        left=res.left[:, :r].copy(),
        sigma=res.sigma[:r].copy(),
        right=res.right[:, :r].copy(),
    )
    approx = factors.left @ (factors.sigma[:, None] * factors.right.T)
    discarded = float(np.sqrt(np.sum(res.sigma[r:] ** 2)))
    return approx, factors, discarded
