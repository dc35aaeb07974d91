"""Symmetric eigendecomposition via cyclic Jacobi rotations.

Self-contained solver for the small covariance matrices this toolkit
produces (tens of columns). Accuracy is limited only by the convergence
threshold on off-diagonal mass, which is driven to machine-epsilon scale.
"""

from __future__ import annotations

import numpy as np


def eigh_descending(a: np.ndarray, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching eigenvector columns of a symmetric matrix.

    Uses the classical cyclic Jacobi method: repeated plane rotations that
    zero one off-diagonal pair at a time until the off-diagonal Frobenius
    mass is negligible relative to the matrix norm.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-10, rtol=1e-10):
        raise ValueError("matrix is not symmetric")
    d = a.shape[0]
    A = 0.5 * (a + a.T)
    V = np.eye(d)
    if d == 1:
        return A.diagonal().copy(), V

    norm = np.linalg.norm(A)
    tol = max(norm, 1.0) * 1e-14
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2) * 2.0)
        if off <= tol:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= tol / (d * d):
                    continue
                # rotation angle zeroing A[p, q]
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * A[:, p] - s * A[:, q]
                rot_q = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = rot_p, rot_q
                rot_p = c * A[p, :] - s * A[q, :]
                rot_q = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rot_p, rot_q
                A[p, q] = A[q, p] = 0.0
                rot_p = c * V[:, p] - s * V[:, q]
                rot_q = s * V[:, p] + c * V[:, q]
                V[:, p], V[:, q] = rot_p, rot_q

    values = A.diagonal().copy()
    order = np.argsort(-values, kind="stable")
    return values[order], V[:, order]
