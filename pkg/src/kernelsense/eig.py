"""Symmetric eigendecomposition and sample covariance.

Two solvers sit behind one contract: a cyclic Jacobi implementation and the
LAPACK ``syevr`` path from numpy/scipy. Both return eigenvalues in descending
order with each eigenvector's largest-magnitude entry made positive, so a
template computed by one can be compared with a statistic from the other.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-12


class ConvergenceError(RuntimeError):
    pass


class SymEig(NamedTuple):
    values: np.ndarray   # (n,), descending
    vectors: np.ndarray  # (n, n), column j pairs with values[j]


def sample_covariance(frames: np.ndarray) -> np.ndarray:
    """R = (1/M) sum_i x_i x_i^T over the rows of ``frames``; no mean removal."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise ValueError("sample covariance needs a non-empty (M, d) frame array")
    R = frames.T @ frames / frames.shape[0]
    return 0.5 * (R + R.T)


def check_symmetric(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if np.any(np.abs(A - A.T) > SYMMETRY_TOL * np.maximum(1.0, np.abs(A))):
        raise ValueError("matrix is not symmetric")
    return A


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-|.| entry is positive (first index wins ties)."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    squeeze = vectors.ndim == 1
    if squeeze:
        vectors = vectors[:, None]
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[pivots, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    vectors *= signs
    return vectors[:, 0] if squeeze else vectors


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eig(A: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi rotations; returns unsorted (eigenvalues, eigenvectors).

    Stops when the off-diagonal Frobenius norm drops below ``tol * ||A||_F``.
    """
    a = np.array(A, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), v
    target = tol * scale
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= target:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                h = a[q, q] - a[p, p]
                if abs(apq) < 1e-18 * abs(h):
                    t = apq / h  # theta would overflow; t ~ 1/(2 theta)
                else:
                    theta = h / (2.0 * apq)
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    off = _off_norm(a)
    if off <= target:
        return np.diag(a).copy(), v
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")


def sym_eig(A: np.ndarray, method: str = "lapack") -> SymEig:
    """Full eigendecomposition of a symmetric matrix, sorted descending.

    ``method`` is ``"lapack"`` (default, fast) or ``"jacobi"``.
    """
    A = check_symmetric(A)
    if method == "lapack":
        w, v = np.linalg.eigh(A)
    elif method == "jacobi":
        w, v = jacobi_eig(A)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, kind="stable")
    return SymEig(w[order], fix_signs(v[:, order]))


def leading_eigvec(A: np.ndarray, method: str = "lapack") -> tuple[float, np.ndarray]:
    """Largest eigenvalue and its unit eigenvector under the sign convention."""
    if method != "lapack":
        res = sym_eig(A, method)
        return float(res.values[0]), res.vectors[:, 0]
    A = check_symmetric(A)
    n = A.shape[0]
    w, v = scipy.linalg.eigh(A, subset_by_index=[n - 1, n - 1], check_finite=False)
    return float(w[0]), fix_signs(v[:, 0])


def eigvalsh_desc(A: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(check_symmetric(A))[::-1]
