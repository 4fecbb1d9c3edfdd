# linalg/spectral.py
from __future__ import annotations

import logging
import math

import numpy as np
from django.conf import settings

from .models import DenseMatrix, HermitianMatrix, SpectralSummary, as_dense

logger = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    pass


def _off_diagonal_norm(a: np.ndarray) -> float:
    total = np.sum(np.abs(a) ** 2) - np.sum(np.abs(a.diagonal()) ** 2)
    return math.sqrt(max(total, 0.0))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] with a unitary plane rotation (in place)."""
    apq = a[p, q]
    magnitude = abs(apq)
    phase = apq / magnitude
    theta = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    # phase fix on column q makes a[p, q] real, then a real Jacobi rotation
    g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ g
    a[idx, :] = g.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ g


def eigen_hermitian(b: HermitianMatrix, tol: float | None = None) -> tuple[np.ndarray, DenseMatrix]:
    """
    Cyclic Jacobi eigensolver for Hermitian matrices.

    Returns eigenvalues sorted non-increasing and the unitary matrix of
    eigenvectors (columns, same order). Sweeps stop once the off-diagonal
    Frobenius norm drops to tol * ||B||_F.
    """
    if tol is None:
        tol = settings.SHUFFLED_SOR["EIGEN_TOLERANCE"]
    if tol <= 0:
        raise ValueError("tol must be positive")
    max_sweeps = settings.SHUFFLED_SOR["EIGEN_MAX_SWEEPS"]

    a = np.array(b.entries, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    threshold = tol * np.linalg.norm(a)

    for sweep in range(max_sweeps + 1):
        if _off_diagonal_norm(a) <= threshold:
            break
        if sweep == max_sweeps:
            raise ConvergenceError("eigensolver did not converge")
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0:
                    _rotate(a, v, p, q)
    logger.debug("jacobi converged after %d sweeps (n=%d)", sweep, n)

    values = a.diagonal().real
    order = np.argsort(-values, kind="stable")
    return values[order].copy(), v[:, order]


def spectral_norm(m, tol: float | None = None) -> float:
    """
    Largest singular value.

    Hermitian input gives max |lambda| directly; anything else goes through
    the smaller of the Gram matrices M*M and MM*, both via the Jacobi solver.
    """
    if tol is not None and tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(m, HermitianMatrix):
        values, _ = eigen_hermitian(m, tol)
        return float(max(values[0], -values[-1], 0.0))
    m = as_dense(m)
    rows, cols = m.shape
    if rows == 0 or cols == 0 or not np.any(m):
        return 0.0
    if rows == cols and np.array_equal(m, m.conj().T):
        return spectral_norm(HermitianMatrix(m), tol)
    gram = m.conj().T @ m if cols <= rows else m @ m.conj().T
    values, _ = eigen_hermitian(HermitianMatrix(gram), tol)
    return math.sqrt(max(float(values[0]), 0.0))


def spectral_summary(b: HermitianMatrix, rank_tolerance: float | None = None) -> SpectralSummary:
    if rank_tolerance is None:
        rank_tolerance = settings.SHUFFLED_SOR["RANK_TOLERANCE"]
    if not 0 < rank_tolerance < 1:
        raise ValueError("rank_tolerance must lie in (0, 1)")
    values, _ = eigen_hermitian(b)
    lambda1 = float(values[0])
    if lambda1 <= 0:
        raise ValueError("matrix not PSD" if lambda1 < 0 else "zero matrix has no spectral summary")
    if values[-1] < -rank_tolerance * lambda1:
        raise ValueError("matrix not PSD")
    positive = values[values > rank_tolerance * lambda1]
    lambda_r = float(positive[-1])
    return SpectralSummary(
        eigenvalues=tuple(float(v) for v in values),
        lambda1=lambda1,
        lambda_r=lambda_r,
        rank=int(positive.size),
        kappa_bar=lambda1 / lambda_r,
        spectral_norm=max(lambda1, float(-values[-1])),
        rank_tolerance=rank_tolerance,
    )
