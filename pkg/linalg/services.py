# linalg/services.py
from __future__ import annotations

import logging

import numpy as np
from django.conf import settings

from .models import DenseMatrix, HermitianMatrix, Permutation, Vector, as_dense, as_vector
from .spectral import eigen_hermitian

logger = logging.getLogger(__name__)


# -------- construction --------
def hermitian_from_factor(a, normalize_rows: bool = False) -> HermitianMatrix:
    """B = AA*, optionally after scaling the rows of A to unit length."""
    a = as_dense(a, name="factor")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("factor must have at least one row and one column")
    if normalize_rows:
        a = normalize_factor_rows(a)
    b = a @ a.conj().T
    if normalize_rows:
        np.fill_diagonal(b, 1.0)  # snap rounding
    return HermitianMatrix(b)


def normalize_factor_rows(a) -> DenseMatrix:
    a = as_dense(a, name="factor")
    norms = np.linalg.norm(a, axis=1)
    if np.any(norms == 0):
        raise ValueError("zero row")
    return a / norms[:, None]


def rescale_unit_diagonal(b: HermitianMatrix) -> tuple[HermitianMatrix, np.ndarray]:
    """
    Equivalent rescaled system D^{-1/2} B D^{-1/2}.

    Returns the rescaled matrix and diag(D)^{-1/2}; a solution y' of the
    rescaled system maps back as y = scaling * y'.
    """
    d = b.diagonal
    if np.any(d <= 0):
        raise ValueError("diagonal not positive")
    scaling = 1.0 / np.sqrt(d)
    rescaled = b.entries * np.outer(scaling, scaling)
    np.fill_diagonal(rescaled, 1.0)
    return HermitianMatrix(rescaled), scaling


# -------- structure --------
def strict_lower(b: HermitianMatrix) -> DenseMatrix:
    return np.tril(b.entries, -1)


def permute_conjugate(b: HermitianMatrix, sigma: Permutation) -> HermitianMatrix:
    """B_σ with B_σ[i][j] = B[σ(i)][σ(j)]."""
    if sigma.n != b.n:
        raise ValueError(f"permutation length {sigma.n} does not match n={b.n}")
    idx = sigma.as_array()
    return HermitianMatrix(b.entries[np.ix_(idx, idx)])


def hadamard(x, y) -> DenseMatrix:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    return np.multiply(x, y, dtype=np.complex128)


def k_matrix(n: int) -> np.ndarray:
    """K[s][t] = min(s, t) - 1 with 1-based s, t."""
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(n)
    return np.minimum.outer(idx, idx).astype(float)


def is_unit_diagonal(b: HermitianMatrix, atol: float | None = None) -> bool:
    if atol is None:
        atol = settings.SHUFFLED_SOR["UNIT_DIAGONAL_TOLERANCE"]
    return bool(np.all(np.abs(b.diagonal - 1.0) <= atol))


def is_psd_unit_diagonal(b: HermitianMatrix, rank_tolerance: float | None = None) -> bool:
    """Unit diagonal and no eigenvalue below -rank_tolerance * lambda_1."""
    if not is_unit_diagonal(b):
        return False
    if rank_tolerance is None:
        rank_tolerance = settings.SHUFFLED_SOR["RANK_TOLERANCE"]
    values, _ = eigen_hermitian(b)
    psd = bool(values[-1] >= -rank_tolerance * max(values[0], 0.0))
    if not psd:
        logger.debug("smallest eigenvalue %.3e below tolerance", values[-1])
    return psd


# -------- norms --------
def energy_seminorm_sq(b: HermitianMatrix, y) -> float:
    """|y|_B^2 = Re<By, y>, clamped at zero."""
    y = as_vector(y)
    if y.shape[0] != b.n:
        raise ValueError(f"vector length {y.shape[0]} does not match n={b.n}")
    value = float(np.vdot(y, b.entries @ y).real)
    return max(value, 0.0)


def range_projector(b: HermitianMatrix, rank_tolerance: float | None = None) -> DenseMatrix:
    """Orthogonal projector onto Ran(B), from the eigenvectors above the rank tolerance."""
    if rank_tolerance is None:
        rank_tolerance = settings.SHUFFLED_SOR["RANK_TOLERANCE"]
    values, vectors = eigen_hermitian(b)
    top = max(abs(values[0]), abs(values[-1]))
    if top == 0:
        return np.zeros((b.n, b.n), dtype=np.complex128)
    keep = np.abs(values) > rank_tolerance * top
    basis = vectors[:, keep]
    return basis @ basis.conj().T


def residual_norm(b: HermitianMatrix, rhs: Vector, y: Vector) -> float:
    return float(np.linalg.norm(rhs - b @ y))
