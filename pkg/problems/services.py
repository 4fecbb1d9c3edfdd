# problems/services.py
from __future__ import annotations

import logging
import math

import numpy as np
from django.conf import settings

from linalg.models import HermitianMatrix, as_vector
from linalg.services import hermitian_from_factor, range_projector
from orderings.models import RngState

from .models import ProblemInstance, ProblemKind, ProblemMeta

logger = logging.getLogger(__name__)


def fan_example(m: int) -> ProblemInstance:
    """
    Homogeneous system By = 0 with B = AA*, A the 2m x 2 matrix of unit rows
    a_j = (cos(j theta), sin(j theta)), theta = pi / 2m, j = 0..2m-1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    theta = math.pi / (2 * m)
    angles = np.arange(2 * m) * theta
    a = np.column_stack([np.cos(angles), np.sin(angles)]).astype(np.complex128)
    b_matrix = hermitian_from_factor(a, normalize_rows=True)
    n = 2 * m
    return ProblemInstance(
        b_matrix=b_matrix,
        b=np.zeros(n, dtype=np.complex128),
        ybar=np.zeros(n, dtype=np.complex128),
        # all-ones: A* y0 is never parallel to a row, so no sweep ends exactly at zero
        y0=np.ones(n, dtype=np.complex128),
        meta=ProblemMeta(kind=ProblemKind.FAN, params={"m": m}),
        a=a,
        xbar=np.zeros(2, dtype=np.complex128),
    )


def _gaussian_unit_rows(n: int, m: int, complex_entries: bool, rng: RngState) -> np.ndarray:
    a = rng.normal((n, m), complex_entries=complex_entries).astype(np.complex128)
    norms = np.linalg.norm(a, axis=1)
    for i in np.flatnonzero(norms == 0):
        # probability zero, but regenerate rather than divide by zero
        while norms[i] == 0:
            a[i] = rng.normal(m, complex_entries=complex_entries)
            norms[i] = np.linalg.norm(a[i])
    return a / norms[:, None]


def plant_solution(b_matrix: HermitianMatrix, rng: RngState, complex_entries: bool | None = None):
    """Draw a Gaussian ybar and return (b, ybar) with b = B ybar."""
    if complex_entries is None:
        complex_entries = not b_matrix.is_real
    ybar = rng.normal(b_matrix.n, complex_entries=complex_entries).astype(np.complex128)
    return b_matrix.entries @ ybar, ybar


def random_normalized_factor(n: int, m: int, complex_entries: bool, rng: RngState) -> ProblemInstance:
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    a = _gaussian_unit_rows(n, m, complex_entries, rng)
    b_matrix = hermitian_from_factor(a, normalize_rows=True)
    b, ybar = plant_solution(b_matrix, rng, complex_entries=complex_entries)
    return ProblemInstance(
        b_matrix=b_matrix,
        b=b,
        ybar=ybar,
        y0=np.zeros(n, dtype=np.complex128),
        meta=ProblemMeta(
            kind=ProblemKind.RANDOM,
            params={"n": n, "m": m, "complex": int(complex_entries)},
            seed=rng.seed,
        ),
        a=a,
        xbar=a.conj().T @ ybar,
    )


def low_rank_psd(n: int, r: int, rng: RngState, complex_entries: bool = False) -> ProblemInstance:
    if not 1 <= r <= n:
        raise ValueError(f"rank r={r} must satisfy 1 <= r <= n={n}")
    instance = random_normalized_factor(n, r, complex_entries, rng)
    meta = ProblemMeta(
        kind=ProblemKind.LOWRANK,
        params={"n": n, "r": r, "complex": int(complex_entries)},
        seed=rng.seed,
    )
    return ProblemInstance(
        b_matrix=instance.b_matrix,
        b=instance.b,
        ybar=instance.ybar,
        y0=instance.y0,
        meta=meta,
        a=instance.a,
        xbar=instance.xbar,
    )


def consistency_check(b_matrix: HermitianMatrix, b, tol: float | None = None) -> bool:
    """True iff b lies in Ran(B) up to tol * ||b||."""
    if tol is None:
        tol = settings.SHUFFLED_SOR["CONSISTENCY_TOLERANCE"]
    if tol <= 0:
        raise ValueError("tol must be positive")
    rhs = as_vector(b, name="right-hand side")
    if rhs.shape[0] != b_matrix.n:
        raise ValueError(f"vector length {rhs.shape[0]} does not match n={b_matrix.n}")
    norm = np.linalg.norm(rhs)
    if norm == 0:
        return True
    leftover = rhs - range_projector(b_matrix) @ rhs
    consistent = bool(np.linalg.norm(leftover) <= tol * norm)
    if not consistent:
        logger.debug("inconsistent right-hand side: kernel part %.3e of %.3e", np.linalg.norm(leftover), norm)
    return consistent


def build_instance(kind: str, *, m=None, n=None, r=None, complex_entries=False, seed=0) -> ProblemInstance:
    """Generator dispatch shared by the command-line tools."""
    kind = ProblemKind(kind)
    if kind == ProblemKind.FAN:
        return fan_example(m)
    rng = RngState(seed)
    if kind == ProblemKind.RANDOM:
        return random_normalized_factor(n, m if m is not None else n, complex_entries, rng)
    if kind == ProblemKind.LOWRANK:
        return low_rank_psd(n, r, rng, complex_entries=complex_entries)
    raise ValueError(f"cannot generate problems of kind {kind!r}")
