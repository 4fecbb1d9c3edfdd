# analysis/averages.py
"""
The permutation average E[LL*] = (1/n!) sum_sigma P*_sigma L_sigma L*_sigma P_sigma,
where L_sigma is the strictly lower part of B_sigma.
"""
from __future__ import annotations

import logging

import numpy as np

from linalg.models import HermitianMatrix, Permutation
from linalg.services import hadamard, is_psd_unit_diagonal, k_matrix
from linalg.spectral import spectral_norm
from orderings.models import RngState

from .models import AverageTruncationReport, FormulaComparison, MonteCarloEstimate, SearchMethod
from .permutations import (
    all_permutations, check_exhaustive, count_all, restore_stack, sampled_permutations,
    truncation_stack,
)

logger = logging.getLogger(__name__)

NORM_MARGIN = 1e-10


def off_diagonal(b: HermitianMatrix) -> np.ndarray:
    """H = B - D."""
    h = np.array(b.entries, copy=True)
    np.fill_diagonal(h, 0.0)
    return h


def _gram_terms(entries: np.ndarray, perms: np.ndarray) -> np.ndarray:
    lower = truncation_stack(entries, perms)
    return restore_stack(lower @ lower.conj().transpose(0, 2, 1), perms)


# -------- E[LL*] --------
def expected_llt_exhaustive(b: HermitianMatrix) -> np.ndarray:
    check_exhaustive(b.n, "montecarlo")
    total = np.zeros((b.n, b.n), dtype=np.complex128)
    for perms in all_permutations(b.n):
        total += _gram_terms(b.entries, perms).sum(axis=0)
    return total / count_all(b.n)


def expected_llt_closed(b: HermitianMatrix) -> np.ndarray:
    """
    H^2 / 3 + diag(H^2) / 6.

    Entry (s, t) collects H_sl H_lt weighted by the chance that l comes
    before both s and t in a uniform ordering: 1/2 on the diagonal, 1/3 off it.
    """
    h = off_diagonal(b)
    h2 = h @ h
    return h2 / 3.0 + np.diag(np.diag(h2)) / 6.0


def expected_llt_position_weighted(b: HermitianMatrix) -> np.ndarray:
    """(1/n) K o H^2 with K[s][t] = min(s, t) - 1; kept for comparison, it is not E[LL*]."""
    h = off_diagonal(b)
    return hadamard(k_matrix(b.n), h @ h) / b.n


def expected_llt_montecarlo(
    b: HermitianMatrix, trials: int, rng: RngState, sigmas: list[Permutation] | None = None
) -> MonteCarloEstimate:
    """Sampled average with per-entry standard errors; `sigmas` replaces the random draws."""
    n = b.n
    if sigmas is not None:
        for sigma in sigmas:
            if sigma.n != n:
                raise ValueError(f"permutation length {sigma.n} does not match n={n}")
        trials = len(sigmas)
        blocks = [np.array([s.map for s in sigmas], dtype=np.intp)] if sigmas else []
    else:
        blocks = None
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if blocks is None:
        blocks = sampled_permutations(n, trials, rng)

    total = np.zeros((n, n), dtype=np.complex128)
    total_sq = np.zeros((n, n))
    for perms in blocks:
        terms = _gram_terms(b.entries, perms)
        total += terms.sum(axis=0)
        total_sq += (np.abs(terms) ** 2).sum(axis=0)
    mean = total / trials
    if trials > 1:
        variance = np.maximum(total_sq - trials * np.abs(mean) ** 2, 0.0) / (trials - 1)
        stderr = np.sqrt(variance / trials)
    else:
        stderr = np.zeros((n, n))
    return MonteCarloEstimate(mean=mean, stderr=stderr, trials=trials)


# -------- reports --------
def check_average_truncation_norms(b: HermitianMatrix) -> AverageTruncationReport:
    """
    ||E[LL*]|| <= 4||B||^2 and ||H|| <= 2||B|| always; for PSD unit-diagonal B
    also ||E[LL*]|| < ||B||^2 and ||H|| <= max(||B|| - 1, 1).
    """
    norm_average = spectral_norm(expected_llt_closed(b))
    norm_b = spectral_norm(b)
    norm_h = spectral_norm(off_diagonal(b))
    slack = 1e-9 * max(norm_b, 1.0)
    checks = {
        "general": norm_average <= 4.0 * norm_b ** 2 * (1.0 + 1e-9),
        "h_general": norm_h <= 2.0 * norm_b + slack,
    }
    psd = is_psd_unit_diagonal(b)
    if psd:
        checks["psd_strict"] = norm_average <= norm_b ** 2 * (1.0 - NORM_MARGIN)
        checks["h_psd"] = norm_h <= max(norm_b - 1.0, 1.0) + slack
    report = AverageTruncationReport(
        norm_average=norm_average,
        norm_b=norm_b,
        norm_h=norm_h,
        psd_unit_diagonal=psd,
        checks=checks,
    )
    if not report.passed:
        logger.warning("average truncation norm check failed: %s", checks)
    return report


def compare_llt_formulas(b: HermitianMatrix, tol: float = 1e-12) -> FormulaComparison:
    """Entrywise comparison of E[LL*] (exhaustive when small, else closed form) with the position-weighted formula."""
    try:
        reference = expected_llt_exhaustive(b)
        method = SearchMethod.EXHAUSTIVE.value
    except ValueError:
        reference = expected_llt_closed(b)
        method = "closed"
    weighted = expected_llt_position_weighted(b)
    difference = np.abs(reference - weighted)
    scale = max(1.0, float(np.max(np.abs(reference))))
    rows, cols = np.nonzero(difference > tol * scale)
    return FormulaComparison(
        reference_method=method,
        reference=reference,
        position_weighted=weighted,
        mismatches=tuple(zip(rows.tolist(), cols.tolist())),
        max_abs_difference=float(difference.max()),
    )
