# analysis/truncation.py
"""Norm of the strictly lower triangular truncation ||L_sigma|| relative to ||B||."""
from __future__ import annotations

import logging

import numpy as np
from django.conf import settings

from linalg.models import HermitianMatrix, Permutation
from linalg.services import is_psd_unit_diagonal, permute_conjugate, strict_lower
from linalg.spectral import spectral_norm
from orderings.models import RngState
from orderings.services import random_permutation

from .models import SearchMethod, TruncationStats
from .permutations import (
    all_permutations, check_exhaustive, sampled_permutations, stack_norms, truncation_stack,
)

logger = logging.getLogger(__name__)


def log_truncation_factor(n: int) -> float:
    """(1/2) floor(log2(2n))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 0.5 * ((2 * n).bit_length() - 1)


def _norm_or_fail(b: HermitianMatrix) -> float:
    norm = float(np.linalg.norm(b.entries, 2))
    if norm == 0:
        raise ValueError("zero matrix")
    return norm


def _existence_constant(b: HermitianMatrix) -> float:
    """C1 for PSD unit-diagonal matrices, C2 for general Hermitian ones."""
    key = "BOUND_C1" if is_psd_unit_diagonal(b) else "BOUND_C2"
    return settings.SHUFFLED_SOR[key]


def _ratios(b: HermitianMatrix, perms: np.ndarray, norm_b: float) -> np.ndarray:
    return stack_norms(truncation_stack(b.entries, perms)) / norm_b


def truncation_ratio(b: HermitianMatrix, sigma: Permutation) -> float:
    norm_b = spectral_norm(b)
    if norm_b == 0:
        raise ValueError("zero matrix")
    return spectral_norm(strict_lower(permute_conjugate(b, sigma))) / norm_b


def check_log_truncation_bound(b: HermitianMatrix, sigma: Permutation | None = None) -> bool:
    """||L_sigma|| <= (1/2) floor(log2(2n)) ||B||."""
    sigma = sigma or Permutation.identity(b.n)
    ratio = truncation_ratio(b, sigma)
    ok = ratio <= log_truncation_factor(b.n) * (1.0 + 1e-9)
    if not ok:
        logger.warning("truncation ratio %.6g above log bound for n=%d", ratio, b.n)
    return ok


# -------- searches --------
def min_truncation_exhaustive(b: HermitianMatrix) -> TruncationStats:
    n = b.n
    check_exhaustive(n, "heuristic")
    norm_b = _norm_or_fail(b)
    best, best_sigma, total, largest, count = np.inf, None, 0.0, 0.0, 0
    ratio_identity = None
    for perms in all_permutations(n):
        ratios = _ratios(b, perms, norm_b)
        if ratio_identity is None:
            ratio_identity = float(ratios[0])  # lexicographic order starts at the identity
        k = int(np.argmin(ratios))
        if ratios[k] < best:
            best, best_sigma = float(ratios[k]), Permutation(tuple(perms[k].tolist()))
        total += float(ratios.sum())
        largest = max(largest, float(ratios.max()))
        count += len(ratios)
    return TruncationStats(
        ratio_identity=ratio_identity,
        min_ratio=best,
        argmin_sigma=best_sigma,
        mean_ratio=total / count,
        max_ratio=largest,
        method=SearchMethod.EXHAUSTIVE.value,
        samples=count,
        existence_constant=_existence_constant(b),
    )


def _adjacent_swaps(perm: np.ndarray) -> np.ndarray:
    n = perm.shape[0]
    neighbours = np.repeat(perm[None, :], n - 1, axis=0)
    rows = np.arange(n - 1)
    neighbours[rows, rows], neighbours[rows, rows + 1] = perm[rows + 1], perm[rows]
    return neighbours


def min_truncation_heuristic(b: HermitianMatrix, restarts: int, rng: RngState) -> TruncationStats:
    """
    Steepest descent over adjacent transpositions from `restarts` random
    orderings. The identity ordering is evaluated too, so the result never
    exceeds ratio_identity; it is an upper bound on the true minimum.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    n = b.n
    norm_b = _norm_or_fail(b)
    identity = np.arange(n)
    ratio_identity = float(_ratios(b, identity[None, :], norm_b)[0])
    best, best_perm = ratio_identity, identity
    seen = [ratio_identity]

    for restart in range(restarts):
        current = random_permutation(n, rng).as_array()
        value = float(_ratios(b, current[None, :], norm_b)[0])
        seen.append(value)
        steps = 0
        while n > 1:
            neighbours = _adjacent_swaps(current)
            ratios = _ratios(b, neighbours, norm_b)
            seen.extend(ratios.tolist())
            k = int(np.argmin(ratios))
            if ratios[k] >= value:
                break
            current, value = neighbours[k], float(ratios[k])
            steps += 1
        logger.debug("restart %d: %d descent steps, ratio %.6g", restart, steps, value)
        if value < best:
            best, best_perm = value, current

    seen = np.asarray(seen)
    return TruncationStats(
        ratio_identity=ratio_identity,
        min_ratio=best,
        argmin_sigma=Permutation(tuple(best_perm.tolist())),
        mean_ratio=float(seen.mean()),
        max_ratio=float(seen.max()),
        method=SearchMethod.HEURISTIC.value,
        samples=int(seen.size),
        existence_constant=_existence_constant(b),
    )


def expected_truncation_norm(b: HermitianMatrix, trials: int, rng: RngState) -> TruncationStats:
    """Monte Carlo estimate of E||L_sigma|| / ||B|| over uniform orderings (mean_ratio, with stderr)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = b.n
    norm_b = _norm_or_fail(b)
    samples = []
    best, best_perm = np.inf, None
    for perms in sampled_permutations(n, trials, rng):
        ratios = _ratios(b, perms, norm_b)
        k = int(np.argmin(ratios))
        if ratios[k] < best:
            best, best_perm = float(ratios[k]), perms[k]
        samples.append(ratios)
    values = np.concatenate(samples)
    stderr = float(values.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return TruncationStats(
        ratio_identity=float(_ratios(b, np.arange(n)[None, :], norm_b)[0]),
        min_ratio=best,
        argmin_sigma=Permutation(tuple(best_perm.tolist())),
        mean_ratio=float(values.mean()),
        max_ratio=float(values.max()),
        method=SearchMethod.MONTECARLO.value,
        samples=trials,
        stderr=stderr,
    )
