# analysis/bounds.py
from __future__ import annotations

import logging
import math

import numpy as np
from django.conf import settings

from linalg.models import HermitianMatrix
from linalg.services import is_unit_diagonal
from linalg.spectral import eigen_hermitian, spectral_summary
from orderings.models import OrderingKind, RngState

from .models import BoundReport
from .permutations import (
    all_permutations, check_exhaustive, conjugate_stack, count_all, restore_rows,
    sampled_permutations,
)
from .truncation import log_truncation_factor

logger = logging.getLogger(__name__)


def _validate_omega(omega: float) -> None:
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")


def _contraction(omega: float, lambda1: float, kappa_bar: float, factor: float) -> float:
    """1 - omega(2 - omega) lambda1 / ((1 + factor * omega * lambda1)^2 kappa_bar)."""
    return 1.0 - omega * (2.0 - omega) * lambda1 / ((1.0 + factor * omega * lambda1) ** 2 * kappa_bar)


def evaluate_bounds(
    b: HermitianMatrix,
    omega: float,
    c0: float | None = None,
    c1: float | None = None,
    c2: float | None = None,
) -> BoundReport:
    """
    Per-sweep contraction factors for the expected squared energy error:

    cyclic          (1/2) floor(log2(2n)) truncation factor, any fixed ordering
    cyclic, rank r  c0 * ln(r) in place of that factor (needs c0 and r >= 2)
    single-step     (1 - omega(2 - omega) lambda1 / (n kappa_bar))^n
    shuffled        truncation factor 1
    preshuffled     truncation factor c1, for the best fixed ordering
    """
    _validate_omega(omega)
    if not is_unit_diagonal(b):
        raise ValueError("diagonal is not all ones: call rescale_unit_diagonal first")
    c1 = settings.SHUFFLED_SOR["BOUND_C1"] if c1 is None else c1
    c2 = settings.SHUFFLED_SOR["BOUND_C2"] if c2 is None else c2
    if c0 is not None and c0 <= 0:
        raise ValueError("c0 must be positive")

    summary = spectral_summary(b)
    n, lam, kappa = b.n, summary.lambda1, summary.kappa_bar

    small_rank = None
    if c0 is not None:
        if summary.rank >= 2:
            small_rank = _contraction(omega, lam, kappa, c0 * math.log(summary.rank))
        else:
            logger.warning("rank %d < 2: small-rank bound not defined", summary.rank)

    report = BoundReport(
        omega=omega,
        n=n,
        lambda1=lam,
        kappa_bar=kappa,
        rank=summary.rank,
        rate_cyclic=_contraction(omega, lam, kappa, log_truncation_factor(n)),
        rate_cyclic_small_rank=small_rank,
        rate_single_step=(1.0 - omega * (2.0 - omega) * lam / (n * kappa)) ** n,
        rate_shuffled=_contraction(omega, lam, kappa, 1.0),
        rate_preshuffled=_contraction(omega, lam, kappa, c1),
        c0=c0,
        c1=c1,
        c2=c2,
    )
    logger.info("bounds for n=%d omega=%g: shuffled %.6g, cyclic %.6g", n, omega, report.rate_shuffled, report.rate_cyclic)
    return report


def bound_for_strategy(report: BoundReport, kind) -> float:
    kind = OrderingKind(kind)
    return {
        OrderingKind.CYCLIC: report.rate_cyclic,
        OrderingKind.FIXED: report.rate_cyclic,
        OrderingKind.SHUFFLED: report.rate_shuffled,
        OrderingKind.PRESHUFFLED: report.rate_preshuffled,
        OrderingKind.SINGLE_STEP: report.rate_single_step,
    }[kind]


def cosine_exponent(rate: float, theta: float) -> float:
    """p with rate = cos(theta)^p."""
    if not 0.0 < rate < 1.0:
        raise ValueError("rate must lie in (0, 1)")
    if not 0.0 < theta < math.pi / 2:
        raise ValueError("theta must lie in (0, pi/2)")
    return math.log(rate) / math.log(math.cos(theta))


# -------- measured one-sweep contraction --------
def _error_operators(entries: np.ndarray, omega: float, perms: np.ndarray) -> np.ndarray:
    """Q_sigma = I - omega P*(I + omega L_sigma)^{-1} P B for a block of orderings."""
    n = entries.shape[0]
    eye = np.eye(n)
    lower = eye + omega * np.tril(conjugate_stack(entries, perms), -1)
    z = np.linalg.solve(lower, entries[perms, :])
    return eye - omega * restore_rows(z, perms)


def expected_contraction(
    b: HermitianMatrix, omega: float, trials: int | None = None, rng: RngState | None = None
) -> float:
    """
    Largest <My, y> / <By, y> over y outside Ker(B), with M the average of
    Q*_sigma B Q_sigma. Exact over all n! orderings unless `trials` is given
    (required once n exceeds the exhaustive limit).
    """
    if not np.any(b.entries):
        raise ValueError("zero matrix")
    _validate_omega(omega)
    if not is_unit_diagonal(b):
        raise ValueError("diagonal is not all ones: call rescale_unit_diagonal first")
    n = b.n
    entries = b.entries

    if trials is None:
        check_exhaustive(n, "montecarlo: pass trials")
        blocks, count = all_permutations(n), count_all(n)
    else:
        if trials < 1:
            raise ValueError("trials must be >= 1")
        rng = rng or RngState(settings.SHUFFLED_SOR["DEFAULT_SEED"])
        blocks, count = sampled_permutations(n, trials, rng), trials

    average = np.zeros((n, n), dtype=np.complex128)
    for perms in blocks:
        q = _error_operators(entries, omega, perms)
        average += (q.conj().transpose(0, 2, 1) @ entries @ q).sum(axis=0)
    average /= count

    values, vectors = eigen_hermitian(b)
    keep = values > settings.SHUFFLED_SOR["RANK_TOLERANCE"] * values[0]
    scaled = vectors[:, keep] / np.sqrt(values[keep])
    reduced = scaled.conj().T @ average @ scaled
    top = eigen_hermitian(HermitianMatrix((reduced + reduced.conj().T) / 2))[0][0]
    return max(float(top), 0.0)
