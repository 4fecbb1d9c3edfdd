# analysis/models.py
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from django.db import models

from linalg.models import Permutation


class SearchMethod(models.TextChoices):
    EXHAUSTIVE = "exhaustive", "All n! orderings"
    HEURISTIC = "heuristic", "Adjacent-transposition descent with restarts"
    MONTECARLO = "montecarlo", "Uniformly sampled orderings"


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "pass" if value else "FAIL"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass(frozen=True)
class TruncationStats:
    """||L_sigma|| / ||B|| over a set of orderings."""

    ratio_identity: float
    min_ratio: float
    argmin_sigma: Permutation
    mean_ratio: float
    max_ratio: float
    method: str
    samples: int
    stderr: float = 0.0
    existence_constant: float | None = None

    def __post_init__(self):
        slack = 1e-12 * max(1.0, self.max_ratio)
        if self.min_ratio < 0 or not (
            self.min_ratio - slack <= self.mean_ratio <= self.max_ratio + slack
        ):
            raise ValueError("inconsistent truncation statistics")

    @property
    def meets_existence_constant(self) -> bool | None:
        if self.existence_constant is None:
            return None
        return self.min_ratio <= self.existence_constant

    def as_lines(self, prefix="truncation") -> list[str]:
        return [
            f"{prefix}.method: {self.method}",
            f"{prefix}.samples: {self.samples}",
            f"{prefix}.ratio_identity: {_fmt(self.ratio_identity)}",
            f"{prefix}.min_ratio: {_fmt(self.min_ratio)}",
            f"{prefix}.argmin_sigma: {self.argmin_sigma}",
            f"{prefix}.mean_ratio: {_fmt(self.mean_ratio)}",
            f"{prefix}.max_ratio: {_fmt(self.max_ratio)}",
            f"{prefix}.stderr: {_fmt(self.stderr)}",
            f"{prefix}.existence_constant: {_fmt(self.existence_constant)}",
            f"{prefix}.meets_existence_constant: {_fmt(self.meets_existence_constant)}",
        ]


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: np.ndarray
    stderr: np.ndarray  # per entry, sample std / sqrt(trials)
    trials: int

    @property
    def max_stderr(self) -> float:
        return float(np.max(self.stderr)) if self.stderr.size else 0.0


@dataclass(frozen=True)
class AverageTruncationReport:
    """Norm checks on the permutation average E[LL*]."""

    norm_average: float
    norm_b: float
    norm_h: float
    psd_unit_diagonal: bool
    checks: dict = field(default_factory=dict)

    @property
    def bound_general(self) -> float:
        return 4.0 * self.norm_b ** 2

    @property
    def bound_psd(self) -> float | None:
        return self.norm_b ** 2 if self.psd_unit_diagonal else None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_lines(self, prefix="average") -> list[str]:
        lines = [
            f"{prefix}.norm: {_fmt(self.norm_average)}",
            f"{prefix}.bound_general: {_fmt(self.bound_general)}",
            f"{prefix}.bound_psd: {_fmt(self.bound_psd)}",
            f"{prefix}.norm_h: {_fmt(self.norm_h)}",
        ]
        lines += [f"{prefix}.check.{name}: {_fmt(ok)}" for name, ok in self.checks.items()]
        return lines


@dataclass(frozen=True)
class FormulaComparison:
    """Reference average vs the position-weighted (1/n) K o H^2 formula."""

    reference_method: str
    reference: np.ndarray
    position_weighted: np.ndarray
    mismatches: tuple[tuple[int, int], ...]
    max_abs_difference: float

    @property
    def agrees(self) -> bool:
        return not self.mismatches

    def as_lines(self, prefix="formula") -> list[str]:
        shown = " ".join(f"({i + 1},{j + 1})" for i, j in self.mismatches[:16])
        if len(self.mismatches) > 16:
            shown += " ..."
        return [
            f"{prefix}.reference: {self.reference_method}",
            f"{prefix}.agrees: {'yes' if self.agrees else 'no'}",
            f"{prefix}.max_abs_difference: {_fmt(self.max_abs_difference)}",
            f"{prefix}.mismatched_entries: {len(self.mismatches)}",
            f"{prefix}.mismatch_positions: {shown or '-'}",
        ]


@dataclass(frozen=True)
class BoundReport:
    """Theoretical per-sweep contraction factors of the expected squared energy error."""

    omega: float
    n: int
    lambda1: float
    kappa_bar: float
    rank: int
    rate_cyclic: float
    rate_single_step: float
    rate_shuffled: float
    rate_preshuffled: float
    rate_cyclic_small_rank: float | None = None
    c0: float | None = None
    c1: float = 32.42
    c2: float = 2907.0

    RATE_FIELDS = (
        "rate_cyclic", "rate_cyclic_small_rank", "rate_single_step", "rate_shuffled", "rate_preshuffled",
    )

    def __post_init__(self):
        for name in self.RATE_FIELDS:
            rate = getattr(self, name)
            if rate is not None and not 0.0 <= rate < 1.0:
                raise ValueError(f"{name}={rate!r} outside [0, 1)")

    def rows(self) -> list[tuple[str, object]]:
        return [
            ("omega", self.omega),
            ("n", self.n),
            ("lambda1", self.lambda1),
            ("kappa_bar", self.kappa_bar),
            ("rank", self.rank),
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
        ] + [(name, getattr(self, name)) for name in self.RATE_FIELDS]

    def as_lines(self, prefix="bound") -> list[str]:
        return [f"{prefix}.{key}: {_fmt(value)}" for key, value in self.rows()]
