# harness/models.py
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from django.db import models

from linalg.models import Permutation
from orderings.models import OrderingKind
from solvers.models import SolverConfig


class SolveMethod(models.TextChoices):
    SOR = "sor", "SOR on By = b"
    KACZMARZ = "kaczmarz", "Kaczmarz on Ax = b"


@dataclass(frozen=True)
class ExperimentConfig:
    """One solve/compare run: strategies x trials on a single problem."""

    strategies: tuple[str, ...]
    trials: int = 1
    omega: float = 1.0
    max_sweeps: int = 100
    target_error_sq: float | None = None
    seed: int = 0
    sigma: Permutation | None = None
    method: str = SolveMethod.SOR
    csv_path: Path | None = None
    plot_path: Path | None = None
    summary_path: Path | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        object.__setattr__(self, "strategies", tuple(OrderingKind(s).value for s in self.strategies))
        if not 0.0 < self.omega < 2.0:
            raise ValueError(f"omega must lie in (0, 2), got {self.omega}")

    def solver_config(self, seed: int) -> SolverConfig:
        return SolverConfig(
            omega=self.omega,
            max_sweeps=self.max_sweeps,
            target_error_sq=self.target_error_sq,
            seed=seed,
        )


@dataclass(frozen=True)
class ComparisonRow:
    strategy: str
    trial: int
    sweep: int
    error_sq: float
    residual: float

    def __post_init__(self):
        if self.error_sq < 0:
            raise ValueError("error_sq must be >= 0")

    def as_csv_row(self) -> list[str]:
        return [
            self.strategy,
            str(self.trial),
            str(self.sweep),
            f"{self.error_sq:.17g}",
            f"{self.residual:.17g}",
        ]

    @classmethod
    def from_csv_row(cls, row: dict) -> ComparisonRow:
        return cls(
            strategy=row["strategy"],
            trial=int(row["trial"]),
            sweep=int(row["sweep"]),
            error_sq=float(row["error_sq"]),
            residual=float(row["residual"]),
        )


@dataclass
class StrategySummary:
    """Mean error curve of one strategy across trials, next to its theoretical rate."""

    strategy: str
    trials: int
    mean_errors_sq: list[float] = field(default_factory=list)
    stderr_errors_sq: list[float] = field(default_factory=list)
    empirical_rate: float | None = None
    theoretical_rate: float | None = None

    def as_lines(self) -> list[str]:
        def fmt(value):
            return "n/a" if value is None else f"{value:.17g}"

        return [
            f"{self.strategy}.trials: {self.trials}",
            f"{self.strategy}.sweeps: {len(self.mean_errors_sq) - 1}",
            f"{self.strategy}.initial_error_sq: {fmt(self.mean_errors_sq[0] if self.mean_errors_sq else None)}",
            f"{self.strategy}.final_mean_error_sq: {fmt(self.mean_errors_sq[-1] if self.mean_errors_sq else None)}",
            f"{self.strategy}.empirical_rate: {fmt(self.empirical_rate)}",
            f"{self.strategy}.theoretical_rate: {fmt(self.theoretical_rate)}",
        ]
