# solvers/models.py
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from django.conf import settings


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters; omega = 1 is Gauss-Seidel."""

    omega: float = 1.0
    max_sweeps: int = 100
    target_error_sq: float | None = None
    seed: int = 0
    record_orders: bool = False

    def __post_init__(self):
        if not 0.0 < self.omega < 2.0:
            raise ValueError(f"omega must lie in (0, 2), got {self.omega}")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.target_error_sq is None:
            object.__setattr__(self, "target_error_sq", settings.SHUFFLED_SOR["TARGET_ERROR_SQ"])
        if self.target_error_sq < 0:
            raise ValueError("target_error_sq must be >= 0")


@dataclass
class IterationHistory:
    """
    errors_sq[k] = |ȳ - y^(k)|_B^2 and residuals[k] = ||b - B y^(k)||, k = 0..K.
    """

    strategy: str
    errors_sq: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    orders: list[np.ndarray] | None = None
    final_iterate: np.ndarray | None = None

    def record(self, error_sq: float, residual: float) -> None:
        self.errors_sq.append(max(float(error_sq), 0.0))
        self.residuals.append(float(residual))

    @property
    def sweeps(self) -> int:
        return len(self.errors_sq) - 1

    def __len__(self):
        return len(self.errors_sq)
