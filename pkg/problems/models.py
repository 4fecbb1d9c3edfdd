# problems/models.py
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from django.db import models

from linalg.models import HermitianMatrix


class ProblemKind(models.TextChoices):
    FAN = "fan", "Fan of 2m unit vectors in the plane"
    RANDOM = "random", "Row-normalized Gaussian factor"
    LOWRANK = "lowrank", "Low-rank row-normalized Gaussian factor"
    FILE = "file", "Loaded from MatrixMarket files"


@dataclass(frozen=True)
class ProblemMeta:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def as_lines(self) -> list[str]:
        lines = [f"kind: {self.kind}"]
        lines += [f"{key}: {value}" for key, value in sorted(self.params.items())]
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        return lines

    @classmethod
    def from_lines(cls, lines) -> ProblemMeta:
        values = {}
        for line in lines:
            key, sep, value = line.partition(":")
            if sep:
                values[key.strip()] = value.strip()
        kind = values.pop("kind", ProblemKind.FILE)
        seed = values.pop("seed", None)
        params = {}
        for key, value in values.items():
            try:
                params[key] = int(value)
            except ValueError:
                params[key] = value
        return cls(kind=kind, params=params, seed=int(seed) if seed is not None else None)


@dataclass(frozen=True)
class ProblemInstance:
    """Consistent system B ybar = b with unit-diagonal B (and optional factor A, B = AA*)."""

    b_matrix: HermitianMatrix
    b: np.ndarray
    ybar: np.ndarray
    y0: np.ndarray
    meta: ProblemMeta
    a: np.ndarray | None = None
    xbar: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.b_matrix.n

    @property
    def x0(self) -> np.ndarray | None:
        """Kaczmarz start matching y0 (x0 = A* y0)."""
        if self.a is None:
            return None
        return self.a.conj().T @ self.y0
