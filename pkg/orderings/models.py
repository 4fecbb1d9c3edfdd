# orderings/models.py
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from django.db import models

from linalg.models import Permutation


class OrderingKind(models.TextChoices):
    CYCLIC = "cyclic", "Cyclic (1..n every sweep)"
    SHUFFLED = "shuffled", "Shuffled (fresh permutation per sweep)"
    PRESHUFFLED = "preshuffled", "Preshuffled (one permutation drawn once)"
    SINGLE_STEP = "single-step", "Single-step random (n independent picks)"
    FIXED = "fixed", "Fixed (user-supplied permutation)"


WITH_SIGMA = (OrderingKind.PRESHUFFLED, OrderingKind.FIXED)


@dataclass
class RngState:
    """
    Seeded PCG64 stream. Child streams for trials come from
    SeedSequence(seed, spawn_key=(trial,)), so trial k draws the same numbers
    no matter which trials ran before it.
    """

    seed: int
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def below(self, high: int) -> int:
        """Uniform integer in [0, high) (numpy's bounded draw is rejection based, no modulo bias)."""
        return int(self.generator.integers(0, high))

    def integers(self, high: int, size: int) -> np.ndarray:
        return self.generator.integers(0, high, size=size)

    def normal(self, size, complex_entries=False) -> np.ndarray:
        values = self.generator.standard_normal(size)
        if complex_entries:
            values = values + 1j * self.generator.standard_normal(size)
        return values

    def spawn(self, trial: int) -> RngState:
        from .services import derive_seed

        return RngState(derive_seed(self.seed, trial))


@dataclass(frozen=True)
class OrderingStrategy:
    kind: OrderingKind
    sigma: Permutation | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", OrderingKind(self.kind))
        if self.kind in WITH_SIGMA and self.sigma is None:
            raise ValueError(f"{self.kind} ordering needs a permutation")
        if self.kind not in WITH_SIGMA and self.sigma is not None:
            raise ValueError(f"{self.kind} ordering takes no permutation")

    @classmethod
    def preshuffled(cls, n: int, rng: RngState) -> OrderingStrategy:
        from .services import random_permutation

        return cls(OrderingKind.PRESHUFFLED, random_permutation(n, rng))

    @classmethod
    def for_kind(cls, kind, n: int, rng: RngState, sigma: Permutation | None = None) -> OrderingStrategy:
        """Build a strategy; preshuffled draws its one-time permutation from rng unless given."""
        kind = OrderingKind(kind)
        if kind == OrderingKind.PRESHUFFLED and sigma is None:
            return cls.preshuffled(n, rng)
        return cls(kind, sigma if kind in WITH_SIGMA else None)

    def check_size(self, n: int) -> None:
        if self.sigma is not None and self.sigma.n != n:
            raise ValueError(f"permutation length {self.sigma.n} does not match n={n}")

    def __str__(self):
        if self.sigma is None:
            return str(self.kind.value)
        return f"{self.kind.value}({self.sigma})"
