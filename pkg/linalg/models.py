# linalg/models.py
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from django.conf import settings

DenseMatrix = npt.NDArray[np.complex128]
Vector = npt.NDArray[np.complex128]


def as_dense(values, *, name="matrix") -> DenseMatrix:
    """2-D complex copy of `values`; rejects NaN/Inf."""
    arr = np.array(values, dtype=np.complex128, copy=True)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(values, *, name="vector") -> Vector:
    arr = np.array(values, dtype=np.complex128, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


class HermitianMatrix:
    """
    Dense Hermitian matrix B = L + D + L*.

    The constructor symmetrizes to (B + B*)/2 and drops the imaginary part of
    the diagonal, so B[j][i] == conj(B[i][j]) holds exactly afterwards.
    Inputs further than HERMITIAN_TOLERANCE (relative, Frobenius) from
    Hermitian are rejected.
    """

    __slots__ = ("_entries",)

    def __init__(self, values, tolerance: float | None = None):
        arr = as_dense(values, name="hermitian matrix")
        if arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValueError(f"hermitian matrix must be square and non-empty, got {arr.shape}")
        if tolerance is None:
            tolerance = settings.SHUFFLED_SOR["HERMITIAN_TOLERANCE"]
        scale = np.linalg.norm(arr)
        skew = np.linalg.norm(arr - arr.conj().T)
        if skew > tolerance * max(scale, 1e-300):
            raise ValueError(f"matrix is not Hermitian (relative asymmetry {skew / scale:.3e})")
        sym = 0.5 * (arr + arr.conj().T)
        # exact closure: copy the lower triangle onto the upper one
        lower = np.tril(sym, -1)
        sym = lower + lower.conj().T + np.diag(sym.diagonal().real)
        sym.setflags(write=False)
        self._entries = sym

    @property
    def entries(self) -> DenseMatrix:
        return self._entries

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return self._entries.diagonal().real.copy()

    @property
    def is_real(self) -> bool:
        return not np.any(self._entries.imag)

    def __matmul__(self, other):
        return self._entries @ other

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    __hash__ = None

    def __repr__(self):
        return f"HermitianMatrix(n={self.n})"

    @classmethod
    def identity(cls, n: int) -> HermitianMatrix:
        return cls(np.eye(n))


@dataclass(frozen=True)
class Permutation:
    """Bijection σ of {0..n-1}; formatted 1-based ("3,1,2") everywhere outside memory."""

    map: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.map)
        if sorted(values) != list(range(len(values))):
            raise ValueError(f"not a permutation of 0..{len(values) - 1}: {values}")
        object.__setattr__(self, "map", values)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def parse(cls, text: str) -> Permutation:
        """Parse a comma-separated 1-based index list."""
        try:
            values = [int(part) - 1 for part in text.replace(" ", "").split(",") if part]
        except ValueError as exc:
            raise ValueError(f"invalid permutation {text!r}") from exc
        if not values:
            raise ValueError("empty permutation")
        return cls(tuple(values))

    @property
    def n(self) -> int:
        return len(self.map)

    def as_array(self) -> np.ndarray:
        return np.array(self.map, dtype=np.intp)

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for i, s in enumerate(self.map):
            inv[s] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return self.map == tuple(range(self.n))

    def __len__(self):
        return self.n

    def __str__(self):
        return ",".join(str(v + 1) for v in self.map)


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: tuple[float, ...]
    lambda1: float
    lambda_r: float
    rank: int
    kappa_bar: float
    spectral_norm: float
    rank_tolerance: float = field(default=1e-10, repr=False)

    def as_lines(self, prefix="spectrum") -> list[str]:
        return [
            f"{prefix}.lambda1: {self.lambda1:.17g}",
            f"{prefix}.lambda_r: {self.lambda_r:.17g}",
            f"{prefix}.rank: {self.rank}",
            f"{prefix}.kappa_bar: {self.kappa_bar:.17g}",
            f"{prefix}.spectral_norm: {self.spectral_norm:.17g}",
        ]
