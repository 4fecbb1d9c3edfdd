# analysis/permutations.py
"""Batched relabelling helpers shared by the averaging, truncation and contraction code."""
from __future__ import annotations

import itertools
import math

import numpy as np
from django.conf import settings

from orderings.models import RngState
from orderings.services import random_permutation

CHUNK = 5040


def check_exhaustive(n: int, fallback: str) -> None:
    if n > settings.SHUFFLED_SOR["EXHAUSTIVE_MAX_N"]:
        raise ValueError(f"use {fallback}")


def all_permutations(n: int, chunk: int = CHUNK):
    """Every permutation of 0..n-1 in lexicographic order, as (k, n) index blocks."""
    source = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(source, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def sampled_permutations(n: int, trials: int, rng: RngState, chunk: int = CHUNK):
    """`trials` uniform permutations drawn one after another from rng."""
    remaining = trials
    while remaining > 0:
        size = min(chunk, remaining)
        yield np.array([random_permutation(n, rng).map for _ in range(size)], dtype=np.intp)
        remaining -= size


def count_all(n: int) -> int:
    return math.factorial(n)


def conjugate_stack(entries: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """stack[k][i][j] = entries[perms[k][i]][perms[k][j]]."""
    return entries[perms[:, :, None], perms[:, None, :]]


def restore_stack(stack: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Inverse of conjugate_stack: back to the original indexing."""
    inverse = np.argsort(perms, axis=1)
    k = np.arange(perms.shape[0])[:, None, None]
    return stack[k, inverse[:, :, None], inverse[:, None, :]]


def restore_rows(stack: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """out[k][perms[k][i]] = stack[k][i]."""
    inverse = np.argsort(perms, axis=1)
    return stack[np.arange(perms.shape[0])[:, None], inverse]


def truncation_stack(entries: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Strictly lower parts L_sigma for every ordering in the block."""
    return np.tril(conjugate_stack(entries, perms), -1)


def stack_norms(stack: np.ndarray) -> np.ndarray:
    return np.linalg.norm(stack, 2, axis=(1, 2))
