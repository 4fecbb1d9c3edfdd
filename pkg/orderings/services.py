# orderings/services.py
import numpy as np

from linalg.models import Permutation

from .models import OrderingKind, OrderingStrategy, RngState


def derive_seed(base_seed: int, trial: int) -> int:
    """Independent 64-bit seed for trial `trial` of an experiment seeded with `base_seed`."""
    sequence = np.random.SeedSequence(int(base_seed), spawn_key=(int(trial),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def random_permutation(n: int, rng: RngState) -> Permutation:
    """Uniform permutation by Fisher-Yates (Durstenfeld), advancing rng."""
    if n < 1:
        raise ValueError("n must be >= 1")
    items = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        items[i], items[j] = items[j], items[i]
    return Permutation(tuple(items))


def sweep_order(strategy: OrderingStrategy, n: int, rng: RngState) -> np.ndarray:
    """0-based coordinate sequence of length n for one sweep."""
    strategy.check_size(n)
    kind = strategy.kind
    if kind == OrderingKind.CYCLIC:
        return np.arange(n)
    if kind == OrderingKind.SHUFFLED:
        return random_permutation(n, rng).as_array()
    if kind == OrderingKind.SINGLE_STEP:
        return rng.integers(n, n)
    # preshuffled / fixed
    if strategy.sigma is None:
        raise ValueError(f"{kind} ordering needs a permutation")
    return strategy.sigma.as_array()
