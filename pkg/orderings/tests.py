from collections import Counter

import numpy as np
from django.test import SimpleTestCase

from linalg.models import Permutation

from .models import OrderingKind, OrderingStrategy, RngState
from .services import derive_seed, random_permutation, sweep_order


class RandomPermutationTests(SimpleTestCase):
    def test_n_one_is_identity(self):
        self.assertTrue(random_permutation(1, RngState(0)).is_identity())

    def test_deterministic_for_fixed_seed(self):
        first = RngState(42)
        second = RngState(42)
        a = [random_permutation(5, first) for _ in range(2)]
        b = [random_permutation(5, second) for _ in range(2)]
        self.assertEqual(a, b)

    def test_uniform_over_all_permutations_of_four(self):
        rng = RngState(2024)
        draws = 24000
        counts = Counter(random_permutation(4, rng).map for _ in range(draws))
        self.assertEqual(len(counts), 24)
        expected = draws / 24
        sd = np.sqrt(draws * (1 / 24) * (23 / 24))
        for count in counts.values():
            self.assertLess(abs(count - expected), 5 * sd)

    def test_rejects_empty(self):
        with self.assertRaises(ValueError):
            random_permutation(0, RngState(0))


class DeriveSeedTests(SimpleTestCase):
    def test_stable_and_distinct(self):
        self.assertEqual(derive_seed(7, 3), derive_seed(7, 3))
        self.assertNotEqual(derive_seed(7, 3), derive_seed(7, 4))
        self.assertNotEqual(derive_seed(7, 3), derive_seed(8, 3))

    def test_spawn_is_order_insensitive(self):
        base = RngState(9)
        later = base.spawn(5).normal(3)
        base.spawn(1).normal(100)
        np.testing.assert_array_equal(base.spawn(5).normal(3), later)

    def test_seed_range(self):
        with self.assertRaises(ValueError):
            RngState(-1)


class StrategyTests(SimpleTestCase):
    def test_sigma_required_for_preshuffled_and_fixed(self):
        with self.assertRaises(ValueError):
            OrderingStrategy(OrderingKind.FIXED)
        with self.assertRaises(ValueError):
            OrderingStrategy(OrderingKind.CYCLIC, Permutation.identity(3))

    def test_for_kind_draws_preshuffled_sigma(self):
        strategy = OrderingStrategy.for_kind("preshuffled", 6, RngState(1))
        self.assertEqual(strategy.sigma.n, 6)


class SweepOrderTests(SimpleTestCase):
    def test_cyclic(self):
        order = sweep_order(OrderingStrategy(OrderingKind.CYCLIC), 4, RngState(0))
        self.assertEqual(list(order), [0, 1, 2, 3])

    def test_preshuffled_repeats(self):
        strategy = OrderingStrategy(OrderingKind.PRESHUFFLED, Permutation.parse("3,1,2"))
        rng = RngState(0)
        orders = [list(sweep_order(strategy, 3, rng)) for _ in range(5)]
        self.assertEqual(orders, [[2, 0, 1]] * 5)

    def test_shuffled_uses_each_index_once(self):
        rng = RngState(3)
        strategy = OrderingStrategy(OrderingKind.SHUFFLED)
        orders = {tuple(sweep_order(strategy, 7, rng)) for _ in range(20)}
        for order in orders:
            self.assertEqual(sorted(order), list(range(7)))
        self.assertGreater(len(orders), 1)

    def test_single_step_marginals_uniform(self):
        rng = RngState(5)
        strategy = OrderingStrategy(OrderingKind.SINGLE_STEP)
        draws = np.array([sweep_order(strategy, 4, rng) for _ in range(10_000)])
        self.assertTrue(any(len(set(row)) < 4 for row in draws))
        sd = np.sqrt(10_000 * 0.25 * 0.75)
        for position in range(4):
            counts = np.bincount(draws[:, position], minlength=4)
            self.assertTrue(np.all(np.abs(counts - 2500) < 5 * sd))

    def test_size_mismatch(self):
        strategy = OrderingStrategy(OrderingKind.FIXED, Permutation.identity(3))
        with self.assertRaises(ValueError):
            sweep_order(strategy, 4, RngState(0))
