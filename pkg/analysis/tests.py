import math

import numpy as np
from django.test import SimpleTestCase

from linalg.models import HermitianMatrix, Permutation
from linalg.services import permute_conjugate, strict_lower
from orderings.models import OrderingKind, RngState
from problems.services import fan_example, random_normalized_factor

from .averages import (
    check_average_truncation_norms, compare_llt_formulas, expected_llt_closed,
    expected_llt_exhaustive, expected_llt_montecarlo, expected_llt_position_weighted,
)
from .bounds import bound_for_strategy, cosine_exponent, evaluate_bounds, expected_contraction
from .models import BoundReport, SearchMethod
from .truncation import (
    check_log_truncation_bound, expected_truncation_norm, log_truncation_factor,
    min_truncation_exhaustive, min_truncation_heuristic, truncation_ratio,
)

TWO_BY_TWO = HermitianMatrix([[1, 0.5], [0.5, 1]])
# I - 0.4 * adjacency of the 4-cycle; eigenvalues 1.8, 1, 1, 0.2
CYCLE_FOUR = HermitianMatrix(np.eye(4) - 0.4 * (np.roll(np.eye(4), 1, axis=1) + np.roll(np.eye(4), -1, axis=1)))


def random_hermitian(rng, n, complex_entries):
    x = rng.normal((n, n), complex_entries=complex_entries)
    return HermitianMatrix(x + x.conj().T)


def random_psd(seed, n, m=None, complex_entries=False):
    return random_normalized_factor(n, m or n, complex_entries, RngState(seed)).b_matrix


class ExpectedLLtTests(SimpleTestCase):
    def test_two_by_two_oracle(self):
        np.testing.assert_allclose(expected_llt_exhaustive(TWO_BY_TWO), np.diag([0.125, 0.125]), atol=1e-15)
        np.testing.assert_allclose(expected_llt_closed(TWO_BY_TWO), np.diag([0.125, 0.125]), atol=1e-15)

    def test_identity_gives_zero(self):
        for func in (expected_llt_exhaustive, expected_llt_closed, expected_llt_position_weighted):
            self.assertFalse(np.any(func(HermitianMatrix.identity(4))))

    def test_closed_form_matches_oracle(self):
        rng = RngState(2024)
        for trial in range(120):
            n = 1 + trial % 7
            b = random_hermitian(rng, n, complex_entries=bool(trial % 2))
            exact = expected_llt_exhaustive(b)
            scale = max(1.0, float(np.max(np.abs(exact))))
            np.testing.assert_allclose(expected_llt_closed(b), exact, rtol=0, atol=1e-12 * scale)

    def test_oracle_is_hermitian_psd(self):
        b = random_hermitian(RngState(5), 3, complex_entries=True)
        average = expected_llt_exhaustive(b)
        np.testing.assert_allclose(average, average.conj().T, atol=1e-13)
        self.assertGreaterEqual(np.linalg.eigvalsh(average).min(), -1e-12)

    def test_exhaustive_limit(self):
        with self.assertRaisesMessage(ValueError, "use montecarlo"):
            expected_llt_exhaustive(HermitianMatrix.identity(9))


class PositionWeightedTests(SimpleTestCase):
    def test_two_by_two(self):
        np.testing.assert_allclose(
            expected_llt_position_weighted(TWO_BY_TWO), [[0, 0], [0, 0.125]], atol=1e-15
        )

    def test_comparison_flags_disagreement(self):
        comparison = compare_llt_formulas(TWO_BY_TWO)
        self.assertFalse(comparison.agrees)
        self.assertEqual(comparison.reference_method, SearchMethod.EXHAUSTIVE)
        self.assertEqual(comparison.mismatches, ((0, 0),))
        self.assertAlmostEqual(comparison.max_abs_difference, 0.125)
        self.assertIn("formula.agrees: no", comparison.as_lines())

    def test_large_n_compares_against_closed_form(self):
        comparison = compare_llt_formulas(random_psd(3, 10))
        self.assertEqual(comparison.reference_method, "closed")
        self.assertFalse(comparison.agrees)


class MonteCarloTests(SimpleTestCase):
    def test_forced_identity_is_exact(self):
        b = random_hermitian(RngState(8), 4, complex_entries=True)
        estimate = expected_llt_montecarlo(b, 1, None, sigmas=[Permutation.identity(4)])
        lower = strict_lower(b)
        np.testing.assert_allclose(estimate.mean, lower @ lower.conj().T, atol=1e-14)
        self.assertEqual(estimate.trials, 1)
        self.assertEqual(estimate.max_stderr, 0.0)

    def test_identity_matrix(self):
        estimate = expected_llt_montecarlo(HermitianMatrix.identity(5), 50, RngState(1))
        self.assertFalse(np.any(estimate.mean))

    def test_converges_to_closed_form(self):
        b = random_psd(9, 5, complex_entries=True)
        estimate = expected_llt_montecarlo(b, 20000, RngState(10))
        closed = expected_llt_closed(b)
        deviation = np.abs(estimate.mean - closed)
        self.assertTrue(np.all(deviation <= 5 * estimate.stderr + 1e-13))
        self.assertGreaterEqual(np.linalg.eigvalsh((estimate.mean + estimate.mean.conj().T) / 2).min(), -1e-12)

    def test_rejects_zero_trials(self):
        with self.assertRaises(ValueError):
            expected_llt_montecarlo(TWO_BY_TWO, 0, RngState(0))


class AverageNormTests(SimpleTestCase):
    def test_identity(self):
        report = check_average_truncation_norms(HermitianMatrix.identity(3))
        self.assertEqual(report.norm_average, 0.0)
        self.assertTrue(report.passed)

    def test_all_ones(self):
        report = check_average_truncation_norms(HermitianMatrix(np.ones((2, 2))))
        self.assertAlmostEqual(report.norm_average, 0.5, places=12)
        self.assertAlmostEqual(report.bound_psd, 4.0, places=10)
        self.assertTrue(report.checks["psd_strict"])

    def test_random_psd_unit_diagonal(self):
        for seed in range(30):
            n = 4 + seed % 13
            report = check_average_truncation_norms(random_psd(seed, n, m=max(1, n // 2), complex_entries=bool(seed % 2)))
            self.assertTrue(report.psd_unit_diagonal)
            self.assertTrue(report.passed, report.checks)

    def test_general_hermitian(self):
        report = check_average_truncation_norms(random_hermitian(RngState(12), 6, complex_entries=True))
        self.assertFalse(report.psd_unit_diagonal)
        self.assertNotIn("psd_strict", report.checks)
        self.assertTrue(report.passed)

    def test_cycle_matrix(self):
        report = check_average_truncation_norms(CYCLE_FOUR)
        self.assertAlmostEqual(report.norm_b, 1.8, places=12)
        self.assertAlmostEqual(report.norm_h, 0.8, places=12)
        self.assertTrue(report.psd_unit_diagonal)
        self.assertTrue(report.passed, report.checks)


class TruncationTests(SimpleTestCase):
    def test_log_factor(self):
        self.assertEqual(log_truncation_factor(1), 0.5)
        self.assertEqual(log_truncation_factor(7), 1.5)
        self.assertEqual(log_truncation_factor(8), 2.0)

    def test_identity_ratio(self):
        for sigma in (Permutation.identity(3), Permutation.parse("3,1,2")):
            self.assertEqual(truncation_ratio(HermitianMatrix.identity(3), sigma), 0.0)

    def test_single_entry(self):
        h = 0.3 - 0.4j
        b = HermitianMatrix([[1, h], [np.conj(h), 1]])
        for sigma in (Permutation.identity(2), Permutation.parse("2,1")):
            self.assertAlmostEqual(truncation_ratio(b, sigma), 0.5 / 1.5, places=10)

    def test_zero_matrix(self):
        with self.assertRaises(ValueError):
            truncation_ratio(HermitianMatrix(np.zeros((2, 2))), Permutation.identity(2))

    def test_cycle_matrix_ratio(self):
        expected = np.linalg.norm(np.tril(CYCLE_FOUR.entries, -1), 2) / 1.8
        self.assertAlmostEqual(truncation_ratio(CYCLE_FOUR, Permutation.identity(4)), expected, places=10)
        self.assertTrue(check_log_truncation_bound(CYCLE_FOUR))

    def test_log_bound_holds(self):
        for seed in range(20):
            b = random_psd(100 + seed, 3 + seed % 10, complex_entries=bool(seed % 2))
            self.assertTrue(check_log_truncation_bound(b))
            self.assertTrue(check_log_truncation_bound(b, Permutation.parse(",".join(str(i) for i in range(b.n, 0, -1)))))

    def test_exhaustive(self):
        stats = min_truncation_exhaustive(HermitianMatrix.identity(4))
        self.assertEqual((stats.min_ratio, stats.mean_ratio, stats.max_ratio), (0.0, 0.0, 0.0))
        self.assertEqual(stats.samples, 24)

        pair = min_truncation_exhaustive(TWO_BY_TWO)
        self.assertAlmostEqual(pair.min_ratio, pair.max_ratio, places=14)

        stats = min_truncation_exhaustive(random_psd(7, 6))
        self.assertLessEqual(stats.min_ratio, stats.ratio_identity)
        self.assertAlmostEqual(truncation_ratio(random_psd(7, 6), stats.argmin_sigma), stats.min_ratio, places=8)
        self.assertEqual(stats.existence_constant, 32.42)
        self.assertTrue(stats.meets_existence_constant)

    def test_exhaustive_limit(self):
        with self.assertRaisesMessage(ValueError, "use heuristic"):
            min_truncation_exhaustive(HermitianMatrix.identity(9))

    def test_heuristic_against_exhaustive(self):
        for seed in range(8):
            b = random_psd(200 + seed, 5, m=3)
            exact = min_truncation_exhaustive(b)
            found = min_truncation_heuristic(b, 10, RngState(seed))
            self.assertGreaterEqual(found.min_ratio, exact.min_ratio - 1e-12)
            self.assertLessEqual(found.min_ratio, found.ratio_identity)

    def test_heuristic_identity_and_determinism(self):
        self.assertEqual(min_truncation_heuristic(HermitianMatrix.identity(5), 3, RngState(0)).min_ratio, 0.0)
        b = random_psd(11, 7)
        first = min_truncation_heuristic(b, 5, RngState(4))
        second = min_truncation_heuristic(b, 5, RngState(4))
        self.assertEqual(first, second)

    def test_expected_norm(self):
        stats = expected_truncation_norm(TWO_BY_TWO, 25, RngState(1))
        self.assertAlmostEqual(stats.mean_ratio, 1 / 3, places=12)
        self.assertEqual(stats.method, SearchMethod.MONTECARLO)

        b = random_psd(13, 5)
        exact = min_truncation_exhaustive(b)
        sampled = expected_truncation_norm(b, 200, RngState(2))
        self.assertGreaterEqual(sampled.mean_ratio, exact.min_ratio - 1e-12)
        self.assertLessEqual(sampled.mean_ratio, exact.max_ratio + 1e-12)


class BoundTests(SimpleTestCase):
    def test_fan_rates(self):
        report = evaluate_bounds(fan_example(4).b_matrix, 1.0)
        self.assertEqual((report.n, report.rank), (8, 2))
        self.assertAlmostEqual(report.rate_cyclic, 1 - 4 / 81, places=8)
        self.assertAlmostEqual(report.rate_shuffled, 0.84, places=8)
        self.assertAlmostEqual(report.rate_single_step, 0.00390625, places=8)
        self.assertIsNone(report.rate_cyclic_small_rank)

    def test_small_rank_variant(self):
        report = evaluate_bounds(fan_example(4).b_matrix, 1.0, c0=1.0)
        expected = 1 - 4 / (1 + 4 * math.log(2)) ** 2
        self.assertAlmostEqual(report.rate_cyclic_small_rank, expected, places=8)
        rank_one = evaluate_bounds(HermitianMatrix(np.ones((3, 3))), 1.0, c0=1.0)
        self.assertIsNone(rank_one.rate_cyclic_small_rank)

    def test_rates_in_unit_interval(self):
        for seed in range(10):
            for omega in (0.2, 1.0, 1.9):
                report = evaluate_bounds(random_psd(seed, 6, m=4), omega)
                for name in BoundReport.RATE_FIELDS:
                    rate = getattr(report, name)
                    if rate is not None:
                        self.assertTrue(0 <= rate < 1, name)

    def test_invalid_input(self):
        with self.assertRaises(ValueError):
            evaluate_bounds(TWO_BY_TWO, 2.0)
        with self.assertRaises(ValueError):
            evaluate_bounds(HermitianMatrix(np.diag([2.0, 1.0])), 1.0)
        with self.assertRaises(ValueError):
            evaluate_bounds(TWO_BY_TWO, 1.0, c0=-1.0)

    def test_strategy_lookup(self):
        report = evaluate_bounds(fan_example(4).b_matrix, 1.0)
        self.assertEqual(bound_for_strategy(report, OrderingKind.FIXED), report.rate_cyclic)
        self.assertEqual(bound_for_strategy(report, "shuffled"), report.rate_shuffled)
        self.assertEqual(bound_for_strategy(report, "single-step"), report.rate_single_step)

    def test_cosine_exponent(self):
        self.assertAlmostEqual(cosine_exponent(math.cos(math.pi / 8) ** 16, math.pi / 8), 16.0, places=10)
        with self.assertRaises(ValueError):
            cosine_exponent(1.0, 0.3)

    def test_report_lines(self):
        lines = dict(line.split(": ", 1) for line in evaluate_bounds(fan_example(4).b_matrix, 1.0).as_lines())
        self.assertAlmostEqual(float(lines["bound.rate_shuffled"]), 0.84, places=8)
        self.assertEqual(lines["bound.rate_cyclic_small_rank"], "n/a")
        self.assertEqual(lines["bound.n"], "8")


class ExpectedContractionTests(SimpleTestCase):
    def test_identity(self):
        self.assertEqual(expected_contraction(HermitianMatrix.identity(4), 1.0), 0.0)

    def test_below_shuffled_bound(self):
        for seed in range(12):
            b = random_psd(300 + seed, 3 + seed % 4, m=2 + seed % 3, complex_entries=bool(seed % 2))
            for omega in (0.7, 1.0, 1.5):
                measured = expected_contraction(b, omega)
                self.assertLessEqual(measured, evaluate_bounds(b, omega).rate_shuffled + 1e-10)
                self.assertGreaterEqual(measured, 0.0)

    def test_relabelling_invariance(self):
        b = random_psd(17, 5, complex_entries=True)
        tau = Permutation.parse("5,3,1,2,4")
        self.assertAlmostEqual(
            expected_contraction(b, 1.2), expected_contraction(permute_conjugate(b, tau), 1.2), delta=1e-10
        )

    def test_sampled_mode(self):
        b = random_psd(19, 10, m=4)
        first = expected_contraction(b, 1.0, trials=200, rng=RngState(6))
        self.assertEqual(first, expected_contraction(b, 1.0, trials=200, rng=RngState(6)))
        self.assertLess(first, 1.0)
        with self.assertRaises(ValueError):
            expected_contraction(b, 1.0)

    def test_zero_matrix(self):
        with self.assertRaisesMessage(ValueError, "zero matrix"):
            expected_contraction(HermitianMatrix(np.zeros((3, 3))), 1.0)
