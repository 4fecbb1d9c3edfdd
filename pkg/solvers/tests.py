import math

import numpy as np
from django.test import SimpleTestCase

from linalg.models import HermitianMatrix, Permutation
from linalg.services import energy_seminorm_sq, permute_conjugate, range_projector, residual_norm, strict_lower
from orderings.models import OrderingKind, OrderingStrategy, RngState
from problems.services import fan_example, low_rank_psd, random_normalized_factor

from .models import IterationHistory, SolverConfig
from .services import (
    empirical_rate, error_iteration_matrix, kaczmarz_sweep, run_kaczmarz, run_solver,
    sor_sweep, sweep_energy_drop,
)

CYCLIC = OrderingStrategy(OrderingKind.CYCLIC)
SHUFFLED = OrderingStrategy(OrderingKind.SHUFFLED)


def matrix_form_sweep(b_matrix, b, y, omega):
    n = b_matrix.n
    lower = np.eye(n) + omega * strict_lower(b_matrix)
    return y + omega * np.linalg.solve(lower, b - b_matrix.entries @ y)


class SolverConfigTests(SimpleTestCase):
    def test_omega_open_interval(self):
        for omega in (0.0, 2.0, -1.0):
            with self.assertRaises(ValueError):
                SolverConfig(omega=omega)

    def test_default_target(self):
        self.assertEqual(SolverConfig().target_error_sq, 1e-24)


class SorSweepTests(SimpleTestCase):
    def test_identity_solves_in_one_sweep(self):
        b = np.array([1.5, -2.0, 3.0])
        y = sor_sweep(HermitianMatrix.identity(3), b, [7.0, 8.0, 9.0], 1.0, [2, 0, 1])
        np.testing.assert_array_equal(y, b)

    def test_two_projection_steps(self):
        y = sor_sweep(HermitianMatrix([[1, 0.5], [0.5, 1]]), [1, 1], [0, 0], 1.0, [0, 1])
        np.testing.assert_allclose(y, [1.0, 0.5])

    def test_matches_forward_substitution(self):
        rng = RngState(12)
        for n in (8, 32):
            instance = random_normalized_factor(n, n, True, rng)
            y = rng.normal(n, complex_entries=True)
            for omega in (0.4, 1.0, 1.7):
                swept = sor_sweep(instance.b_matrix, instance.b, y, omega, np.arange(n))
                expected = matrix_form_sweep(instance.b_matrix, instance.b, y, omega)
                np.testing.assert_allclose(swept, expected, atol=1e-12)

    def test_requires_unit_diagonal(self):
        with self.assertRaisesMessage(ValueError, "call rescale_unit_diagonal first"):
            sor_sweep(HermitianMatrix(np.diag([2.0, 1.0])), [1, 1], [0, 0], 1.0, [0, 1])


class KaczmarzSweepTests(SimpleTestCase):
    def test_identity_rows(self):
        x = kaczmarz_sweep(np.eye(3), [1, 2, 3], [0, 0, 0], 1.0, [0, 1, 2])
        np.testing.assert_allclose(x, [1, 2, 3])

    def test_orthogonal_rows_reach_zero(self):
        x = kaczmarz_sweep(np.eye(2), [0, 0], [1, 1], 1.0, [0, 1])
        np.testing.assert_array_equal(x, [0, 0])

    def test_rejects_unnormalized_rows(self):
        with self.assertRaises(ValueError):
            kaczmarz_sweep([[2.0, 0.0]], [1.0], [0.0, 0.0], 1.0, [0])

    def test_equivalent_to_sor_on_gram_matrix(self):
        rng = RngState(21)
        instance = random_normalized_factor(10, 6, True, rng)
        a = instance.a
        y = np.zeros(10, dtype=complex)
        x = a.conj().T @ y
        for _ in range(20):
            order = rng.integers(10, 10)
            y = sor_sweep(instance.b_matrix, instance.b, y, 1.3, order)
            x = kaczmarz_sweep(a, instance.b, x, 1.3, order)
            self.assertLess(np.linalg.norm(a.conj().T @ y - x), 1e-10)


class RunSolverTests(SimpleTestCase):
    def test_identity_exact_after_one_sweep(self):
        for kind in OrderingKind:
            sigma = Permutation.parse("2,3,1") if kind in ("preshuffled", "fixed") else None
            history = run_solver(
                HermitianMatrix.identity(3), [1, 2, 3], [0, 0, 0], [1, 2, 3],
                SolverConfig(max_sweeps=10), OrderingStrategy(kind, sigma),
            )
            if kind == OrderingKind.SINGLE_STEP:
                continue  # repeated picks may miss a coordinate
            self.assertEqual(history.errors_sq, [14.0, 0.0])

    def test_fan_cyclic_rate_is_cosine_power(self):
        instance = fan_example(4)
        history = run_solver(
            instance.b_matrix, instance.b, instance.y0, instance.ybar,
            SolverConfig(max_sweeps=8), CYCLIC,
        )
        expected = math.cos(math.pi / 8) ** 16
        errors = history.errors_sq
        for k in range(2, 8):
            self.assertAlmostEqual(errors[k + 1] / errors[k] / expected, 1.0, delta=1e-6)

    def test_factor_measurement_keeps_fan_rate_exact(self):
        instance = fan_example(4)
        history = run_solver(
            instance.b_matrix, instance.b, instance.y0, instance.ybar,
            SolverConfig(max_sweeps=20), CYCLIC, factor=instance.a,
        )
        expected = math.cos(math.pi / 8) ** 16
        errors = history.errors_sq
        self.assertEqual(history.sweeps, 20)
        for k in range(5, 20):
            self.assertAlmostEqual(errors[k + 1] / errors[k] / expected, 1.0, delta=1e-6)
        self.assertAlmostEqual(errors[0], energy_seminorm_sq(instance.b_matrix, instance.y0), delta=1e-10)

    def test_residuals_are_measured_on_each_iterate(self):
        instance = fan_example(4)
        history = run_solver(
            instance.b_matrix, instance.b, instance.y0, instance.ybar,
            SolverConfig(max_sweeps=5), CYCLIC,
        )
        self.assertEqual(history.residuals[0], residual_norm(instance.b_matrix, instance.b, instance.y0))
        identity = run_solver(
            HermitianMatrix.identity(3), [1, 2, 3], [0, 0, 0], [1, 2, 3], SolverConfig(max_sweeps=10), CYCLIC,
        )
        np.testing.assert_allclose(identity.residuals, [math.sqrt(14.0), 0.0], atol=1e-15)

    def test_cyclic_errors_are_non_increasing(self):
        rng = RngState(31)
        instance = low_rank_psd(12, 5, rng)
        for omega in (0.3, 1.0, 1.8):
            history = run_solver(
                instance.b_matrix, instance.b, instance.y0, instance.ybar,
                SolverConfig(omega=omega, max_sweeps=30), CYCLIC,
            )
            diffs = np.diff(history.errors_sq)
            self.assertTrue(np.all(diffs <= 1e-12 * history.errors_sq[0]))
            self.assertEqual(len(history.residuals), len(history.errors_sq))

    def test_kernel_shift_of_start_is_carried_unchanged(self):
        instance = low_rank_psd(9, 3, RngState(41))
        kernel = np.eye(9) - range_projector(instance.b_matrix)
        shift = kernel @ RngState(42).normal(9)
        config = SolverConfig(max_sweeps=6, seed=3, target_error_sq=0.0)
        plain = run_solver(instance.b_matrix, instance.b, instance.y0, instance.ybar, config, SHUFFLED)
        shifted = run_solver(
            instance.b_matrix, instance.b, instance.y0 + shift, instance.ybar, config, SHUFFLED,
        )
        np.testing.assert_allclose(shifted.final_iterate - plain.final_iterate, shift, atol=1e-10)
        np.testing.assert_allclose(shifted.errors_sq, plain.errors_sq, rtol=1e-8, atol=1e-20)

    def test_kernel_only_error_is_a_fixed_point(self):
        instance = low_rank_psd(6, 2, RngState(43))
        kernel = np.eye(6) - range_projector(instance.b_matrix)
        start = instance.ybar + kernel @ RngState(44).normal(6)
        history = run_solver(
            instance.b_matrix, instance.b, start, instance.ybar,
            SolverConfig(max_sweeps=4, target_error_sq=0.0), CYCLIC,
        )
        np.testing.assert_allclose(history.final_iterate, start, atol=1e-10)

    def test_permutation_covariance(self):
        instance = random_normalized_factor(7, 7, True, RngState(51))
        sigma = Permutation.parse("4,7,1,3,6,2,5")
        idx = sigma.as_array()
        config = SolverConfig(omega=1.2, max_sweeps=6)
        fixed = run_solver(
            instance.b_matrix, instance.b, instance.y0, instance.ybar, config,
            OrderingStrategy(OrderingKind.FIXED, sigma),
        )
        permuted = run_solver(
            permute_conjugate(instance.b_matrix, sigma), instance.b[idx], instance.y0[idx],
            instance.ybar[idx], config, CYCLIC,
        )
        back = np.empty_like(permuted.final_iterate)
        back[idx] = permuted.final_iterate
        np.testing.assert_allclose(back, fixed.final_iterate, atol=1e-12)

    def test_records_orders(self):
        instance = random_normalized_factor(5, 5, False, RngState(1))
        history = run_solver(
            instance.b_matrix, instance.b, instance.y0, instance.ybar,
            SolverConfig(max_sweeps=3, target_error_sq=0.0, record_orders=True), SHUFFLED,
        )
        self.assertEqual(len(history.orders), 3)
        for order in history.orders:
            self.assertEqual(sorted(order), list(range(5)))

    def test_deterministic_for_seed(self):
        instance = random_normalized_factor(6, 6, False, RngState(2))
        runs = [
            run_solver(
                instance.b_matrix, instance.b, instance.y0, instance.ybar,
                SolverConfig(max_sweeps=5, seed=11), SHUFFLED,
            ).errors_sq
            for _ in range(2)
        ]
        self.assertEqual(runs[0], runs[1])


class RunKaczmarzTests(SimpleTestCase):
    def test_identity_exact(self):
        history = run_kaczmarz(np.eye(3), [1, 2, 3], [0, 0, 0], [1, 2, 3], SolverConfig(), CYCLIC)
        self.assertEqual(history.errors_sq, [14.0, 0.0])

    def test_matches_sor_history(self):
        rng = RngState(61)
        instance = random_normalized_factor(9, 4, True, rng)
        for strategy in (CYCLIC, SHUFFLED, OrderingStrategy(OrderingKind.SINGLE_STEP)):
            config = SolverConfig(omega=0.9, max_sweeps=8, seed=5, target_error_sq=0.0)
            sor = run_solver(instance.b_matrix, instance.b, instance.y0, instance.ybar, config, strategy)
            kacz = run_kaczmarz(instance.a, instance.b, instance.x0, instance.xbar, config, strategy)
            np.testing.assert_allclose(kacz.errors_sq, sor.errors_sq, rtol=1e-8, atol=1e-10)
            np.testing.assert_allclose(kacz.residuals, sor.residuals, rtol=1e-8, atol=1e-10)

    def test_fan_m2_strictly_decreasing(self):
        instance = fan_example(2)
        history = run_kaczmarz(
            instance.a, instance.b, instance.x0, instance.xbar, SolverConfig(max_sweeps=15), CYCLIC,
        )
        self.assertTrue(np.all(np.diff(history.errors_sq) < 0))


class ErrorIterationMatrixTests(SimpleTestCase):
    def test_identity(self):
        q = error_iteration_matrix(HermitianMatrix.identity(4), 0.7, Permutation.identity(4))
        np.testing.assert_allclose(q, 0.3 * np.eye(4), atol=1e-15)

    def test_energy_identity(self):
        rng = RngState(71)
        instance = random_normalized_factor(8, 5, True, rng)
        b_matrix = instance.b_matrix
        for sigma in (Permutation.identity(8), Permutation.parse("3,8,1,6,2,7,5,4")):
            q = error_iteration_matrix(b_matrix, 1.4, sigma)
            for _ in range(100):
                v = rng.normal(8, complex_entries=True)
                lhs = energy_seminorm_sq(b_matrix, q @ v)
                rhs = energy_seminorm_sq(b_matrix, v) - sweep_energy_drop(b_matrix, 1.4, sigma, v)
                self.assertAlmostEqual(lhs, rhs, delta=1e-10 * max(1.0, abs(lhs)))

    def test_matches_homogeneous_sweep(self):
        instance = random_normalized_factor(8, 8, False, RngState(81))
        sigma = Permutation.parse("8,1,7,2,6,3,5,4")
        q = error_iteration_matrix(instance.b_matrix, 0.8, sigma)
        y = RngState(82).normal(8)
        swept = sor_sweep(instance.b_matrix, np.zeros(8), y, 0.8, sigma.as_array())
        np.testing.assert_allclose(q @ y, swept, atol=1e-12)


class EmpiricalRateTests(SimpleTestCase):
    def test_geometric_sequence(self):
        errors = [0.5 ** k for k in range(12)]
        self.assertAlmostEqual(empirical_rate(errors, 5), 0.5, places=14)

    def test_zero_inside_window(self):
        self.assertEqual(empirical_rate([1.0, 0.5, 0.0, 0.0], 2), 0.0)

    def test_kernel_only_error_gives_zero(self):
        ones = HermitianMatrix(np.ones((2, 2)))
        history = run_solver(ones, [0, 0], [1, -1], [0, 0], SolverConfig(max_sweeps=5), CYCLIC)
        self.assertEqual(history.errors_sq, [0.0])
        self.assertEqual(empirical_rate(IterationHistory("cyclic", [0.0] * 4, [0.0] * 4), 3), 0.0)

    def test_too_short(self):
        with self.assertRaises(ValueError):
            empirical_rate([1.0, 0.5], 5)
