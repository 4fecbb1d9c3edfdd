import numpy as np
from django.test import SimpleTestCase

from linalg.models import HermitianMatrix
from linalg.services import range_projector
from linalg.spectral import eigen_hermitian, spectral_summary
from orderings.models import RngState

from .models import ProblemMeta
from .services import (
    build_instance, consistency_check, fan_example, low_rank_psd, plant_solution,
    random_normalized_factor,
)


class FanExampleTests(SimpleTestCase):
    def test_m_one_is_identity(self):
        instance = fan_example(1)
        np.testing.assert_allclose(instance.a, np.eye(2), atol=1e-16)
        np.testing.assert_allclose(instance.b_matrix.entries, np.eye(2), atol=1e-16)

    def test_identities(self):
        for m in (1, 2, 4, 8, 16):
            instance = fan_example(m)
            a = instance.a
            np.testing.assert_allclose(a.conj().T @ a, m * np.eye(2), atol=1e-12)
            summary = spectral_summary(instance.b_matrix)
            self.assertAlmostEqual(summary.lambda1 / m, 1.0, delta=1e-8)
            self.assertEqual(summary.rank, min(2, 2 * m))
            self.assertAlmostEqual(summary.kappa_bar, 1.0, delta=1e-8)

    def test_homogeneous_and_start_outside_kernel(self):
        instance = fan_example(4)
        self.assertFalse(np.any(instance.b))
        self.assertFalse(np.any(instance.ybar))
        self.assertGreater(np.linalg.norm(instance.a.conj().T @ instance.y0), 0.1)

    def test_rejects_zero(self):
        with self.assertRaises(ValueError):
            fan_example(0)


class RandomFactorTests(SimpleTestCase):
    def test_invariants(self):
        for complex_entries in (False, True):
            instance = random_normalized_factor(12, 5, complex_entries, RngState(4))
            np.testing.assert_array_equal(instance.b_matrix.diagonal, np.ones(12))
            np.testing.assert_allclose(np.linalg.norm(instance.a, axis=1), 1.0, atol=1e-12)
            np.testing.assert_allclose(instance.b_matrix.entries @ instance.ybar, instance.b, atol=1e-10)
            np.testing.assert_allclose(instance.a.conj().T @ instance.ybar, instance.xbar, atol=1e-12)
            self.assertLessEqual(spectral_summary(instance.b_matrix).rank, 5)

    def test_full_rank_square(self):
        summary = spectral_summary(random_normalized_factor(16, 16, False, RngState(8)).b_matrix)
        self.assertEqual(summary.rank, 16)
        self.assertTrue(np.isfinite(summary.kappa_bar))

    def test_deterministic(self):
        first = random_normalized_factor(6, 3, True, RngState(99))
        second = random_normalized_factor(6, 3, True, RngState(99))
        np.testing.assert_array_equal(first.b_matrix.entries, second.b_matrix.entries)
        np.testing.assert_array_equal(first.b, second.b)


class LowRankTests(SimpleTestCase):
    def test_rank_one_has_unimodular_entries(self):
        instance = low_rank_psd(6, 1, RngState(1))
        np.testing.assert_allclose(np.abs(instance.b_matrix.entries), 1.0, atol=1e-12)

    def test_rank_two(self):
        self.assertEqual(spectral_summary(low_rank_psd(8, 2, RngState(2)).b_matrix).rank, 2)

    def test_full_rank_matches_random_generator(self):
        a = low_rank_psd(5, 5, RngState(3))
        b = random_normalized_factor(5, 5, False, RngState(3))
        np.testing.assert_array_equal(a.b_matrix.entries, b.b_matrix.entries)
        self.assertEqual(a.meta.kind, "lowrank")

    def test_rank_above_n(self):
        with self.assertRaises(ValueError):
            low_rank_psd(3, 4, RngState(0))


class PlantAndConsistencyTests(SimpleTestCase):
    def test_identity_plant(self):
        b, ybar = plant_solution(HermitianMatrix.identity(4), RngState(0))
        np.testing.assert_array_equal(b, ybar)

    def test_planted_rhs_is_consistent_and_orthogonal_to_kernel(self):
        instance = low_rank_psd(8, 3, RngState(5))
        self.assertTrue(consistency_check(instance.b_matrix, instance.b))
        values, vectors = eigen_hermitian(instance.b_matrix)
        kernel = vectors[:, values < 1e-10 * values[0]]
        np.testing.assert_allclose(kernel.conj().T @ instance.b, 0.0, atol=1e-10)

    def test_consistency_cases(self):
        self.assertTrue(consistency_check(HermitianMatrix.identity(3), [1, 2, 3], 1e-10))
        ones = HermitianMatrix(np.ones((2, 2)))
        self.assertFalse(consistency_check(ones, [1, -1], 1e-10))
        self.assertTrue(consistency_check(ones, ones.entries @ np.array([0.3, 2.0]), 1e-10))
        self.assertTrue(consistency_check(ones, [0, 0], 1e-10))

    def test_projector_idempotent(self):
        p = range_projector(low_rank_psd(6, 2, RngState(6)).b_matrix)
        np.testing.assert_allclose(p @ p, p, atol=1e-12)


class MetaTests(SimpleTestCase):
    def test_lines_round_trip(self):
        meta = ProblemMeta(kind="lowrank", params={"n": 8, "r": 2, "complex": 0}, seed=7)
        self.assertEqual(ProblemMeta.from_lines(meta.as_lines()), meta)

    def test_build_instance_dispatch(self):
        self.assertEqual(build_instance("fan", m=3).n, 6)
        self.assertEqual(build_instance("random", n=5, seed=1).n, 5)
        self.assertEqual(spectral_summary(build_instance("lowrank", n=8, r=2, seed=7).b_matrix).rank, 2)
