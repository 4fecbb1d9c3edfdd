import math

import numpy as np
from django.test import SimpleTestCase

from .models import HermitianMatrix, Permutation
from .services import (
    energy_seminorm_sq, hadamard, hermitian_from_factor, k_matrix,
    permute_conjugate, range_projector, rescale_unit_diagonal, residual_norm, strict_lower,
)
from .spectral import eigen_hermitian, spectral_norm, spectral_summary


def random_psd_unit_diagonal(rng, n, m=None, complex_entries=False):
    m = m or n
    a = rng.standard_normal((n, m))
    if complex_entries:
        a = a + 1j * rng.standard_normal((n, m))
    return hermitian_from_factor(a, normalize_rows=True), a


def fan_factor(m):
    theta = math.pi / (2 * m)
    angles = np.arange(2 * m) * theta
    return np.column_stack([np.cos(angles), np.sin(angles)])


def cycle_matrix(n, weight):
    """I - weight * (adjacency of the n-cycle)."""
    adjacency = np.roll(np.eye(n), 1, axis=1) + np.roll(np.eye(n), -1, axis=1)
    return np.eye(n) - weight * adjacency


def charpoly_roots(b, grid=4001):
    """Eigenvalues via sign changes of det(tI - B) and bisection."""
    coeffs = np.real(np.poly(b))
    bound = 1.0 + np.max(np.sum(np.abs(b), axis=1))
    ts = np.linspace(-bound, bound, grid)
    vals = np.polyval(coeffs, ts)
    roots = []
    for lo, hi, flo, fhi in zip(ts[:-1], ts[1:], vals[:-1], vals[1:]):
        if flo == 0:
            roots.append(lo)
            continue
        if flo * fhi < 0:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fmid = np.polyval(coeffs, mid)
                if flo * fmid <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fmid
            roots.append(0.5 * (lo + hi))
    return np.sort(roots)[::-1]


class HermitianMatrixTests(SimpleTestCase):
    def test_constructor_closes_hermitian_symmetry_exactly(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        noisy = x + x.conj().T + 1e-12 * rng.standard_normal((5, 5))
        b = HermitianMatrix(noisy)
        self.assertEqual(np.max(np.abs(b.entries - b.entries.conj().T)), 0.0)
        self.assertFalse(np.any(b.entries.diagonal().imag))

    def test_rejects_non_hermitian_input(self):
        with self.assertRaises(ValueError):
            HermitianMatrix([[1.0, 2.0], [0.0, 1.0]])

    def test_rejects_non_finite_entries(self):
        with self.assertRaises(ValueError):
            HermitianMatrix([[1.0, np.nan], [np.nan, 1.0]])

    def test_entries_are_read_only(self):
        b = HermitianMatrix.identity(2)
        with self.assertRaises(ValueError):
            b.entries[0, 0] = 5.0


class PermutationTests(SimpleTestCase):
    def test_parse_and_format_are_one_based(self):
        sigma = Permutation.parse("3,1,2")
        self.assertEqual(sigma.map, (2, 0, 1))
        self.assertEqual(str(sigma), "3,1,2")

    def test_rejects_repeated_index(self):
        with self.assertRaises(ValueError):
            Permutation.parse("1,1,2")

    def test_inverse(self):
        sigma = Permutation.parse("3,1,2")
        self.assertTrue(Permutation(tuple(sigma.as_array()[sigma.inverse().as_array()])).is_identity())


class FactorTests(SimpleTestCase):
    def test_identity_factor(self):
        b = hermitian_from_factor(np.eye(2))
        np.testing.assert_array_equal(b.entries, np.eye(2))

    def test_fan_factor_m2(self):
        b = hermitian_from_factor(fan_factor(2), normalize_rows=True)
        np.testing.assert_allclose(b.diagonal, np.ones(4))
        self.assertAlmostEqual(b.entries[0, 1].real, math.cos(math.pi / 4), places=14)

    def test_normalization_forces_unit_diagonal(self):
        b = hermitian_from_factor([[3.0, 4.0]], normalize_rows=True)
        np.testing.assert_array_equal(b.entries, [[1.0]])

    def test_zero_row_rejected(self):
        with self.assertRaisesMessage(ValueError, "zero row"):
            hermitian_from_factor([[1.0, 0.0], [0.0, 0.0]], normalize_rows=True)

    def test_nonzero_eigenvalues_are_squared_singular_values(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((6, 3))
        b = hermitian_from_factor(a)
        values, _ = eigen_hermitian(b)
        expected = np.sort(np.linalg.svd(a, compute_uv=False) ** 2)[::-1]
        np.testing.assert_allclose(values[:3], expected, rtol=1e-8)
        self.assertAlmostEqual(spectral_norm(a) ** 2 / values[0], 1.0, places=8)


class RescaleTests(SimpleTestCase):
    def test_diagonal_matrix(self):
        b, scaling = rescale_unit_diagonal(HermitianMatrix(np.diag([4.0, 9.0])))
        np.testing.assert_allclose(b.entries, np.eye(2))
        np.testing.assert_allclose(scaling, [0.5, 1.0 / 3.0])

    def test_off_diagonal_scaled(self):
        b, _ = rescale_unit_diagonal(HermitianMatrix([[4.0, 2.0], [2.0, 1.0]]))
        np.testing.assert_allclose(b.entries, [[1.0, 0.5], [0.5, 1.0]])

    def test_identity_unchanged(self):
        b, scaling = rescale_unit_diagonal(HermitianMatrix.identity(3))
        self.assertEqual(b, HermitianMatrix.identity(3))
        np.testing.assert_array_equal(scaling, np.ones(3))

    def test_non_positive_diagonal(self):
        with self.assertRaisesMessage(ValueError, "diagonal not positive"):
            rescale_unit_diagonal(HermitianMatrix([[1.0, 0.0], [0.0, 0.0]]))


class StructureTests(SimpleTestCase):
    def test_strict_lower(self):
        np.testing.assert_array_equal(
            strict_lower(HermitianMatrix([[1.0, 0.5], [0.5, 1.0]])), [[0, 0], [0.5, 0]]
        )
        self.assertFalse(np.any(strict_lower(HermitianMatrix.identity(4))))

    def test_strict_lower_complex(self):
        b = HermitianMatrix([[1, 0, 0], [0, 1, -1j], [0, 1j, 1]])
        low = strict_lower(b)
        self.assertEqual(low[2, 1], 1j)
        self.assertFalse(np.any(np.triu(low)))

    def test_permute_conjugate_swap(self):
        h = 0.3 + 0.4j
        b = HermitianMatrix([[1, h], [np.conj(h), 1]])
        swapped = permute_conjugate(b, Permutation((1, 0)))
        np.testing.assert_array_equal(swapped.entries, [[1, np.conj(h)], [h, 1]])
        self.assertEqual(permute_conjugate(b, Permutation.identity(2)), b)

    def test_permutation_preserves_spectrum(self):
        rng = np.random.default_rng(3)
        b, _ = random_psd_unit_diagonal(rng, 7, complex_entries=True)
        base, _ = eigen_hermitian(b)
        for _ in range(5):
            sigma = Permutation(tuple(rng.permutation(7)))
            values, _ = eigen_hermitian(permute_conjugate(b, sigma))
            np.testing.assert_allclose(values, base, rtol=1e-10, atol=1e-12)

    def test_permute_length_mismatch(self):
        with self.assertRaises(ValueError):
            permute_conjugate(HermitianMatrix.identity(3), Permutation.identity(2))

    def test_hadamard(self):
        x = np.array([[1, 2], [3, 4]])
        np.testing.assert_array_equal(hadamard(x, [[0, 1], [1, 0]]), [[0, 2], [3, 0]])
        np.testing.assert_array_equal(hadamard(x, np.ones((2, 2))), x)
        with self.assertRaises(ValueError):
            hadamard(x, np.ones(3))

    def test_k_matrix(self):
        np.testing.assert_array_equal(k_matrix(1), [[0]])
        np.testing.assert_array_equal(k_matrix(2), [[0, 0], [0, 1]])
        np.testing.assert_array_equal(k_matrix(3), [[0, 0, 0], [0, 1, 1], [0, 1, 2]])


class SpectralTests(SimpleTestCase):
    def test_diagonal_eigenvalues(self):
        values, _ = eigen_hermitian(HermitianMatrix(np.diag([1.0, 3.0])))
        np.testing.assert_allclose(values, [3.0, 1.0])

    def test_rank_one_ones(self):
        values, _ = eigen_hermitian(HermitianMatrix(np.ones((2, 2))))
        np.testing.assert_allclose(values, [2.0, 0.0], atol=1e-14)

    def test_fan_eigenvalues(self):
        b = hermitian_from_factor(fan_factor(4), normalize_rows=True)
        values, _ = eigen_hermitian(b)
        np.testing.assert_allclose(values[:2], [4.0, 4.0], rtol=1e-12)
        np.testing.assert_allclose(values[2:], 0.0, atol=1e-12)

    def test_reconstruction_and_unitarity(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
        b = HermitianMatrix(x + x.conj().T)
        values, vectors = eigen_hermitian(b)
        self.assertTrue(np.all(np.diff(values) <= 0))
        np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(9), atol=1e-12)
        recon = vectors @ np.diag(values) @ vectors.conj().T
        self.assertLessEqual(np.linalg.norm(recon - b.entries), 1e-11 * np.linalg.norm(b.entries))

    def test_matches_characteristic_polynomial_roots(self):
        cases = [
            [[2, 1], [1, 3]],
            [[4, 1, 0], [1, 3, 1], [0, 1, 1]],
            [[2, 1j, 0], [-1j, 3, 0.5], [0, 0.5, 5]],
            [[6, 1, 0, 0], [1, 4, 0.5, 0], [0, 0.5, 2, 0.25], [0, 0, 0.25, -1]],
        ]
        for case in cases:
            b = HermitianMatrix(case)
            values, _ = eigen_hermitian(b)
            np.testing.assert_allclose(values, charpoly_roots(b.entries), atol=1e-10)

    def test_spectral_norm(self):
        self.assertAlmostEqual(spectral_norm(np.eye(3)), 1.0, places=12)
        self.assertAlmostEqual(spectral_norm(strict_lower(HermitianMatrix(np.ones((2, 2))))), 1.0, places=12)
        fan = hermitian_from_factor(fan_factor(4), normalize_rows=True)
        self.assertAlmostEqual(spectral_norm(fan), 4.0, places=10)
        self.assertEqual(spectral_norm(np.zeros((3, 3))), 0.0)

    def test_spectral_norm_single_row(self):
        self.assertAlmostEqual(spectral_norm([[1.0, -1.0]]), math.sqrt(2.0), places=10)

    def test_spectral_norm_top_value_orthogonal_to_ones(self):
        b = np.array([[1.0, -0.5], [-0.5, 1.0]])
        self.assertAlmostEqual(spectral_norm(b), 1.5, places=12)
        self.assertAlmostEqual(spectral_norm(HermitianMatrix(b)), 1.5, places=12)
        # all-ones is an eigenvector for 0.2, not for the top value 1.8
        self.assertAlmostEqual(spectral_norm(cycle_matrix(4, 0.4)), 1.8, places=12)
        self.assertAlmostEqual(spectral_norm(HermitianMatrix(cycle_matrix(4, 0.4))), 1.8, places=12)

    def test_spectral_norm_close_singular_values(self):
        d = np.diag([1.0, 1.0 - 1e-6])
        self.assertAlmostEqual(spectral_norm(d), 1.0, places=12)
        self.assertAlmostEqual(spectral_norm(HermitianMatrix(d)), 1.0, places=12)
        # non-Hermitian input goes through the Gram matrix
        self.assertAlmostEqual(spectral_norm(d @ np.array([[0.0, 1.0], [1.0, 0.0]])), 1.0, places=12)

    def test_spectral_norm_matches_svd(self):
        rng = np.random.default_rng(8)
        for shape in [(3, 5), (5, 3), (4, 4)]:
            m = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            self.assertAlmostEqual(spectral_norm(m), np.linalg.norm(m, 2), places=10)
        b = HermitianMatrix(-np.diag([3.0, 1.0]))
        self.assertAlmostEqual(spectral_norm(b), 3.0, places=12)

    def test_summary_fan(self):
        summary = spectral_summary(hermitian_from_factor(fan_factor(4), normalize_rows=True))
        self.assertAlmostEqual(summary.lambda1, 4.0, places=10)
        self.assertAlmostEqual(summary.lambda_r, 4.0, places=10)
        self.assertEqual(summary.rank, 2)
        self.assertAlmostEqual(summary.kappa_bar, 1.0, places=10)

    def test_summary_identity_and_rank_one(self):
        summary = spectral_summary(HermitianMatrix.identity(5))
        self.assertEqual((summary.rank, summary.kappa_bar), (5, 1.0))
        summary = spectral_summary(HermitianMatrix(np.ones((2, 2))))
        self.assertEqual(summary.rank, 1)
        self.assertAlmostEqual(summary.lambda1, 2.0)
        self.assertAlmostEqual(summary.kappa_bar, 1.0)

    def test_summary_rejects_indefinite(self):
        with self.assertRaisesMessage(ValueError, "matrix not PSD"):
            spectral_summary(HermitianMatrix([[1.0, 2.0], [2.0, 1.0]]))

    def test_unit_diagonal_spectrum_bounds(self):
        rng = np.random.default_rng(5)
        for n in (3, 6, 10):
            b, _ = random_psd_unit_diagonal(rng, n, m=max(1, n // 2))
            summary = spectral_summary(b)
            self.assertLessEqual(summary.lambda_r, 1 + 1e-8)
            self.assertLessEqual(1 - 1e-8, summary.lambda1)
            self.assertLessEqual(summary.lambda1, n + 1e-8)


class EnergySeminormTests(SimpleTestCase):
    def test_values(self):
        self.assertEqual(energy_seminorm_sq(HermitianMatrix.identity(2), [3, 4]), 25.0)
        ones = HermitianMatrix(np.ones((2, 2)))
        self.assertEqual(energy_seminorm_sq(ones, [1, -1]), 0.0)
        self.assertEqual(energy_seminorm_sq(ones, [1, 1]), 4.0)

    def test_matches_factor_norm(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
        b = hermitian_from_factor(a)
        y = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        self.assertAlmostEqual(energy_seminorm_sq(b, y), np.linalg.norm(a.conj().T @ y) ** 2, places=10)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            energy_seminorm_sq(HermitianMatrix.identity(2), [1, 2, 3])

    def test_residual_norm(self):
        b = HermitianMatrix([[2, 1j], [-1j, 2]])
        self.assertAlmostEqual(residual_norm(b, [2, -1j], [1, 0]), 0.0, places=12)
        self.assertAlmostEqual(residual_norm(b, [0, 0], [1, 0]), math.sqrt(5.0), places=12)

    def test_range_projector(self):
        p = range_projector(HermitianMatrix(np.ones((2, 2))))
        np.testing.assert_allclose(p, 0.5 * np.ones((2, 2)), atol=1e-12)
