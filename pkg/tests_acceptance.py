"""
End-to-end checks on larger random corpora
------------------------------------------
How to run (in your local project virtualenv):

    pip install -r requirements/dev.txt
    pytest -q tests_acceptance.py              # everything
    pytest -q tests_acceptance.py -m "not slow"

The per-app suites (`python manage.py test`) cover the same operations on
small hand-checked cases; this file sweeps whole instance families.
"""

import math
from io import StringIO

import numpy as np
import pytest
from django.core.management import call_command

from analysis.averages import check_average_truncation_norms, expected_llt_closed, expected_llt_exhaustive
from analysis.bounds import cosine_exponent, evaluate_bounds, expected_contraction
from analysis.truncation import check_log_truncation_bound, min_truncation_exhaustive, min_truncation_heuristic
from linalg.models import HermitianMatrix
from linalg.services import is_psd_unit_diagonal
from linalg.spectral import spectral_norm
from orderings.models import OrderingKind, OrderingStrategy, RngState
from orderings.services import derive_seed, random_permutation, sweep_order
from problems.services import fan_example, random_normalized_factor
from solvers.models import SolverConfig
from solvers.services import kaczmarz_sweep, run_kaczmarz, run_solver, sor_sweep

CYCLIC = OrderingStrategy(OrderingKind.CYCLIC)
SHUFFLED = OrderingStrategy(OrderingKind.SHUFFLED)


def random_psd(seed: int, n: int, m: int | None = None, complex_entries: bool = False):
    return random_normalized_factor(n, m or n, complex_entries, RngState(seed))


def hermitian_corpus(count: int = 200):
    rng = RngState(2024)
    for index in range(count):
        n = 2 + index % 6
        complex_entries = bool(index % 2)
        if index % 3 == 0:
            yield random_psd(derive_seed(77, index), n, complex_entries=complex_entries).b_matrix
        else:
            x = rng.normal((n, n), complex_entries=complex_entries)
            yield HermitianMatrix(x + x.conj().T)


# -------- permutation averages --------
def test_closed_form_average_matches_exhaustive():
    for b in hermitian_corpus():
        scale = max(spectral_norm(b) ** 2, 1.0)
        np.testing.assert_allclose(
            expected_llt_closed(b), expected_llt_exhaustive(b), rtol=0, atol=1e-12 * scale
        )


def test_average_norm_bounds_hold():
    violations = []
    for index, b in enumerate(hermitian_corpus()):
        report = check_average_truncation_norms(b)
        if not report.checks["general"]:
            violations.append((index, "general"))
        if is_psd_unit_diagonal(b) and not report.checks["psd_strict"]:
            violations.append((index, "psd_strict"))
    assert violations == []


# -------- fan example --------
def test_fan_kaczmarz_rate_is_constant():
    fan = fan_example(4)
    config = SolverConfig(max_sweeps=40, target_error_sq=0.0)
    history = run_kaczmarz(fan.a, fan.b, fan.x0, fan.xbar, config, CYCLIC)
    errors = history.errors_sq
    assert len(errors) == 41
    ratios = [errors[k + 1] / errors[k] for k in range(5, 40)]
    expected = math.cos(math.pi / 8) ** 16
    for ratio in ratios:
        assert ratio == pytest.approx(expected, rel=1e-6)

    measured = cosine_exponent(float(np.mean(ratios)), math.pi / 8)
    # 2m projections per sweep, each scaling the error norm by cos(pi / 2m)
    assert measured == pytest.approx(16, abs=1e-4)


# -------- solver equivalence --------
def test_kaczmarz_tracks_sor_iterates():
    for index in range(20):
        rng = RngState(derive_seed(5, index))
        n = 2 + index % 15
        m = 1 + (index * 7) % 16
        instance = random_normalized_factor(n, m, bool(index % 2), rng.spawn(0))
        adjoint = instance.a.conj().T
        y = instance.y0.copy()
        x = adjoint @ y
        strategy = SHUFFLED if index % 2 else CYCLIC
        order_rng = rng.spawn(1)
        omega = (0.5, 1.0, 1.5)[index % 3]
        for _ in range(30):
            order = sweep_order(strategy, n, order_rng)
            y = sor_sweep(instance.b_matrix, instance.b, y, omega, order)
            x = kaczmarz_sweep(instance.a, instance.b, x, omega, order)
            assert np.linalg.norm(adjoint @ y - x) <= 1e-10


# -------- expected contraction vs shuffled bound --------
def test_exact_expected_contraction_below_shuffled_rate():
    violations = []
    for index in range(30):
        n = 2 + index % 6
        b = random_psd(derive_seed(31, index), n, m=1 + index % n, complex_entries=bool(index % 2)).b_matrix
        for omega in (0.5, 1.0, 1.5):
            measured = expected_contraction(b, omega)
            bound = evaluate_bounds(b, omega).rate_shuffled
            if measured > bound + 1e-12:
                violations.append((index, omega, measured, bound))
    assert violations == []


@pytest.mark.slow
@pytest.mark.parametrize("omega", [0.5, 1.0, 1.5])
def test_shuffled_mean_error_below_envelope(omega):
    trials = 500
    for index in range(10):
        instance = random_psd(derive_seed(900, index), 16)
        rate = evaluate_bounds(instance.b_matrix, omega).rate_shuffled
        runs = []
        for trial in range(trials):
            config = SolverConfig(omega=omega, max_sweeps=50, target_error_sq=0.0, seed=derive_seed(index, trial))
            history = run_solver(
                instance.b_matrix, instance.b, instance.y0, instance.ybar, config, SHUFFLED, factor=instance.a
            )
            runs.append(history.errors_sq)
        errors = np.array(runs)
        mean = errors.mean(axis=0)
        stderr = errors.std(axis=0, ddof=1) / math.sqrt(trials)
        envelope = rate ** np.arange(errors.shape[1]) * mean[0]
        assert np.all(mean <= envelope + 3 * stderr + 1e-14 * mean[0])


# -------- triangular truncation --------
def test_log_truncation_bound_on_random_orderings():
    violations = 0
    for index in range(100):
        n = 2 + index % 15
        b = random_psd(derive_seed(41, index), n, m=1 + index % n, complex_entries=bool(index % 2)).b_matrix
        rng = RngState(index)
        for _ in range(20):
            if not check_log_truncation_bound(b, random_permutation(n, rng)):
                violations += 1
    assert violations == 0


@pytest.mark.slow
def test_heuristic_search_finds_exhaustive_minimum():
    matches = 0
    for index in range(50):
        n = 4 + index % 5
        b = random_psd(derive_seed(61, index), n, m=2 + index % 3).b_matrix
        exact = min_truncation_exhaustive(b)
        found = min_truncation_heuristic(b, 20, RngState(index))
        assert found.min_ratio >= exact.min_ratio - 1e-12
        if found.min_ratio <= exact.min_ratio + 1e-9:
            matches += 1
    assert matches >= 40


# -------- command-line pipeline --------
def test_compare_outputs_are_byte_identical(tmp_path):
    outputs = []
    for name in ("first", "second"):
        csv_path, svg_path = tmp_path / f"{name}.csv", tmp_path / f"{name}.svg"
        call_command(
            "compare", "--kind", "fan", "--m", "4", "--strategies", "cyclic,shuffled,preshuffled,single-step",
            "--trials", "25", "--max-sweeps", "40", "--seed", "3",
            "--out", str(csv_path), "--plot", str(svg_path), stdout=StringIO(),
        )
        outputs.append((csv_path.read_bytes(), svg_path.read_bytes()))
    assert outputs[0] == outputs[1]
