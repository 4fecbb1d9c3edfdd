import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from linalg.models import HermitianMatrix
from problems.models import ProblemInstance, ProblemMeta
from problems.services import build_instance

from .models import ComparisonRow, ExperimentConfig
from .serializers import (
    CSV_HEADER, read_history_csv, read_problem, write_history_csv, write_problem,
)
from .services import mean_curve, rate_or_none

FAN_RATE = math.cos(math.pi / 8) ** 16


def run(name, *args):
    out = StringIO()
    call_command(name, *args, stdout=out, stderr=StringIO())
    return out.getvalue()


def key_values(output):
    values = {}
    for line in output.splitlines():
        key, sep, value = line.partition(": ")
        if sep:
            values[key] = value
    return values


def file_problem(directory, entries, rhs, ybar):
    b_matrix = HermitianMatrix(np.asarray(entries, dtype=float))
    instance = ProblemInstance(
        b_matrix=b_matrix,
        b=np.asarray(rhs, dtype=np.complex128),
        ybar=np.asarray(ybar, dtype=np.complex128),
        y0=np.zeros(b_matrix.n, dtype=np.complex128),
        meta=ProblemMeta(kind="file"),
    )
    write_problem(directory, instance)
    return directory


class HarnessTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def assertExitCode(self, code, name, *args):
        with self.assertRaises(CommandError) as ctx:
            run(name, *args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class SerializerTests(HarnessTestCase):
    def test_problem_round_trip(self):
        for complex_entries in (False, True):
            instance = build_instance("random", n=6, m=4, complex_entries=complex_entries, seed=3)
            write_problem(self.tmp / str(complex_entries), instance)
            loaded = read_problem(self.tmp / str(complex_entries))
            np.testing.assert_array_equal(loaded.b_matrix.entries, instance.b_matrix.entries)
            np.testing.assert_array_equal(loaded.a, instance.a)
            np.testing.assert_array_equal(loaded.b, instance.b)
            np.testing.assert_array_equal(loaded.ybar, instance.ybar)
            self.assertEqual(loaded.meta, instance.meta)

    def test_missing_start_vector_defaults_to_zero(self):
        directory = file_problem(self.tmp / "p", np.eye(2), [1, 2], [1, 2])
        (directory / "y0.mtx").unlink()
        np.testing.assert_array_equal(read_problem(directory).y0, np.zeros(2))

    def test_missing_directory(self):
        with self.assertRaises(FileNotFoundError):
            read_problem(self.tmp / "nope")

    def test_history_csv(self):
        rows = [ComparisonRow("cyclic", 0, k, 0.5**k, 0.1 * k) for k in range(4)]
        path = self.tmp / "h.csv"
        write_history_csv(path, rows)
        self.assertEqual(path.read_text().splitlines()[0], ",".join(CSV_HEADER))
        self.assertEqual(read_history_csv(path), rows)

    def test_history_csv_header_checked(self):
        path = self.tmp / "bad.csv"
        path.write_text("strategy,trial,sweep,error\ncyclic,0,0,1\n")
        with self.assertRaises(ValueError):
            read_history_csv(path)

    def test_negative_error_rejected(self):
        with self.assertRaises(ValueError):
            ComparisonRow("cyclic", 0, 0, -1.0, 0.0)


class ConfigTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(ValueError):
            ExperimentConfig(strategies=())
        with self.assertRaises(ValueError):
            ExperimentConfig(strategies=("cyclic",), trials=0)
        with self.assertRaises(ValueError):
            ExperimentConfig(strategies=("cyclic",), omega=2.0)
        with self.assertRaises(ValueError):
            ExperimentConfig(strategies=("sideways",))

    def test_mean_curve_pads_with_last_value(self):
        mean, stderr = mean_curve([[4.0, 2.0, 1.0], [4.0, 0.0]])
        np.testing.assert_allclose(mean, [4.0, 1.0, 0.5])
        self.assertEqual(stderr[0], 0.0)

    def test_rate_window_shrinks(self):
        self.assertAlmostEqual(rate_or_none([8.0, 4.0, 2.0], 5), 0.5)
        self.assertIsNone(rate_or_none([1.0]))


class GenerateCommandTests(HarnessTestCase):
    def test_fan(self):
        output = run("generate", "--kind", "fan", "--m", "4", "--out-dir", str(self.tmp / "fan"))
        instance = read_problem(self.tmp / "fan")
        self.assertEqual(instance.b_matrix.entries.shape, (8, 8))
        np.testing.assert_allclose(instance.b_matrix.diagonal, np.ones(8), atol=1e-15)
        self.assertEqual(instance.meta.kind, "fan")
        self.assertIn("kind: fan", output)

    def test_lowrank_is_deterministic(self):
        for name in ("one", "two"):
            run("generate", "--kind", "lowrank", "--n", "8", "--r", "2", "--seed", "7",
                "--out-dir", str(self.tmp / name))
        for path in sorted((self.tmp / "one").iterdir()):
            self.assertEqual(path.read_bytes(), (self.tmp / "two" / path.name).read_bytes(), path.name)

    def test_usage_errors(self):
        self.assertExitCode(2, "generate", "--kind", "fan", "--m", "0", "--out-dir", str(self.tmp))
        self.assertExitCode(2, "generate", "--kind", "lowrank", "--n", "3", "--r", "4", "--out-dir", str(self.tmp))
        self.assertExitCode(2, "generate", "--m", "2", "--out-dir", str(self.tmp))


class SolveCommandTests(HarnessTestCase):
    def test_identity_reaches_zero_after_one_sweep(self):
        problem = file_problem(self.tmp / "eye", np.eye(3), [1, 2, 3], [1, 2, 3])
        out = self.tmp / "h.csv"
        output = run("solve", "--problem", str(problem), "--out", str(out))
        rows = read_history_csv(out)
        self.assertEqual([r.sweep for r in rows], [0, 1])
        self.assertEqual(rows[0].error_sq, 14.0)
        self.assertEqual(rows[1].error_sq, 0.0)
        self.assertEqual(key_values(output)["sweeps"], "1")

    def test_fan_rate(self):
        out = self.tmp / "fan.csv"
        output = run("solve", "--kind", "fan", "--m", "4", "--max-sweeps", "20", "--out", str(out))
        values = key_values(output)
        self.assertAlmostEqual(float(values["empirical_rate"]), FAN_RATE, delta=1e-5)
        self.assertEqual(values["fan.nearest_candidate"], "4m")
        self.assertEqual(len(read_history_csv(out)), 21)

    def test_preshuffled_needs_sigma_or_seed(self):
        out = str(self.tmp / "h.csv")
        self.assertExitCode(2, "solve", "--kind", "fan", "--m", "2", "--strategy", "preshuffled", "--out", out)
        run("solve", "--kind", "fan", "--m", "2", "--strategy", "preshuffled", "--seed", "1", "--out", out)
        run("solve", "--kind", "fan", "--m", "2", "--strategy", "preshuffled", "--sigma", "4,3,2,1", "--out", out)

    def test_sigma_errors(self):
        out = str(self.tmp / "h.csv")
        self.assertExitCode(2, "solve", "--kind", "fan", "--m", "2", "--strategy", "fixed", "--out", out)
        self.assertExitCode(2, "solve", "--kind", "fan", "--m", "2", "--sigma", "2,1,3,4", "--out", out)
        self.assertExitCode(2, "solve", "--kind", "fan", "--m", "2", "--strategy", "fixed",
                            "--sigma", "1,1,2,3", "--out", out)
        error = self.assertExitCode(2, "solve", "--kind", "fan", "--m", "2", "--strategy", "fixed",
                                    "--sigma", "2,1,3", "--out", out)
        self.assertIn("problem has n=4", str(error))
        self.assertExitCode(2, "compare", "--kind", "fan", "--m", "2", "--strategies", "cyclic,preshuffled",
                            "--sigma", "2,1,3", "--out", out)

    def test_bad_omega(self):
        self.assertExitCode(2, "solve", "--kind", "fan", "--m", "2", "--omega", "2", "--out", str(self.tmp / "h.csv"))

    def test_inconsistent_system(self):
        problem = file_problem(self.tmp / "bad", np.ones((2, 2)), [1, 0], [0, 0])
        out = self.tmp / "h.csv"
        error = self.assertExitCode(1, "solve", "--problem", str(problem), "--out", str(out))
        self.assertIn("system inconsistent", str(error))
        run("solve", "--problem", str(problem), "--allow-inconsistent", "--max-sweeps", "3", "--out", str(out))
        self.assertEqual(read_history_csv(out)[0].sweep, 0)

    def test_kaczmarz_needs_factor(self):
        problem = file_problem(self.tmp / "eye", np.eye(2), [1, 1], [1, 1])
        self.assertExitCode(1, "solve", "--problem", str(problem), "--method", "kaczmarz",
                            "--out", str(self.tmp / "h.csv"))

    def test_kaczmarz_matches_sor(self):
        sor, kaczmarz = self.tmp / "sor.csv", self.tmp / "kz.csv"
        common = ["--kind", "random", "--n", "6", "--m", "4", "--strategy", "shuffled", "--seed", "5",
                  "--max-sweeps", "10"]
        run("solve", *common, "--out", str(sor))
        run("solve", *common, "--method", "kaczmarz", "--out", str(kaczmarz))
        first, second = read_history_csv(sor), read_history_csv(kaczmarz)
        self.assertEqual(len(first), len(second))
        for a, b in zip(first, second):
            self.assertAlmostEqual(a.error_sq, b.error_sq, delta=1e-10 * max(first[0].error_sq, 1.0))


class CompareCommandTests(HarnessTestCase):
    def test_single_trial_reproduces_solve(self):
        solve_csv, compare_csv = self.tmp / "solve.csv", self.tmp / "compare.csv"
        common = ["--kind", "random", "--n", "8", "--seed", "11", "--max-sweeps", "15"]
        run("solve", *common, "--strategy", "shuffled", "--out", str(solve_csv))
        run("compare", *common, "--strategies", "shuffled", "--trials", "1", "--out", str(compare_csv))
        self.assertEqual(solve_csv.read_bytes(), compare_csv.read_bytes())

    def test_summary_lines(self):
        output = run("compare", "--kind", "fan", "--m", "4", "--trials", "20", "--max-sweeps", "30",
                     "--out", str(self.tmp / "c.csv"), "--summary", str(self.tmp / "s.csv"))
        values = key_values(output)
        self.assertAlmostEqual(float(values["shuffled.theoretical_rate"]), 0.84, delta=1e-12)
        self.assertEqual(values["cyclic.trials"], "20")
        self.assertNotEqual(values["shuffled.empirical_rate"], "n/a")
        header = (self.tmp / "s.csv").read_text().splitlines()[0]
        self.assertEqual(header, "sweep,cyclic,shuffled")

    def test_rows_in_strategy_trial_order(self):
        out = self.tmp / "c.csv"
        run("compare", "--kind", "fan", "--m", "2", "--strategies", "single-step,cyclic", "--trials", "3",
            "--max-sweeps", "4", "--target-error-sq", "0", "--out", str(out))
        keys = [(r.strategy, r.trial) for r in read_history_csv(out)]
        self.assertEqual(keys, sorted(keys, key=lambda k: (k[0] != "single-step", k[1])))
        self.assertEqual(len(set(keys)), 6)

    def test_byte_identical_reruns(self):
        outputs = []
        for name in ("a", "b"):
            csv_path, svg_path = self.tmp / f"{name}.csv", self.tmp / f"{name}.svg"
            run("compare", "--kind", "random", "--n", "6", "--seed", "2", "--strategies",
                "cyclic,shuffled,preshuffled,single-step", "--trials", "4", "--max-sweeps", "12",
                "--out", str(csv_path), "--plot", str(svg_path))
            outputs.append((csv_path.read_bytes(), svg_path.read_bytes()))
        self.assertEqual(outputs[0], outputs[1])
        self.assertTrue(outputs[0][1].lstrip().startswith(b"<?xml"))

    def test_repeated_strategy_is_usage_error(self):
        self.assertExitCode(2, "compare", "--kind", "fan", "--m", "2", "--strategies", "cyclic,cyclic",
                            "--out", str(self.tmp / "c.csv"))


class AnalyzeCommandTests(HarnessTestCase):
    def test_two_by_two_flags_position_weighted_formula(self):
        problem = file_problem(self.tmp / "p", [[1, 0.5], [0.5, 1]], [0, 0], [0, 0])
        output = run("analyze", "--problem", str(problem))
        values = key_values(output)
        self.assertEqual(values["formula.agrees"], "no")
        self.assertEqual(values["formula.mismatch_positions"], "(1,1)")
        self.assertIn("formula.entry(1,1): reference=0.125 position_weighted=0", output)
        self.assertEqual(values["truncation.method"], "exhaustive")

    def test_identity(self):
        problem = file_problem(self.tmp / "p", np.eye(3), [1, 1, 1], [1, 1, 1])
        values = key_values(run("analyze", "--problem", str(problem)))
        self.assertEqual(float(values["truncation.min_ratio"]), 0.0)
        self.assertEqual(float(values["truncation.max_ratio"]), 0.0)
        self.assertEqual(float(values["average.norm"]), 0.0)
        self.assertEqual(values["formula.agrees"], "yes")

    def test_fan_spectrum(self):
        values = key_values(run("analyze", "--kind", "fan", "--m", "4"))
        self.assertAlmostEqual(float(values["spectrum.lambda1"]), 4.0, delta=1e-8)
        self.assertEqual(values["spectrum.rank"], "2")
        self.assertAlmostEqual(float(values["spectrum.kappa_bar"]), 1.0, delta=1e-8)

    def test_large_n_uses_search(self):
        values = key_values(run("analyze", "--kind", "random", "--n", "10", "--restarts", "2", "--trials", "50"))
        self.assertEqual(values["truncation.method"], "heuristic")
        self.assertEqual(values["sampled.method"], "montecarlo")
        self.assertEqual(values["sampled.samples"], "50")


class BoundsCommandTests(HarnessTestCase):
    def test_fan_values(self):
        values = key_values(run("bounds", "--kind", "fan", "--m", "4"))
        self.assertAlmostEqual(float(values["rate_cyclic"]), 1 - 4 / 81, delta=1e-9)
        self.assertAlmostEqual(float(values["rate_shuffled"]), 0.84, delta=1e-9)
        self.assertAlmostEqual(float(values["rate_single_step"]), 0.00390625, delta=1e-9)
        self.assertNotIn("rate_cyclic_small_rank", values)

    def test_c1_override(self):
        values = key_values(run("bounds", "--kind", "fan", "--m", "4", "--c1", "1.0"))
        self.assertAlmostEqual(float(values["rate_preshuffled"]), float(values["rate_shuffled"]), delta=1e-15)

    def test_small_rank_needs_c0(self):
        values = key_values(run("bounds", "--kind", "fan", "--m", "4", "--c0", "1.0"))
        expected = 1 - 4 / (1 + 4 * math.log(2)) ** 2
        self.assertAlmostEqual(float(values["rate_cyclic_small_rank"]), expected, delta=1e-9)

    def test_csv_format(self):
        lines = run("bounds", "--kind", "fan", "--m", "4", "--format", "csv").splitlines()
        self.assertEqual(lines[0], "key,value")
        self.assertIn("n,8", lines)

    def test_usage_errors(self):
        self.assertExitCode(2, "bounds", "--kind", "fan", "--m", "4", "--omega", "2")
        self.assertExitCode(2, "bounds", "--kind", "fan", "--m", "4", "--c0", "0")

    def test_non_unit_diagonal_is_runtime_error(self):
        problem = file_problem(self.tmp / "p", [[2, 0], [0, 1]], [0, 0], [0, 0])
        self.assertExitCode(1, "bounds", "--problem", str(problem))


class PlotCommandTests(HarnessTestCase):
    def write_csv(self, rows):
        path = self.tmp / "h.csv"
        write_history_csv(path, rows)
        return path

    def test_deterministic_bytes(self):
        rows = [ComparisonRow(s, t, k, 0.5**k * (1 + t), 0.0) for s in ("cyclic", "shuffled")
                for t in range(3) for k in range(8)]
        csv_path = self.write_csv(rows)
        first, second = self.tmp / "a.svg", self.tmp / "b.svg"
        run("plot", "--csv", str(csv_path), "--out", str(first))
        run("plot", "--csv", str(csv_path), "--out", str(second))
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertIn(b"<svg", first.read_bytes())

    def test_no_trials_draws_fewer_lines(self):
        rows = [ComparisonRow("cyclic", t, k, 0.5**k * (1 + t), 0.0) for t in range(3) for k in range(6)]
        csv_path = self.write_csv(rows)
        full, means = self.tmp / "full.svg", self.tmp / "means.svg"
        run("plot", "--csv", str(csv_path), "--out", str(full))
        run("plot", "--csv", str(csv_path), "--out", str(means), "--no-trials")
        self.assertLess(len(means.read_bytes()), len(full.read_bytes()))

    def test_zero_errors_are_clipped(self):
        csv_path = self.write_csv([ComparisonRow("cyclic", 0, k, v, 0.0) for k, v in enumerate([1.0, 0.0])])
        run("plot", "--csv", str(csv_path), "--out", str(self.tmp / "z.svg"))
        self.assertTrue((self.tmp / "z.svg").exists())

    def test_empty_csv(self):
        path = self.tmp / "empty.csv"
        path.write_text(",".join(CSV_HEADER) + "\n")
        self.assertExitCode(1, "plot", "--csv", str(path), "--out", str(self.tmp / "e.svg"))
        path.write_text("")
        self.assertExitCode(1, "plot", "--csv", str(path), "--out", str(self.tmp / "e.svg"))

    def test_missing_csv(self):
        self.assertExitCode(1, "plot", "--csv", str(self.tmp / "none.csv"), "--out", str(self.tmp / "e.svg"))
        self.assertExitCode(2, "plot", "--csv", str(self.tmp / "none.csv"))
