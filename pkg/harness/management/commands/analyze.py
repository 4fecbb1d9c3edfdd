from django.conf import settings

from analysis.averages import check_average_truncation_norms, compare_llt_formulas
from analysis.truncation import (
    check_log_truncation_bound, expected_truncation_norm, log_truncation_factor,
    min_truncation_exhaustive, min_truncation_heuristic,
)
from harness.forms import AnalyzeForm
from harness.management.base import HarnessCommand
from harness.serializers import format_value
from harness.services import load_problem
from linalg.spectral import spectral_summary
from orderings.models import RngState


class Command(HarnessCommand):
    help = "Report the spectrum, triangular truncation statistics and the permutation average E[LL*]."
    form_class = AnalyzeForm

    def add_arguments(self, parser):
        self.add_problem_arguments(parser)
        parser.add_argument("--restarts", type=int, help="heuristic restarts when n > 8 (default 20)")
        parser.add_argument("--trials", type=int, help="Monte Carlo orderings when n > 8 (default 1000)")

    def run(self, data):
        instance = load_problem(data)
        b = instance.b_matrix
        self.stdout.write(f"n: {b.n}")

        try:
            self.emit(spectral_summary(b).as_lines())
        except ValueError as exc:
            self.stdout.write(f"spectrum: {exc}")

        if b.n <= settings.SHUFFLED_SOR["EXHAUSTIVE_MAX_N"]:
            self.emit(min_truncation_exhaustive(b).as_lines())
        else:
            rng = RngState(data["seed"])
            self.emit(min_truncation_heuristic(b, data["restarts"], rng.spawn(0)).as_lines())
            self.emit(expected_truncation_norm(b, data["trials"], rng.spawn(1)).as_lines("sampled"))
        self.stdout.write(f"truncation.log_factor: {format_value(log_truncation_factor(b.n))}")
        self.stdout.write(f"truncation.log_bound_identity: {format_value(check_log_truncation_bound(b))}")

        report = check_average_truncation_norms(b)
        self.emit(report.as_lines())

        comparison = compare_llt_formulas(b)
        self.emit(comparison.as_lines())
        for i, j in comparison.mismatches[:16]:
            self.stdout.write(
                f"formula.entry({i + 1},{j + 1}): reference={format_value(comparison.reference[i, j])} "
                f"position_weighted={format_value(comparison.position_weighted[i, j])}"
            )
        if not comparison.agrees:
            self.stdout.write(
                self.style.WARNING("position-weighted formula (1/n) K o H^2 disagrees with E[LL*]")
            )
