import csv

from analysis.bounds import evaluate_bounds
from harness.forms import BoundsForm
from harness.management.base import HarnessCommand
from harness.serializers import format_value
from harness.services import load_problem


class Command(HarnessCommand):
    help = "Print the theoretical per-sweep contraction factors for every ordering strategy."
    form_class = BoundsForm

    def add_arguments(self, parser):
        self.add_problem_arguments(parser)
        parser.add_argument("--omega", type=float, help="relaxation parameter in (0, 2), default 1")
        parser.add_argument("--c0", type=float, help="constant of the small-rank cyclic bound (omitted if unset)")
        parser.add_argument("--c1", type=float, help="preshuffled constant (default 32.42)")
        parser.add_argument("--c2", type=float, help="general Hermitian existence constant (default 2907)")
        parser.add_argument("--format", help="text (default) | csv")

    def run(self, data):
        instance = load_problem(data)
        report = evaluate_bounds(
            instance.b_matrix, data["omega"], c0=data["c0"], c1=data["c1"], c2=data["c2"]
        )
        rows = [(key, value) for key, value in report.rows() if not (key.endswith("small_rank") and value is None)]
        if data["format"] == "csv":
            writer = csv.writer(self.stdout, lineterminator="\n")
            writer.writerow(["key", "value"])
            writer.writerows((key, format_value(value)) for key, value in rows)
        else:
            self.emit(f"{key}: {format_value(value)}" for key, value in rows)
