from harness.forms import SolveForm
from harness.management.base import HarnessCommand
from harness.models import ExperimentConfig
from harness.serializers import report_lines, write_history_csv
from harness.services import (
    fan_exponent_lines, history_rows, load_problem, rate_or_none, require_consistent, run_trial,
)


class Command(HarnessCommand):
    help = "Run one solver history and write it as CSV (strategy,trial,sweep,error_sq,residual)."
    form_class = SolveForm

    def add_arguments(self, parser):
        self.add_problem_arguments(parser)
        self.add_run_arguments(parser)
        parser.add_argument(
            "--strategy", help="cyclic (default) | shuffled | preshuffled | single-step | fixed"
        )
        parser.add_argument("--window", type=int, help="sweeps averaged by the printed rate (default 5)")

    def run(self, data):
        instance = load_problem(data)
        self.check_sigma(data, instance.n)
        require_consistent(instance, data["allow_inconsistent"])
        config = ExperimentConfig(
            strategies=(data["strategy"],),
            omega=data["omega"],
            max_sweeps=data["max_sweeps"],
            target_error_sq=data["target_error_sq"],
            seed=data["seed"],
            sigma=data["sigma"],
            method=data["method"],
        )
        history = run_trial(instance, config, data["strategy"], 0)
        write_history_csv(data["out"], history_rows(history, data["strategy"], 0))

        rate = rate_or_none(history.errors_sq, data["window"])
        self.emit(
            report_lines(
                [
                    ("strategy", data["strategy"]),
                    ("method", data["method"]),
                    ("omega", data["omega"]),
                    ("sweeps", history.sweeps),
                    ("initial_error_sq", history.errors_sq[0]),
                    ("final_error_sq", history.errors_sq[-1]),
                    ("final_residual", history.residuals[-1]),
                    ("empirical_rate", rate),
                ]
            )
        )
        self.emit(fan_exponent_lines(instance, rate))
        self.stdout.write(self.style.SUCCESS(f"wrote {data['out']}"))
