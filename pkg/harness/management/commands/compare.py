from pathlib import Path

from harness.forms import CompareForm
from harness.management.base import HarnessCommand
from harness.models import ExperimentConfig
from harness.plots import plot_histories
from harness.serializers import report_lines, write_history_csv, write_table_csv
from harness.services import (
    fan_exponent_lines, load_problem, require_consistent, run_comparison, summarize, summary_table,
    theoretical_bounds,
)


class Command(HarnessCommand):
    help = (
        "Run every strategy over Monte Carlo trials with derived seeds; write the long-format CSV, "
        "print mean-curve rates next to the theoretical ones."
    )
    form_class = CompareForm

    def add_arguments(self, parser):
        self.add_problem_arguments(parser)
        self.add_run_arguments(parser)
        parser.add_argument("--strategies", help="comma separated, default cyclic,shuffled")
        parser.add_argument("--trials", type=int, help="trials per strategy (default 10)")
        parser.add_argument("--plot", help="SVG path for the semi-log convergence plot")
        parser.add_argument("--summary", help="CSV path for mean error_sq per sweep and strategy")

    def run(self, data):
        instance = load_problem(data)
        self.check_sigma(data, instance.n)
        require_consistent(instance, data["allow_inconsistent"])
        config = ExperimentConfig(
            strategies=tuple(data["strategies"]),
            trials=data["trials"],
            omega=data["omega"],
            max_sweeps=data["max_sweeps"],
            target_error_sq=data["target_error_sq"],
            seed=data["seed"],
            sigma=data["sigma"],
            method=data["method"],
            csv_path=Path(data["out"]),
            plot_path=Path(data["plot"]) if data.get("plot") else None,
            summary_path=Path(data["summary"]) if data.get("summary") else None,
        )
        rows, histories = run_comparison(instance, config)
        write_history_csv(config.csv_path, rows)

        bounds = theoretical_bounds(instance, config.omega)
        summaries = summarize(histories, bounds)
        self.emit(
            report_lines(
                [
                    ("n", instance.n),
                    ("omega", config.omega),
                    ("trials", config.trials),
                    ("seed", config.seed),
                    ("method", config.method),
                ]
            )
        )
        for summary in summaries:
            self.emit(summary.as_lines())
            self.emit(f"{summary.strategy}.{line}" for line in fan_exponent_lines(instance, summary.empirical_rate))

        if config.summary_path is not None:
            header, table = summary_table(summaries)
            write_table_csv(config.summary_path, header, table)
        if config.plot_path is not None:
            plot_histories(
                {s.strategy: s.mean_errors_sq for s in summaries},
                config.plot_path,
                trials=histories if config.trials > 1 else None,
            )
        self.stdout.write(self.style.SUCCESS(f"wrote {config.csv_path}"))
