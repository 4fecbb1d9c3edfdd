from collections import defaultdict

from harness.forms import PlotForm
from harness.management.base import HarnessCommand
from harness.plots import plot_histories
from harness.serializers import read_history_csv
from harness.services import mean_curve


class Command(HarnessCommand):
    help = "Render a history CSV as a semi-log SVG: one mean curve per strategy, trials drawn faint."
    form_class = PlotForm

    def add_arguments(self, parser):
        parser.add_argument("--csv", help="history CSV written by solve or compare")
        parser.add_argument("--out", help="SVG path")
        parser.add_argument("--no-trials", action="store_true", help="draw only the mean curves")

    def run(self, data):
        rows = read_history_csv(data["csv"])
        runs = defaultdict(lambda: defaultdict(list))
        for row in sorted(rows, key=lambda r: (r.trial, r.sweep)):
            runs[row.strategy][row.trial].append(row.error_sq)

        histories = {strategy: list(by_trial.values()) for strategy, by_trial in runs.items()}
        curves = {strategy: mean_curve(trials)[0].tolist() for strategy, trials in histories.items()}
        multi = any(len(trials) > 1 for trials in histories.values())
        plot_histories(curves, data["out"], trials=histories if multi and not data["no_trials"] else None)
        self.stdout.write(self.style.SUCCESS(f"wrote {data['out']}"))
