from harness.forms import GenerateForm
from harness.management.base import HarnessCommand
from harness.serializers import write_problem
from problems.services import build_instance


class Command(HarnessCommand):
    help = "Generate a test problem (B, optional A, rhs, ybar, y0, meta) into a directory."
    form_class = GenerateForm

    def add_arguments(self, parser):
        self.add_problem_arguments(parser, with_dir=False)
        parser.add_argument("--out-dir", help="target directory (created if missing)")

    def run(self, data):
        instance = build_instance(
            data["kind"],
            m=data.get("m"),
            n=data.get("n"),
            r=data.get("r"),
            complex_entries=data["complex"],
            seed=data["seed"],
        )
        written = write_problem(data["out_dir"], instance)
        self.emit(instance.meta.as_lines())
        self.emit(f"wrote: {path}" for path in written)
        self.stdout.write(self.style.SUCCESS(f"generated n={instance.n} problem in {data['out_dir']}"))
