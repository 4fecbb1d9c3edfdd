# harness/management/base.py
import logging

from django.core.management.base import BaseCommand, CommandError

from linalg.spectral import ConvergenceError

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class HarnessCommand(BaseCommand):
    """
    Validates options through `form_class` and calls `run(cleaned_data)`.

    Form errors exit with 2, errors raised while running with 1.
    """

    form_class = None

    def add_problem_arguments(self, parser, *, with_dir=True):
        if with_dir:
            parser.add_argument("--problem", help="problem directory written by `generate`")
        parser.add_argument("--kind", help="generate the problem instead: fan | random | lowrank")
        parser.add_argument("--m", type=int, help="fan: half the number of rows; random: columns of A")
        parser.add_argument("--n", type=int, help="matrix size (random, lowrank)")
        parser.add_argument("--r", type=int, help="rank (lowrank)")
        parser.add_argument("--complex", action="store_true", help="complex Gaussian entries")
        parser.add_argument("--seed", type=int, help="base seed (default 0)")

    def add_run_arguments(self, parser):
        parser.add_argument("--omega", type=float, help="relaxation parameter in (0, 2), default 1")
        parser.add_argument("--max-sweeps", type=int, help="sweep cap (default 100)")
        parser.add_argument("--target-error-sq", type=float, help="stop once error_sq drops to this")
        parser.add_argument("--sigma", help="1-based permutation, e.g. 3,1,2 (fixed / preshuffled)")
        parser.add_argument("--method", help="sor (default) | kaczmarz")
        parser.add_argument("--allow-inconsistent", action="store_true", help="run even if b is not in Ran(B)")
        parser.add_argument("--out", help="CSV history path")

    def handle(self, *args, **options):
        form = self.form_class(data=options)
        if not form.is_valid():
            raise CommandError(self.format_errors(form), returncode=USAGE_ERROR)
        try:
            self.run(form.cleaned_data)
        except (ValueError, OSError, ConvergenceError) as exc:
            logger.debug("%s failed", self.__class__.__module__, exc_info=True)
            raise CommandError(str(exc), returncode=RUNTIME_ERROR)

    @staticmethod
    def format_errors(form) -> str:
        parts = []
        for field, errors in form.errors.items():
            label = "" if field == "__all__" else f"--{field.replace('_', '-')}: "
            parts.extend(f"{label}{error}" for error in errors)
        return "; ".join(parts)

    @staticmethod
    def check_sigma(data, n: int) -> None:
        sigma = data.get("sigma")
        if sigma is not None and sigma.n != n:
            raise CommandError(f"--sigma: has length {sigma.n}, problem has n={n}", returncode=USAGE_ERROR)

    def emit(self, lines) -> None:
        for line in lines:
            self.stdout.write(line)

    def run(self, data):
        raise NotImplementedError
