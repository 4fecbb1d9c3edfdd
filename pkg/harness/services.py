# harness/services.py
from __future__ import annotations

import logging
import math

import numpy as np

from analysis.bounds import bound_for_strategy, cosine_exponent, evaluate_bounds
from orderings.models import OrderingStrategy, RngState
from orderings.services import derive_seed
from problems.models import ProblemInstance, ProblemKind
from problems.services import build_instance, consistency_check
from solvers.models import IterationHistory
from solvers.services import empirical_rate, run_kaczmarz, run_solver

from .models import ComparisonRow, ExperimentConfig, SolveMethod, StrategySummary
from .serializers import read_problem

logger = logging.getLogger(__name__)


# -------- problems --------
def load_problem(data: dict) -> ProblemInstance:
    """Problem from cleaned form data: a directory or generator options."""
    if data.get("problem"):
        return read_problem(data["problem"])
    return build_instance(
        data["kind"],
        m=data.get("m"),
        n=data.get("n"),
        r=data.get("r"),
        complex_entries=bool(data.get("complex")),
        seed=data["seed"],
    )


def require_consistent(instance: ProblemInstance, allow_inconsistent: bool) -> None:
    if consistency_check(instance.b_matrix, instance.b):
        return
    if not allow_inconsistent:
        raise ValueError("system inconsistent")
    logger.warning("running on an inconsistent system; errors will not converge")


# -------- runs --------
def trial_strategy(kind: str, n: int, trial_seed: int, sigma=None) -> OrderingStrategy:
    """Preshuffled runs draw their one permutation from the trial seed unless one is given."""
    return OrderingStrategy.for_kind(kind, n, RngState(trial_seed), sigma=sigma)


def run_trial(instance: ProblemInstance, config: ExperimentConfig, kind: str, trial: int) -> IterationHistory:
    trial_seed = derive_seed(config.seed, trial)
    strategy = trial_strategy(kind, instance.n, trial_seed, config.sigma)
    solver_config = config.solver_config(trial_seed)
    if config.method == SolveMethod.KACZMARZ:
        if instance.a is None:
            raise ValueError("kaczmarz needs the factor A (problem has no A.mtx)")
        return run_kaczmarz(instance.a, instance.b, instance.x0, instance.xbar, solver_config, strategy)
    return run_solver(
        instance.b_matrix, instance.b, instance.y0, instance.ybar, solver_config, strategy, factor=instance.a
    )


def history_rows(history: IterationHistory, kind: str, trial: int) -> list[ComparisonRow]:
    return [
        ComparisonRow(strategy=kind, trial=trial, sweep=k, error_sq=e, residual=r)
        for k, (e, r) in enumerate(zip(history.errors_sq, history.residuals))
    ]


def run_comparison(instance: ProblemInstance, config: ExperimentConfig):
    """All (strategy, trial) runs in deterministic order; returns (rows, histories by strategy)."""
    rows, histories = [], {}
    for kind in config.strategies:
        histories[kind] = []
        for trial in range(config.trials):
            history = run_trial(instance, config, kind, trial)
            histories[kind].append(history.errors_sq)
            rows.extend(history_rows(history, kind, trial))
        logger.info("%s: %d trials done", kind, config.trials)
    return rows, histories


# -------- summaries --------
def mean_curve(runs: list[list[float]]) -> tuple[np.ndarray, np.ndarray]:
    """Per-sweep mean and standard error; runs that stopped early keep their last value."""
    length = max(len(run) for run in runs)
    padded = np.array([list(run) + [run[-1]] * (length - len(run)) for run in runs], dtype=float)
    mean = padded.mean(axis=0)
    if len(runs) > 1:
        stderr = padded.std(axis=0, ddof=1) / math.sqrt(len(runs))
    else:
        stderr = np.zeros(length)
    return mean, stderr


def rate_or_none(errors, window: int = 5) -> float | None:
    """empirical_rate over the last `window` sweeps, shrinking the window for short runs."""
    window = min(window, len(errors) - 1)
    if window < 1:
        return None
    return empirical_rate(list(errors), window)


def theoretical_bounds(instance: ProblemInstance, omega: float):
    try:
        return evaluate_bounds(instance.b_matrix, omega)
    except ValueError as exc:
        logger.warning("no theoretical rates: %s", exc)
        return None


def summarize(histories: dict, bounds=None, window: int = 5) -> list[StrategySummary]:
    summaries = []
    for kind, runs in histories.items():
        mean, stderr = mean_curve(runs)
        summaries.append(
            StrategySummary(
                strategy=kind,
                trials=len(runs),
                mean_errors_sq=mean.tolist(),
                stderr_errors_sq=stderr.tolist(),
                empirical_rate=rate_or_none(mean, window),
                theoretical_rate=bound_for_strategy(bounds, kind) if bounds is not None else None,
            )
        )
    return summaries


def summary_table(summaries: list[StrategySummary]) -> tuple[list[str], list[list[str]]]:
    """Wide table: one row per sweep, one mean error_sq column per strategy."""
    header = ["sweep"] + [s.strategy for s in summaries]
    length = max(len(s.mean_errors_sq) for s in summaries)
    rows = []
    for k in range(length):
        row = [str(k)]
        for s in summaries:
            curve = s.mean_errors_sq
            row.append(f"{curve[min(k, len(curve) - 1)]:.17g}")
        rows.append(row)
    return header, rows


def fan_exponent_lines(instance: ProblemInstance, rate: float | None) -> list[str]:
    """Per-sweep exponent p with rate = cos(pi / 2m)^p, next to the candidates 2m and 4m."""
    if instance.meta.kind != ProblemKind.FAN or rate is None or not 0.0 < rate < 1.0:
        return []
    m = int(instance.meta.params["m"])
    if m < 2:
        return []
    measured = cosine_exponent(rate, math.pi / (2 * m))
    candidates = {"2m": 2 * m, "4m": 4 * m}
    nearest = min(candidates, key=lambda key: abs(candidates[key] - measured))
    return [
        f"fan.measured_exponent: {measured:.10g}",
        f"fan.candidate_2m: {2 * m}",
        f"fan.candidate_4m: {4 * m}",
        f"fan.nearest_candidate: {nearest}",
    ]

