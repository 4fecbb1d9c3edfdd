# harness/plots.py
"""Semi-log convergence plots written as SVG with byte-stable output."""
from __future__ import annotations

import logging

import matplotlib
import numpy as np
from django.conf import settings
from matplotlib.figure import Figure
from matplotlib.ticker import LogLocator

logger = logging.getLogger(__name__)

WIDTH_PX, HEIGHT_PX, DPI = 960, 540, 100
SVG_RC = {
    "svg.hashsalt": "shuffled-sor",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def plot_histories(curves: dict, path, trials: dict | None = None, floor: float | None = None) -> None:
    """
    curves: strategy -> mean error_sq per sweep.
    trials: strategy -> list of per-trial error_sq sequences, drawn faint behind the mean.
    Values at or below zero are clipped to `floor` before taking logs.
    """
    if not curves:
        raise ValueError("nothing to plot")
    floor = settings.SHUFFLED_SOR["PLOT_FLOOR"] if floor is None else floor

    with matplotlib.rc_context(SVG_RC):
        figure = Figure(figsize=(WIDTH_PX / DPI, HEIGHT_PX / DPI), dpi=DPI)
        axes = figure.add_subplot(111)
        axes.set_yscale("log")
        for index, (strategy, mean) in enumerate(curves.items()):
            color = f"C{index % 10}"
            for faint in (trials or {}).get(strategy, []):
                values = np.maximum(np.asarray(faint, dtype=float), floor)
                axes.plot(np.arange(values.size), values, color=color, alpha=0.15, linewidth=0.6)
            values = np.maximum(np.asarray(mean, dtype=float), floor)
            axes.plot(np.arange(values.size), values, color=color, linewidth=1.8, label=strategy)
        axes.yaxis.set_major_locator(LogLocator(base=10.0, numticks=10))
        axes.set_xlabel("sweep")
        axes.set_ylabel("error_sq (energy semi-norm squared)")
        axes.grid(True, which="major", alpha=0.3)
        axes.legend(loc="upper right")
        figure.subplots_adjust(left=0.1, right=0.97, top=0.95, bottom=0.11)
        figure.savefig(path, format="svg", metadata={"Date": None})
    logger.info("wrote plot %s (%d curves)", path, len(curves))
