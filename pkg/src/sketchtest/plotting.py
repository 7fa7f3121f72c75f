"""Figures written next to CLI reports.  Everything renders off-screen."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def rate_sweep(xs, rates, path, xlabel="eps", ylabel="reject rate", title=None):
    """Rates with Wilson error bars.  ``rates`` are dicts from
    :func:`sketchtest.report.rate_summary`."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        y = np.array([r["rate"] for r in rates])
        # clip float round-off at rates of exactly 0 or 1
        lo = np.maximum(0.0, y - np.array([r["wilson_low"] for r in rates]))
        hi = np.maximum(0.0, np.array([r["wilson_high"] for r in rates]) - y)
        ax.errorbar(xs, y, yerr=[lo, hi], marker="o", capsize=3, lw=1)
        ax.set_ylim(-0.02, 1.02)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def estimate_histogram(values, threshold, path, xlabel="estimate", title=None):
    """Histogram of per-seed estimates with the decision threshold marked."""
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if values.size:
            ax.hist(values, bins=min(40, max(5, int(math.sqrt(values.size)))), color="0.6")
        ax.axvline(threshold, color="C3", lw=1.2, label=f"threshold {threshold:.3g}")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("runs")
        ax.legend()
        if title:
            ax.set_title(title)
        return _save(fig, path)

