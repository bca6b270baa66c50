"""Figure rendering for fit and evaluation runs.

Kept separate from the numeric modules so importing the library never
pulls in a plotting backend; the CLI imports this lazily.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .physics import EmpiricalTrend, TrendParams

__all__ = ["save_cdf_figure", "save_trend_figure"]


def save_cdf_figure(curves, path) -> None:
    """Plot absolute-error CDF curves to a file.

    curves is a list of (label, ErrorCdf) pairs; every curve shares the
    midpoint plotting convention of the evaluation module.
    """
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    for label, cdf in curves:
        ax.step(cdf.errors, cdf.probabilities, where="post", label=label)
    ax.set_xlabel("absolute error")
    ax.set_ylabel("cumulative probability")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    if len(curves) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _trend_lines(trend):
    if isinstance(trend, TrendParams):
        lines = [(trend.k1, trend.b1, "lg p1"), (trend.k2, trend.b2, "lg p2")]
        if trend.k3 is not None:
            lines.append((trend.k3, trend.b3, "lg p3"))
        lines.append((trend.k4, trend.b4, "lg p4"))
        return lines
    if isinstance(trend, EmpiricalTrend):
        return [
            (trend.k_eps, trend.b_eps, "lg eps_r"),
            (trend.k_sig, trend.b_sig, "lg sigma"),
        ]
    raise TypeError(f"unsupported trend type: {type(trend).__name__}")


def save_trend_figure(fit_result, path) -> None:
    """Scatter fitted per-band log10 parameters with their trend lines.

    Accepts the result of either trend fit; non-converged bands are shown
    as open markers so a thin regression basis is visible at a glance.
    """
    lines = _trend_lines(fit_result.trend)
    fits = list(fit_result.band_fits)
    centers = np.array([bf.band.f_center for bf in fits]) / 1000.0
    converged = np.array([bf.converged for bf in fits])
    stack = np.stack([bf.log10_params for bf in fits])
    n = len(lines)
    ncols = 2 if n > 1 else 1
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.0 * ncols, 2.8 * nrows), squeeze=False
    )
    span = np.linspace(centers.min(), centers.max(), 50) if len(fits) > 1 else centers
    for i, (k, b, label) in enumerate(lines):
        ax = axes[i // ncols][i % ncols]
        ax.scatter(
            centers[converged], stack[converged, i], s=18, label="band fit"
        )
        if (~converged).any():
            ax.scatter(
                centers[~converged],
                stack[~converged, i],
                s=18,
                facecolors="none",
                edgecolors="tab:red",
                label="not converged",
            )
        ax.plot(span, k * span + b, color="tab:orange", lw=1.2, label="trend")
        ax.set_xlabel("band center (THz)")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    for j in range(n, nrows * ncols):
        axes[j // ncols][j % ncols].set_visible(False)
    handles, labels = axes[0][0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
