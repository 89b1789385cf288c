"""Figure rendering for reports: difference histograms and Q-Q plots.

Output must be byte-stable across reruns, so the SVG hash salt is pinned and
date metadata is stripped; timestamps belong in the sidecar run log, never in
artifacts.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "repgeom"

import matplotlib.pyplot as plt
import numpy as np


def save_figure(fig, base: str | Path) -> list[Path]:
    """Write <base>.svg and <base>.png; returns the paths written."""
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    svg = base.with_suffix(".svg")
    png = base.with_suffix(".png")
    fig.savefig(svg, format="svg", metadata={"Date": None})
    fig.savefig(png, format="png", dpi=150)
    plt.close(fig)
    return [svg, png]


def difference_histogram_figure(edges: np.ndarray, counts: np.ndarray,
                                label_a: str, label_b: str):
    fig, ax = plt.subplots(figsize=(6, 4))
    widths = np.diff(edges)
    ax.bar(edges[:-1], counts, width=widths, align="edge",
           color="#4878cf", edgecolor="white", linewidth=0.5)
    ax.axvline(0.0, color="black", linewidth=1)
    ax.set_xlabel(f"similarity({label_a}) - similarity({label_b})")
    ax.set_ylabel("samples")
    ax.set_title(f"{label_a} vs {label_b}")
    fig.tight_layout()
    return fig


def qq_figure(points: Sequence[tuple[float, float]], title: str):
    theo = np.array([p[0] for p in points])
    samp = np.array([p[1] for p in points])
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.scatter(theo, samp, s=8, color="#4878cf", alpha=0.7)
    lo = float(min(theo.min(), samp.min()))
    hi = float(max(theo.max(), samp.max()))
    ax.plot([lo, hi], [lo, hi], color="black", linewidth=1)
    ax.set_xlabel("theoretical quantiles")
    ax.set_ylabel("sample quantiles")
    ax.set_title(title)
    fig.tight_layout()
    return fig


def score_series_figure(scores_by_name: dict[str, np.ndarray]):
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, values in scores_by_name.items():
        ax.plot(values, linewidth=1, label=name)
    ax.set_xlabel("sample")
    ax.set_ylabel("representational similarity")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig
