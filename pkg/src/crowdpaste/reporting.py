"""Render evaluation figures to files (headless matplotlib).

Figures accompany the delimited outputs: the IoU distribution of matched
pairs and the mean detected-vs-truth counts.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import CountSummary

__all__ = ["save_iou_histogram_figure", "save_count_figure"]


def save_iou_histogram_figure(
    bins: list[tuple[float, int]], destination: Path | str, title: str = "IoU distribution"
) -> None:
    """Bar chart of matched-IoU counts per bin."""
    edges = [b for b, _ in bins]
    counts = [c for _, c in bins]
    width = edges[1] - edges[0] if len(edges) > 1 else 1.0

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(edges, counts, width=width, align="edge", color="#4878cf", edgecolor="white")
    ax.set_xlabel("IoU")
    ax.set_ylabel("matched pairs")
    ax.set_title(title)
    ax.set_xlim(0.0, 1.0)
    fig.tight_layout()
    fig.savefig(destination)
    plt.close(fig)


def save_count_figure(
    predicted: CountSummary,
    matched: CountSummary,
    destination: Path | str,
    title: str = "Mean objects per image",
) -> None:
    """Bar chart comparing mean predicted / matched counts against truth."""
    values = [predicted.mean_predicted, matched.mean_predicted, predicted.mean_truth]
    names = ["predicted", "matched", "truth"]

    fig, ax = plt.subplots(figsize=(5, 4))
    bars = ax.bar(names, values, color=["#4878cf", "#6acc65", "#555555"])
    ax.bar_label(bars, fmt="%.2f")
    ax.set_ylabel("mean count per image")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(destination)
    plt.close(fig)
