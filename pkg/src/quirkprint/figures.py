"""Figure rendering for report commands (written next to the delimited output)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .classifier import ConfusionMatrix
from .reports import TimemapPoint


def render_timemap_figure(
    points: list[TimemapPoint], path: str | Path, title: str = "Release gap vs MHD"
) -> None:
    """Scatter of release-date gap (days) against signature distance."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    same = [p for p in points if p.same_family]
    cross = [p for p in points if not p.same_family]
    if cross:
        ax.scatter(
            [p.days_apart for p in cross],
            [p.distance for p in cross],
            s=18,
            alpha=0.6,
            label="cross-family",
            color="#888888",
        )
    if same:
        ax.scatter(
            [p.days_apart for p in same],
            [p.distance for p in same],
            s=22,
            alpha=0.8,
            label="same family",
            color="#2a7e3b",
        )
    ax.set_xlabel("days between release dates")
    ax.set_ylabel("modified Hamming distance")
    ax.set_title(title)
    if same or cross:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_confusion_figure(matrix: ConfusionMatrix, path: str | Path) -> None:
    """Heatmap of actual-vs-predicted family counts."""
    families = matrix.families
    grid = [
        [matrix.count(actual, predicted) for predicted in families]
        for actual in families
    ]
    fig, ax = plt.subplots(figsize=(1.0 + 0.8 * len(families),) * 2)
    im = ax.imshow(grid, cmap="Greens")
    ax.set_xticks(range(len(families)), families, rotation=45, ha="right")
    ax.set_yticks(range(len(families)), families)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    for i in range(len(families)):
        for j in range(len(families)):
            if grid[i][j]:
                ax.text(j, i, str(grid[i][j]), ha="center", va="center", fontsize=9)
    ax.set_title(f"accuracy {matrix.accuracy:.2%}")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
