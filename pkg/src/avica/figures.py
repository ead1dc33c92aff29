"""Matplotlib renderings for the CLI report paths.

Figures are written to files next to the delimited outputs; nothing here is
needed by the numerical library itself.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dataio import LevelSetGrid

# strip creator metadata so identical runs produce identical bytes
_PNG_METADATA = {"Software": None}


def render_level_set(grid: LevelSetGrid, path, points=None, title: str | None = None) -> None:
    """Shade the near-zero band of the exported feature; overlay points if given."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    lo, hi = grid.band
    inside = (grid.values >= lo) & (grid.values <= hi)
    ax.contourf(
        grid.x,
        grid.y,
        inside.T.astype(float),
        levels=[0.5, 1.5],
        colors=["#2ca02c"],
        alpha=0.6,
    )
    ax.contour(grid.x, grid.y, grid.values.T, levels=[0.0], colors="k", linewidths=0.8)
    if points is not None:
        points = np.asarray(points, dtype=float)
        ax.plot(points[:, 0], points[:, 1], "x", color="#1f77b4", markersize=3, alpha=0.7)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)


def render_confusion(confusion: np.ndarray, classes, accuracy: float, path) -> None:
    """Heat map of the confusion counts with the overall accuracy in the title."""
    confusion = np.asarray(confusion)
    fig, ax = plt.subplots(figsize=(4.5, 4.0))
    im = ax.imshow(confusion, cmap="Blues")
    ax.set_xticks(range(len(classes)), [str(c) for c in classes])
    ax.set_yticks(range(len(classes)), [str(c) for c in classes])
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    vmax = confusion.max() if confusion.size else 1
    for i in range(confusion.shape[0]):
        for j in range(confusion.shape[1]):
            color = "white" if confusion[i, j] > vmax / 2 else "black"
            ax.text(j, i, str(int(confusion[i, j])), ha="center", va="center", color=color)
    fig.colorbar(im, ax=ax, fraction=0.046)
    ax.set_title(f"accuracy = {accuracy:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
