"""Figures for the sweep tables written by the command-line driver."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.5, 3.6),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "font.size": 9,
}


def render_table(table, path: Path) -> Path:
    """Plot the ``y`` columns of ``table`` against its ``x`` column and save a PNG at ``path``."""
    data = np.array(table.rows, dtype=float)
    col = {name: i for i, name in enumerate(table.columns)}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = data[:, col[table.x]]
        for name in table.y:
            ax.plot(x, data[:, col[name]], marker=".", linewidth=1, label=name)
        if table.logx:
            ax.set_xscale("log")
        if table.logy:
            ax.set_yscale("log")
        ax.set_xlabel(table.x)
        if table.title:
            ax.set_title(table.title)
        if len(table.y) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    return path
