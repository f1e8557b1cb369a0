"""SVG figures: F and R against time, x-y body tracks, and solution curves.

Output is deterministic: the SVG id salt is fixed, the date stamp dropped and
text kept as text rather than glyph paths.
"""
from __future__ import annotations

import io

import matplotlib
from matplotlib.figure import Figure
import numpy as np

STYLE = {
    "svg.hashsalt": "iso3bp",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.0,
}
BODY_COLORS = ("#1b9e77", "#d95f02", "#7570b3")


def _svg(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def fr_figure(t, states, title=None) -> str:
    """F and R against t on shared axes."""
    states = np.asarray(states)
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(6.0, 3.5))
        ax = fig.add_subplot()
        ax.plot(t, states[:, 0], label="F", gid="curve-F")
        ax.plot(t, states[:, 1], label="R", gid="curve-R")
        ax.set_xlabel("t")
        ax.legend(loc="best")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _svg(fig)


def xy_figure(positions, title=None) -> str:
    """Projection of body tracks onto the x-y plane; positions is (n, 3, 3)."""
    positions = np.asarray(positions)
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(4.5, 4.5))
        ax = fig.add_subplot()
        for j in range(3):
            ax.plot(positions[:, j, 0], positions[:, j, 1], color=BODY_COLORS[j],
                    label=f"body {j + 1}", gid=f"track-body{j + 1}")
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.legend(loc="upper right")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _svg(fig)


def branch_figure(branches, projection="ab", title=None) -> str:
    """Solution curves in the (a, b) plane or an axonometric view of (T, a, b)."""
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(5.0, 4.0))
        if projection == "ab":
            ax = fig.add_subplot()
            for i, br in enumerate(branches):
                c = br.coords()
                ax.plot(c[:, 1], c[:, 2], label=br.kind.value, gid=f"branch-{i}")
            ax.set_xlabel("a")
            ax.set_ylabel("b")
        elif projection == "Tab":
            ax = fig.add_subplot(projection="3d")
            for i, br in enumerate(branches):
                c = br.coords()
                T = c[:, 0] * br.kind.period_multiplier
                ax.plot(T, c[:, 1], c[:, 2], label=br.kind.value, gid=f"branch-{i}")
            ax.set_xlabel("T")
            ax.set_ylabel("a")
            ax.set_zlabel("b")
        else:
            raise ValueError(f"unknown projection {projection!r}")
        ax.legend(loc="best")
        if title:
            ax.set_title(title)
        return _svg(fig)
