"""SVG figures of extracted sections on the unit square."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import PatchCollection  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

# fixed id salt and no date stamp keep the SVG byte-identical across runs
matplotlib.rcParams["svg.hashsalt"] = "torsec"


def _wrapped_pieces(curve):
    """Split a cover polyline into pieces inside the unit square."""
    pts = np.asarray(curve, dtype=float)
    pieces, cur = [], [pts[0] % 1.0]
    for a, b in zip(pts[:-1], pts[1:]):
        cell_a, cell_b = np.floor(a), np.floor(b)
        if np.array_equal(cell_a, cell_b):
            cur.append(b - cell_a)
            continue
        # crossing a square boundary: end this piece on the boundary, restart on the far side
        s = 1.0
        for k in range(2):
            if cell_b[k] != cell_a[k]:
                edge = max(cell_a[k], cell_b[k])
                s = min(s, (edge - a[k]) / (b[k] - a[k]))
        mid = a + s * (b - a)
        cur.append(mid - cell_a)
        pieces.append(np.array(cur))
        cur = [mid - cell_b, b - cell_b]
    pieces.append(np.array(cur))
    return [p for p in pieces if len(p) > 1]


def plot_section(g, cg, section, path, title: str | None = None) -> None:
    """Draw alpha-recurrent cells and the section's level curves to an SVG file."""
    if g.grid is None or g.dimension != 2:
        raise ValueError("section plots need a 2D grid graph")
    n, m = g.grid.shape
    fig, ax = plt.subplots(figsize=(5, 5))
    rects = []
    for c in cg.chains:
        for v in c:
            i, j = divmod(int(v), m)
            rects.append(Rectangle((i / n, j / m), 1.0 / n, 1.0 / m))
    if rects:
        ax.add_collection(PatchCollection(rects, facecolor="tab:red", edgecolor="none", alpha=0.6))
    for curve, cls in zip(section.polylines, section.polyline_classes):
        for piece in _wrapped_pieces(curve):
            ax.plot(piece[:, 0], piece[:, 1], color="tab:blue", linewidth=1.2)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"section of class {section.alpha}, level {section.level:g}")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
