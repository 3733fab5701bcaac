"""Report rendering and crack-pattern metrics.

The run report consists of matplotlib figures written next to the CSV: the
load-displacement curve and final-field maps. The metric helpers quantify
crack patterns (bands crossing a horizontal line, penetration depth, growth
direction from a notch tip) for trend checks.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

from .mesh import Mesh
from .solver import RunRecord


def save_load_displacement(records: list[RunRecord], path: str, title: str = ""):
    """Reaction force against applied displacement."""
    u = np.array([r.u_app for r in records])
    f = np.array([r.Fy for r in records])
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(u, f, "-o", ms=2.5, lw=1.2)
    ax.set_xlabel("applied displacement [m]")
    ax.set_ylabel("reaction force Fy [N/m]")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_field(mesh: Mesh, values: np.ndarray, path: str, label: str,
               cmap: str = "viridis", vmin=None, vmax=None):
    """Nodal scalar field on the triangulation."""
    tri = mtri.Triangulation(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.elements)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    im = ax.tripcolor(tri, np.asarray(values, dtype=float), shading="gouraud",
                      cmap=cmap, vmin=vmin, vmax=vmax)
    fig.colorbar(im, ax=ax, label=label)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


# -- crack-pattern metrics -------------------------------------------------------


def _row_near(mesh: Mesh, y_line: float) -> np.ndarray:
    """Node ids of the mesh row closest to a horizontal line."""
    ys = np.unique(mesh.nodes[:, 1])
    y0 = ys[np.argmin(np.abs(ys - y_line))]
    return np.where(np.isclose(mesh.nodes[:, 1], y0))[0]


def bands_along_line(mesh: Mesh, s: np.ndarray, y_line: float,
                     threshold: float) -> list[tuple[float, float]]:
    """Maximal x-intervals with s < threshold along the node row nearest to
    ``y_line`` (one interval per crack crossing the line)."""
    row = _row_near(mesh, y_line)
    order = np.argsort(mesh.nodes[row, 0])
    xs = mesh.nodes[row, 0][order]
    below = np.asarray(s)[row][order] < threshold
    bands = []
    start = None
    for x, flag in zip(xs, below):
        if flag and start is None:
            start = x
        elif not flag and start is not None:
            bands.append((start, prev))
            start = None
        prev = x
    if start is not None:
        bands.append((start, xs[-1]))
    return bands


def band_depth(mesh: Mesh, s: np.ndarray, band: tuple[float, float],
               threshold: float, pad: float = 0.0) -> float:
    """Largest y with s < threshold inside the vertical slab of one band
    (crack penetration depth measured from y = 0)."""
    x0, x1 = band[0] - pad, band[1] + pad
    sel = (mesh.nodes[:, 0] >= x0) & (mesh.nodes[:, 0] <= x1) \
        & (np.asarray(s) < threshold)
    if not sel.any():
        return 0.0
    return float(mesh.nodes[sel, 1].max())


def new_damage_centroid(mesh: Mesh, s: np.ndarray, threshold: float,
                        notch_p0, notch_p1, halo: float):
    """Centroid of damaged nodes farther than ``halo`` from the initial notch
    segment, or None when no such damage exists."""
    p0 = np.asarray(notch_p0, dtype=float)
    p1 = np.asarray(notch_p1, dtype=float)
    d = p1 - p0
    rel = mesh.nodes - p0
    t = np.clip(rel @ d / (d @ d), 0.0, 1.0)
    dist = np.hypot(*(mesh.nodes - (p0 + t[:, None] * d)).T)
    sel = (np.asarray(s) < threshold) & (dist > halo)
    if not sel.any():
        return None
    return mesh.nodes[sel].mean(axis=0)


def growth_angle_deg(tip, centroid) -> float:
    """Angle of the tip-to-centroid vector from the +x axis, in (-180, 180]."""
    v = np.asarray(centroid, dtype=float) - np.asarray(tip, dtype=float)
    return float(np.degrees(np.arctan2(v[1], v[0])))


def peak_load(records: list[RunRecord]) -> tuple[float, float]:
    """(displacement at peak, peak Fy) over a run."""
    f = np.array([r.Fy for r in records])
    k = int(np.argmax(f))
    return records[k].u_app, float(f[k])
