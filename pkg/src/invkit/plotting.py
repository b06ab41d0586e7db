"""Boundary CSV and SVG overlays for 2-D results."""
from __future__ import annotations

import csv
import os

import numpy as np

from invkit.geometry import HPolytope, VPolytope, polygon_order, polygon_vertices
from invkit.system import ClosedLoopModel


def image_polygon(S: HPolytope, phi, clm: ClosedLoopModel):
    """Vertices of ``phi S + D`` in counter-clockwise order."""
    V = polygon_vertices(S)
    img = V @ np.asarray(phi).T
    sums = (img[:, None, :] + clm.D_vertices.vertices[None, :, :]).reshape(-1, 2)
    return polygon_order(VPolytope(sums))


def boundary_sets(S: HPolytope, clm: ClosedLoopModel, iterates=()):
    """Named 2-D boundary polygons: base set, running iterates, final set and its images."""
    sets = [("S0", polygon_vertices(clm.S0))]
    for i, it in enumerate(iterates):
        sets.append((f"iterate_{i}", polygon_vertices(it)))
    sets.append(("S", polygon_vertices(S)))
    for j, phi in enumerate(clm.phi_vertices):
        sets.append((f"phi_{j + 1}_S_plus_D", image_polygon(S, phi, clm)))
    return sets


def write_csv(path, sets):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["set", "index", "x1", "x2"])
        for name, pts in sets:
            for i, p in enumerate(pts):
                w.writerow([name, i, repr(float(p[0])), repr(float(p[1]))])


def write_svg(path, sets):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(11, 4.5))
    iter_names = [n for n, _ in sets if n.startswith("iterate_")]
    shades = plt.cm.viridis(np.linspace(0.2, 0.9, max(len(iter_names), 1)))
    for name, pts in sets:
        closed = np.vstack([pts, pts[:1]])
        if name == "S0":
            ax_a.plot(*closed.T, "k--", lw=1, label="S0")
        elif name.startswith("iterate_"):
            k = iter_names.index(name)
            ax_a.plot(*closed.T, color=shades[k], lw=1, label=name.replace("_", " "))
        elif name == "S":
            ax_a.fill(*closed.T, color="tab:red", alpha=0.25, label="S")
            ax_b.fill(*closed.T, color="tab:red", alpha=0.25, label="S")
        else:
            ax_b.plot(*closed.T, lw=1, label=name.replace("_", " "))
    for ax, title in ((ax_a, "iterates"), (ax_b, "one-step images")):
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_title(title)
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def emit(outdir, S, clm, iterates=(), stem="marpi"):
    """Write ``<stem>.csv`` and ``<stem>.svg`` into ``outdir``; returns both paths."""
    os.makedirs(outdir, exist_ok=True)
    sets = boundary_sets(S, clm, iterates)
    csv_path = os.path.join(outdir, f"{stem}.csv")
    svg_path = os.path.join(outdir, f"{stem}.svg")
    write_csv(csv_path, sets)
    write_svg(svg_path, sets)
    return csv_path, svg_path
