"""Clustered samples on a linear slope, where nearest-better clustering misfires."""

from __future__ import annotations

import numpy as np

from . import basin

CLUSTER_SIGMA = 0.05


def clustered_slope_sample(rng: np.random.Generator, size: int = 100, clusters: int = 3,
                           sigma: float = CLUSTER_SIGMA):
    """Gaussian clusters in the unit square, valued by ``f(x) = x1 + x2``.

    Cluster centers are uniform in the square and points are clipped into
    it. Returns ``(points, values)``. The slope has a single optimum at the
    origin, so any basin selection returning more than one point is wrong.
    """
    centers = rng.random((clusters, 2))
    labels = rng.integers(clusters, size=size)
    points = np.clip(centers[labels] + sigma * rng.standard_normal((size, 2)), 0.0, 1.0)
    return points, points.sum(axis=1)


def compare_selections(points, values):
    """Indices selected by nearest-better clustering and by topographical selection."""
    nbc = basin.nearest_better_clustering(points, values, basin.NBC_PHI)
    ts = basin.topographical_selection(points, values, basin.ts_k(2, len(values)))
    return nbc, ts


def plot_nbc_demo(points, values, path):
    """Draw both selections side by side and save to ``path``."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    nbc, ts = compare_selections(points, values)
    fig, axes = plt.subplots(1, 2, figsize=(8, 4), sharey=True)
    for ax, idx, title in ((axes[0], nbc, "nearest-better clustering"),
                           (axes[1], ts, "topographical selection")):
        ax.scatter(points[:, 0], points[:, 1], c=values, cmap="viridis", s=14)
        ax.scatter(points[idx, 0], points[idx, 1], marker="o", s=90,
                   facecolors="none", edgecolors="red", lw=1.5)
        ax.set_title(f"{title}: {len(idx)} selected")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_aspect("equal")
        ax.set_xlabel("$x_1$")
    axes[0].set_ylabel("$x_2$")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return nbc, ts
