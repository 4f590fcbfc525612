"""Basin identification on evaluated point sets.

Topographical selection keeps every point that is better than all of its
k nearest neighbors. Nearest-better clustering is included for comparison;
it tends to report spurious basins on non-uniform samples.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .space import sq_dist_matrix

NBC_PHI = 2.0


def ts_k(n: int, N: int) -> int:
    """Neighborhood size ``0.215 n + 0.74 sqrt(N)``, rounded and clamped to [1, N-1]."""
    k = 0.215 * n + 0.74 * math.sqrt(N)
    k = int(math.floor(k + 0.5))
    return max(1, min(k, max(N - 1, 1)))


def nearest_neighbors(points, k: int) -> np.ndarray:
    """Indices of the k nearest other points of every point.

    Equidistant neighbors are ordered by ascending index.
    """
    points = np.asarray(points, dtype=float)
    d2 = sq_dist_matrix(points, points)
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def topograph_edges(points, values, k: int) -> set[tuple[int, int]]:
    """Directed edges (worse, better) of the k-nearest-neighbor topograph."""
    values = np.asarray(values, dtype=float)
    edges = set()
    for i, nbrs in enumerate(nearest_neighbors(points, k)):
        for j in nbrs:
            j = int(j)
            if values[j] < values[i]:
                edges.add((i, j))
            elif values[i] < values[j]:
                edges.add((j, i))
    return edges


def topographical_selection(points, values, k: int) -> np.ndarray:
    """Indices (ascending) of the topograph nodes without outgoing edges."""
    values = np.asarray(values, dtype=float)
    N = len(values)
    if N < 2:
        return np.arange(N)
    if not 1 <= k <= N - 1:
        raise ValueError(f"k must be in [1, {N - 1}], got {k}")
    nbrs = nearest_neighbors(points, k)
    own = values[:, None]
    theirs = values[nbrs]
    has_out = np.any(theirs < own, axis=1)
    has_out[nbrs[theirs > own]] = True
    return np.flatnonzero(~has_out)


def nearest_better_clustering(points, values, phi: float = NBC_PHI) -> np.ndarray:
    """Best index of each cluster left after cutting long nearest-better links.

    Every point is linked to its nearest strictly better point; links longer
    than ``phi`` times the mean link length are removed.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    N = len(values)
    if N < 2:
        return np.arange(N)
    d2 = sq_dist_matrix(points, points)
    better = values[None, :] < values[:, None]
    d2 = np.where(better, d2, np.inf)
    target = np.argmin(d2, axis=1)
    length = np.sqrt(d2[np.arange(N), target])
    linked = np.isfinite(length)
    if not linked.any():
        return np.arange(N)
    keep = linked & (length <= phi * length[linked].mean())
    src = np.flatnonzero(keep)
    graph = coo_matrix((np.ones(len(src)), (src, target[src])), shape=(N, N))
    _, labels = connected_components(graph, directed=False)
    best = {}
    for i in np.lexsort((np.arange(N), values)):
        best.setdefault(labels[i], i)
    return np.sort(np.fromiter(best.values(), dtype=int))


def select_basins(points, values, n: int):
    """Topographical selection with ``k = ts_k(n, N)``.

    Returns ``(indices, points, values)`` of the selected representatives.
    A single point is its own representative.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    N = len(values)
    if N == 0:
        raise ValueError("cannot select basins from an empty set")
    idx = np.arange(1) if N == 1 else topographical_selection(points, values, ts_k(n, N))
    return idx, points[idx], values[idx]
