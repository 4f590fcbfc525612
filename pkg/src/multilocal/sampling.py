"""Space-filling point generation in the unit hypercube."""

from __future__ import annotations

import numpy as np

from .space import nn_dists, sq_dist_matrix

MMLHS_CANDIDATES = 100
RECONSTRUCTION_CANDIDATES = 1000


def uniform_sample(num_points: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``num_points`` i.i.d. uniform points in [0, 1]^n, shape (num_points, n)."""
    if num_points < 1 or n < 1:
        raise ValueError("num_points and n must be positive")
    return rng.random((num_points, n))


def random_lhs(num_points: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Plain Latin hypercube: independent stratum permutations per axis."""
    strata = np.column_stack([rng.permutation(num_points) for _ in range(n)])
    return (strata + rng.random((num_points, n))) / num_points


def mmlhs(num_points: int, n: int, rng: np.random.Generator,
          candidates: int = MMLHS_CANDIDATES) -> np.ndarray:
    """Maximin Latin hypercube built greedily one point at a time.

    For every new point, ``candidates`` stratum assignments are drawn from
    the strata still free on each axis, each placed uniformly inside its
    cell; the candidate farthest from the already placed points wins.
    Points come out in construction order, which makes any prefix
    reasonably space-filling as well.
    """
    if num_points < 1 or n < 1:
        raise ValueError("num_points and n must be positive")
    free = [np.arange(num_points) for _ in range(n)]
    design = np.empty((num_points, n))
    for i in range(num_points):
        remaining = num_points - i
        picks = rng.integers(remaining, size=(candidates, n))
        cells = np.column_stack([free[d][picks[:, d]] for d in range(n)])
        cand = (cells + rng.random((candidates, n))) / num_points
        if i == 0:
            best = 0
        else:
            best = int(np.argmax(np.min(sq_dist_matrix(cand, design[:i]), axis=1)))
        design[i] = cand[best]
        for d in range(n):
            free[d] = np.delete(free[d], picks[best, d])
    return design


def min_pairwise_distance(points: np.ndarray) -> float:
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return np.inf
    d2 = sq_dist_matrix(points, points)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min()))


def maximin_reconstruction(existing, n: int, rng: np.random.Generator,
                           candidates: int = RECONSTRUCTION_CANDIDATES,
                           return_candidates: bool = False):
    """Uniform candidate with the largest distance to its nearest existing point.

    Used to place restart points as far as possible from everything that
    has been sampled so far.
    """
    existing = np.atleast_2d(np.asarray(existing, dtype=float))
    if existing.size == 0:
        raise ValueError("existing point set must be nonempty")
    cand = uniform_sample(candidates, n, rng)
    dist = nn_dists(cand, existing)
    best = cand[int(np.argmax(dist))]
    if return_candidates:
        return best, cand, dist
    return best
