"""Search-space geometry: bounds, unit-cube normalization, distances, archive."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Default minimum separation between archived points (normalized units).
DUPLICATE_TOL = 1e-10


class BoundsViolationError(ValueError):
    """A point lies outside the region of interest."""


class DuplicatePointError(ValueError):
    """A point is closer than the duplicate tolerance to an archived point."""


class EmptySetError(ValueError):
    """A nearest-neighbor query was made against an empty set."""


@dataclass(frozen=True)
class Roi:
    """Box-shaped region of interest in problem units."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).ravel()
        upper = np.array(self.upper, dtype=float).ravel()
        if lower.shape != upper.shape or lower.size < 1:
            raise ValueError("lower and upper must be nonempty vectors of equal length")
        if not np.all(lower < upper):
            raise ValueError("lower bounds must be strictly below upper bounds")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


def normalize(x, roi: Roi) -> np.ndarray:
    """Map a point (or rows of points) from problem units into [0, 1]^n."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != roi.n:
        raise ValueError(f"expected dimension {roi.n}, got {x.shape[-1]}")
    if np.any(x < roi.lower) or np.any(x > roi.upper):
        raise BoundsViolationError(f"point {x} outside [{roi.lower}, {roi.upper}]")
    p = (x - roi.lower) / roi.width
    # rounding can push a bound-attaining coordinate a hair outside
    return np.clip(p, 0.0, 1.0)


def denormalize(p, roi: Roi) -> np.ndarray:
    """Inverse of :func:`normalize`."""
    p = np.asarray(p, dtype=float)
    return roi.lower + p * roi.width


def nn_dist(x, points) -> float:
    """Euclidean distance from ``x`` to its nearest neighbor in ``points``."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise EmptySetError("nearest-neighbor distance to an empty set")
    points = points.reshape(-1, np.size(x))
    diff = points - np.asarray(x, dtype=float)
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", diff, diff))))


def nn_dists(queries, points) -> np.ndarray:
    """Vectorized :func:`nn_dist` for each row of ``queries``."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        raise EmptySetError("nearest-neighbor distance to an empty set")
    return np.sqrt(np.min(sq_dist_matrix(queries, points), axis=1))


def sq_dist_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between the rows of ``a`` and ``b``."""
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


class Archive:
    """Append-only record of evaluated points (normalized) and their values.

    The i-th appended entry always stays at position i. Set ``dup_tol`` to
    ``None`` to accept repeated points (e.g. for samplers whose repair step
    can land on the same boundary point twice).
    """

    def __init__(self, n: int, dup_tol: float | None = DUPLICATE_TOL, capacity: int = 64):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.n = n
        self.dup_tol = dup_tol
        self._x = np.empty((max(capacity, 1), n))
        self._y = np.empty(max(capacity, 1))
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def points(self) -> np.ndarray:
        view = self._x[: self._size]
        view.flags.writeable = False
        return view

    @property
    def values(self) -> np.ndarray:
        view = self._y[: self._size]
        view.flags.writeable = False
        return view

    def is_duplicate(self, p) -> bool:
        if self.dup_tol is None or self._size == 0:
            return False
        return nn_dist(p, self.points) <= self.dup_tol

    def append(self, p, y: float) -> Archive:
        p = np.asarray(p, dtype=float).ravel()
        if p.size != self.n:
            raise ValueError(f"expected dimension {self.n}, got {p.size}")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise BoundsViolationError(f"point {p} outside the unit hypercube")
        if self.is_duplicate(p):
            raise DuplicatePointError(f"point {p} duplicates an archived point")
        if self._size == self._x.shape[0]:
            self._x = np.concatenate([self._x, np.empty_like(self._x)])
            self._y = np.concatenate([self._y, np.empty_like(self._y)])
        self._x[self._size] = p
        self._y[self._size] = y
        self._size += 1
        return self

    def best(self) -> tuple[np.ndarray, float]:
        i = int(np.argmin(self.values))
        return self._x[i].copy(), float(self._y[i])

    def prefix(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        """Points and values of the first ``size`` evaluations."""
        return self.points[:size], self.values[:size]

    def __repr__(self):
        return f"Archive(n={self.n}, size={self._size})"
