"""Quality measures for approximation sets of a problem's optima."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import nn_dists

#: Best values may undercut the registered optimum by this much (rounding).
REGISTRY_SLACK = 1e-6


class RegistryInconsistencyError(ValueError):
    """An evaluated point beat the known global optimum."""


@dataclass(frozen=True)
class MetricRecord:
    eval_index: int
    f_delta: float
    peak_ratio: float
    ahd: float
    n_selected: int
    wallclock_ms: float


def f_delta(best_value: float, global_value: float) -> float:
    """Deviation of the best value found from the global optimum value."""
    if best_value < global_value - REGISTRY_SLACK:
        raise RegistryInconsistencyError(
            f"best value {best_value!r} is below the known optimum {global_value!r}")
    return max(0.0, float(best_value - global_value))


def peak_ratio(P, optima, radius: float = 0.01) -> float:
    """Fraction of ``optima`` with a member of ``P`` within ``radius``."""
    optima = np.atleast_2d(np.asarray(optima, dtype=float))
    P = np.asarray(P, dtype=float)
    if P.size == 0:
        return 0.0
    P = P.reshape(-1, optima.shape[1])
    return float(np.mean(nn_dists(optima, P) <= radius))


def ahd(P, optima, p: float = 1.0) -> float:
    """Averaged Hausdorff distance between ``P`` and ``optima``.

    The larger of the power means of the distances from each optimum to
    ``P`` and from each member of ``P`` to the optima. An empty ``P``
    yields ``inf``.
    """
    optima = np.atleast_2d(np.asarray(optima, dtype=float))
    P = np.asarray(P, dtype=float)
    if P.size == 0:
        return np.inf
    P = P.reshape(-1, optima.shape[1])
    to_p = nn_dists(optima, P)
    to_opt = nn_dists(P, optima)
    return float(max(np.mean(to_p ** p) ** (1.0 / p), np.mean(to_opt ** p) ** (1.0 / p)))
