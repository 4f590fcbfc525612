"""Strategy parameters of the (mu/mu_w, lambda)-CMA-ES.

All values are the standard defaults from Hansen's CMA-ES tutorial
(arXiv:1604.00772, Table 1), kept in one place for auditing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Initial step size in normalized coordinates.
SIGMA0 = 0.15
#: Stop when the current generation and the recent best values span less than this.
TOLFUN = 1e-3
#: Stop when the recent best values span less than this.
TOLFUNHIST = 1e-5
#: Stop when the covariance condition number exceeds this.
MAX_CONDITION = 1e14


def default_popsize(n: int) -> int:
    return 4 + int(math.floor(3.0 * math.log(n)))


def history_length(n: int, popsize: int) -> int:
    """Generations of best values kept for the tolfun/tolfunhist tests."""
    return 10 + int(math.ceil(30.0 * n / popsize))


@dataclass(frozen=True)
class StrategyConstants:
    n: int
    popsize: int
    mu: int
    weights: np.ndarray
    mueff: float
    cs: float
    damps: float
    cc: float
    c1: float
    cmu: float
    chi_n: float


def strategy_constants(n: int, popsize: int | None = None) -> StrategyConstants:
    lam = default_popsize(n) if popsize is None else int(popsize)
    mu = lam // 2
    w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mueff = 1.0 / float(np.sum(w ** 2))
    cs = (mueff + 2.0) / (n + mueff + 5.0)
    damps = 1.0 + 2.0 * max(0.0, math.sqrt((mueff - 1.0) / (n + 1.0)) - 1.0) + cs
    cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n)
    c1 = 2.0 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) ** 2 + mueff))
    chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
    return StrategyConstants(n, lam, mu, w, mueff, cs, damps, cc, c1, cmu, chi_n)
