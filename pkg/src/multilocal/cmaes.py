"""(mu/mu_w, lambda)-CMA-ES on the unit hypercube, plus a restart wrapper.

Samples are repaired into [0, 1]^n by clipping and the strategy is updated
with the repaired points, so every evaluated point stays in bounds.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import cma_constants as const
from .sampling import maximin_reconstruction
from .space import Archive

log = logging.getLogger(__name__)


class ProtocolError(ValueError):
    """``tell`` was called with a batch that does not match ``ask``."""


@dataclass(frozen=True)
class StopVerdict:
    stopped: bool
    reason: str | None = None

    def __bool__(self):
        return self.stopped


class CMAES:
    """State of one CMA-ES run, advanced through :meth:`ask` and :meth:`tell`.

    Parameters
    ----------
    start : array_like
        Initial mean, inside [0, 1]^n.
    sigma0 : float
        Initial step size.
    popsize : int, optional
        Defaults to ``4 + floor(3 ln n)``.
    max_evals : int, optional
        Per-run evaluation budget checked by :meth:`should_stop`.
    tolfun, tolfunhist : float
        Value-range stopping tolerances. ``0`` disables a criterion.
    """

    def __init__(self, start, sigma0: float = const.SIGMA0, popsize: int | None = None,
                 max_evals: int | None = None, tolfun: float = const.TOLFUN,
                 tolfunhist: float = const.TOLFUNHIST):
        start = np.asarray(start, dtype=float).ravel()
        if np.any(start < 0.0) or np.any(start > 1.0):
            raise ValueError("start point must lie in the unit hypercube")
        if sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        self.n = n = start.size
        self.params = const.strategy_constants(n, popsize)
        if self.params.popsize < 4:
            raise ValueError("population size must be at least 4")
        self.mean = start.copy()
        self.sigma = float(sigma0)
        self.C = np.eye(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.path_sigma = np.zeros(n)
        self.path_c = np.zeros(n)
        self.generation = 0
        self.evaluations = 0
        self.max_evals = max_evals
        self.tolfun = tolfun
        self.tolfunhist = tolfunhist
        self.value_history = deque(maxlen=const.history_length(n, self.params.popsize))
        self.last_values = np.empty(0)
        self.best_x = start.copy()
        self.best_f = np.inf
        self._pending = None

    @property
    def popsize(self) -> int:
        return self.params.popsize

    def ask(self, rng: np.random.Generator) -> np.ndarray:
        """Draw ``popsize`` candidates, clipped into [0, 1]^n."""
        z = rng.standard_normal((self.popsize, self.n))
        y = (z * self.D) @ self.B.T
        x = np.clip(self.mean + self.sigma * y, 0.0, 1.0)
        self._pending = x
        return x.copy()

    def tell(self, candidates, values) -> CMAES:
        p = self.params
        x = np.asarray(candidates, dtype=float)
        f = np.asarray(values, dtype=float).ravel()
        if x.shape != (p.popsize, self.n) or f.size != p.popsize:
            raise ProtocolError(f"expected {p.popsize} candidates and values")
        order = np.argsort(f, kind="stable")
        self.evaluations += p.popsize
        self.generation += 1
        self.last_values = f.copy()
        self.value_history.append(float(f[order[0]]))
        if f[order[0]] < self.best_f:
            self.best_f = float(f[order[0]])
            self.best_x = x[order[0]].copy()

        y = (x[order[: p.mu]] - self.mean) / self.sigma
        y_w = p.weights @ y
        self.mean = self.mean + self.sigma * y_w

        inv_sqrt_C = (self.B / self.D) @ self.B.T
        self.path_sigma = ((1.0 - p.cs) * self.path_sigma
                           + np.sqrt(p.cs * (2.0 - p.cs) * p.mueff) * (inv_sqrt_C @ y_w))
        ps_norm = np.linalg.norm(self.path_sigma)
        hsig = (ps_norm / np.sqrt(1.0 - (1.0 - p.cs) ** (2 * self.generation))
                < (1.4 + 2.0 / (self.n + 1.0)) * p.chi_n)
        self.path_c = ((1.0 - p.cc) * self.path_c
                       + hsig * np.sqrt(p.cc * (2.0 - p.cc) * p.mueff) * y_w)
        rank_mu = (y.T * p.weights) @ y
        old_weight = 1.0 - p.c1 - p.cmu + (1.0 - hsig) * p.c1 * p.cc * (2.0 - p.cc)
        C = old_weight * self.C + p.c1 * np.outer(self.path_c, self.path_c) + p.cmu * rank_mu
        self.C = 0.5 * (C + C.T)
        self.sigma *= np.exp((p.cs / p.damps) * (ps_norm / p.chi_n - 1.0))

        eig, B = np.linalg.eigh(self.C)
        eig = np.maximum(eig, np.finfo(float).tiny)
        self.B, self.D = B, np.sqrt(eig)
        self._pending = None
        return self

    def condition_number(self) -> float:
        return float((self.D.max() / self.D.min()) ** 2)

    def should_stop(self) -> StopVerdict:
        if self.max_evals is not None and self.evaluations >= self.max_evals:
            return StopVerdict(True, "max_evals")
        full = len(self.value_history) == self.value_history.maxlen
        if full:
            hist = np.fromiter(self.value_history, float)
            both = np.concatenate([hist, self.last_values])
            if np.ptp(both) < self.tolfun:
                return StopVerdict(True, "tolfun")
            if np.ptp(hist) < self.tolfunhist:
                return StopVerdict(True, "tolfunhist")
        if self.condition_number() > const.MAX_CONDITION:
            return StopVerdict(True, "condition")
        return StopVerdict(False)


def minimize(func: Callable[[np.ndarray], np.ndarray], start, rng: np.random.Generator,
             max_evals: int, start_value: float | None = None, **options):
    """Run one CMA-ES episode on a batch objective.

    ``func`` maps an array of shape (popsize, n) to popsize values. The
    episode ends at the first stopping criterion or when the next
    generation would exceed ``max_evals``. Returns ``(best_x, best_f,
    evaluations, verdict)``; the start point competes for best if its value
    is supplied.
    """
    es = CMAES(start, max_evals=max_evals, **options)
    if start_value is not None:
        es.best_x, es.best_f = np.asarray(start, dtype=float).copy(), float(start_value)
    verdict = es.should_stop()
    while not verdict:
        if es.evaluations + es.popsize > max_evals:
            verdict = StopVerdict(True, "max_evals")
            break
        x = es.ask(rng)
        es.tell(x, func(x))
        verdict = es.should_stop()
    return es.best_x, es.best_f, es.evaluations, verdict


def restart_cmaes(objective: Callable[[np.ndarray], float], n: int, budget: int,
                  rng: np.random.Generator, sigma0: float = const.SIGMA0,
                  popsize: int | None = None, episodes: list | None = None) -> Archive:
    """CMA-ES restarted from maximin-reconstruction points until ``budget`` runs out.

    The first start point is placed far from the center of the cube, every
    later one far from all points evaluated so far. A final generation that
    does not fit the budget is truncated. If ``episodes`` is a list, the
    stop reason of each episode is appended to it.
    """
    lam = const.default_popsize(n) if popsize is None else popsize
    if budget < lam:
        raise ValueError("budget must cover at least one generation")
    # clipping may land on the same boundary point twice
    archive = Archive(n, dup_tol=None, capacity=budget)
    existing = np.full((1, n), 0.5)
    while len(archive) < budget:
        start = maximin_reconstruction(existing, n, rng)
        es = CMAES(start, sigma0, popsize=lam)
        verdict = StopVerdict(False)
        while not verdict and len(archive) < budget:
            x = es.ask(rng)
            room = budget - len(archive)
            values = [objective(xi) for xi in x[:room]]
            for xi, yi in zip(x, values):
                archive.append(xi, yi)
            if room < len(x):
                verdict = StopVerdict(True, "max_evals")
                break
            es.tell(x, values)
            verdict = es.should_stop()
        if not verdict:
            verdict = StopVerdict(True, "max_evals")
        if episodes is not None:
            episodes.append(verdict.reason)
        log.debug("cma-es episode ended after %d generations: %s", es.generation, verdict.reason)
        existing = archive.points
    return archive
