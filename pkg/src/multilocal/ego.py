"""Expected improvement and the sequential model-based optimization loop."""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np
from scipy.special import ndtr

from . import cmaes, surrogate
from .sampling import maximin_reconstruction, mmlhs, uniform_sample
from .space import Archive

log = logging.getLogger(__name__)

INFILL_BUDGET = 3000
UNIFORM_DRAWS_PER_DIM = 100
# the EI landscape is flat far from the data, so the default value
# tolerances of the restart strategy would end the search immediately
INFILL_TOLFUN = 1e-12
INFILL_TOLFUNHIST = 1e-14

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def expected_improvement(f_hat, s_hat, y_best):
    """Expected improvement over ``y_best`` of a normal prediction.

    Vectorized over ``f_hat`` and ``s_hat``. Where ``s_hat`` is zero the
    continuous limit ``max(0, y_best - f_hat)`` is returned.
    """
    f_hat = np.asarray(f_hat, dtype=float)
    s_hat = np.asarray(s_hat, dtype=float)
    improvement = y_best - f_hat
    pos = s_hat > 0.0
    safe_s = np.where(pos, s_hat, 1.0)
    with np.errstate(over="ignore"):
        # a subnormal s gives u = +-inf, where the formula still has the right limit
        u = improvement / safe_s
        ei = improvement * ndtr(u) + safe_s * _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    ei = np.where(pos, ei, np.maximum(improvement, 0.0))
    ei = np.maximum(ei, 0.0)
    return ei if ei.ndim else float(ei)


def propose(model: surrogate.KrigingModel, archive: Archive, n: int,
            rng: np.random.Generator, budget: int = INFILL_BUDGET) -> np.ndarray:
    """Next point to evaluate: approximate maximizer of EI under ``model``.

    CMA-ES is started once from the best of ``100 n`` uniform draws. If the
    winner coincides with an archived point, a maximin exploration point is
    returned instead.
    """
    y_best = float(np.min(archive.values))

    def ei(x):
        f_hat, s_hat = surrogate.predict(model, x)
        return expected_improvement(f_hat, s_hat, y_best)

    draws = uniform_sample(UNIFORM_DRAWS_PER_DIM * n, n, rng)
    ei_draws = ei(draws)
    i = int(np.argmax(ei_draws))
    best_x, _, _, _ = cmaes.minimize(
        lambda x: -ei(x), draws[i], rng, max_evals=budget, start_value=-float(ei_draws[i]),
        tolfun=INFILL_TOLFUN, tolfunhist=INFILL_TOLFUNHIST)
    if archive.is_duplicate(best_x):
        log.debug("infill point duplicates the archive; exploring instead")
        return maximin_reconstruction(archive.points, n, rng)
    return best_x


def ego_run(objective: Callable[[np.ndarray], float], n: int, c: int, budget: int,
            rng: np.random.Generator, events: list | None = None) -> Archive:
    """Efficient global optimization with an MmLHS initial design of ``c n`` points.

    Runs until exactly ``budget`` evaluations have been made and returns
    the archive in evaluation order. When the surrogate cannot be fitted,
    that iteration evaluates a maximin exploration point instead; such
    events are appended to ``events`` as ``(evaluation index, message)``.
    """
    init = c * n
    if init >= budget:
        raise ValueError("initial design must leave budget for infill points")
    archive = Archive(n, capacity=budget)
    for x in mmlhs(init, n, rng):
        archive.append(x, objective(x))
    params = None
    while len(archive) < budget:
        try:
            model = surrogate.fit(archive.points, archive.values, rng, previous=params)
            params = model.params
            x = propose(model, archive, n, rng)
        except surrogate.IllConditionedModelError as err:
            log.warning("model fit failed at evaluation %d: %s", len(archive) + 1, err)
            if events is not None:
                events.append((len(archive) + 1, f"fit failed: {err}"))
            x = maximin_reconstruction(archive.points, n, rng)
        archive.append(x, objective(x))
    return archive
