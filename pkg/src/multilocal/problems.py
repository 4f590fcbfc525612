"""The twelve-problem multimodal testbed and its registry of known optima.

Each problem exposes its evaluator on normalized coordinates together with
the positions and values of all its local minima. The registry ships as a
plain-text data file (``data/optima.txt``) produced offline by
:func:`build_registry`; :func:`problem_suite` loads it rather than
recomputing it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache, partial
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from . import functions as fn
from .space import Roi, denormalize

#: Radius (normalized units) within which an optimizer counts as found.
PEAK_RADIUS = 0.01
#: Refined points closer than this are merged into one optimum.
MERGE_TOL = 1e-4

REGISTRY_FILE = "optima.txt"
MAX_GRID_NODES = 200_000


class RegistryVerificationError(RuntimeError):
    """The registry oracle disagrees with the expected optimum count."""


@dataclass(frozen=True)
class OptimaRegistry:
    positions: np.ndarray
    values: np.ndarray
    radius: float = PEAK_RADIUS

    def __len__(self):
        return len(self.values)

    def global_value(self) -> float:
        return float(np.min(self.values))

    def global_mask(self, tol: float = 1e-6) -> np.ndarray:
        return self.values <= self.global_value() + tol


@dataclass(frozen=True)
class ProblemSpec:
    """A bound-constrained test problem.

    ``function`` works in problem units on arrays of shape ``(..., dim)``.
    ``reported_num_local`` is the optimum count listed in the literature
    table the testbed was taken from; ``num_local`` is the count the
    registry oracle actually finds (they differ for Goldstein-Price).
    ``axis_functions`` is set for additively separable problems.
    """

    name: str
    dim: int
    roi: Roi
    function: Callable
    num_local: int
    num_global: int
    reported_num_local: int
    axis_functions: tuple | None = None
    optima: OptimaRegistry | None = field(default=None, compare=False)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def evaluate_batch(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.asarray(self.function(denormalize(points, self.roi)), dtype=float)


def evaluate(problem: ProblemSpec, x) -> float:
    """Objective value at the normalized point ``x``."""
    return float(problem.function(denormalize(np.asarray(x, dtype=float), problem.roi)))


def _vincent_axis(x, dim):
    return -np.sin(10.0 * np.log(x)) / dim


def _rastrigin_axis(x, k):
    return 10.0 + 10.0 * np.cos(2.0 * np.pi * k * x) + 2.0 * k * x ** 2


def _definitions():
    box = lambda lo, hi, n: Roi(np.full(n, lo, dtype=float), np.full(n, hi, dtype=float))
    defs = [
        ("shekel5", 4, box(0, 10, 4), partial(fn.shekel, m=5), 5, 1, 5, None),
        ("shekel7", 4, box(0, 10, 4), partial(fn.shekel, m=7), 7, 1, 7, None),
        ("shekel10", 4, box(0, 10, 4), partial(fn.shekel, m=10), 10, 1, 10, None),
        ("hartman3", 3, box(0, 1, 3), fn.hartman3, 3, 1, 3, None),
        ("hartman6", 6, box(0, 1, 6), fn.hartman6, 2, 1, 2, None),
        # (1.2, -0.2) is a saddle, so only four minima exist on [-2, 2]^2
        ("goldstein_price", 2, box(-2, 2, 2), fn.goldstein_price, 4, 1, 5, None),
        ("branin", 2, Roi([-5.0, 0.0], [10.0, 15.0]), fn.branin, 3, 3, 3, None),
    ]
    for n in (2, 3):
        axes = tuple(partial(_vincent_axis, dim=n) for _ in range(n))
        defs.append((f"vincent{n}", n, box(0.25, 10, n), fn.vincent, 6 ** n, 6 ** n, 6 ** n, axes))
    for n in (4, 8):
        k = fn.RASTRIGIN_K[n]
        axes = tuple(partial(_rastrigin_axis, k=ki) for ki in k)
        defs.append((f"rastrigin{n}", n, box(0, 1, n), partial(fn.modified_rastrigin, k=k),
                     48, 1, 48, axes))
    defs.append(("six_hump_camelback", 2, Roi([-1.9, -1.1], [1.9, 1.1]),
                 fn.six_hump_camelback, 6, 2, 6, None))
    return [
        ProblemSpec(name, dim, roi, func, num_local, num_global, reported, axes)
        for name, dim, roi, func, num_local, num_global, reported, axes in defs
    ]


@lru_cache(maxsize=None)
def problem_suite() -> tuple[ProblemSpec, ...]:
    """All twelve problems, with their optima loaded from the registry file."""
    registry = load_registry()
    suite = []
    for spec in _definitions():
        opt = registry.get(spec.name)
        suite.append(ProblemSpec(**{**spec.__dict__, "optima": opt}))
    return tuple(suite)


def get_problem(name: str) -> ProblemSpec:
    for problem in problem_suite():
        if problem.name == name:
            return problem
    raise KeyError(f"unknown problem {name!r}")


def problem_names() -> list[str]:
    return [p.name for p in _definitions()]


# ---------------------------------------------------------------------------
# registry oracle


def _complex_step_grad(f, x, lower, width):
    n = x.size
    h = 1e-30
    z = x[None, :] + 1j * h * np.eye(n)
    return np.imag(f(lower + z * width)) / h


def _hessian(f, x, lower, width, eps=1e-6):
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = eps
        H[:, i] = (_complex_step_grad(f, x + e, lower, width)
                   - _complex_step_grad(f, x - e, lower, width)) / (2.0 * eps)
    return 0.5 * (H + H.T)


def _free_mask(x, g):
    return ~(((x <= 0.0) & (g > 0.0)) | ((x >= 1.0) & (g < 0.0)))


def refine_minimum(f, x0, lower, width, radius=0.01, gtol=1e-12, maxiter=500):
    """Trust-region projected Newton descent inside [0, 1]^n.

    ``f`` takes problem units; ``x0`` and the result are normalized. The
    trust radius keeps the iterate inside the basin of its seed. Returns
    ``(x, f(x), projected gradient norm)``.
    """
    x = np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
    value = lambda z: float(np.real(f(lower + z * width)))
    fx = value(x)
    for _ in range(maxiter):
        g = _complex_step_grad(f, x, lower, width)
        free = _free_mask(x, g)
        if np.linalg.norm(g[free]) < gtol:
            break
        Hf = _hessian(f, x, lower, width)[np.ix_(free, free)]
        step = np.zeros_like(x)
        try:
            np.linalg.cholesky(Hf)
            step[free] = -np.linalg.solve(Hf, g[free])
        except np.linalg.LinAlgError:
            step[free] = -g[free]
        norm = np.linalg.norm(step)
        if norm == 0.0:
            break
        while radius > 1e-300:
            trial = np.clip(x + step * min(1.0, radius / norm), 0.0, 1.0)
            ft = value(trial)
            if ft <= fx:
                if np.array_equal(trial, x):
                    radius = 0.0
                    break
                if norm >= radius:
                    radius *= 2.0
                x, fx = trial, ft
                break
            radius /= 4.0
        if radius <= 1e-300:
            break
    g = _complex_step_grad(f, x, lower, width)
    return x, fx, float(np.linalg.norm(g[_free_mask(x, g)]))


def is_local_minimizer(f, x, lower, width) -> bool:
    """Second-order check on the free coordinates of a stationary point."""
    g = _complex_step_grad(f, x, lower, width)
    free = _free_mask(x, g)
    if not free.any():
        return True
    eig = np.linalg.eigvalsh(_hessian(f, x, lower, width)[np.ix_(free, free)])
    return bool(eig.min() > 0.0)


def _grid_seeds(f, lower, width, n, density):
    """Grid nodes that are no worse than any of their 3^n - 1 neighbors."""
    density = min(density, int(MAX_GRID_NODES ** (1.0 / n)))
    ax = np.linspace(0.0, 1.0, density)
    grid = np.stack(np.meshgrid(*[ax] * n, indexing="ij"), axis=-1)
    flat = grid.reshape(-1, n)
    vals = np.concatenate([np.real(f(lower + chunk * width))
                           for chunk in np.array_split(flat, max(1, len(flat) // 4096))])
    vals = vals.reshape(grid.shape[:-1])
    padded = np.pad(vals, 1, constant_values=np.inf)
    keep = np.ones(vals.shape, dtype=bool)
    for off in itertools.product((-1, 0, 1), repeat=n):
        if any(off):
            keep &= vals <= padded[tuple(slice(1 + o, 1 + o + density) for o in off)]
    return grid[keep]


def _sample_seeds(f, lower, width, n, size, rng, k=30):
    """Random points that are no worse than their k nearest neighbors."""
    pts = rng.random((size, n))
    vals = np.real(f(lower + pts * width))
    _, nb = cKDTree(pts).query(pts, k + 1)
    return pts[np.all(vals[:, None] <= vals[nb[:, 1:]], axis=1)]


def _refine_all(f, seeds, lower, width, radius):
    found = []
    for seed in seeds:
        x, fx, gnorm = refine_minimum(f, seed, lower, width, radius=radius)
        if gnorm > 1e-8 or not is_local_minimizer(f, x, lower, width):
            continue
        if all(np.linalg.norm(x - y) > MERGE_TOL for y, _ in found):
            found.append((x, fx))
    return found


def build_registry(problem: ProblemSpec, seed_grid_density: int = 200,
                   sample_size: int = 20000, seed: int = 0) -> OptimaRegistry:
    """Locate every local minimizer of ``problem`` by multistart refinement.

    Seeds are the discrete local minima of a ``seed_grid_density``-per-axis
    grid (for dimensions up to 4), of a random sample otherwise, or, for
    separable problems, the Cartesian product of per-axis minimizers. Each
    seed is refined to a projected gradient norm below 1e-8, and refined
    points within 1e-4 of each other are merged.

    Raises
    ------
    RegistryVerificationError
        If the number of minimizers differs from ``problem.num_local``.
    """
    lower, width, n = problem.roi.lower, problem.roi.width, problem.dim
    radius = 0.5 / min(seed_grid_density, int(MAX_GRID_NODES ** (1.0 / n)))
    if problem.axis_functions is not None:
        per_axis = []
        for i, g in enumerate(problem.axis_functions):
            seeds1 = _grid_seeds(g, lower[i:i + 1], width[i:i + 1], 1,
                                 max(seed_grid_density, 200))
            g1 = lambda z, g=g: g(z[..., 0])
            opt1 = _refine_all(g1, seeds1, lower[i:i + 1], width[i:i + 1], radius)
            per_axis.append(sorted(float(x[0]) for x, _ in opt1))
        seeds = np.array(list(itertools.product(*per_axis)))
    elif n <= 4:
        seeds = _grid_seeds(problem.function, lower, width, n, seed_grid_density)
    else:
        seeds = _sample_seeds(problem.function, lower, width, n, sample_size,
                              np.random.default_rng(seed))
    found = _refine_all(problem.function, seeds, lower, width, radius)
    if len(found) != problem.num_local:
        raise RegistryVerificationError(
            f"{problem.name}: oracle found {len(found)} local minima, "
            f"expected {problem.num_local}")
    found.sort(key=lambda t: (t[1], tuple(t[0])))
    positions = np.array([x for x, _ in found])
    values = np.array([float(problem.function(lower + x * width)) for x in positions])
    return OptimaRegistry(positions, values)


# ---------------------------------------------------------------------------
# registry file


def _registry_path() -> Path:
    return Path(str(resources.files("multilocal") / "data" / REGISTRY_FILE))


def format_registry(registries: dict[str, OptimaRegistry], notes=()) -> str:
    lines = [
        "# Known local minima of the testbed problems.",
        "# Columns: problem, normalized coordinates (one per dimension), objective value.",
        "# Generated by multilocal.problems.build_registry.",
    ]
    lines += [f"# NOTE: {note}" for note in notes]
    for name, reg in registries.items():
        for x, v in zip(reg.positions, reg.values):
            coords = " ".join(f"{c:.17g}" for c in x)
            lines.append(f"{name} {coords} {v:.17g}")
    return "\n".join(lines) + "\n"


def parse_registry(text: str) -> dict[str, OptimaRegistry]:
    rows: dict[str, list] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, *numbers = line.split()
        rows.setdefault(name, []).append([float(t) for t in numbers])
    out = {}
    for name, data in rows.items():
        arr = np.array(data)
        out[name] = OptimaRegistry(arr[:, :-1], arr[:, -1])
    return out


def registry_notes() -> list[str]:
    notes = []
    for spec in _definitions():
        if spec.num_local != spec.reported_num_local:
            notes.append(
                f"{spec.name}: the source table lists {spec.reported_num_local} local optima, "
                f"the oracle finds {spec.num_local}; the registry keeps the oracle's set")
    return notes


def load_registry(path=None) -> dict[str, OptimaRegistry]:
    path = Path(path) if path is not None else _registry_path()
    if not path.exists():
        return {}
    return parse_registry(path.read_text())


def write_registry(path=None, seed_grid_density: int = 200) -> dict[str, OptimaRegistry]:
    """Rebuild the registry for every problem and write the data file."""
    registries = {spec.name: build_registry(spec, seed_grid_density) for spec in _definitions()}
    path = Path(path) if path is not None else _registry_path()
    path.write_text(format_registry(registries, registry_notes()))
    problem_suite.cache_clear()
    return registries
