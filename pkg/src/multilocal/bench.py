"""Benchmark harness: run matrix, anytime traces, aggregation and output files.

Every cell of the run matrix (problem, algorithm, replication) runs with its
own random stream. The generator seed of a cell is derived from its problem
and algorithm names and from ``base_seed + replication`` (see
:func:`cell_seed`), so adding problems or algorithms leaves all other
cells untouched.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import basin, cmaes, ego, metrics
from .metrics import MetricRecord
from .problems import ProblemSpec, get_problem, problem_names
from .sampling import mmlhs
from .space import Archive

log = logging.getLogger(__name__)

ALGORITHMS = ("ego_c2", "ego_c10", "restart_cmaes", "mmlhs")
METRICS = ("f_delta", "peak_ratio", "ahd", "n_selected", "wallclock_ms")
TRACE_COLUMNS = ("problem", "algorithm", "replication", "seed", "eval_index",
                 "f_delta", "peak_ratio", "ahd", "n_selected", "wallclock_ms")
AGGREGATE_COLUMNS = ("problem", "algorithm", "metric", "eval_index",
                     "mean", "ci_low", "ci_high", "n_reps")
Z_95 = 1.96
LOG_FLOOR = 1e-12
# cells x evaluations above which a matrix is reported as long-running
LONG_RUN_EVALS = 500_000


class ConfigError(ValueError):
    """Invalid run configuration."""


class TraceIOError(OSError):
    """Reading or writing a result file failed."""


@dataclass(frozen=True)
class RunConfig:
    problems: tuple[str, ...]
    algorithms: tuple[str, ...]
    budget: int = 500
    replications: int = 75
    base_seed: int = 0
    metric_stride: int = 1

    def __post_init__(self):
        object.__setattr__(self, "problems", tuple(self.problems))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        self.validate()

    def validate(self):
        if not self.problems or not self.algorithms:
            raise ConfigError("problems and algorithms must be nonempty")
        known = set(problem_names())
        for name in self.problems:
            if name not in known:
                raise ConfigError(f"unknown problem {name!r}")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
        for key in ("budget", "replications", "metric_stride"):
            value = getattr(self, key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{key} must be a positive integer, got {value!r}")
        if not isinstance(self.base_seed, int) or isinstance(self.base_seed, bool):
            raise ConfigError("base_seed must be an integer")
        for name in self.problems:
            n = get_problem(name).dim
            for alg in self.algorithms:
                if alg.startswith("ego") and self.budget < ego_design_size(alg, n) + 1:
                    raise ConfigError(f"budget {self.budget} leaves no infill points for "
                                      f"{alg} on {name}")

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        missing = {"problems", "algorithms"} - set(data)
        if missing:
            raise ConfigError(f"missing configuration keys: {sorted(missing)}")
        for key in ("problems", "algorithms"):
            if not isinstance(data[key], list) or not all(isinstance(v, str) for v in data[key]):
                raise ConfigError(f"{key} must be a list of names")
        return cls(**data)

    @property
    def cells(self) -> list[tuple[str, str, int]]:
        return [(p, a, r) for p in sorted(self.problems) for a in sorted(self.algorithms)
                for r in range(self.replications)]


def load_config(path) -> RunConfig:
    """Read a JSON run configuration."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise TraceIOError(f"cannot read config {path}: {err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: {err}") from err
    return RunConfig.from_dict(data)


@dataclass(frozen=True)
class RunTrace:
    problem: str
    algorithm: str
    replication: int
    seed: int
    records: tuple[MetricRecord, ...]
    error: str | None = None
    events: tuple = field(default=(), compare=False)

    @property
    def failed(self) -> bool:
        return self.error is not None

    def column(self, metric: str) -> np.ndarray:
        return np.array([getattr(r, metric) for r in self.records], dtype=float)


def ego_design_size(algorithm: str, n: int) -> int:
    return int(algorithm.split("_c")[1]) * n


def cell_seed(problem: str, algorithm: str, seed: int) -> int:
    """Generator seed of one cell, a hash of its problem, algorithm and seed."""
    digest = hashlib.sha256(f"{problem}|{algorithm}|{seed}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


class _Clock:
    """Objective wrapper that counts calls and stamps their completion time."""

    def __init__(self, problem: ProblemSpec, budget: int):
        self.problem = problem
        self.budget = budget
        self.stamps: list[float] = []
        self.start = time.perf_counter()

    def __call__(self, x) -> float:
        if len(self.stamps) >= self.budget:
            raise RuntimeError("evaluation budget exceeded")
        y = self.problem(x)
        self.stamps.append(time.perf_counter() - self.start)
        return y


def _execute(algorithm: str, objective: _Clock, n: int, budget: int,
             rng: np.random.Generator, events: list) -> Archive:
    if algorithm.startswith("ego"):
        c = int(algorithm.split("_c")[1])
        return ego.ego_run(objective, n, c, budget, rng, events=events)
    if algorithm == "restart_cmaes":
        episodes: list = []
        archive = cmaes.restart_cmaes(objective, n, budget, rng, episodes=episodes)
        events.extend(("episode", reason) for reason in episodes)
        return archive
    if algorithm == "mmlhs":
        design = mmlhs(budget, n, rng)
        archive = Archive(n, capacity=budget)
        for x in design:
            archive.append(x, objective(x))
        return archive
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def measured_indices(budget: int, stride: int) -> list[int]:
    """Evaluation indices at which a trace is recorded."""
    return list(range(stride, budget + 1, stride))


def trace_archive(problem: ProblemSpec, points, values, stamps, stride: int = 1):
    """Metric records over the prefixes of an evaluated point sequence.

    The time of a record is the time stamp of its evaluation plus the time
    one basin selection took at that point. Since selection times vary, the
    running maximum is recorded to keep the column nondecreasing.
    """
    optima = problem.optima
    global_value = optima.global_value()
    records = []
    clock = 0.0
    best = np.inf
    for i in measured_indices(len(values), stride):
        best = min(best, float(np.min(values[:i])))
        t0 = time.perf_counter()
        _, P, _ = basin.select_basins(points[:i], values[:i], problem.dim)
        elapsed = time.perf_counter() - t0
        clock = max(clock, stamps[i - 1] + elapsed)
        records.append(MetricRecord(
            eval_index=i,
            f_delta=metrics.f_delta(best, global_value),
            peak_ratio=metrics.peak_ratio(P, optima.positions),
            ahd=metrics.ahd(P, optima.positions),
            n_selected=len(P),
            wallclock_ms=1000.0 * clock,
        ))
    return records


def run_algorithm(algorithm: str, problem: ProblemSpec | str, budget: int, seed: int,
                  metric_stride: int = 1, replication: int = 0) -> RunTrace:
    """Run one algorithm once and record its anytime trace.

    ``seed`` is the cell seed before hashing (``base_seed + replication``).
    Errors inside the algorithm or the metrics do not propagate: the trace
    comes back with ``error`` set and without records.
    """
    if isinstance(problem, str):
        problem = get_problem(problem)
    if budget % metric_stride:
        log.warning("budget %d is not a multiple of the stride %d", budget, metric_stride)
    rng = np.random.default_rng(cell_seed(problem.name, algorithm, seed))
    events: list = []
    objective = _Clock(problem, budget)
    try:
        with threadpool_limits(1):
            archive = _execute(algorithm, objective, problem.dim, budget, rng, events)
            if len(archive) != budget or len(objective.stamps) != budget:
                raise RuntimeError(f"{len(objective.stamps)} evaluations for a budget of {budget}")
            records = trace_archive(problem, archive.points, archive.values,
                                    objective.stamps, metric_stride)
    except Exception as err:  # recorded, never raised
        log.error("%s on %s (seed %d) failed: %r", algorithm, problem.name, seed, err)
        return RunTrace(problem.name, algorithm, replication, seed, (),
                        error=f"{type(err).__name__}: {err}", events=tuple(events))
    return RunTrace(problem.name, algorithm, replication, seed, tuple(records),
                    events=tuple(events))


def _run_cell(args) -> RunTrace:
    problem, algorithm, replication, seed, budget, stride = args
    return run_algorithm(algorithm, problem, budget, seed, stride, replication)


def run_matrix(config: RunConfig, workers: int = 1) -> list[RunTrace]:
    """Run every cell of ``config`` and return traces in canonical order.

    Canonical order is by problem, algorithm, replication. With ``workers``
    above 1 the cells run in separate processes.
    """
    cells = config.cells
    if len(cells) * config.budget > LONG_RUN_EVALS:
        log.warning("%d cells of %d evaluations each: this is a long-running matrix",
                    len(cells), config.budget)
    jobs = [(p, a, r, config.base_seed + r, config.budget, config.metric_stride)
            for p, a, r in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_cell, jobs))
    else:
        traces = [_run_cell(job) for job in jobs]
    return sorted(traces, key=lambda t: (t.problem, t.algorithm, t.replication))


@dataclass(frozen=True)
class Aggregate:
    problem: str
    algorithm: str
    metric: str
    eval_index: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_reps: int

    @property
    def degenerate(self) -> bool:
        """True when a single replication gives no spread estimate."""
        return self.n_reps < 2


def aggregate(traces, metric: str) -> Aggregate:
    """Mean and normal 95 % confidence band of ``metric`` per evaluation index.

    Failed traces are skipped. With a single replication the band collapses
    onto the mean and the result is flagged as :attr:`Aggregate.degenerate`.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    traces = [t for t in traces if not t.failed]
    if not traces:
        raise ValueError("no successful traces to aggregate")
    keys = {(t.problem, t.algorithm) for t in traces}
    if len(keys) != 1:
        raise ValueError(f"traces mix several cells: {sorted(keys)}")
    index = [tuple(r.eval_index for r in t.records) for t in traces]
    if len(set(index)) != 1:
        raise ValueError("traces have different evaluation indices")
    data = np.array([t.column(metric) for t in traces])
    R = len(traces)
    mean = data.mean(axis=0)
    if R > 1:
        half = Z_95 * data.std(axis=0, ddof=1) / math.sqrt(R)
    else:
        log.warning("single replication: confidence band is degenerate")
        half = np.zeros_like(mean)
    problem, algorithm = keys.pop()
    return Aggregate(problem, algorithm, metric, np.array(index[0]), mean,
                     mean - half, mean + half, R)


def aggregate_all(traces, metrics_=METRICS[:-1]) -> list[Aggregate]:
    """Aggregates for every (problem, algorithm) group and metric."""
    groups: dict = {}
    for t in traces:
        if not t.failed:
            groups.setdefault((t.problem, t.algorithm), []).append(t)
    return [aggregate(groups[key], m) for key in sorted(groups) for m in metrics_]


# ---------------------------------------------------------------------------
# files


def _real(x: float) -> str:
    return format(float(x), ".17g")


def format_trace_rows(traces):
    for t in traces:
        for r in t.records:
            yield [t.problem, t.algorithm, str(t.replication), str(t.seed), str(r.eval_index),
                   _real(r.f_delta), _real(r.peak_ratio), _real(r.ahd), str(r.n_selected),
                   _real(r.wallclock_ms)]


def emit_csv(traces, path) -> Path:
    """Write the trace CSV. Identical traces give identical bytes."""
    traces = list(traces)
    if not traces:
        raise ValueError("refusing to write an empty trace list")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            writer.writerows(format_trace_rows(traces))
    except OSError as err:
        raise TraceIOError(f"cannot write {path}: {err}") from err
    return path


def parse_csv(path) -> list[RunTrace]:
    """Read traces back from a trace CSV."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as err:
        raise TraceIOError(f"cannot read {path}: {err}") from err
    if header is None or tuple(header) != TRACE_COLUMNS:
        raise ValueError(f"{path}: not a trace file (header {header!r})")
    grouped: dict = {}
    for row in rows:
        key = (row[0], row[1], int(row[2]), int(row[3]))
        grouped.setdefault(key, []).append(MetricRecord(
            int(row[4]), float(row[5]), float(row[6]), float(row[7]), int(row[8]), float(row[9])))
    return [RunTrace(*key, tuple(records)) for key, records in grouped.items()]


def emit_aggregate_csv(aggregates, path) -> Path:
    aggregates = list(aggregates)
    if not aggregates:
        raise ValueError("refusing to write an empty aggregate list")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(AGGREGATE_COLUMNS)
            for a in aggregates:
                for i, m, lo, hi in zip(a.eval_index, a.mean, a.ci_low, a.ci_high):
                    writer.writerow([a.problem, a.algorithm, a.metric, int(i),
                                     _real(m), _real(lo), _real(hi), a.n_reps])
    except OSError as err:
        raise TraceIOError(f"cannot write {path}: {err}") from err
    return path


def parse_aggregate_csv(path) -> list[Aggregate]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as err:
        raise TraceIOError(f"cannot read {path}: {err}") from err
    if header is None or tuple(header) != AGGREGATE_COLUMNS:
        raise ValueError(f"{path}: not an aggregate file (header {header!r})")
    grouped: dict = {}
    for row in rows:
        grouped.setdefault((row[0], row[1], row[2], int(row[7])), []).append(
            [float(v) for v in row[3:7]])
    out = []
    for (problem, algorithm, metric, reps), data in grouped.items():
        arr = np.array(data)
        out.append(Aggregate(problem, algorithm, metric, arr[:, 0].astype(int),
                             arr[:, 1], arr[:, 2], arr[:, 3], reps))
    return out


def emit_plot(aggregates, metric: str, path, floor: float = LOG_FLOOR) -> Path:
    """Draw one panel per problem with a curve and band per algorithm.

    The format follows the file suffix (SVG or PDF for vector output).
    ``f_delta`` uses a logarithmic axis on which values below ``floor``
    are drawn at ``floor``.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    selected = [a for a in aggregates if a.metric == metric]
    if not selected:
        raise ValueError(f"no aggregates for metric {metric!r}")
    problems = sorted({a.problem for a in selected})
    cols = min(3, len(problems))
    rows = math.ceil(len(problems) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.2 * rows), squeeze=False)
    for ax, problem in zip(axes.flat, problems):
        for a in sorted((a for a in selected if a.problem == problem), key=lambda a: a.algorithm):
            mean, lo, hi = a.mean, a.ci_low, a.ci_high
            if metric == "f_delta":
                mean, lo, hi = (np.maximum(v, floor) for v in (mean, lo, hi))
            line, = ax.plot(a.eval_index, mean, label=a.algorithm, lw=1.2)
            ax.fill_between(a.eval_index, lo, hi, color=line.get_color(), alpha=0.25, lw=0)
        if metric == "f_delta":
            ax.set_yscale("log")
        ax.set_title(problem)
        ax.set_xlabel("evaluations")
        ax.set_ylabel(metric)
    for ax in list(axes.flat)[len(problems):]:
        ax.set_visible(False)
    axes.flat[0].legend(fontsize="small")
    fig.tight_layout()
    path = Path(path)
    try:
        fig.savefig(path)
    except OSError as err:
        raise TraceIOError(f"cannot write {path}: {err}") from err
    finally:
        plt.close(fig)
    return path
