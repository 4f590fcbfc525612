"""Acceptance checks at full scale.

Each test prints one PASS/FAIL line (collected again in the terminal
summary). Budget-500 runs are shared between tests through a per-session
cache. Setting ``MULTILOCAL_TRACE_CACHE`` to a directory also keeps the
traces on disk between sessions; runtimes are then read back from the
cache rather than measured.
"""

import json
import math
import os
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from multilocal import basin, bench, metrics, surrogate
from multilocal.demo import clustered_slope_sample
from multilocal.ego import expected_improvement
from multilocal.space import nn_dist

BUDGET = 500
SEEDS = 10

pytestmark = pytest.mark.acceptance


# ---------------------------------------------------------------------------
# shared budget-500 runs


def _cache_dir():
    path = os.environ.get("MULTILOCAL_TRACE_CACHE")
    return Path(path) if path else None


@lru_cache(maxsize=None)
def _run(problem, algorithm, rep):
    """Trace and elapsed seconds of one replication at the full budget."""
    cache = _cache_dir()
    if cache is not None:
        stem = cache / f"{problem}-{algorithm}-{rep}"
        csv_path, meta = stem.with_suffix(".csv"), stem.with_suffix(".json")
        if csv_path.exists() and meta.exists():
            (trace,) = bench.parse_csv(csv_path)
            return trace, json.loads(meta.read_text())["seconds"]
    t0 = time.perf_counter()
    trace = bench.run_algorithm(algorithm, problem, BUDGET, seed=rep, replication=rep)
    seconds = time.perf_counter() - t0
    if cache is not None and not trace.failed:
        cache.mkdir(parents=True, exist_ok=True)
        bench.emit_csv([trace], csv_path)
        meta.write_text(json.dumps({"seconds": seconds}))
    return trace, seconds


def runs(problem, algorithm, reps=SEEDS):
    return [_run(problem, algorithm, r)[0] for r in range(reps)]


def elapsed(problem, algorithm, reps=SEEDS):
    return sum(_run(problem, algorithm, r)[1] for r in range(reps))


def final(traces, metric):
    return np.array([getattr(t.records[-1], metric) for t in traces])


# ---------------------------------------------------------------------------
# brute-force references


def ts_reference(points, values, k):
    N = len(values)
    out = set()
    for i in range(N):
        order = sorted(range(N), key=lambda j: (sum((a - b) ** 2 for a, b in
                                                    zip(points[i], points[j])), j))
        for j in [j for j in order if j != i][:k]:
            if values[j] < values[i]:
                out.add(i)
            elif values[i] < values[j]:
                out.add(j)
    return [i for i in range(N) if i not in out]


def nn_reference(x, points):
    return min(math.dist(x, p) for p in points)


def pr_reference(P, X, r=0.01):
    return sum(any(math.dist(x, p) <= r for p in P) for x in X) / len(X)


def ahd_reference(P, X):
    gd = sum(nn_reference(p, X) for p in P) / len(P)
    igd = sum(nn_reference(x, P) for x in X) / len(X)
    return max(gd, igd)


def close(a, b, rel=1e-12):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


# ---------------------------------------------------------------------------


def test_oracle_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    mismatches = []
    for case in range(200):
        n = int(rng.integers(1, 5))
        N = int(rng.integers(2, 301))
        pts = rng.random((N, n))
        vals = rng.random(N)
        if case % 4 == 0:
            vals = np.round(vals, 1)  # exercise equal values
        k = int(rng.integers(1, min(N - 1, 30) + 1))
        if list(basin.topographical_selection(pts, vals, k)) != ts_reference(
                pts.tolist(), vals.tolist(), k):
            mismatches.append(("ts", case))
        X = rng.random((int(rng.integers(1, 50)), n))
        P = pts[: int(rng.integers(1, N + 1))].copy()
        m = min(len(X), len(P))
        P[: m // 2] = X[: m // 2] + rng.uniform(-0.009, 0.009, (m // 2, n)) / math.sqrt(n)
        if metrics.peak_ratio(P, X) != pr_reference(P.tolist(), X.tolist()):
            mismatches.append(("pr", case))
        if not close(metrics.ahd(P, X), ahd_reference(P.tolist(), X.tolist())):
            mismatches.append(("ahd", case))
        x = rng.random(n)
        if not close(nn_dist(x, pts), nn_reference(x.tolist(), pts.tolist())):
            mismatches.append(("nn", case))
    seconds = time.perf_counter() - t0
    ok = not mismatches and seconds < 60
    report("oracle equivalence", ok,
           f"{len(mismatches)} mismatches on 200 instances, {seconds:.1f} s (limit 60 s)")
    assert ok, mismatches[:10]


def test_kriging_property_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    failures = []
    grid_lt = np.linspace(*surrogate.LOG_THETA_BOUNDS, 50)
    grid_p = np.linspace(*surrogate.POWER_BOUNDS, 50)
    cell_lt, cell_p = grid_lt[1] - grid_lt[0], grid_p[1] - grid_p[0]
    near_argmax = 0
    for case in range(50):
        N = int(rng.integers(5, 41))
        n = int(rng.integers(1, 4))
        X = rng.random((N, n))
        y = np.sin(5 * X @ rng.uniform(0.5, 2, n)) + 0.5 * rng.standard_normal(N)
        model = surrogate.fit(X, y, rng)
        f, s = surrogate.predict(model, X)
        if np.max(np.abs(f - y)) > 1e-6 * np.ptp(y):
            failures.append(("interpolation", case))
        q = rng.random((200, n))
        fq, sq = surrogate.predict(model, q)
        if np.any(sq < 0) or not np.all(np.isfinite(sq)):
            failures.append(("s_hat", case))
        far_f, far_s = surrogate.predict(model, np.full((1, n), 1e8))
        if abs(far_f[0] - model.mu_hat) > 1e-6 or not close(
                far_s[0] ** 2, model.sigma2_hat * (1 + 1 / model.one_r_one), 1e-6):
            failures.append(("mean reversion", case))
        c = float(rng.uniform(-100, 100))
        shifted = surrogate.model_with_params(X, y + c, model.params)
        f2, s2 = surrogate.predict(shifted, q)
        scale = max(1.0, float(np.max(np.abs(fq))))
        if (np.max(np.abs(f2 - c - fq)) > 1e-9 * (scale + abs(c))
                or np.max(np.abs(s2 - sq)) > 1e-10 * max(1.0, float(np.max(sq)))):
            failures.append(("location", case))
        # one-dimensional likelihood against a 50 x 50 grid
        X1 = rng.random((N, 1))
        y1 = np.sin(8 * X1[:, 0]) + 0.3 * rng.standard_normal(N)
        grid = np.array([[surrogate.concentrated_log_likelihood(
            surrogate.KrigingParams([a], b), X1, y1) for b in grid_p] for a in grid_lt])
        i, j = np.unravel_index(np.argmax(grid), grid.shape)
        m1 = surrogate.fit(X1, y1, rng)
        in_cell = (abs(m1.params.log_theta[0] - grid_lt[i]) <= cell_lt
                   and abs(m1.params.p - grid_p[j]) <= cell_p)
        near_argmax += in_cell
        if not in_cell and m1.log_likelihood < grid.max():
            failures.append(("likelihood grid", case))
    seconds = time.perf_counter() - t0
    ok = not failures and seconds < 300
    report("kriging properties", ok,
           f"{len(failures)} failures on 50 sets ({near_argmax}/50 fits within one grid cell of "
           f"the grid argmax, the rest at least as likely), {seconds:.1f} s (limit 300 s)")
    assert ok, failures


def test_ei_against_monte_carlo(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    bad = []
    worst = 0.0
    for case in range(100):
        y_best = float(rng.normal())
        if case % 10 == 0:
            s_hat = 0.0
            f_hat = y_best + float(rng.normal())
        else:
            # keep y_best within three standard errors of f_hat, where a
            # million samples resolve EI to a few parts in a thousand
            s_hat = float(rng.uniform(0.01, 3))
            f_hat = y_best - s_hat * float(rng.uniform(-3, 3))
        ei = expected_improvement(f_hat, s_hat, y_best)
        samples = np.maximum(0.0, y_best - (f_hat + s_hat * rng.standard_normal(1_000_000)))
        if s_hat == 0.0:
            if ei != max(0.0, y_best - f_hat) or not np.all(samples == ei):
                bad.append(case)
            continue
        z = (ei - samples.mean()) / (samples.std(ddof=1) / 1000.0)
        worst = max(worst, abs(z))
        if abs(z) > 3:
            bad.append(case)
    seconds = time.perf_counter() - t0
    ok = not bad and seconds < 60
    report("EI vs Monte Carlo", ok,
           f"{100 - len(bad)}/100 triples within 3 SE (largest |z| {worst:.2f}; "
           f"s_hat = 0 cases exact), "
           f"{seconds:.1f} s (limit 60 s)")
    assert ok, bad


def test_basin_count(report):
    branin = runs("branin", "ego_c2")
    shekel = runs("shekel5", "ego_c2")
    seconds = elapsed("branin", "ego_c2") + elapsed("shekel5", "ego_c2")
    n_branin = final(branin, "n_selected")
    n_shekel = final(shekel, "n_selected")
    hits_b = int(np.sum(n_branin == 3))
    hits_s = int(np.sum(n_shekel == 5))
    ok = hits_b >= 7 and hits_s >= 5 and seconds < 7200
    report("basin count", ok,
           f"branin |P|=3 in {hits_b}/10 (need 7, sizes {n_branin.tolist()}), "
           f"shekel5 |P|=5 in {hits_s}/10 (need 5, sizes {n_shekel.tolist()}), "
           f"20 runs in {seconds / 60:.1f} min (limit 120)")
    assert ok


def test_peak_ratio_ordering(report):
    lines = []
    ok = True
    for problem in ("branin", "six_hump_camelback"):
        reps = SEEDS
        means = {a: final(runs(problem, a, reps), "peak_ratio").mean()
                 for a in ("ego_c2", "mmlhs", "restart_cmaes")}
        if means["ego_c2"] in (means["mmlhs"], means["restart_cmaes"]):
            reps = 25
            means = {a: final(runs(problem, a, reps), "peak_ratio").mean() for a in means}
        good = means["ego_c2"] > means["mmlhs"] and means["ego_c2"] > means["restart_cmaes"]
        ok &= good
        lines.append(f"{problem} ({reps} seeds) ego_c2 {means['ego_c2']:.3f}, "
                     f"mmlhs {means['mmlhs']:.3f}, restart_cmaes {means['restart_cmaes']:.3f}")
    report("peak ratio ordering", ok, "; ".join(lines))
    assert ok


def test_global_optimization_ordering(report):
    lines = []
    wins = []
    for problem in ("shekel10", "hartman3", "goldstein_price"):
        cma = final(runs(problem, "restart_cmaes"), "f_delta").mean()
        ego = final(runs(problem, "ego_c2"), "f_delta").mean()
        wins.append(cma < ego)
        lines.append(f"{problem} cma {cma:.3g} vs ego {ego:.3g}")
    ok = any(wins)
    report("global optimization ordering", ok,
           f"restart CMA-ES better on {sum(wins)}/3 ({'; '.join(lines)})")
    assert ok


def test_initial_design_insensitivity(report):
    a = bench.aggregate(runs("branin", "ego_c2"), "peak_ratio")
    b = bench.aggregate(runs("branin", "ego_c10"), "peak_ratio")
    lo = max(a.ci_low[-1], b.ci_low[-1])
    hi = min(a.ci_high[-1], b.ci_high[-1])
    ok = lo <= hi
    report("initial design insensitivity", ok,
           f"c=2 [{a.ci_low[-1]:.3f}, {a.ci_high[-1]:.3f}], "
           f"c=10 [{b.ci_low[-1]:.3f}, {b.ci_high[-1]:.3f}]")
    assert ok


def test_nbc_overcounts_on_clustered_slope(report):
    t0 = time.perf_counter()
    nbc, ts = [], []
    k = basin.ts_k(2, 100)
    for seed in range(50):
        pts, vals = clustered_slope_sample(np.random.default_rng(seed), size=100, clusters=3,
                                           sigma=0.05)
        nbc.append(len(basin.nearest_better_clustering(pts, vals, 2.0)))
        ts.append(len(basin.topographical_selection(pts, vals, k)))
    seconds = time.perf_counter() - t0
    single = float(np.mean(np.array(ts) == 1))
    ok = np.mean(nbc) > np.mean(ts) and single >= 0.5 and seconds < 60
    report("NBC over-counting", ok,
           f"mean |NBC| {np.mean(nbc):.2f} vs mean |TS| {np.mean(ts):.2f}; "
           f"TS selects exactly one in {100 * single:.0f}% of seeds (need 50%), {seconds:.1f} s")
    assert ok


def _csv_without_time(traces, path):
    bench.emit_csv(traces, path)
    return [line.rsplit(",", 1)[0] for line in path.read_text().splitlines()]


def test_determinism(report, tmp_path):
    config = bench.RunConfig(["branin"], list(bench.ALGORITHMS), budget=BUDGET,
                             replications=1, base_seed=0)
    again = bench.run_matrix(config)
    same = []
    for trace in again:
        first, _ = _run("branin", trace.algorithm, 0)
        a = _csv_without_time([first], tmp_path / "a.csv")
        b = _csv_without_time([trace], tmp_path / "b.csv")
        same.append(a == b)
    ok = all(same)
    report("determinism", ok,
           f"{sum(same)}/{len(same)} branin cells reproduce their trace CSV byte for byte "
           f"(time column excluded)")
    assert ok


def test_budget_accounting(report):
    cells = [("branin", "ego_c2"), ("shekel5", "ego_c2"), ("branin", "mmlhs"),
             ("branin", "restart_cmaes"), ("six_hump_camelback", "ego_c2"),
             ("six_hump_camelback", "mmlhs"), ("six_hump_camelback", "restart_cmaes"),
             ("branin", "ego_c10")]
    cells += [(p, a) for p in ("shekel10", "hartman3", "goldstein_price")
              for a in ("ego_c2", "restart_cmaes")]
    checked = bad = 0
    for problem, algorithm in cells:
        for t in runs(problem, algorithm):
            checked += 1
            idx = [r.eval_index for r in t.records]
            if t.failed or idx[-1] != BUDGET or len(idx) != BUDGET or idx != sorted(set(idx)):
                bad += 1
    ok = bad == 0
    report("budget accounting", ok, f"{checked - bad}/{checked} traces end at {BUDGET} "
                                    f"with {BUDGET} records")
    assert ok
