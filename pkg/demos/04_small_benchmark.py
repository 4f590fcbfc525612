"""
A small benchmark
=================

Three algorithms on Branin with a short budget, aggregated and plotted.
The full experiment is the same call with all problems, the four
algorithms, a budget of 500 and 75 replications; expect it to run for
days on one core.
"""

from multilocal import bench

config = bench.RunConfig(problems=["branin"], algorithms=["ego_c2", "restart_cmaes", "mmlhs"],
                         budget=60, replications=3, metric_stride=5)
traces = bench.run_matrix(config)
bench.emit_csv(traces, "small_traces.csv")

aggregates = bench.aggregate_all(traces)
for a in aggregates:
    if a.metric == "peak_ratio":
        print(f"{a.algorithm:14s} final peak ratio {a.mean[-1]:.3f} "
              f"[{a.ci_low[-1]:.3f}, {a.ci_high[-1]:.3f}]")
bench.emit_plot(aggregates, "f_delta", "small_f_delta.svg")
bench.emit_plot(aggregates, "peak_ratio", "small_peak_ratio.svg")
