"""
Topographical selection versus nearest-better clustering
========================================================

A sample of three tight clusters on a plain slope has exactly one
optimum, at the origin. Nearest-better clustering cuts the long links
between clusters and keeps many points; topographical selection only
keeps points better than all of their k nearest neighbors.
"""

import numpy as np

from multilocal import basin
from multilocal.demo import clustered_slope_sample, compare_selections, plot_nbc_demo

counts = np.array([[len(s) for s in compare_selections(*clustered_slope_sample(
    np.random.default_rng(seed)))] for seed in range(50)])
print("mean selected: nbc %.2f, ts %.2f" % tuple(counts.mean(axis=0)))

points, values = clustered_slope_sample(np.random.default_rng(1))
plot_nbc_demo(points, values, "nbc_vs_ts.svg")

# on a two-basin landscape both agree
rng = np.random.default_rng(3)
pts = rng.random((200, 2))
vals = np.minimum(((pts - 0.2) ** 2).sum(1), ((pts - 0.8) ** 2).sum(1))
k = basin.ts_k(2, 200)
print("k =", k)
print("ts:", basin.topographical_selection(pts, vals, k))
print("nbc:", basin.nearest_better_clustering(pts, vals))
