"""
The testbed and its optima registry
===================================

Every problem works on the unit hypercube. The registry lists all local
minimizers in normalized coordinates, which is what peak ratio and the
averaged Hausdorff distance are measured against.
"""

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from multilocal.problems import get_problem, problem_suite

for p in problem_suite():
    reg = p.optima
    print(f"{p.name:20s} n={p.dim}  local={len(reg):3d}  global={p.num_global:3d}"
          f"  f*={reg.global_value():.6g}")

# Branin has three global minimizers with equal value
branin = get_problem("branin")
print(branin.optima.positions)
print([branin(x) for x in branin.optima.positions])

# a contour plot of six-hump camelback with its six minima
camel = get_problem("six_hump_camelback")
g = np.linspace(0, 1, 200)
X, Y = np.meshgrid(g, g)
Z = camel.evaluate_batch(np.stack([X, Y], axis=-1))
fig, ax = plt.subplots(figsize=(5, 4))
ax.contour(X, Y, np.minimum(Z, 3), levels=30, linewidths=0.6)
ax.plot(*camel.optima.positions.T, "r*", ms=10)
ax.set_title("six-hump camelback, normalized")
fig.savefig("testbed_camelback.svg")
