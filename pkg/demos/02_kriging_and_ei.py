"""
Kriging and expected improvement in one dimension
=================================================

Fit a model to five points of a wiggly function and look at where
expected improvement wants to sample next.
"""

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from multilocal import surrogate
from multilocal.ego import expected_improvement, propose
from multilocal.space import Archive

f = lambda x: np.sin(12 * x) + 2 * (x - 0.6) ** 2
rng = np.random.default_rng(0)
X = np.array([[0.05], [0.3], [0.5], [0.7], [0.95]])
y = f(X[:, 0])

model = surrogate.fit(X, y, rng)
print("log10 theta", model.params.log_theta, "p", model.params.p)
print("mu", model.mu_hat, "sigma2", model.sigma2_hat)

grid = np.linspace(0, 1, 500)[:, None]
mean, se = surrogate.predict(model, grid)
ei = expected_improvement(mean, se, y.min())

archive = Archive(1)
for xi, yi in zip(X, y):
    archive.append(xi, yi)
x_next = propose(model, archive, 1, rng)
print("next point", x_next)

fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
top.plot(grid, f(grid), "k--", lw=0.8, label="f")
top.plot(grid, mean, label="prediction")
top.fill_between(grid[:, 0], mean - 2 * se, mean + 2 * se, alpha=0.2)
top.plot(X, y, "ko")
top.legend()
bottom.plot(grid, ei)
bottom.axvline(x_next[0], color="r")
bottom.set_ylabel("EI")
fig.savefig("kriging_ei.svg")
