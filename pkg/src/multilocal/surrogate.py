"""Ordinary Kriging with a power-exponential correlation kernel.

The correlation between two points is
``exp(-sum_l theta_l * |a_l - b_l| ** p)`` with one shared exponent ``p``.
Hyperparameters are fitted by maximizing the concentrated log-likelihood,
in which the process mean and variance are profiled out in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpotrf

from . import cma_constants, cmaes

LOG_THETA_BOUNDS = (-2.0, 2.0)
POWER_BOUNDS = (0.5, 2.0)
#: Diagonal jitter tried in order until the Cholesky factorization succeeds.
JITTER_LADDER = (1e-10, 1e-8, 1e-6)
INITIAL_DRAWS = 50
LIKELIHOOD_BUDGET = 2000
# Log-likelihood differences below this are irrelevant for the model.
LIKELIHOOD_TOL = 0.1
# Step size when refining the previous fit instead of a random draw.
WARM_SIGMA0 = 0.02


class IllConditionedModelError(RuntimeError):
    """The correlation matrix could not be factorized even with jitter."""


@dataclass(frozen=True)
class KrigingParams:
    log_theta: np.ndarray
    p: float

    def __post_init__(self):
        object.__setattr__(self, "log_theta", np.atleast_1d(np.asarray(self.log_theta, float)))

    @property
    def theta(self) -> np.ndarray:
        return 10.0 ** self.log_theta

    def in_bounds(self) -> bool:
        lo, hi = LOG_THETA_BOUNDS
        return bool(np.all(self.log_theta >= lo) and np.all(self.log_theta <= hi)
                    and POWER_BOUNDS[0] <= self.p <= POWER_BOUNDS[1])

    @classmethod
    def from_unit(cls, u) -> KrigingParams:
        """Map a point of [0, 1]^(n+1) onto the parameter box."""
        u = np.asarray(u, dtype=float)
        lo, hi = LOG_THETA_BOUNDS
        return cls(lo + (hi - lo) * u[:-1], POWER_BOUNDS[0] + (POWER_BOUNDS[1] - POWER_BOUNDS[0]) * u[-1])

    def to_unit(self) -> np.ndarray:
        lo, hi = LOG_THETA_BOUNDS
        return np.append((self.log_theta - lo) / (hi - lo),
                         (self.p - POWER_BOUNDS[0]) / (POWER_BOUNDS[1] - POWER_BOUNDS[0]))


def corr(a, b, params: KrigingParams) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.exp(-np.sum(params.theta * np.abs(a - b) ** params.p)))


def correlation_matrix(A, B, params: KrigingParams) -> np.ndarray:
    """Correlations between the rows of ``A`` and ``B``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    dist = np.zeros((A.shape[0], B.shape[0]))
    for l, theta in enumerate(params.theta):
        dist += theta * np.abs(A[:, l, None] - B[None, :, l]) ** params.p
    return np.exp(-dist)


class _Likelihood:
    """Concentrated log-likelihood for a fixed training set.

    Log-distances of all point pairs are cached so that each evaluation
    costs a few exponentials per pair plus one Cholesky factorization.
    The correlations are written into the upper triangle of a C-ordered
    buffer, whose transpose is the lower triangle LAPACK factorizes in
    place without a copy.
    """

    def __init__(self, X, y):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.N, self.n = self.X.shape
        if self.N < 2:
            raise ValueError("need at least two training points")
        rows, cols = np.triu_indices(self.N, 1)
        with np.errstate(divide="ignore"):
            self.log_diff = np.log(np.abs(self.X[rows] - self.X[cols])).T.copy()
        # p = 2 is the usual optimum (on the box edge), so keep squares ready
        self.sq_diff = np.exp(2.0 * self.log_diff)
        self._upper = rows * self.N + cols
        self._scratch = np.empty_like(self.log_diff)
        self.ones_y = np.column_stack([np.ones(self.N), self.y])
        self._buffer = np.empty((self.N, self.N))

    def condensed(self, params: KrigingParams) -> np.ndarray:
        """Correlations of all pairs i < j in row-major order."""
        if params.p == 2.0:
            s = params.theta @ self.sq_diff
        else:
            powers = np.multiply(self.log_diff, params.p, out=self._scratch)
            s = params.theta @ np.exp(powers, out=powers)
        return np.exp(-s, out=s)

    def _fill(self, c, eps):
        R = self._buffer
        R.ravel()[self._upper] = c
        np.fill_diagonal(R, 1.0 + eps)
        return R

    def correlation(self, params: KrigingParams) -> np.ndarray:
        """Full symmetric correlation matrix (without jitter)."""
        R = self._fill(self.condensed(params), 0.0).copy()
        return np.triu(R) + np.triu(R, 1).T

    def factorize(self, params: KrigingParams):
        """Lower Cholesky factor of R + eps I and the eps that worked.

        The factor shares memory with an internal buffer and is only valid
        until the next call; only its lower triangle is meaningful.
        """
        c = self.condensed(params)
        for eps in JITTER_LADDER:
            L, info = dpotrf(self._fill(c, eps).T, lower=1, clean=0, overwrite_a=1)
            if info == 0:
                return L, eps
        raise IllConditionedModelError(f"correlation matrix not positive definite for {params}")

    def evaluate(self, params: KrigingParams, full: bool = False):
        L, eps = self.factorize(params)
        W = solve_triangular(L, self.ones_y, lower=True, check_finite=False)
        w, z = W[:, 0], W[:, 1]
        one_r_one = w @ w
        mu = (w @ z) / one_r_one
        resid = z - mu * w
        sigma2 = max((resid @ resid) / self.N, np.finfo(float).tiny)
        loglik = -0.5 * self.N * np.log(sigma2) - np.sum(np.log(np.diag(L)))
        if not full:
            return float(loglik)
        return loglik, L, eps, mu, sigma2, w, one_r_one

    def safe(self, params: KrigingParams) -> float:
        try:
            return self.evaluate(params)
        except IllConditionedModelError:
            return -np.inf


def concentrated_log_likelihood(params: KrigingParams, X, y) -> float:
    """``-(N/2) ln sigma2 - (1/2) ln det R``; larger is better."""
    return _Likelihood(X, y).evaluate(params)


@dataclass(frozen=True)
class KrigingModel:
    params: KrigingParams
    mu_hat: float
    sigma2_hat: float
    chol: np.ndarray
    jitter: float
    X: np.ndarray
    y: np.ndarray
    log_likelihood: float
    alpha: np.ndarray
    w: np.ndarray
    one_r_one: float

    def predict(self, X):
        return predict(self, X)


def _build_model(lik: _Likelihood, params: KrigingParams) -> KrigingModel:
    loglik, L, eps, mu, sigma2, w, one_r_one = lik.evaluate(params, full=True)
    L = np.tril(L)
    z = solve_triangular(L, lik.y - mu, lower=True, check_finite=False)
    alpha = solve_triangular(L, z, lower=True, trans="T", check_finite=False)
    X = lik.X.copy()
    y = lik.y.copy()
    for arr in (L, X, y, alpha, w):
        arr.flags.writeable = False
    return KrigingModel(params, float(mu), float(sigma2), L, eps, X, y, float(loglik),
                        alpha, w, float(one_r_one))


def model_with_params(X, y, params: KrigingParams) -> KrigingModel:
    """Kriging model at fixed hyperparameters (no likelihood optimization)."""
    return _build_model(_Likelihood(X, y), params)


def fit(X, y, rng: np.random.Generator, budget: int = LIKELIHOOD_BUDGET,
        initial_draws: int = INITIAL_DRAWS, return_draws: bool = False,
        previous: KrigingParams | None = None, tol: float = LIKELIHOOD_TOL):
    """Maximum-likelihood Kriging fit.

    The best of ``initial_draws`` uniform parameter vectors seeds a CMA-ES
    run over the parameter box (scaled to the unit cube), limited to
    ``budget`` likelihood evaluations and stopped once the log-likelihood
    stalls within ``tol``. ``previous`` (e.g. the last fit on a smaller
    archive) competes with the draws as a start point; if it wins, the
    search starts with the small step ``WARM_SIGMA0``. The returned model
    carries the best parameters seen, so its likelihood is never below any
    start candidate.
    """
    lik = _Likelihood(X, y)
    dim = lik.n + 1
    draws = rng.random((initial_draws, dim))
    values = np.array([lik.safe(KrigingParams.from_unit(u)) for u in draws])
    candidates, scores = draws, values
    if previous is not None:
        candidates = np.vstack([draws, previous.to_unit()])
        scores = np.append(values, lik.safe(previous))
    if not np.isfinite(scores).any():
        raise IllConditionedModelError("no initial parameter draw gave a usable model")
    best = int(np.argmax(scores))
    start = candidates[best]
    sigma0 = WARM_SIGMA0 if best == initial_draws else cma_constants.SIGMA0

    def cost(batch):
        return np.array([-lik.safe(KrigingParams.from_unit(u)) for u in batch])

    best_u, _, _, _ = cmaes.minimize(cost, start, rng, max_evals=budget,
                                     start_value=-float(scores[best]),
                                     tolfun=tol, tolfunhist=tol, sigma0=sigma0)
    model = _build_model(lik, KrigingParams.from_unit(best_u))
    if return_draws:
        return model, [KrigingParams.from_unit(u) for u in draws], values
    return model


def predict(model: KrigingModel, X):
    """Kriging mean and standard error at the rows of ``X``.

    Returns arrays ``(f_hat, s_hat)`` with one entry per row.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r = correlation_matrix(X, model.X, model.params)
    f_hat = model.mu_hat + r @ model.alpha
    v = solve_triangular(model.chol, r.T, lower=True, check_finite=False)
    r_inv_r = np.einsum("ij,ij->j", v, v)
    one_inv_r = model.w @ v
    s2 = model.sigma2_hat * (1.0 - r_inv_r + (1.0 - one_inv_r) ** 2 / model.one_r_one)
    return f_hat, np.sqrt(np.maximum(s2, 0.0))
