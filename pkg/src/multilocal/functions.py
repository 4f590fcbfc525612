"""Raw test functions in problem units.

Every function takes an array of shape ``(..., n)`` and returns shape
``(...)``. Only analytic numpy operations are used, so the functions also
accept complex input, which the registry oracle uses for complex-step
derivatives.
"""

import numpy as np

SHEKEL_A = np.array([
    [4.0, 4.0, 4.0, 4.0],
    [1.0, 1.0, 1.0, 1.0],
    [8.0, 8.0, 8.0, 8.0],
    [6.0, 6.0, 6.0, 6.0],
    [3.0, 7.0, 3.0, 7.0],
    [2.0, 9.0, 2.0, 9.0],
    [5.0, 5.0, 3.0, 3.0],
    [8.0, 1.0, 8.0, 1.0],
    [6.0, 2.0, 6.0, 2.0],
    [7.0, 3.6, 7.0, 3.6],
])
SHEKEL_C = np.array([0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5])

HARTMAN_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
HARTMAN3_A = np.array([
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
])
HARTMAN3_P = np.array([
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.03815, 0.5743, 0.8828],
])
HARTMAN6_A = np.array([
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
])
HARTMAN6_P = np.array([
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
])

RASTRIGIN_K = {
    4: (2, 2, 3, 4),
    8: (1, 2, 1, 2, 1, 3, 1, 4),
}


def shekel(x, m):
    x = np.asarray(x)
    diff = x[..., None, :] - SHEKEL_A[:m]
    return -np.sum(1.0 / (np.sum(diff * diff, axis=-1) + SHEKEL_C[:m]), axis=-1)


def hartman(x, a, p):
    x = np.asarray(x)
    diff = x[..., None, :] - p
    return -np.sum(HARTMAN_ALPHA * np.exp(-np.sum(a * diff * diff, axis=-1)), axis=-1)


def hartman3(x):
    return hartman(x, HARTMAN3_A, HARTMAN3_P)


def hartman6(x):
    return hartman(x, HARTMAN6_A, HARTMAN6_P)


def goldstein_price(x):
    x = np.asarray(x)
    a, b = x[..., 0], x[..., 1]
    part1 = 1.0 + (a + b + 1.0) ** 2 * (
        19.0 - 14.0 * a + 3.0 * a ** 2 - 14.0 * b + 6.0 * a * b + 3.0 * b ** 2)
    part2 = 30.0 + (2.0 * a - 3.0 * b) ** 2 * (
        18.0 - 32.0 * a + 12.0 * a ** 2 + 48.0 * b - 36.0 * a * b + 27.0 * b ** 2)
    return part1 * part2


def branin(x):
    x = np.asarray(x)
    a, b = x[..., 0], x[..., 1]
    quad = b - 5.1 / (4.0 * np.pi ** 2) * a ** 2 + 5.0 / np.pi * a - 6.0
    return quad ** 2 + 10.0 * (1.0 - 1.0 / (8.0 * np.pi)) * np.cos(a) + 10.0


def vincent(x):
    """Vincent function, negated so that its 6 optima per axis are minima."""
    x = np.asarray(x)
    return -np.mean(np.sin(10.0 * np.log(x)), axis=-1)


def modified_rastrigin(x, k):
    """Rastrigin variant with ``k[i]`` optima along axis i and a tilt
    ``2 k[i] x[i]**2`` that leaves exactly one global optimum."""
    x = np.asarray(x)
    k = np.asarray(k, dtype=float)
    return np.sum(10.0 + 10.0 * np.cos(2.0 * np.pi * k * x) + 2.0 * k * x ** 2, axis=-1)


def six_hump_camelback(x):
    x = np.asarray(x)
    a, b = x[..., 0], x[..., 1]
    return (4.0 - 2.1 * a ** 2 + a ** 4 / 3.0) * a ** 2 + a * b + (-4.0 + 4.0 * b ** 2) * b ** 2
