import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from multilocal.sampling import (
    maximin_reconstruction, min_pairwise_distance, mmlhs, random_lhs, uniform_sample,
)
from multilocal.space import nn_dist


def is_latin(points):
    N = len(points)
    return all(sorted(np.floor(N * points[:, d]).astype(int)) == list(range(N))
               for d in range(points.shape[1]))


def test_uniform_sample_shape_and_determinism():
    a = uniform_sample(1, 2, np.random.default_rng(1))
    assert a.shape == (1, 2) and np.all((a >= 0) & (a <= 1))
    b = uniform_sample(50, 3, np.random.default_rng(4))
    assert np.array_equal(b, uniform_sample(50, 3, np.random.default_rng(4)))
    big = uniform_sample(100_000, 2, np.random.default_rng(0))
    assert np.all(np.abs(big.mean(axis=0) - 0.5) < 0.01)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_mmlhs_is_latin(N, n, seed):
    design = mmlhs(N, n, np.random.default_rng(seed))
    assert design.shape == (N, n)
    assert is_latin(design)


def test_mmlhs_beats_plain_lhs():
    plain, greedy = [], []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        greedy.append(min_pairwise_distance(mmlhs(50, 2, rng)))
        plain.append(min_pairwise_distance(random_lhs(50, 2, rng)))
    assert np.median(greedy) > np.median(plain)
    # one-sided sign test: P(X >= 61 | n = 100, p = 0.5) < 0.05
    assert sum(g > p for g, p in zip(greedy, plain)) >= 59


def test_maximin_reconstruction_contract():
    rng = np.random.default_rng(2)
    x = maximin_reconstruction([[0.5]], 1, rng, candidates=1000)
    assert min(abs(x[0]), abs(1 - x[0])) < 0.05
    existing = rng.random((20, 3))
    best, cand, dist = maximin_reconstruction(existing, 3, np.random.default_rng(9),
                                              return_candidates=True)
    assert nn_dist(best, existing) >= dist.max() - 1e-15
    assert np.array_equal(best, maximin_reconstruction(existing, 3, np.random.default_rng(9)))
