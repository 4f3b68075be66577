import numpy as np
import pytest

from dirnet import FiniteNetwork, MeasuredNetwork


def random_network(rng, n, low=-2.0, high=5.0, dissimilarity=False):
    w = rng.uniform(low, high, size=(n, n))
    if dissimilarity:
        w = rng.uniform(0.5, 5.0, size=(n, n))
        np.fill_diagonal(w, 0.0)
    return FiniteNetwork.from_matrix(w)


def three_component_network(seed=7, within=0.01, jitter=0.2):
    """Eight nodes in components of sizes 2, 3, 3 with dissimilarity weights.

    Within a component every off-diagonal weight is ``within``; between
    components the weight is a per-ordered-pair base value plus a uniform
    jitter in ``[0, jitter)``.
    """
    rng = np.random.default_rng(seed)
    sizes = [2, 3, 3]
    base = np.array([[0.0, 2.0, 3.0], [5.0, 0.0, 1.5], [4.0, 6.0, 0.0]])
    owner = np.repeat(np.arange(3), sizes)
    n = len(owner)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                a, b = owner[i], owner[j]
                w[i, j] = within if a == b else base[a, b] + rng.uniform(0, jitter)
    comps = [tuple(int(i) for i in np.flatnonzero(owner == a)) for a in range(3)]
    return MeasuredNetwork.uniform(FiniteNetwork.from_matrix(w), comps)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
