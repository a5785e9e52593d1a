import itertools
from fractions import Fraction

import numpy as np
import pytest

from lipext.graphs import WeightedGraph
from lipext.metric import FiniteMetric, shortest_path_metric


def random_graph_metric(rng, n, exact=True, p=0.5):
    """Shortest-path metric of a random connected weighted graph."""
    while True:
        edges = []
        for u, v in itertools.combinations(range(n), 2):
            if rng.random() < p:
                w = int(rng.integers(1, 6)) if exact else float(rng.uniform(0.5, 3.0))
                edges.append((u, v, w))
        g = WeightedGraph(n, tuple(edges))
        if n == 1 or g.is_connected():
            return shortest_path_metric(g)


def random_connected_graph(rng, n, p=0.4):
    while True:
        pairs = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
        g = WeightedGraph.from_pairs(n, pairs)
        if g.is_connected():
            return g


def random_zero_sum(rng, n, exact=True, scale=5):
    if exact:
        v = [Fraction(int(rng.integers(-scale, scale + 1)), int(rng.integers(1, 4))) for _ in range(n - 1)]
        v.append(-sum(v, Fraction(0)))
        return v
    v = rng.normal(size=n)
    v[-1] = -v[:-1].sum()
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def c4():
    return shortest_path_metric(WeightedGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)]))


@pytest.fixture
def k4():
    return WeightedGraph.from_pairs(4, list(itertools.combinations(range(4), 2)))


@pytest.fixture
def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return WeightedGraph.from_pairs(10, outer + spokes + inner)
