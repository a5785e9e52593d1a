import itertools
import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from conftest import random_connected_graph
from lipext.errors import CapacityError, ConnectivityError, DomainError, RegularityError
from lipext.graphs import (
    WeightedGraph,
    average_distance,
    cut_size,
    edge_disjoint_paths,
    edge_expansion_exact,
    edge_expansion_spectral_bound,
    magnified_edge_average,
    random_regular_graph,
)
from oracles import brute_expansion, max_flow_value


def test_random_regular_k4_unique():
    g = random_regular_graph(4, 3, seed=0)
    assert sorted((u, v) for u, v, _ in g.edges) == list(itertools.combinations(range(4), 2))


def test_random_regular_properties():
    for seed in range(5):
        g = random_regular_graph(16, 4, seed=seed)
        assert g.regular_degree() == 4 and g.is_connected()
    assert random_regular_graph(16, 4, 1) == random_regular_graph(16, 4, 1)


def test_random_regular_parity():
    with pytest.raises(DomainError):
        random_regular_graph(5, 3, 0)


def test_expansion_c4_k4(k4):
    c4 = WeightedGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    rep = edge_expansion_exact(c4)
    assert rep.phi == 2 and rep.method == "exact"
    w = rep.witness_set
    assert len(w) == 2 and cut_size(c4, w) == 2
    assert edge_expansion_exact(k4).phi == Fraction(8, 3)


def test_expansion_capacity():
    g = WeightedGraph.from_pairs(25, [(i, i + 1) for i in range(24)])
    with pytest.raises(CapacityError):
        edge_expansion_exact(g)


def test_spectral_bound_tight_cases(k4):
    c4 = WeightedGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert edge_expansion_spectral_bound(c4).phi <= 2
    assert edge_expansion_spectral_bound(k4).phi <= Fraction(8, 3)
    assert edge_expansion_spectral_bound(k4).phi > 2.66


def test_spectral_disconnected():
    with pytest.raises(ConnectivityError):
        edge_expansion_spectral_bound(WeightedGraph.from_pairs(4, [(0, 1), (2, 3)]))


def test_expansion_inequality_all_subsets(rng):
    for _ in range(10):
        n = int(rng.integers(3, 9))
        g = random_connected_graph(rng, n)
        phi = edge_expansion_exact(g).phi
        m = g.num_edges
        for k in range(1, n):
            for s in itertools.combinations(range(n), k):
                assert cut_size(g, s) * n * n >= phi * k * (n - k) * m


def test_l1_poincare(rng):
    for _ in range(100):
        n = int(rng.integers(3, 11))
        g = random_connected_graph(rng, n)
        phi = edge_expansion_exact(g).phi
        h = rng.integers(-5, 6, size=(n, int(rng.integers(1, 6))))
        # unordered pairs: the ordered double sum is off by a factor of 2
        lhs = Fraction(int(np.abs(h[:, None, :] - h[None, :, :]).sum()) // 2, n * n) * phi
        rhs = Fraction(sum(int(np.abs(h[u] - h[v]).sum()) for u, v, _ in g.edges), g.num_edges)
        assert lhs <= rhs


def test_average_distance_examples(k4, petersen):
    rep = average_distance(k4, [0])
    assert rep.average == 0 and rep.bound == 0 and rep.holds
    rep = average_distance(k4, range(4))
    assert rep.average == Fraction(3, 4)
    assert math.isclose(rep.bound, math.log(4) / (4 * math.log(3)))
    rep = average_distance(petersen, range(10))
    assert rep.average == Fraction(3, 2) and rep.holds
    assert math.isclose(rep.bound, 0.524, abs_tol=1e-3)


def test_average_distance_requires_regular():
    with pytest.raises(RegularityError):
        average_distance(WeightedGraph.from_pairs(3, [(0, 1), (1, 2)]), [0])


def test_magnified_edge_average(k4):
    c4 = WeightedGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert magnified_edge_average(c4, [0], 1) == Fraction(3, 2)
    assert magnified_edge_average(c4, [], 1) == 1
    assert magnified_edge_average(k4, [0, 1], Fraction(1, 2)) == Fraction(3, 2)
    g = random_regular_graph(12, 3, 4)
    assert magnified_edge_average(g, [0, 3, 5], Fraction(7, 3)) == 1 + Fraction(2 * 7 * 3, 3 * 12)


def test_menger_examples(k4):
    path = WeightedGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3)])
    assert edge_disjoint_paths(path, [0], [3]).m == 1
    res = edge_disjoint_paths(k4, [0], [1], phi=Fraction(8, 3))
    assert res.m == 3 and res.bound == 2 and res.bound_ok
    c4 = WeightedGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    res = edge_disjoint_paths(c4, [0, 2], [1, 3])
    assert res.m == len(res.cut_edges) == 4
    with pytest.raises(DomainError):
        edge_disjoint_paths(c4, [0, 1], [1])


def _check_paths(g, a, b, res):
    used = set()
    edges = {(u, v) for u, v, _ in g.edges}
    for p in res.paths:
        assert p[0] in a and p[-1] in b
        for u, v in zip(p, p[1:]):
            e = (min(u, v), max(u, v))
            assert e in edges and e not in used
            used.add(e)


def test_menger_random(rng):
    for _ in range(100):
        n = int(rng.integers(4, 11))
        g = random_connected_graph(rng, n, p=0.5)
        verts = rng.permutation(n)
        ka = int(rng.integers(1, n))
        kb = int(rng.integers(1, n - ka + 1))
        a, b = sorted(verts[:ka].tolist()), sorted(verts[ka : ka + kb].tolist())
        phi = edge_expansion_exact(g).phi
        res = edge_disjoint_paths(g, a, b, phi=phi)
        assert res.m == max_flow_value(g, a, b) == len(res.cut_edges)
        assert len(res.paths) == res.m
        _check_paths(g, a, b, res)
        assert res.m >= math.ceil(phi * min(len(a), len(b)) * g.num_edges / (2 * n))
