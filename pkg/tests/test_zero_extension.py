import itertools
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_connected_graph
from lipext.errors import CapacityError, DomainError
from lipext.graphs import WeightedGraph
from lipext.metric import FiniteMetric, shortest_path_metric, validate_metric
from lipext.zero_extension import (
    ZeroExtensionInstance,
    emd_objective,
    emd_relaxation,
    met_relaxation,
    opt_brute_force,
    relaxation_chain_check,
    star_instance,
)


def test_star_chain():
    res = relaxation_chain_check(star_instance())
    assert (res.met, res.emd, res.opt) == (Fraction(3, 2), 2, 2)
    assert all(res.met_metric[0, t] == Fraction(1, 2) for t in (1, 2, 3))
    assert res.emd_recomputed == 2
    assert res.opt_partition[0] in (1, 2, 3)


def test_star_float_mode():
    res = relaxation_chain_check(star_instance(), arithmetic="float")
    assert res.met == pytest.approx(1.5) and res.emd == pytest.approx(2)


def test_no_free_vertices():
    g = WeightedGraph(3, ((0, 1, 2), (1, 2, 1)))
    dt = FiniteMetric.from_matrix([[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    inst = ZeroExtensionInstance(g, (0, 1, 2), dt)
    assert opt_brute_force(inst)[0] == 4
    assert met_relaxation(inst)[0] == 4
    assert emd_relaxation(inst)[0] == 4


def test_zero_weights():
    g = WeightedGraph(4, ((0, 1, 0), (0, 2, 0), (0, 3, 0)))
    dt = FiniteMetric.from_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    inst = ZeroExtensionInstance(g, (1, 2, 3), dt)
    res = relaxation_chain_check(inst)
    assert res.opt == res.met == res.emd == 0


def test_bad_instances():
    g = WeightedGraph.from_pairs(3, [(0, 1), (1, 2)])
    with pytest.raises(DomainError):
        ZeroExtensionInstance(g, (0, 0), FiniteMetric.from_matrix([[0, 1], [1, 0]]))
    with pytest.raises(DomainError):
        ZeroExtensionInstance(g, (0, 2), FiniteMetric.from_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]]))


def test_capacity():
    g = WeightedGraph.from_pairs(20, [(i, i + 1) for i in range(19)])
    dt = FiniteMetric.from_matrix([[0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]])
    with pytest.raises(CapacityError):
        opt_brute_force(ZeroExtensionInstance(g, (0, 1, 2, 3), dt))


def _brute_opt(inst):
    """Plain itertools enumeration, independent of the chunked scan."""
    free = inst.free
    tidx = inst.terminal_index()
    best = None
    for choice in itertools.product(range(len(inst.terminals)), repeat=len(free)):
        a = dict(zip(free, choice))
        a.update(tidx)
        cost = sum(w * inst.d_t.dist[a[u], a[v]] for u, v, w in inst.g.edges)
        best = cost if best is None else min(best, cost)
    return best


def _random_instance(rng):
    n = int(rng.integers(4, 9))
    g = random_connected_graph(rng, n, p=0.45)
    g = WeightedGraph(n, tuple((u, v, int(rng.integers(1, 4))) for u, v, _ in g.edges))
    k = int(rng.integers(2, 4))
    terms = tuple(sorted(rng.choice(n, k, replace=False).tolist()))
    pts = rng.integers(0, 6, size=(k, 2))
    dist = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    dist = dist + (dist == 0) * (1 - np.eye(k, dtype=int))  # keep it a metric on k points
    dt = FiniteMetric.from_matrix(dist.tolist())
    if not validate_metric(dt).ok:
        return None
    return ZeroExtensionInstance(g, terms, dt)


def test_random_chain_exact():
    rng = np.random.default_rng(99)
    done = 0
    while done < 25:
        inst = _random_instance(rng)
        if inst is None:
            continue
        res = relaxation_chain_check(inst)
        assert res.met <= res.emd <= res.opt
        assert res.opt == _brute_opt(inst)
        assert validate_metric(FiniteMetric.from_matrix(res.met_metric.tolist()), semi=True).ok
        for v, mu in res.emd_measures.items():
            assert sum(mu) == 1 and all(m >= 0 for m in mu)
        assert emd_objective(inst, res.emd_measures) == res.emd
        done += 1


def test_integral_measures_give_opt():
    inst = star_instance()
    opt, part = opt_brute_force(inst)
    tidx = inst.terminal_index()
    deltas = {v: tuple(1 if j == tidx[part[v]] else 0 for j in range(3)) for v in range(4)}
    assert emd_objective(inst, deltas) == opt
