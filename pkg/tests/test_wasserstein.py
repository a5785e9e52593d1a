from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph_metric, random_zero_sum
from lipext.errors import DomainError
from lipext.graphs import WeightedGraph
from lipext.metric import FiniteMetric, shortest_path_metric
from lipext.wasserstein import (
    SignedMeasure,
    poincare_check,
    w1_distance,
    w1_norm,
    w1_sandwich_check,
)
from oracles import coupling_lp


@pytest.fixture
def c4m():
    return shortest_path_metric(WeightedGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)]))


def test_dirac_difference(c4m):
    assert w1_norm(SignedMeasure.dirac_difference(c4m, 0, 2), c4m).value == 2
    assert w1_norm(SignedMeasure.on(c4m, [0, 0, 0, 0]), c4m).value == 0


def test_c4_opposite_pairs(c4m):
    f = SignedMeasure.on(c4m, [1, -1, 1, -1])
    res = w1_norm(f, c4m)
    assert res.value == 2 and res.gap == 0
    g = res.potential.g
    assert g[0] - g[1] == 1 and g[2] - g[3] == 1 and g[0] == g[2]
    assert res.potential.is_lipschitz(c4m)
    rows, cols = res.plan.marginals()
    assert list(rows) == [1, 0, 1, 0] and list(cols) == [0, 1, 0, 1]


def test_w1_distance_examples(c4m):
    mu = [Fraction(1, 2), 0, Fraction(1, 2), 0]
    nu = [0, Fraction(1, 2), 0, Fraction(1, 2)]
    val, plan = w1_distance(mu, nu, c4m)
    assert val == 1 and val == pytest.approx(coupling_lp(mu, nu, c4m.dist))
    val, plan = w1_distance(mu, mu, c4m)
    assert val == 0 and plan.plan[0, 0] == Fraction(1, 2)
    assert w1_distance([1, 0, 0, 0], [0, 0, 1, 0], c4m)[0] == 2
    with pytest.raises(DomainError):
        w1_distance([1, 0, 0, 0], [0, 2, 0, 0], c4m)


def test_unbalanced_rejected(c4m):
    with pytest.raises(DomainError):
        SignedMeasure.on(c4m, [1, 0, 0, 0])


@pytest.mark.parametrize("exact", [True, False])
def test_random_duality_and_coupling_oracle(exact):
    rng = np.random.default_rng(31 if exact else 32)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        d = random_graph_metric(rng, n, exact=exact)
        f = SignedMeasure.on(d, random_zero_sum(rng, n, exact=exact))
        res = w1_norm(f, d)
        if exact:
            assert res.gap == 0
        else:
            assert abs(res.gap) <= 1e-9
        assert res.potential.is_lipschitz(d)
        pairing = sum(f.values[i] * res.potential.g[i] for i in range(n))
        assert abs(float(pairing) - float(res.value)) <= 1e-9
        ref = coupling_lp(f.positive(), f.negative(), d.dist)
        assert abs(float(res.value) - ref) <= 1e-9 * (1 + ref)
        rows, cols = res.plan.marginals()
        assert np.allclose(rows.astype(float), f.positive().astype(float))
        assert np.allclose(cols.astype(float), f.negative().astype(float))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(-5, 5))
def test_homogeneity_and_triangle(seed, lam):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    d = random_graph_metric(rng, n, exact=False)
    f = SignedMeasure.on(d, random_zero_sum(rng, n, exact=False))
    h = SignedMeasure.on(d, random_zero_sum(rng, n, exact=False))
    nf, nh = w1_norm(f, d).value, w1_norm(h, d).value
    assert w1_norm(f.scale(lam), d).value == pytest.approx(abs(lam) * nf, rel=1e-12, abs=1e-12)
    assert w1_norm(f + h, d).value <= nf + nh + 1e-9


def test_sandwich_examples(c4m):
    two = FiniteMetric.from_matrix([[0, 1], [1, 0]])
    rep = w1_sandwich_check(SignedMeasure.dirac_difference(two, 0, 1), two)
    assert (rep.lower, rep.norm, rep.upper) == (1, 1, 1) and rep.passed
    rep = w1_sandwich_check(SignedMeasure.dirac_difference(two, 0, 1), two, r=3)
    assert rep.l1 == 2 and (rep.lower, rep.norm, rep.upper) == (6, 7, 7) and rep.passed
    rng = np.random.default_rng(5)
    for _ in range(30):
        f = SignedMeasure.on(c4m, random_zero_sum(rng, 4))
        rep = w1_sandwich_check(f, c4m)
        assert rep.passed and rep.lower <= rep.norm <= rep.upper


def test_sandwich_random_magnified(rng):
    for _ in range(30):
        n = int(rng.integers(2, 7))
        d = random_graph_metric(rng, n)
        r = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 4)))
        rep = w1_sandwich_check(SignedMeasure.on(d, random_zero_sum(rng, n)), d, r=r)
        assert rep.passed


def test_poincare_examples():
    c4 = WeightedGraph.from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    zero = [[0, 0] for _ in range(4)]
    rep = poincare_check(c4, [0, 2], 1, zero, 1)
    assert rep.lhs == 0 and rep.rhs == 0 and rep.passed
    rng = np.random.default_rng(8)
    s = [0, 1, 2]
    for _ in range(20):
        sigma = rng.integers(0, 3, size=4)
        F = []
        for x in range(4):
            v = [Fraction(-1, 3)] * 3
            v[sigma[x]] += 1
            F.append(v)
        rep = poincare_check(c4, s, 1, F, 1)
        assert rep.passed
    with pytest.raises(DomainError):
        poincare_check(c4, s, 1, zero, 2)
