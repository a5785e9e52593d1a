import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_graph_metric, random_zero_sum
from lipext.errors import DomainError
from lipext.extension import (
    ExtensionProblem,
    Target,
    holder_constant,
    mcshane_extension,
    min_extension_euclidean,
    min_extension_polyhedral,
    solve_extension,
)
from lipext.metric import FiniteMetric


def _path(n):
    return FiniteMetric.from_matrix([[abs(i - j) for j in range(n)] for i in range(n)])


def _check_solution(problem, sol):
    for x, v in problem.boundary.items():
        assert np.array_equal(np.asarray(sol.values[x]), np.asarray(v)) or np.allclose(
            np.asarray(sol.values[x], float), np.asarray(v, float), rtol=0, atol=0
        )
    again = holder_constant(sol.values, problem)
    assert abs(float(again) - float(sol.constant)) <= 1e-9


def test_mcshane_midpoint():
    prob = ExtensionProblem(_path(3), (0, 2), 1, Target.real(), {0: 0, 2: 1})
    sol = mcshane_extension(prob)
    assert sol.constant == Fraction(1, 2)  # f(0)=0, f(2)=1 over distance 2
    prob = ExtensionProblem(_path(3), (0, 2), 1, Target.real(), {0: 0, 2: 2})
    sol = mcshane_extension(prob)
    assert sol.values[1, 0] == 1 and sol.constant == 1
    _check_solution(prob, sol)


def test_mcshane_constant():
    prob = ExtensionProblem(_path(4), (0, 3), 1, Target.real(), {0: 5, 3: 5})
    sol = mcshane_extension(prob)
    assert all(v == 5 for v in sol.values[:, 0]) and sol.constant == 0


@pytest.mark.parametrize("alpha", [1, 0.7])
def test_real_line_lp_matches_mcshane(rng, alpha):
    for _ in range(20):
        n = int(rng.integers(3, 9))
        d = random_graph_metric(rng, n)
        k = int(rng.integers(2, n))
        s = sorted(rng.choice(n, k, replace=False).tolist())
        f = {x: int(rng.integers(-6, 7)) for x in s}
        prob = ExtensionProblem(d, tuple(s), alpha, Target.real(), f)
        lp = min_extension_polyhedral(prob)
        mc = mcshane_extension(prob)
        assert lp.optimal
        assert abs(float(lp.constant) - float(mc.constant)) <= 1e-9
        _check_solution(prob, lp)
        if alpha == 1:
            assert lp.constant == mc.constant


def test_s_equals_x():
    d = _path(3)
    prob = ExtensionProblem(d, (0, 1, 2), 1, Target.ell1(2), {0: [0, 0], 1: [1, 0], 2: [1, 3]})
    sol = min_extension_polyhedral(prob)
    assert sol.constant == 3 == holder_constant(sol.values, prob)


def test_w1_target_midpoint():
    amb = FiniteMetric.from_matrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    tm = FiniteMetric.from_matrix([[0, 1], [1, 0]])
    prob = ExtensionProblem(amb, (0, 2), 1, Target.wasserstein(tm), {0: [1, -1], 2: [-1, 1]})
    sol = min_extension_polyhedral(prob)
    assert Target.wasserstein(tm).norm(np.array([2, -2], dtype=object)) == 2
    assert sol.constant == 1 and sol.optimal
    _check_solution(prob, sol)


def test_frechet_embedding_into_linf(rng):
    for _ in range(5):
        n = int(rng.integers(3, 7))
        d = random_graph_metric(rng, n)
        s = list(range(n - 1))
        f = {x: [d.dist[x, p] for p in range(n)] for x in s}
        prob = ExtensionProblem(d, tuple(s), 1, Target.ellinf(n), f)
        sol = min_extension_polyhedral(prob)
        assert sol.constant == 1


def test_monotone_in_subset(rng):
    for _ in range(10):
        n = int(rng.integers(4, 8))
        d = random_graph_metric(rng, n)
        g_all = {x: rng.integers(-4, 5, size=2).tolist() for x in range(n)}
        order = rng.permutation(n).tolist()
        prev = None
        for k in range(2, n + 1):
            s = sorted(order[:k])
            prob = ExtensionProblem(d, tuple(s), 1, Target.ell1(2), {x: g_all[x] for x in s})
            val = min_extension_polyhedral(prob).constant
            assert prev is None or val >= prev
            prev = val


def test_w1_target_random_certified(rng):
    for _ in range(5):
        n = int(rng.integers(3, 6))
        d = random_graph_metric(rng, n)
        s = [0, 1, 2]
        tm = d.restrict(s)
        f = {x: random_zero_sum(rng, 3) for x in s}
        prob = ExtensionProblem(d, tuple(s), 1, Target.wasserstein(tm), f)
        sol = min_extension_polyhedral(prob)
        _check_solution(prob, sol)
        assert sol.trace["gap"] == 0 and sol.trace["arithmetic"] == "exact"
        assert sol.constant >= sol.trace["fixed_pair_bound"]


def test_euclidean_chebyshev():
    s3 = math.sqrt(3)
    d = FiniteMetric.from_matrix([[0, 2, 2, 1], [2, 0, 2, 1], [2, 2, 0, 1], [1, 1, 1, 0]])
    tri = {0: [-1.0, 0.0], 1: [1.0, 0.0], 2: [0.0, s3]}
    prob = ExtensionProblem(d, (0, 1, 2), 1, Target.euclidean(2), tri)
    sol = min_extension_euclidean(prob)
    assert not sol.optimal
    assert sol.constant == pytest.approx(2 / s3, abs=1e-6)
    _check_solution(prob, sol)


def test_euclidean_affine_path():
    d = _path(5)
    prob = ExtensionProblem(d, (0, 4), 1, Target.euclidean(2), {0: [0.0, 0.0], 4: [2.4, 3.2]})
    sol = solve_extension(prob)
    assert sol.constant == pytest.approx(1.0, abs=1e-3)


def test_domain_errors():
    d = _path(3)
    with pytest.raises(DomainError):
        ExtensionProblem(d, (0, 2), 1.5, Target.real(), {0: 0, 2: 1})
    with pytest.raises(DomainError):
        ExtensionProblem(d, (0, 2), 1, Target.real(), {0: 0})
    with pytest.raises(DomainError):
        min_extension_polyhedral(ExtensionProblem(d, (0, 2), 1, Target.euclidean(1), {0: [0], 2: [1]}))
    with pytest.raises(DomainError):
        Target("l3")
