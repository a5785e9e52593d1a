"""Independent reference computations used only by the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction

import networkx as nx
import numpy as np
from scipy.optimize import linprog


def vertex_enumeration_max(A, b, c, chunk=20000):
    """max c.x over {x >= 0, A x <= b} by enumerating every basic solution.

    Assumes the region is bounded.  Each choice of n tight constraints among
    the m rows and n nonnegativity bounds is solved, and feasible points kept.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    c = np.asarray(c, float)
    m, n = A.shape
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = -np.inf
    combos = itertools.combinations(range(m + n), n)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.array(block)
        M = G[idx]
        rhs = h[idx]
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-9
        if not ok.any():
            continue
        x = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        feas = (x @ G.T <= h + 1e-9).all(axis=1)
        if feas.any():
            best = max(best, float((x[feas] @ c).max()))
    return best


def scipy_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return res


def coupling_lp(mu, nu, dist):
    """W1 by the full |X|^2-variable coupling LP (scipy HiGHS)."""
    n = len(mu)
    c = np.asarray(dist, float).ravel()
    A_eq = []
    b_eq = []
    for i in range(n):
        row = np.zeros((n, n))
        row[i, :] = 1
        A_eq.append(row.ravel())
        b_eq.append(float(mu[i]))
    for j in range(n):
        col = np.zeros((n, n))
        col[:, j] = 1
        A_eq.append(col.ravel())
        b_eq.append(float(nu[j]))
    res = linprog(c, A_eq=np.array(A_eq), b_eq=np.array(b_eq), bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def bfs_distances(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from((u, v) for u, v, _ in g.edges)
    return dict(nx.all_pairs_shortest_path_length(G))


def to_networkx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from((u, v) for u, v, _ in g.edges)
    return G


def brute_expansion(g):
    """Minimum expansion ratio by plain subset enumeration (no bit tricks)."""
    n, m = g.n, g.num_edges
    best = None
    for k in range(1, n):
        for s in itertools.combinations(range(n), k):
            ss = set(s)
            cut = sum(1 for u, v, _ in g.edges if (u in ss) != (v in ss))
            val = Fraction(cut * n * n, k * (n - k) * m)
            if best is None or val < best:
                best = val
    return best


def max_flow_value(g, a, b):
    G = nx.DiGraph()
    for u, v, _ in g.edges:
        G.add_edge(u, v, capacity=1)
        G.add_edge(v, u, capacity=1)
    for x in a:
        G.add_edge("src", x, capacity=len(g.edges) + 1)
    for y in b:
        G.add_edge(y, "snk", capacity=len(g.edges) + 1)
    return nx.maximum_flow_value(G, "src", "snk")


def chebyshev_radius_grid(points, lo, hi, steps=801):
    """Smallest enclosing-ball radius by dense grid search then local refine."""
    pts = np.asarray(points, float)
    xs = np.linspace(lo[0], hi[0], steps)
    ys = np.linspace(lo[1], hi[1], steps)
    X, Y = np.meshgrid(xs, ys)
    P = np.stack([X.ravel(), Y.ravel()], axis=1)
    R = np.max(np.linalg.norm(P[:, None, :] - pts[None, :, :], axis=2), axis=1)
    return float(R.min())
