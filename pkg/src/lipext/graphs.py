"""Regular graphs and the expander quantities used by the magnification bounds.

Edge expansion follows the normalisation ``E(S, V-S) >= phi |S| (n-|S|) |E| / n^2``
(counting edges, not weights), so a complete graph has ``phi > 1``.
All logarithms are natural.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    CapacityError,
    ConnectivityError,
    DomainError,
    InternalConsistencyError,
    RegularityError,
    SamplingError,
    SolverError,
)
from .metric import check_subset, magnify, shortest_path_metric

LOG_BASE = "e"
EXACT_EXPANSION_MAX_N = 24
REJECTION_BUDGET = 10_000


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph on vertices ``0..n-1`` with edges ``(u, v, w)``, ``u < v``.

    Weights must be nonnegative; zero weights are allowed for 0-Extension
    instances, but :func:`shortest_path_metric` requires them positive.
    """

    n: int
    edges: tuple
    labels: tuple = field(default=None)

    def __post_init__(self):
        norm = []
        seen = set()
        for e in self.edges:
            if len(e) == 2:
                u, v, w = e[0], e[1], 1
            else:
                u, v, w = e
            u, v = int(u), int(v)
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            if u > v:
                u, v = v, u
            if not (0 <= u and v < self.n):
                raise DomainError(f"edge ({u}, {v}) out of range for n={self.n}")
            if (u, v) in seen:
                raise DomainError(f"duplicate edge ({u}, {v})")
            if w < 0:
                raise DomainError(f"negative weight on edge ({u}, {v})")
            seen.add((u, v))
            norm.append((u, v, w))
        object.__setattr__(self, "edges", tuple(norm))
        labels = tuple(range(self.n)) if self.labels is None else tuple(self.labels)
        if len(labels) != self.n:
            raise DomainError("one label per vertex required")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_pairs(cls, n: int, pairs, weight=1) -> "WeightedGraph":
        return cls(n, tuple((u, v, weight) for u, v in pairs))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def regular_degree(self) -> int | None:
        deg = set(self.degrees())
        return deg.pop() if len(deg) == 1 else None

    def is_unit_weight(self) -> bool:
        return all(w == 1 for _, _, w in self.edges)

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [s], deque([s])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        comp.append(v)
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.components()) == 1


def _require_connected(g: WeightedGraph):
    if not g.is_connected():
        raise ConnectivityError("graph must be connected")


def _require_regular(g: WeightedGraph) -> int:
    d = g.regular_degree()
    if d is None:
        raise RegularityError("graph must be regular")
    return d


# ---------------------------------------------------------------------------
# generation


def random_regular_graph(n: int, d: int, seed: int = 0, *, budget: int = REJECTION_BUDGET) -> WeightedGraph:
    """Uniform simple connected d-regular graph via the pairing model.

    Each attempt shuffles ``n*d`` half-edges and pairs them consecutively; any
    attempt producing a loop, a multi-edge or a disconnected graph is rejected
    as a whole, which keeps the output uniform conditional on success.
    """
    if n < 3:
        raise DomainError("need n >= 3")
    if (n * d) % 2:
        raise DomainError(f"n*d must be even (n={n}, d={d})")
    if not 2 <= d < n:
        raise DomainError(f"need 2 <= d < n for a connected regular graph (n={n}, d={d})")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(budget):
        perm = rng.permutation(stubs)
        a, b = perm[0::2], perm[1::2]
        if np.any(a == b):
            continue
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            continue
        order = np.argsort(keys)
        g = WeightedGraph.from_pairs(n, zip(lo[order].tolist(), hi[order].tolist()))
        if g.is_connected():
            return g
    raise SamplingError(f"no simple connected {d}-regular graph on {n} vertices after {budget} attempts")


# ---------------------------------------------------------------------------
# expansion


@dataclass(frozen=True)
class ExpansionReport:
    phi: object
    witness_set: tuple
    method: str  # "exact" | "spectral-lower-bound"
    eigenvalue: float | None = None

    def witness_ratio(self, g: WeightedGraph):
        return expansion_ratio(g, self.witness_set)


def cut_size(g: WeightedGraph, s: Sequence[int]) -> int:
    member = set(s)
    return sum(1 for u, v, _ in g.edges if (u in member) != (v in member))


def expansion_ratio(g: WeightedGraph, s: Sequence[int]) -> Fraction:
    """``E(S, V-S) n^2 / (|S| (n-|S|) |E|)`` as an exact fraction."""
    k = len(set(s))
    n, m = g.n, g.num_edges
    if not 0 < k < n:
        raise DomainError("ratio defined only for nonempty proper subsets")
    if m == 0:
        raise DomainError("graph has no edges")
    return Fraction(cut_size(g, s) * n * n, k * (n - k) * m)


def edge_expansion_exact(g: WeightedGraph, *, chunk: int = 1 << 20) -> ExpansionReport:
    """Minimum expansion ratio over all nonempty proper subsets.

    Enumerates the ``2^(n-1) - 1`` subsets avoiding the last vertex (the ratio
    is symmetric under complement).  Ties are broken towards the smallest
    bitmask.
    """
    n = g.n
    if n > EXACT_EXPANSION_MAX_N:
        raise CapacityError(
            f"exact expansion enumerates 2^{n - 1} subsets; n={n} exceeds {EXACT_EXPANSION_MAX_N}. "
            "Use edge_expansion_spectral_bound instead."
        )
    if n < 2 or g.num_edges == 0:
        raise DomainError("expansion needs at least two vertices and one edge")
    us = np.array([u for u, _, _ in g.edges], dtype=np.uint32)
    vs = np.array([v for _, v, _ in g.edges], dtype=np.uint32)
    total = 1 << (n - 1)
    best_val, best_mask = math.inf, None
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        cut = np.zeros(masks.shape, dtype=np.int64)
        for u, v in zip(us, vs):
            cut += ((masks >> u) ^ (masks >> v)) & 1
        k = np.bitwise_count(masks).astype(np.int64)
        ratio = cut / (k * (n - k))
        i = int(np.argmin(ratio))
        if ratio[i] < best_val - 1e-12:
            best_val, best_mask = float(ratio[i]), int(masks[i])
    witness = tuple(i for i in range(n) if (best_mask >> i) & 1)
    return ExpansionReport(expansion_ratio(g, witness), witness, "exact")


def edge_expansion_spectral_bound(g: WeightedGraph, *, safety: float = 1e-10) -> ExpansionReport:
    """Certified lower bound on the edge expansion from the normalised Laplacian.

    For every vertex set ``S``, ``E(S, V-S) >= nu_2 vol(S) vol(V-S) / vol(V)``
    where ``nu_2`` is the second-smallest eigenvalue of ``I - D^-1/2 A D^-1/2``.
    With ``vol(S) >= d_min |S|`` this gives
    ``phi >= nu_2 d_min^2 n^2 / (2 |E|^2)`` (``= 2 nu_2`` for regular graphs).
    ``safety`` is subtracted from ``nu_2`` to cover eigensolver rounding.
    """
    _require_connected(g)
    n, m = g.n, g.num_edges
    if n < 2:
        raise DomainError("need at least two vertices")
    adj = np.zeros((n, n))
    for u, v, _ in g.edges:
        adj[u, v] = adj[v, u] = 1.0
    deg = adj.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = np.eye(n) - inv_sqrt[:, None] * adj * inv_sqrt[None, :]
    try:
        eig = np.linalg.eigvalsh(lap)
    except np.linalg.LinAlgError as exc:
        raise SolverError("eigensolver failed to converge", {"n": n}) from exc
    nu2 = float(eig[1])
    dmin = float(deg.min())
    bound = max(0.0, nu2 - safety) * dmin * dmin * n * n / (2.0 * m * m)
    return ExpansionReport(bound, (), "spectral-lower-bound", eigenvalue=nu2)


def edge_expansion(g: WeightedGraph) -> ExpansionReport:
    """Exact expansion when enumerable, spectral lower bound otherwise."""
    if g.n <= EXACT_EXPANSION_MAX_N:
        return edge_expansion_exact(g)
    return edge_expansion_spectral_bound(g)


# ---------------------------------------------------------------------------
# distances


@dataclass(frozen=True)
class AverageDistanceReport:
    average: object
    bound: float
    holds: bool
    log_base: str = LOG_BASE


def average_distance(g: WeightedGraph, s: Sequence[int]) -> AverageDistanceReport:
    """Mean of ``d_G(x, y)`` over ordered pairs of ``S`` (diagonal included),
    with the comparison against ``log|S| / (4 log d)``."""
    d = _require_regular(g)
    if d < 3:
        raise DomainError(f"average-distance bound needs degree >= 3, got {d}")
    _require_connected(g)
    s = check_subset(s, g.n)
    dist = shortest_path_metric(g).dist
    sub = dist[np.ix_(s, s)]
    total = sum(sub.ravel().tolist())
    k = len(s)
    avg = Fraction(total) / (k * k) if isinstance(total, (int, Fraction)) else total / (k * k)
    bound = math.log(k) / (4.0 * math.log(d))
    return AverageDistanceReport(avg, bound, bool(avg >= bound))


def magnified_edge_average(g: WeightedGraph, s: Sequence[int], r):
    """Average magnified length of the edges of a unit-weight regular graph.

    Computed directly from the magnified shortest-path metric and checked
    against the closed form ``1 + 2 r |S| / n``.
    """
    _require_regular(g)
    if not g.is_unit_weight():
        raise DomainError("magnified edge average needs unit weights")
    s = check_subset(s, g.n, nonempty=False)
    mag = magnify(shortest_path_metric(g), s, r)
    total = sum(mag.dist[u, v] for u, v, _ in g.edges)
    m = g.num_edges
    if mag.exact:
        value = Fraction(total) / m
        closed = 1 + Fraction(2) * r * len(s) / g.n
        ok = value == closed
    else:
        value = float(total) / m
        closed = 1.0 + 2.0 * float(r) * len(s) / g.n
        ok = abs(value - closed) <= 1e-12 * max(1.0, closed)
    if not ok:
        raise InternalConsistencyError(f"magnified edge average {value} != closed form {closed}")
    return value


# ---------------------------------------------------------------------------
# Menger


@dataclass(frozen=True)
class MengerResult:
    m: int
    paths: tuple
    cut_edges: tuple
    bound: float | None = None
    bound_ok: bool | None = None


def edge_disjoint_paths(g: WeightedGraph, a: Sequence[int], b: Sequence[int], phi=None) -> MengerResult:
    """Maximum family of edge-disjoint paths from ``A`` to ``B``.

    Unit-capacity max-flow (shortest augmenting paths) from a super-source on
    ``A`` to a super-sink on ``B``; each undirected edge carries at most one
    unit in total.  The count is audited against the min cut read off the final
    residual graph.  When ``phi`` (a valid lower bound on the expansion) is
    given, the count is compared with ``phi min(|A|,|B|) |E| / (2n)``.
    """
    a = check_subset(a, g.n)
    b = check_subset(b, g.n)
    if set(a) & set(b):
        raise DomainError("A and B must be disjoint")
    n = g.n
    src, snk = n, n + 1
    # residual capacities keyed by (u, v)
    cap: dict[tuple[int, int], int] = {}
    nbrs: list[list[int]] = [[] for _ in range(n + 2)]

    def arc(u, v, c):
        if (u, v) not in cap:
            cap[(u, v)] = 0
            cap[(v, u)] = cap.get((v, u), 0)
            nbrs[u].append(v)
            nbrs[v].append(u)
        cap[(u, v)] += c

    big = g.num_edges + 1
    for u, v, _ in g.edges:
        arc(u, v, 1)
        arc(v, u, 1)
    for x in a:
        arc(src, x, big)
    for y in b:
        arc(y, snk, big)
    for lst in nbrs:
        lst.sort()

    flow_value = 0
    while True:
        parent = {src: None}
        queue = deque([src])
        while queue and snk not in parent:
            u = queue.popleft()
            for v in nbrs[u]:
                if v not in parent and cap[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if snk not in parent:
            break
        v = snk
        while parent[v] is not None:
            u = parent[v]
            cap[(u, v)] -= 1
            cap[(v, u)] += 1
            v = u
        flow_value += 1

    reach = set(parent)
    cut = tuple(sorted((u, v) for u, v, _ in g.edges if (u in reach) != (v in reach)))
    if len(cut) != flow_value:
        raise InternalConsistencyError(f"max-flow {flow_value} != min-cut {len(cut)}")

    # cap[(u,v)] + cap[(v,u)] == 2 throughout, so the net unit flow u->v is 1 - cap[(u,v)]
    flow: dict[int, set[int]] = {u: set() for u in range(n)}
    for u, v, _ in g.edges:
        net = 1 - cap[(u, v)]
        if net > 0:
            flow[u].add(v)
        elif net < 0:
            flow[v].add(u)
    supply = {x: cap[(x, src)] for x in a}
    demand = {y: cap[(snk, y)] for y in b}
    paths = _decompose(flow, supply, demand)
    if len(paths) != flow_value:
        raise InternalConsistencyError(f"decomposed {len(paths)} paths from a flow of value {flow_value}")
    bound = ok = None
    if phi is not None:
        bound = float(phi) * min(len(a), len(b)) * g.num_edges / (2.0 * n)
        ok = flow_value >= math.ceil(bound - 1e-12)
    return MengerResult(flow_value, tuple(paths), cut, bound, ok)


def _decompose(flow, supply, demand):
    """Split an integral unit flow into edge-disjoint paths, discarding cycles.

    ``supply[x]`` units leave each source vertex and ``demand[y]`` units are
    absorbed at each sink vertex (sources and sinks are disjoint); walks pass
    through sink vertices whose demand is already used up.
    """
    paths = []
    demand = dict(demand)
    for x in sorted(supply):
        for _ in range(supply[x]):
            walk, pos, u = [x], {x: 0}, x
            while demand.get(u, 0) <= 0:
                nxt = min(flow[u])
                flow[u].discard(nxt)
                if nxt in pos:
                    for w in walk[pos[nxt] + 1 :]:
                        del pos[w]
                    walk = walk[: pos[nxt] + 1]
                else:
                    pos[nxt] = len(walk)
                    walk.append(nxt)
                u = nxt
            demand[u] -= 1
            paths.append(tuple(walk))
    return paths
