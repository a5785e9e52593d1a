"""Min-cost flow by successive shortest paths with node potentials.

Works over any ordered field the inputs live in: ``int``/``Fraction`` data give
an exact answer, floats give a float answer.  Optimality is certified by the
final potentials: every residual arc has nonnegative reduced cost.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .._numeric import is_exact_scalar
from ..errors import DomainError, InfeasibleError, InternalConsistencyError

INF = math.inf


@dataclass(frozen=True)
class FlowNetwork:
    """Node supplies (positive = source) and arcs ``(tail, head, cost, capacity)``."""

    supplies: tuple
    arcs: tuple

    def __post_init__(self):
        n = len(self.supplies)
        arcs = []
        for a in self.arcs:
            if len(a) == 3:
                u, v, c = a
                cap = INF
            else:
                u, v, c, cap = a
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"arc ({u}, {v}) out of range")
            if c < 0:
                raise DomainError("arc costs must be nonnegative")
            if cap is None:
                cap = INF
            if not cap > 0:
                raise DomainError("arc capacities must be positive")
            arcs.append((u, v, c, cap))
        object.__setattr__(self, "supplies", tuple(self.supplies))
        object.__setattr__(self, "arcs", tuple(arcs))

    @property
    def n(self) -> int:
        return len(self.supplies)

    @property
    def exact(self) -> bool:
        vals = list(self.supplies) + [c for _, _, c, _ in self.arcs]
        vals += [cap for *_, cap in self.arcs if cap != INF]
        return all(is_exact_scalar(v) for v in vals)


@dataclass(frozen=True)
class FlowResult:
    cost: object
    flow: tuple
    potentials: tuple
    dual_objective: object

    @property
    def gap(self):
        return self.cost - self.dual_objective


def min_cost_flow(net: FlowNetwork) -> FlowResult:
    """Cheapest flow meeting all supplies.

    Raises :class:`InfeasibleError` when the supplies do not balance or cannot be
    routed; the certificate names a node set whose net supply exceeds the
    capacity leaving it.
    """
    exact = net.exact
    zero = Fraction(0) if exact else 0.0
    conv = Fraction if exact else float
    n = net.n
    supply = [conv(b) for b in net.supplies]
    total = sum(supply, zero)
    tol = 0 if exact else 1e-12 * (1.0 + sum(abs(b) for b in supply))
    if abs(total) > tol:
        raise InfeasibleError("supplies do not sum to zero", {"imbalance": total})

    # residual graph: arc k forward at 2k, reverse at 2k+1
    head, cap, cost, adj = [], [], [], [[] for _ in range(n)]
    for u, v, c, u_cap in net.arcs:
        c = conv(c)
        u_cap = INF if u_cap == INF else conv(u_cap)
        for t, h, cc, cp in ((u, v, c, u_cap), (v, u, -c, zero)):
            adj[t].append(len(head))
            head.append(h)
            cap.append(cp)
            cost.append(cc)
    tail = [0] * len(head)
    for t in range(n):
        for e in adj[t]:
            tail[e] = t

    excess = list(supply)
    p = [zero] * n

    while True:
        sources = [v for v in range(n) if excess[v] > tol]
        if not sources:
            break
        dist, pred = _dijkstra(n, adj, head, cap, cost, p, sources, tol, zero)
        sinks = [v for v in range(n) if excess[v] < -tol and v in dist]
        if not sinks:
            reach = sorted(dist)
            raise InfeasibleError(
                "supplies cannot be routed",
                {"reachable": reach, "net_supply": sum((supply[v] for v in reach), zero)},
            )
        t = min(sinks, key=lambda v: (dist[v], v))
        dt = dist[t]
        for v in range(n):
            p[v] += min(dist.get(v, dt), dt)
        path = []
        v = t
        while pred[v] >= 0:
            e = pred[v]
            path.append(e)
            v = tail[e]
        s = v
        amount = min(excess[s], -excess[t])
        for e in path:
            amount = min(amount, cap[e])
        for e in path:
            cap[e] -= amount
            cap[e ^ 1] += amount
        excess[s] -= amount
        excess[t] += amount

    flow = []
    total_cost = zero
    for k, (u, v, c, u_cap) in enumerate(net.arcs):
        f = cap[2 * k + 1]
        flow.append(f)
        total_cost += conv(c) * f
    for e in range(len(head)):
        if cap[e] > tol and cost[e] + p[tail[e]] - p[head[e]] < -max(tol, 1e-9 if not exact else 0):
            raise InternalConsistencyError("residual arc with negative reduced cost")
    dual = -sum((b * pv for b, pv in zip(supply, p)), zero)
    for k, (u, v, c, u_cap) in enumerate(net.arcs):
        rc = conv(c) + p[u] - p[v]
        if rc < 0:
            dual += u_cap * rc
    return FlowResult(total_cost, tuple(flow), tuple(p), dual)


def _dijkstra(n, adj, head, cap, cost, p, sources, tol, zero):
    dist: dict[int, object] = {}
    pred: dict[int, int] = {}
    heap = [(zero, 0, s, -1) for s in sources]
    heapq.heapify(heap)
    while heap:
        d, hops, u, e_in = heapq.heappop(heap)
        if u in dist:
            continue
        dist[u] = d
        pred[u] = e_in
        for e in adj[u]:
            if cap[e] <= tol:
                continue
            v = head[e]
            if v in dist:
                continue
            rc = cost[e] + p[u] - p[v]
            if rc < 0:
                rc = zero  # float round-off only; exact potentials keep rc >= 0
            heapq.heappush(heap, (d + rc, hops + 1, v, e))
    return dist, pred


def transportation(supply: Sequence, demand: Sequence, costs) -> FlowResult:
    """Transportation problem: ``supply[i]`` to ``demand[j]`` at ``costs[i][j]``."""
    m = len(supply)
    arcs = [(i, m + j, costs[i][j]) for i in range(m) for j in range(len(demand))]
    return min_cost_flow(FlowNetwork(tuple(supply) + tuple(-v for v in demand), tuple(arcs)))
