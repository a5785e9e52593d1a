"""0-Extension: exact optimum by enumeration and its two LP relaxations.

For a graph with edge weights ``w``, terminals ``T`` and a metric ``d_T`` on
``T``, every instance satisfies ``MET <= EMD <= OPT``:

* OPT assigns each vertex a terminal (terminals to themselves) and pays
  ``sum w(uv) d_T(a(u), a(v))``;
* MET relaxes the assignment to any semi-metric on V extending ``d_T``;
* EMD relaxes it to probability measures on T, paying earthmover distances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import as_number_array, is_exact_array, rational
from .errors import CapacityError, DomainError, InternalConsistencyError, SolverError
from .graphs import WeightedGraph
from .metric import FiniteMetric, validate_metric
from .opt.lp import LPBuilder, LPSolution, solve_lp

OPT_CAPACITY = 10**7
CHAIN_TOL = 1e-9


@dataclass(frozen=True)
class ZeroExtensionInstance:
    g: WeightedGraph
    terminals: tuple
    d_t: FiniteMetric

    def __post_init__(self):
        t = tuple(int(v) for v in self.terminals)
        if not t:
            raise DomainError("at least one terminal is required")
        if len(set(t)) != len(t) or any(not 0 <= v < self.g.n for v in t):
            raise DomainError("terminals must be distinct vertices")
        if self.d_t.n != len(t):
            raise DomainError("d_T must have one point per terminal")
        rep = validate_metric(self.d_t)
        if not rep.ok:
            raise DomainError(f"d_T is not a metric: {rep.violations[0]}")
        object.__setattr__(self, "terminals", t)

    @property
    def free(self) -> list[int]:
        ts = set(self.terminals)
        return [v for v in range(self.g.n) if v not in ts]

    @property
    def exact(self) -> bool:
        return self.d_t.exact and all(isinstance(w, (int, Fraction)) for *_, w in self.g.edges)

    def terminal_index(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.terminals)}

    def describe(self) -> dict:
        return {
            "n": self.g.n,
            "edges": [list(e) for e in self.g.edges],
            "terminals": list(self.terminals),
            "d_T": self.d_t.dist.tolist(),
        }


@dataclass(frozen=True)
class ZeroExtensionResult:
    opt: object
    met: object
    emd: object
    opt_partition: tuple
    met_metric: np.ndarray
    emd_measures: dict
    emd_recomputed: object = None


def _num(v, exact):
    return rational(v) if exact else float(v)


def _assignment_cost(inst: ZeroExtensionInstance, assign: Sequence[int], exact: bool):
    d = as_number_array(inst.d_t.dist, exact=exact)
    total = 0 if exact else 0.0
    for u, v, w in inst.g.edges:
        total += _num(w, exact) * d[assign[u], assign[v]]
    return total


def opt_brute_force(inst: ZeroExtensionInstance, *, chunk: int = 1 << 18):
    """Exact OPT by enumerating every assignment of the free vertices.

    Costs are scanned in float blocks; assignments within 1e-9 of the float
    minimum are re-priced in the instance's own arithmetic and the smallest
    (lexicographically first on ties) wins.
    """
    free = inst.free
    k = len(inst.terminals)
    total = k ** len(free)
    if total > OPT_CAPACITY:
        raise CapacityError(f"{k}^{len(free)} = {total} assignments exceed the limit {OPT_CAPACITY}")
    exact = inst.exact
    tidx = inst.terminal_index()
    dfl = inst.d_t.as_float().dist
    pos = {v: i for i, v in enumerate(free)}
    weights = [(u, v, float(w)) for u, v, w in inst.g.edges if w != 0]
    powers = k ** np.arange(len(free) - 1, -1, -1, dtype=np.int64) if free else np.zeros(0, dtype=np.int64)

    def labels(idx):
        digits = (idx[:, None] // powers[None, :]) % k if free else np.zeros((idx.size, 0), dtype=np.int64)
        return digits

    def column(digits, v):
        if v in tidx:
            return np.full(digits.shape[0], tidx[v])
        return digits[:, pos[v]]

    best = np.inf
    near: list[int] = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = labels(idx)
        cost = np.zeros(idx.size)
        for u, v, w in weights:
            cost += w * dfl[column(digits, u), column(digits, v)]
        m = cost.min()
        tol = 1e-9 * (1.0 + abs(min(m, best)))
        if m < best - tol:
            near = []
        best = min(best, m)
        near.extend(int(i) for i in idx[cost <= best + tol])
    candidates = []
    for code in sorted(set(near)):
        digits = labels(np.array([code], dtype=np.int64))[0]
        assign = [0] * inst.g.n
        for v in range(inst.g.n):
            assign[v] = tidx[v] if v in tidx else int(digits[pos[v]])
        candidates.append((_assignment_cost(inst, assign, exact), assign))
    value, assign = min(candidates, key=lambda c: (c[0], c[1]))
    partition = tuple(inst.terminals[a] for a in assign)
    return value, partition


def _require_optimal(sol: LPSolution, inst: ZeroExtensionInstance, what: str):
    if not sol.optimal:
        raise SolverError(f"{what} LP ended with status {sol.status}", {"instance": inst.describe()})
    if not sol.certified():
        raise SolverError(f"{what} LP solution failed certification", {"instance": inst.describe()})


def met_relaxation(inst: ZeroExtensionInstance, *, arithmetic: str = "auto"):
    """Minimum of ``sum w d(u, v)`` over semi-metrics on V that extend ``d_T``."""
    n = inst.g.n
    exact = inst.exact
    tidx = inst.terminal_index()
    dt = as_number_array(inst.d_t.dist, exact=exact)
    lp = LPBuilder()
    var: dict[tuple[int, int], int] = {}
    const: dict[tuple[int, int], object] = {}
    for u, v in itertools.combinations(range(n), 2):
        if u in tidx and v in tidx:
            const[(u, v)] = dt[tidx[u], tidx[v]]
        else:
            var[(u, v)] = lp.add_var(lb=0)
    for u, v, w in inst.g.edges:
        if (u, v) in var:
            lp.add_obj(var[(u, v)], _num(w, exact))
    base = sum((_num(w, exact) * const[(u, v)] for u, v, w in inst.g.edges if (u, v) in const), 0 if exact else 0.0)

    def term(a, b):
        key = (a, b) if a < b else (b, a)
        return (var[key], None) if key in var else (None, const[key])

    # d(a, b) <= d(a, c) + d(c, b)
    for a, b in itertools.combinations(range(n), 2):
        for c in range(n):
            if c in (a, b):
                continue
            parts = [(term(a, b), 1), (term(a, c), -1), (term(c, b), -1)]
            if all(p[0][0] is None for p in parts):
                continue
            coeffs: dict[int, object] = {}
            rhs = 0
            for (j, val), sgn in parts:
                if j is None:
                    rhs -= sgn * val
                else:
                    coeffs[j] = coeffs.get(j, 0) + sgn
            lp.add_row(coeffs, "<=", rhs)
    sol = solve_lp(lp.build(), arithmetic)
    _require_optimal(sol, inst, "MET")
    metric = np.zeros((n, n), dtype=object if sol.arithmetic == "exact" else float)
    for (u, v), j in var.items():
        metric[u, v] = metric[v, u] = sol.x[j]
    for (u, v), val in const.items():
        metric[u, v] = metric[v, u] = val
    if sol.arithmetic == "exact":
        for i in range(n):
            metric[i, i] = 0
    return sol.objective + base, metric


def emd_relaxation(inst: ZeroExtensionInstance, *, arithmetic: str = "auto"):
    """Minimum of ``sum w W1(mu_u, mu_v)`` over probability measures on T with
    ``mu_t = delta_t`` at terminals, as one LP over measures and couplings."""
    exact = inst.exact
    tidx = inst.terminal_index()
    k = len(inst.terminals)
    dt = as_number_array(inst.d_t.dist, exact=exact)
    lp = LPBuilder()
    mu: dict[int, list[int]] = {}
    for v in inst.free:
        mu[v] = lp.add_vars(k, lb=0)
        lp.add_row({j: 1 for j in mu[v]}, "==", 1)
    base = 0 if exact else 0.0
    for u, v, w in inst.g.edges:
        w = _num(w, exact)
        if w == 0:
            continue
        if u in tidx and v in tidx:
            base += w * dt[tidx[u], tidx[v]]
            continue
        pi = [[lp.add_var(lb=0, obj=w * dt[s, t]) for t in range(k)] for s in range(k)]
        for s in range(k):
            row = {pi[s][t]: 1 for t in range(k)}
            if u in tidx:
                lp.add_row(row, "==", 1 if s == tidx[u] else 0)
            else:
                row[mu[u][s]] = -1
                lp.add_row(row, "==", 0)
        for t in range(k):
            row = {pi[s][t]: 1 for s in range(k)}
            if v in tidx:
                lp.add_row(row, "==", 1 if t == tidx[v] else 0)
            else:
                row[mu[v][t]] = -1
                lp.add_row(row, "==", 0)
    measures: dict[int, tuple] = {}
    one, zero = (1, 0) if exact else (1.0, 0.0)
    for t, i in tidx.items():
        measures[t] = tuple(one if j == i else zero for j in range(k))
    if lp.n_vars == 0:
        return base, measures
    sol = solve_lp(lp.build(), arithmetic)
    _require_optimal(sol, inst, "EMD")
    for v, cols in mu.items():
        measures[v] = tuple(sol.x[j] for j in cols)
    return sol.objective + base, dict(sorted(measures.items()))


def emd_objective(inst: ZeroExtensionInstance, measures: dict):
    """Re-price a family of measures with independent W1 computations."""
    from .wasserstein import w1_distance

    total = 0
    for u, v, w in inst.g.edges:
        if w == 0:
            continue
        val, _ = w1_distance(list(measures[u]), list(measures[v]), inst.d_t)
        total += w * val
    return total


def relaxation_chain_check(inst: ZeroExtensionInstance, *, arithmetic: str = "auto") -> ZeroExtensionResult:
    """Run OPT, MET and EMD and audit ``MET <= EMD <= OPT``."""
    opt, part = opt_brute_force(inst)
    met, metric = met_relaxation(inst, arithmetic=arithmetic)
    emd, measures = emd_relaxation(inst, arithmetic=arithmetic)
    recomputed = emd_objective(inst, measures)
    all_exact = all(not isinstance(v, float) for v in (opt, met, emd, recomputed))
    if all_exact:
        ok = met <= emd <= opt and recomputed == emd
    else:
        tol = CHAIN_TOL * (1.0 + abs(float(opt)))
        ok = float(met) <= float(emd) + tol and float(emd) <= float(opt) + tol
        ok = ok and abs(float(recomputed) - float(emd)) <= tol
    if not ok:
        raise InternalConsistencyError(
            f"relaxation chain violated: MET={met}, EMD={emd} (re-priced {recomputed}), OPT={opt}"
        )
    return ZeroExtensionResult(opt, met, emd, part, metric, measures, recomputed)


def star_instance() -> ZeroExtensionInstance:
    """K_{1,3} with the three leaves as terminals at mutual distance 1."""
    g = WeightedGraph(4, ((0, 1, 1), (0, 2, 1), (0, 3, 1)))
    d = FiniteMetric.from_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]], points=(1, 2, 3))
    return ZeroExtensionInstance(g, (1, 2, 3), d)
