"""Wasserstein-1 (earthmover) geometry on a finite metric space.

The norm of a zero-sum vector ``f`` is the cheapest transport of ``f+`` onto
``f-``.  It is computed by min-cost flow on the bipartite graph
``supp f+ x supp f-``; the flow potentials, closed up to a 1-Lipschitz function
on the whole space, give the Kantorovich certificate ``sum f*g = ||f||``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._numeric import FLOAT_TOL, as_number_array, is_exact_array
from .errors import DomainError, InternalConsistencyError
from .graphs import WeightedGraph
from .metric import FiniteMetric, check_subset, magnify, shortest_path_metric
from .opt.flow import FlowNetwork, min_cost_flow


@dataclass(frozen=True)
class SignedMeasure:
    """A vector in R_0^X, stored in the point order of its base."""

    base: tuple
    values: np.ndarray

    def __post_init__(self):
        vals = as_number_array(self.values)
        if vals.shape != (len(self.base),):
            raise DomainError("one value per base point required")
        total = vals.sum() if vals.size else 0
        if is_exact_array(vals) and vals.size:
            if total != 0:
                raise DomainError(f"signed measure must sum to zero, got {total}")
        elif abs(total) > FLOAT_TOL * (1.0 + float(np.abs(vals).sum() if vals.size else 0)):
            raise DomainError(f"signed measure must sum to zero, got {total}")
        vals.flags.writeable = False
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "values", vals)

    @classmethod
    def on(cls, d: FiniteMetric, values) -> "SignedMeasure":
        return cls(d.points, values)

    @classmethod
    def dirac_difference(cls, d: FiniteMetric, x: int, y: int) -> "SignedMeasure":
        """``e_x - e_y``."""
        v = np.zeros(d.n, dtype=object)
        v[:] = 0
        v[x] += 1
        v[y] -= 1
        return cls(d.points, v)

    @property
    def exact(self) -> bool:
        return is_exact_array(self.values)

    def positive(self) -> np.ndarray:
        return np.where(self.values > 0, self.values, 0 * self.values)

    def negative(self) -> np.ndarray:
        return np.where(self.values < 0, -self.values, 0 * self.values)

    def l1(self):
        return np.abs(self.values).sum()

    def __sub__(self, other: "SignedMeasure") -> "SignedMeasure":
        return SignedMeasure(self.base, self.values - other.values)

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        return SignedMeasure(self.base, self.values + other.values)

    def scale(self, lam) -> "SignedMeasure":
        return SignedMeasure(self.base, self.values * lam)


@dataclass(frozen=True)
class TransportPlan:
    plan: np.ndarray
    cost: object

    def marginals(self):
        return self.plan.sum(axis=1), self.plan.sum(axis=0)


@dataclass(frozen=True)
class LipschitzPotential:
    g: np.ndarray

    def lipschitz_excess(self, d: FiniteMetric):
        """``max |g(x)-g(y)| - d(x,y)``; nonpositive iff 1-Lipschitz."""
        diff = np.abs(self.g[:, None] - self.g[None, :]) - d.dist
        return diff.max() if diff.size else 0

    def is_lipschitz(self, d: FiniteMetric, tol: float = 1e-9) -> bool:
        ex = self.lipschitz_excess(d)
        return ex <= 0 if is_exact_array(self.g) and d.exact else float(ex) <= tol


@dataclass(frozen=True)
class W1Result:
    value: object
    plan: TransportPlan
    potential: LipschitzPotential
    gap: object


def _check_base(f: SignedMeasure, d: FiniteMetric):
    if len(f.base) != d.n:
        raise DomainError("measure and metric have different point sets")


def w1_norm(f: SignedMeasure, d: FiniteMetric) -> W1Result:
    """``||f||_W1 = W1(f+, f-)`` with an optimal plan and a Kantorovich potential."""
    _check_base(f, d)
    exact = f.exact and d.exact
    vals = as_number_array(f.values, exact=exact)
    dist = as_number_array(d.dist, exact=exact)
    n = d.n
    zero = 0 if exact else 0.0
    pos = [i for i in range(n) if vals[i] > 0]
    neg = [i for i in range(n) if vals[i] < 0]
    plan = np.zeros((n, n), dtype=object if exact else float)
    if exact:
        plan[:] = 0
    if not pos:
        g = np.zeros(n, dtype=object if exact else float)
        if exact:
            g[:] = 0
        return W1Result(zero, TransportPlan(plan, zero), LipschitzPotential(g), zero)
    supplies = [vals[i] for i in pos] + [vals[j] for j in neg]
    arcs = [(a, len(pos) + b, dist[x, y]) for a, x in enumerate(pos) for b, y in enumerate(neg)]
    res = min_cost_flow(FlowNetwork(tuple(supplies), tuple(arcs)))
    for k, (a, b, _) in enumerate(arcs):
        plan[pos[a], neg[b - len(pos)]] = _tidy(res.flow[k], exact)
    value = _tidy(res.cost, exact)
    # Kantorovich potential: g = -p on the support, closed over the demand side
    g_sup = {x: -res.potentials[a] for a, x in enumerate(pos)}
    g_sup.update({y: -res.potentials[len(pos) + b] for b, y in enumerate(neg)})
    g = np.empty(n, dtype=object if exact else float)
    for z in range(n):
        g[z] = _tidy(min(g_sup[y] + dist[z, y] for y in neg), exact)
    pairing = sum((vals[i] * g[i] for i in range(n)), zero)
    gap = value - pairing
    tol = 1e-9 * (1.0 + abs(float(value)))
    if (gap != 0) if exact else abs(gap) > tol:
        raise InternalConsistencyError(f"Kantorovich pairing {pairing} does not match transport cost {value}")
    return W1Result(value, TransportPlan(plan, value), LipschitzPotential(g), gap)


def _tidy(v, exact):
    if exact:
        v = Fraction(v)
        return v.numerator if v.denominator == 1 else v
    return float(v)


def w1_distance(mu, nu, d: FiniteMetric):
    """Optimal coupling cost between two nonnegative measures of equal mass."""
    mu = as_number_array(mu)
    nu = as_number_array(nu)
    exact = is_exact_array(mu) and is_exact_array(nu) and d.exact
    mu, nu = as_number_array(mu, exact=exact), as_number_array(nu, exact=exact)
    if mu.shape != (d.n,) or nu.shape != (d.n,):
        raise DomainError("measures must have one entry per point")
    if (mu < 0).any() or (nu < 0).any():
        raise DomainError("measures must be nonnegative")
    diff = mu.sum() - nu.sum()
    if (diff != 0) if exact else abs(diff) > FLOAT_TOL * (1.0 + float(mu.sum())):
        raise DomainError("measures must have equal total mass")
    f = mu - nu
    res = w1_norm(SignedMeasure(d.points, f), d)
    plan = res.plan.plan.copy()
    for i in range(d.n):
        plan[i, i] += min(mu[i], nu[i])
    return res.value, TransportPlan(plan, res.value)


# ---------------------------------------------------------------------------
# sandwich bounds


@dataclass(frozen=True)
class SandwichReport:
    l1: object
    norm: object
    lower: object
    upper: object
    passed: bool

    @property
    def slack_lower(self):
        return self.norm - self.lower

    @property
    def slack_upper(self):
        return self.upper - self.norm


def w1_sandwich_check(f: SignedMeasure, d: FiniteMetric, *, r=None, tol: float = 1e-9) -> SandwichReport:
    """Check ``(min+ d / 2) ||f||_1 <= ||f||_W1 <= (diam / 2) ||f||_1``.

    With ``r`` given, ``d`` is read as the unmagnified metric on S, the norm is
    taken in its r-magnification at every point, and the bounds become
    ``r ||f||_1 <= ||f|| <= (r + diam / 2) ||f||_1``.
    """
    _check_base(f, d)
    l1 = f.l1()
    exact = f.exact and d.exact and not isinstance(r, float)
    half = Fraction(1, 2) if exact else 0.5
    if r is None:
        norm = w1_norm(f, d).value
        lo = (d.min_positive() if d.n > 1 else 0) * l1 * half
        hi = d.diam() * l1 * half
    else:
        if not r > 0:
            raise DomainError("magnification r must be positive")
        norm = w1_norm(f, magnify(d, range(d.n), r)).value
        lo = r * l1
        hi = (r + d.diam() * half) * l1
    if exact:
        ok = lo <= norm <= hi
    else:
        ok = float(lo) <= float(norm) + tol and float(norm) <= float(hi) + tol
    return SandwichReport(l1, norm, lo, hi, bool(ok))


# ---------------------------------------------------------------------------
# Poincare inequality on expanders


@dataclass(frozen=True)
class PoincareReport:
    lhs: float
    rhs: float
    factor: float
    edge_average: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def poincare_check(
    g: WeightedGraph,
    s: Sequence[int],
    r,
    F: Mapping[int, SignedMeasure] | Sequence | np.ndarray,
    phi,
    *,
    tol: float = 1e-9,
) -> PoincareReport:
    """Both sides of the W1 Poincare inequality on the r-magnified expander.

    ``lhs = n^-2 sum_{x<y} ||F(x)-F(y)||`` (unordered pairs, matching the
    convention under which the inequality follows from edge expansion) and
    ``rhs = (2r + diam_G S) / ((2r + 1) phi) * |E|^-1 sum_{xy in E} ||F(x)-F(y)||``
    with norms in W1(S, d_{G_r(S)}).  ``F`` gives one zero-sum vector over S
    (in S's order) per vertex.
    """
    if not (0 < phi <= 1):
        raise DomainError("phi must lie in (0, 1]; pass min(phi, 1)")
    n = g.n
    s = check_subset(s, n)
    dg = shortest_path_metric(g)
    ds = magnify(dg, s, r).restrict(s)
    rows = [F[x].values if isinstance(F[x], SignedMeasure) else F[x] for x in range(n)]
    exact = all(is_exact_array(as_number_array(v)) for v in rows) and ds.exact
    vec = [as_number_array(v, exact=exact) for v in rows]
    for v in vec:
        if v.shape != (len(s),):
            raise DomainError("each F(x) must have one entry per point of S")

    cache: dict[tuple[int, int], object] = {}

    def dist(x, y):
        key = (x, y) if x < y else (y, x)
        if key not in cache:
            diff = vec[x] - vec[y]
            cache[key] = w1_norm(SignedMeasure(ds.points, diff), ds).value
        return cache[key]

    total = 0
    for x in range(n):
        for y in range(x + 1, n):
            total += dist(x, y)
    edge_sum = sum(dist(u, v) for u, v, _ in g.edges)
    diam_s = dg.restrict(s).diam()
    if exact and not isinstance(r, float) and not isinstance(phi, float):
        lhs = Fraction(total) / n**2
        factor = (2 * Fraction(r) + diam_s) / ((2 * Fraction(r) + 1) * Fraction(phi))
        edge_avg = Fraction(edge_sum) / g.num_edges
        rhs = factor * edge_avg
        ok = lhs <= rhs
    else:
        lhs = float(total) / n**2
        factor = (2 * float(r) + float(diam_s)) / ((2 * float(r) + 1) * float(phi))
        edge_avg = float(edge_sum) / g.num_edges
        rhs = factor * edge_avg
        ok = lhs <= rhs + tol * (1 + abs(rhs))
    return PoincareReport(lhs, rhs, factor, edge_avg, bool(ok))
