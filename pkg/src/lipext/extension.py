"""Smallest Lipschitz (or Holder) constant among extensions of boundary data.

Polyhedral targets (the real line, l1, l-infinity and W1 over a finite metric)
give a single LP whose optimum is certified by its dual.  Euclidean targets go
through the minimax descent and are only ever upper bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from ._numeric import as_number_array, is_exact_array, is_exact_scalar
from .errors import CapacityError, DomainError, InternalConsistencyError, SolverError
from .metric import FiniteMetric, check_subset
from .opt.lp import LPBuilder, solve_lp
from .opt.minimax import minimize_max_ratio
from .wasserstein import SignedMeasure, w1_norm

LP_NNZ_LIMIT = 10**6
KINDS = ("real", "l1", "linf", "l2", "w1")


@dataclass(frozen=True)
class Target:
    """Normed target space: ``real``, ``l1``/``linf``/``l2`` of dimension ``k``,
    or ``w1`` over a finite metric (dimension = its number of points)."""

    kind: str
    k: int = 1
    metric: FiniteMetric | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown target {self.kind!r}")
        if self.kind == "w1":
            if self.metric is None:
                raise DomainError("a W1 target needs a ground metric")
            object.__setattr__(self, "k", self.metric.n)
        if self.kind == "real":
            object.__setattr__(self, "k", 1)
        if self.k < 1:
            raise DomainError("target dimension must be positive")

    @classmethod
    def real(cls):
        return cls("real")

    @classmethod
    def ell1(cls, k):
        return cls("l1", k)

    @classmethod
    def ellinf(cls, k):
        return cls("linf", k)

    @classmethod
    def euclidean(cls, k):
        return cls("l2", k)

    @classmethod
    def wasserstein(cls, metric: FiniteMetric):
        return cls("w1", metric.n, metric)

    @property
    def polyhedral(self) -> bool:
        return self.kind != "l2"

    def norm(self, v):
        if self.kind in ("real", "l1"):
            return np.abs(v).sum()
        if self.kind == "linf":
            return np.abs(v).max()
        if self.kind == "l2":
            return float(np.sqrt(np.sum(np.asarray(v, dtype=float) ** 2)))
        return w1_norm(SignedMeasure(self.metric.points, v), self.metric).value


@dataclass(frozen=True)
class ExtensionProblem:
    ambient: FiniteMetric
    subset: tuple
    alpha: object
    target: Target
    boundary: Mapping

    def __post_init__(self):
        s = check_subset(self.subset, self.ambient.n)
        if not (0 < self.alpha <= 1):
            raise DomainError("Holder exponent must lie in (0, 1]")
        if set(self.boundary) != set(s):
            raise DomainError("boundary data must be given on exactly the subset")
        vals = {}
        for x in s:
            v = self.boundary[x]
            v = as_number_array([v] if np.ndim(v) == 0 else v)
            if v.shape != (self.target.k,):
                raise DomainError(f"boundary value at {x} must have dimension {self.target.k}")
            if self.target.kind == "w1":
                SignedMeasure(self.target.metric.points, v)
            vals[x] = v
        object.__setattr__(self, "subset", s)
        object.__setattr__(self, "boundary", vals)

    @property
    def free(self) -> list[int]:
        s = set(self.subset)
        return [x for x in range(self.ambient.n) if x not in s]

    @property
    def exact(self) -> bool:
        return (
            self.alpha == 1
            and self.ambient.exact
            and all(is_exact_array(v) for v in self.boundary.values())
            and (self.target.metric is None or self.target.metric.exact)
        )

    def denominators(self) -> np.ndarray:
        """``d(x, y)^alpha``; exact when ``alpha = 1`` and the metric is rational."""
        if self.alpha == 1:
            return self.ambient.dist
        return self.ambient.as_float().dist ** float(self.alpha)


@dataclass
class ExtensionSolution:
    values: np.ndarray
    constant: object
    optimal: bool
    trace: dict = field(default_factory=dict)


def holder_constant(values, problem: ExtensionProblem):
    """``max_{x != y} ||F(x) - F(y)|| / d(x, y)^alpha`` over unordered pairs."""
    F = [as_number_array(np.atleast_1d(v)) for v in values]
    if len(F) != problem.ambient.n:
        raise DomainError("values must be given at every point")
    D = problem.denominators()
    best = 0
    for x, y in itertools.combinations(range(len(F)), 2):
        num = problem.target.norm(F[x] - F[y])
        if D[x, y] == 0:
            if num != 0:
                return math.inf
            continue
        ratio = Fraction(num) / D[x, y] if is_exact_scalar(num) and is_exact_scalar(D[x, y]) else float(num) / float(D[x, y])
        if ratio > best:
            best = ratio
    return _tidy(best)


def _tidy(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


def _fixed_lower_bound(problem: ExtensionProblem):
    D = problem.denominators()
    s = problem.subset
    best = 0
    for x, y in itertools.combinations(s, 2):
        num = problem.target.norm(problem.boundary[x] - problem.boundary[y])
        if is_exact_scalar(num) and is_exact_scalar(D[x, y]):
            r = Fraction(num) / D[x, y]
        else:
            r = float(num) / float(D[x, y])
        best = max(best, r)
    return _tidy(best)


def _estimate_nnz(problem: ExtensionProblem, npairs: int) -> int:
    k = problem.target.k
    per = {"real": 4, "linf": 4 * k, "l1": 6 * k + 1, "w1": 3 * k * (k - 1) + 2 * k + 1}[problem.target.kind]
    return npairs * per


def min_extension_polyhedral(
    problem: ExtensionProblem,
    *,
    arithmetic: str = "auto",
    constraint_pairs: Iterable[tuple[int, int]] | None = None,
) -> ExtensionSolution:
    """Solve ``min L`` s.t. ``||F(x) - F(y)|| <= L d(x, y)^alpha`` and ``F = f`` on S.

    Constraints cover every pair with a free endpoint unless ``constraint_pairs``
    restricts them (an optimisation hook; the reported constant is always
    recomputed over all pairs).  W1 norms are encoded by one transport block per
    pair: a flow ``pi >= 0`` on ordered pairs of target points whose divergence
    equals ``F(x) - F(y)`` and whose cost is at most ``L d(x, y)^alpha``.
    """
    t = problem.target
    if not t.polyhedral:
        raise DomainError("Euclidean targets need min_extension_euclidean")
    n, k = problem.ambient.n, t.k
    free = problem.free
    fixed = problem.boundary
    D = problem.denominators()
    if constraint_pairs is None:
        pairs = [(x, y) for x, y in itertools.combinations(range(n), 2) if x not in fixed or y not in fixed]
    else:
        pairs = sorted({(min(x, y), max(x, y)) for x, y in constraint_pairs if x != y})
        pairs = [p for p in pairs if p[0] not in fixed or p[1] not in fixed]
    nnz = _estimate_nnz(problem, len(pairs))
    if nnz > LP_NNZ_LIMIT:
        raise CapacityError(f"extension LP needs about {nnz} nonzeros, limit {LP_NNZ_LIMIT}")

    lower = _fixed_lower_bound(problem)
    lp = LPBuilder()
    L = lp.add_var(lb=lower, obj=1)
    Fvar = {x: lp.add_vars(k, lb=None) for x in free}
    if t.kind == "w1":
        for x in free:
            lp.add_row({j: 1 for j in Fvar[x]}, "==", 0)
    dprime = t.metric.dist if t.kind == "w1" else None

    def diff_terms(x, y, a):
        """Linear form of ``F(x)_a - F(y)_a`` as (coeffs, constant)."""
        coeffs, const = {}, 0
        for pt, sgn in ((x, 1), (y, -1)):
            if pt in fixed:
                const += sgn * fixed[pt][a]
            else:
                coeffs[Fvar[pt][a]] = coeffs.get(Fvar[pt][a], 0) + sgn
        return coeffs, const

    for x, y in pairs:
        dxy = D[x, y]
        if t.kind in ("real", "linf"):
            for a in range(k):
                co, c = diff_terms(x, y, a)
                for sgn in (1, -1):
                    row = {j: sgn * v for j, v in co.items()}
                    row[L] = -dxy
                    lp.add_row(row, "<=", -sgn * c)
        elif t.kind == "l1":
            u = lp.add_vars(k, lb=0)
            for a in range(k):
                co, c = diff_terms(x, y, a)
                for sgn in (1, -1):
                    row = {j: sgn * v for j, v in co.items()}
                    row[u[a]] = -1
                    lp.add_row(row, "<=", -sgn * c)
            row = {j: 1 for j in u}
            row[L] = -dxy
            lp.add_row(row, "<=", 0)
        else:
            pi = {(a, b): lp.add_var(lb=0) for a in range(k) for b in range(k) if a != b}
            for a in range(k):
                co, c = diff_terms(x, y, a)
                row = {j: -v for j, v in co.items()}
                for b in range(k):
                    if b != a:
                        row[pi[(a, b)]] = row.get(pi[(a, b)], 0) + 1
                        row[pi[(b, a)]] = row.get(pi[(b, a)], 0) - 1
                lp.add_row(row, "==", c)
            row = {j: dprime[a, b] for (a, b), j in pi.items()}
            row[L] = -dxy
            lp.add_row(row, "<=", 0)

    sol = solve_lp(lp.build(), arithmetic)
    if not sol.optimal:
        raise SolverError(f"extension LP ended with status {sol.status}", {"status": sol.status})
    if not sol.certified():
        raise SolverError(
            "extension LP failed certification",
            {"gap": sol.gap, "primal": sol.primal_infeasibility, "dual": sol.dual_infeasibility},
        )
    exact = sol.arithmetic == "exact"
    values = np.empty((n, k), dtype=object if exact else float)
    for x in range(n):
        if x in fixed:
            values[x] = fixed[x] if exact else fixed[x].astype(float)
        else:
            values[x] = [sol.x[j] for j in Fvar[x]]
    if exact:
        for x in fixed:
            values[x] = fixed[x]
    l_star = sol.x[L]
    achieved = holder_constant(values, problem)
    if constraint_pairs is None:
        mismatch = (achieved != l_star) if exact else abs(float(achieved) - float(l_star)) > 1e-9 * (1 + abs(float(l_star)))
        if mismatch:
            raise InternalConsistencyError(f"witness constant {achieved} differs from LP optimum {l_star}")
    trace = {
        "lp_objective": l_star,
        "dual_objective": sol.dual_objective,
        "gap": sol.gap,
        "arithmetic": sol.arithmetic,
        "iterations": sol.iterations,
        "pairs": len(pairs),
        "fixed_pair_bound": lower,
    }
    return ExtensionSolution(values, achieved, constraint_pairs is None, trace)


def min_extension_euclidean(
    problem: ExtensionProblem, *, restarts: int = 5, seed: int = 0, max_iter: int = 20000
) -> ExtensionSolution:
    """Descent upper bound for a Euclidean target; never marked optimal."""
    if problem.target.kind != "l2":
        raise DomainError("min_extension_euclidean needs a Euclidean target")
    n = problem.ambient.n
    D = problem.denominators()
    pairs = [(x, y, float(D[x, y])) for x, y in itertools.combinations(range(n), 2)]
    fixed = {x: np.asarray(v, dtype=float) for x, v in problem.boundary.items()}
    res = minimize_max_ratio(n, pairs, fixed, problem.free, restarts=max(restarts, 5), seed=seed, max_iter=max_iter)
    values = res.assignment.copy()
    for x, v in fixed.items():
        values[x] = v
    achieved = holder_constant(values, problem)
    trace = {
        "descent_value": res.value,
        "fixed_pair_bound": res.lower_bound,
        "converged": res.converged,
        "restarts": [
            {"start": r.start, "iterations": r.iterations, "best": r.best, "converged": r.converged}
            for r in res.restarts
        ],
    }
    return ExtensionSolution(values, achieved, False, trace)


def mcshane_extension(problem: ExtensionProblem) -> ExtensionSolution:
    """``F(x) = min_s f(s) + L d(x, s)^alpha`` with ``L = ||f||_Lip(alpha)``."""
    if problem.target.kind != "real":
        raise DomainError("McShane extension needs a real-line target")
    L = _fixed_lower_bound(problem)
    D = problem.denominators()
    n = problem.ambient.n
    exact = problem.exact
    values = np.empty((n, 1), dtype=object if exact else float)
    for x in range(n):
        if x in problem.boundary:
            v = problem.boundary[x][0]
        else:
            v = min(problem.boundary[s][0] + L * D[x, s] for s in problem.subset)
        values[x, 0] = v if exact else float(v)
    achieved = holder_constant(values, problem)
    ok = (achieved == L) if exact else abs(float(achieved) - float(L)) <= 1e-9 * (1 + abs(float(L)))
    if not ok:
        raise InternalConsistencyError(f"McShane extension has constant {achieved}, expected {L}")
    return ExtensionSolution(values, achieved, True, {"boundary_constant": L})


def solve_extension(problem: ExtensionProblem, **kwargs) -> ExtensionSolution:
    if problem.target.polyhedral:
        return min_extension_polyhedral(problem, **kwargs)
    return min_extension_euclidean(problem, **kwargs)
