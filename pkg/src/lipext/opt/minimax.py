"""Subgradient descent for ``min_F max_(i,j) ||F(i) - F(j)||_2 / denom(i, j)``.

Only the free points move.  Steps follow Polyak's rule toward an adaptive
target level (halved whenever the path length since the last improvement
exceeds a budget), with several restarts.  The returned value is the objective
at the returned assignment, so it is always an upper bound on the minimum.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import DomainError


@dataclass
class RestartTrace:
    start: str
    iterations: int
    best: float
    converged: bool
    history: list = field(default_factory=list)


@dataclass
class MinimaxResult:
    value: float
    assignment: np.ndarray
    lower_bound: float
    converged: bool
    restarts: list

    @property
    def trace(self) -> list:
        return self.restarts


class _Objective:
    def __init__(self, n, pairs, fixed_mask):
        arr = np.array([(i, j) for i, j, _ in pairs], dtype=int).reshape(-1, 2)
        self.I, self.J = arr[:, 0], arr[:, 1]
        self.W = np.array([1.0 / float(w) for *_, w in pairs])
        self.n = n
        self.free_rows = ~fixed_mask

    def ratios(self, F):
        return np.linalg.norm(F[self.I] - F[self.J], axis=1) * self.W

    def value(self, F):
        if self.I.size == 0:
            return 0.0, -1
        r = self.ratios(F)
        p = int(np.argmax(r))
        return float(r[p]), p

    def subgradient(self, F, p):
        G = np.zeros_like(F)
        i, j = self.I[p], self.J[p]
        diff = F[i] - F[j]
        nrm = np.linalg.norm(diff)
        if nrm == 0:
            return G
        v = diff / nrm * self.W[p]
        G[i] += v
        G[j] -= v
        G[~self.free_rows] = 0
        return G

    def eps_subgradient(self, F, eps):
        """Shortest convex combination of the subgradients of all pairs within
        ``eps`` of the max (at most ``MAX_ACTIVE`` of them)."""
        r = self.ratios(F)
        top = np.argsort(-r, kind="stable")[:MAX_ACTIVE]
        top = top[r[top] >= r[top[0]] - eps]
        gs = [self.subgradient(F, int(p)) for p in top]
        if len(gs) == 1:
            return gs[0]
        M = np.array([g.ravel() for g in gs])
        lam = _min_norm_weights(M @ M.T)
        return (lam @ M).reshape(F.shape)


def _min_norm_weights(Q, iters=200):
    """argmin of lam^T Q lam over the simplex.  Small cases enumerate the
    supports; larger ones use projected gradient."""
    k = Q.shape[0]
    if k <= 4:
        best, best_lam = np.inf, None
        for mask in range(1, 1 << k):
            S = [i for i in range(k) if mask >> i & 1]
            try:
                w = np.linalg.solve(Q[np.ix_(S, S)] + 1e-14 * np.eye(len(S)), np.ones(len(S)))
            except np.linalg.LinAlgError:
                continue
            if w.sum() <= 0 or (w < -1e-12).any():
                continue
            lam = np.zeros(k)
            lam[S] = np.maximum(w, 0) / w.sum()
            val = lam @ Q @ lam
            if val < best:
                best, best_lam = val, lam
        if best_lam is not None:
            return best_lam
    lam = np.full(k, 1.0 / k)
    step = 1.0 / max(float(np.linalg.eigvalsh(Q)[-1]), 1e-300)
    for _ in range(iters):
        lam = _project_simplex(lam - step * (Q @ lam))
    return lam


def _project_simplex(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u - css / np.arange(1, v.size + 1) > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def minimize_max_ratio(
    n: int,
    pairs: Sequence[tuple[int, int, float]],
    fixed: Mapping[int, Sequence[float]],
    free: Sequence[int] | None = None,
    *,
    restarts: int = 5,
    seed: int = 0,
    max_iter: int = 20000,
    window: int = 1000,
    rtol: float = 1e-6,
) -> MinimaxResult:
    """Minimise the largest pair ratio over the positions of the free points.

    ``fixed`` maps point index to a vector in R^k; ``free`` defaults to the
    remaining indices.  Restart 0 starts every free point at the centroid of the
    fixed points; later restarts perturb it with a seeded Gaussian.  A restart
    converges when ``window`` consecutive iterations improve its best value by
    less than ``rtol`` relatively; otherwise it stops at ``max_iter`` and the
    trace says so.
    """
    if not fixed:
        raise DomainError("at least one fixed point is required")
    restarts = max(int(restarts), 1)
    for i, j, w in pairs:
        if not w > 0:
            raise DomainError("pair denominators must be positive")
        if not (0 <= i < n and 0 <= j < n):
            raise DomainError("pair index out of range")
    fixed_vals = {int(i): np.asarray(v, dtype=float).ravel() for i, v in fixed.items()}
    k = len(next(iter(fixed_vals.values())))
    if k < 1 or any(len(v) != k for v in fixed_vals.values()):
        raise DomainError("fixed values must share one dimension k >= 1")
    if free is None:
        free = [i for i in range(n) if i not in fixed_vals]
    free = list(free)
    if set(free) & set(fixed_vals) or len(set(free)) + len(fixed_vals) != n:
        raise DomainError("free and fixed must partition the point set")

    fixed_mask = np.zeros(n, dtype=bool)
    fixed_mask[list(fixed_vals)] = True
    obj = _Objective(n, pairs, fixed_mask)
    anchors = np.array(list(fixed_vals.values()))
    centroid = anchors.mean(axis=0)
    spread = float(np.sqrt(((anchors - centroid) ** 2).sum(axis=1).mean())) or 1.0

    base = np.zeros((n, k))
    for i, v in fixed_vals.items():
        base[i] = v
    fixed_pairs = fixed_mask[obj.I] & fixed_mask[obj.J]
    lower = float((np.linalg.norm(base[obj.I] - base[obj.J], axis=1) * obj.W)[fixed_pairs].max(initial=0.0))

    rng = np.random.default_rng(seed)
    best_val, best_F, traces = np.inf, None, []
    for rs in range(restarts):
        F = base.copy()
        if rs == 0:
            F[free] = centroid
            label = "centroid"
        else:
            F[free] = centroid + rng.normal(scale=spread, size=(len(free), k))
            label = f"gaussian#{rs}"
        Fr, tr = _descend(obj, F, lower, spread, max_iter, window, rtol)
        tr.start = label
        traces.append(tr)
        if tr.best < best_val:
            best_val, best_F = tr.best, Fr
    value, _ = obj.value(best_F)
    return MinimaxResult(value, best_F, lower, all(t.converged for t in traces), traces)


RESET_AFTER = 50
MAX_ACTIVE = 16


def _descend(obj: _Objective, F, lower, budget, max_iter, window, rtol):
    f, p = obj.value(F)
    best, best_F = f, F.copy()
    delta = max(0.5 * (f - lower), 1e-12)
    path = 0.0
    since = 0
    marks = deque([best])
    history = [best]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if best <= lower * (1 + 1e-15) or not obj.free_rows.any():
            converged = True
            break
        G = obj.eps_subgradient(F, delta)
        g2 = float((G * G).sum())
        if g2 <= 1e-24:
            # F is delta-optimal; tighten the target or stop
            if delta <= 1e-12 * (1.0 + abs(best)):
                converged = True
                break
            delta *= 0.5
            continue
        target = best - delta
        step = (f - target) / g2
        F = F - step * G
        path += step * np.sqrt(g2)
        f, p = obj.value(F)
        if f <= best - 0.5 * delta:
            best, best_F = f, F.copy()
            path = 0.0
            since = 0
            delta *= 1.5
        else:
            since += 1
            if f < best:
                best, best_F = f, F.copy()
            # target unreachable: too far travelled or too long without progress
            if path > budget or since > RESET_AFTER:
                delta *= 0.5
                path = 0.0
                since = 0
                F = best_F.copy()
                f, p = obj.value(F)
        if it % 100 == 0:
            history.append(best)
        # converged once a whole window improved the best by < rtol relative
        marks.append(best)
        if len(marks) > window:
            if marks.popleft() - best <= rtol * abs(best):
                converged = True
                break
    return best_F, RestartTrace("", it, best, converged, history)
