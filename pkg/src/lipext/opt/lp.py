"""Revised simplex with dual certificates, in exact rational or float arithmetic.

The exact kernel keeps the basis inverse as sparse rows of Fractions; the float
kernel keeps it as a dense numpy array and refactorises periodically.  Both run
the same two-phase loop: Dantzig pricing, switching to Bland's rule after a run
of degenerate pivots so that the exact kernel cannot cycle.

Every optimal result carries a dual vector for the original rows and a dual
objective recomputed from the original data, so callers can audit the duality
gap without trusting the solver's internal bookkeeping.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .._numeric import encode_number, is_exact_scalar, parse_number
from ..errors import DomainError, SolverError

INF = math.inf
EXACT_NNZ_LIMIT = 2000
SENSES = ("<=", ">=", "==")

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``min`` (or ``max``) ``c.x`` subject to sparse rows and variable bounds.

    The constraint matrix is given as triplets ``(row, col, value)``; ``bounds``
    holds ``(lb, ub)`` per variable with ``None``/``inf`` for missing bounds.
    """

    c: tuple
    triplets: tuple
    senses: tuple
    rhs: tuple
    bounds: tuple
    maximize: bool = False

    def __post_init__(self):
        nv, nr = len(self.c), len(self.rhs)
        if len(self.senses) != nr:
            raise DomainError("one sense per row required")
        if len(self.bounds) != nv:
            raise DomainError("one (lb, ub) pair per variable required")
        for s in self.senses:
            if s not in SENSES:
                raise DomainError(f"unknown row sense {s!r}")
        for i, j, v in self.triplets:
            if not (0 <= i < nr and 0 <= j < nv):
                raise DomainError(f"triplet ({i}, {j}) out of range")
            if isinstance(v, float) and not math.isfinite(v):
                raise DomainError("constraint coefficients must be finite")
        norm = []
        for lb, ub in self.bounds:
            lb = -INF if lb is None else lb
            ub = INF if ub is None else ub
            if lb > ub:
                raise DomainError(f"empty bound interval [{lb}, {ub}]")
            norm.append((lb, ub))
        object.__setattr__(self, "bounds", tuple(norm))

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def nnz(self) -> int:
        return len(self.triplets)

    def is_rational(self) -> bool:
        finite = lambda v: not (isinstance(v, float) and math.isinf(v))  # noqa: E731
        vals = list(self.c) + [v for _, _, v in self.triplets] + list(self.rhs)
        vals += [b for lbub in self.bounds for b in lbub if finite(b)]
        return all(is_exact_scalar(v) for v in vals)

    def row_activity(self, x) -> list:
        act = [0] * self.n_rows
        for i, j, v in self.triplets:
            act[i] += v * x[j]
        return act

    def to_json(self) -> str:
        enc = encode_number
        return json.dumps(
            {
                "c": [enc(v) for v in self.c],
                "triplets": [[i, j, enc(v)] for i, j, v in self.triplets],
                "senses": list(self.senses),
                "rhs": [enc(v) for v in self.rhs],
                "bounds": [[enc(lb), enc(ub)] for lb, ub in self.bounds],
                "maximize": self.maximize,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "LinearProgram":
        d = json.loads(text)
        p = parse_number
        return cls(
            tuple(p(v) for v in d["c"]),
            tuple((int(i), int(j), p(v)) for i, j, v in d["triplets"]),
            tuple(d["senses"]),
            tuple(p(v) for v in d["rhs"]),
            tuple((p(lb), p(ub)) for lb, ub in d["bounds"]),
            bool(d.get("maximize", False)),
        )


class LPBuilder:
    """Incremental construction of a :class:`LinearProgram`."""

    def __init__(self, maximize: bool = False):
        self.maximize = maximize
        self._c: list = []
        self._bounds: list = []
        self._trip: list = []
        self._senses: list = []
        self._rhs: list = []

    def add_var(self, lb=0, ub=None, obj=0) -> int:
        self._c.append(obj)
        self._bounds.append((lb, ub))
        return len(self._c) - 1

    def add_vars(self, count: int, lb=0, ub=None, obj=0) -> list[int]:
        return [self.add_var(lb, ub, obj) for _ in range(count)]

    def set_obj(self, j: int, value):
        self._c[j] = value

    def add_obj(self, j: int, delta):
        self._c[j] = self._c[j] + delta

    def add_row(self, coeffs: Mapping[int, object] | Iterable[tuple[int, object]], sense: str, rhs) -> int:
        i = len(self._rhs)
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict[int, object] = {}
        for j, v in items:
            merged[j] = merged.get(j, 0) + v
        for j, v in merged.items():
            if v != 0:
                self._trip.append((i, j, v))
        self._senses.append(sense)
        self._rhs.append(rhs)
        return i

    @property
    def n_vars(self) -> int:
        return len(self._c)

    @property
    def nnz(self) -> int:
        return len(self._trip)

    def build(self) -> LinearProgram:
        return LinearProgram(
            tuple(self._c), tuple(self._trip), tuple(self._senses), tuple(self._rhs), tuple(self._bounds), self.maximize
        )


@dataclass(frozen=True)
class LPSolution:
    """Solver output.  ``dual`` follows the sign convention of the stated
    problem: for a minimisation, ``>=`` rows have ``dual >= 0`` and ``<=`` rows
    ``dual <= 0`` (reversed for maximisation)."""

    status: str
    x: tuple | None = None
    dual: tuple | None = None
    objective: object = None
    dual_objective: object = None
    gap: object = None
    primal_infeasibility: object = None
    dual_infeasibility: object = None
    arithmetic: str = "float"
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def certified(self, feas_tol: float = 1e-9, gap_rtol: float = 1e-8) -> bool:
        if not self.optimal:
            return False
        if self.arithmetic == "exact":
            return self.primal_infeasibility == 0 and self.dual_infeasibility == 0 and self.gap == 0
        scale = 1.0 + abs(float(self.objective))
        return (
            float(self.primal_infeasibility) <= feas_tol
            and float(self.dual_infeasibility) <= feas_tol
            and abs(float(self.gap)) <= gap_rtol * scale
        )


# ---------------------------------------------------------------------------
# standard form


class _StandardForm:
    """``min cost.x  s.t.  cols x = b, x >= 0`` plus the maps back to the original."""

    def __init__(self, lp: LinearProgram, exact: bool):
        num = (lambda v: Fraction(v)) if exact else float
        self.exact = exact
        self.lp = lp
        sign = -1 if lp.maximize else 1
        nr = lp.n_rows
        rows_of: list[dict[int, object]] = [dict() for _ in range(lp.n_vars)]
        for i, j, v in lp.triplets:
            rows_of[j][i] = rows_of[j].get(i, 0) + num(v)
        rhs = [num(v) for v in lp.rhs]
        cols: list[dict[int, object]] = []
        cost: list = []
        # var_map[j] = (shift, [(col, coefficient)]) so that x_j = shift + sum coef * x'_col
        self.var_map = []
        self.const = num(0)
        bound_rows: list[tuple[int, object]] = []
        for j, (lb, ub) in enumerate(lp.bounds):
            cj = num(lp.c[j]) * sign
            a = rows_of[j]
            if lb != -INF:
                shift = num(lb)
                col = len(cols)
                cols.append(dict(a))
                cost.append(cj)
                self.var_map.append((shift, [(col, 1)]))
                if ub != INF:
                    bound_rows.append((col, num(ub) - shift))
            elif ub != INF:
                shift = num(ub)
                col = len(cols)
                cols.append({i: -v for i, v in a.items()})
                cost.append(-cj)
                self.var_map.append((shift, [(col, -1)]))
            else:
                shift = num(0)
                col = len(cols)
                cols.append(dict(a))
                cols.append({i: -v for i, v in a.items()})
                cost.extend([cj, -cj])
                self.var_map.append((shift, [(col, 1), (col + 1, -1)]))
            if shift != 0:
                self.const += cj * shift
                for i, v in a.items():
                    rhs[i] -= v * shift
        self.n_struct = len(cols)
        # slacks for inequality rows
        slack_of_row: dict[int, int] = {}
        for i, s in enumerate(lp.senses):
            if s == "==":
                continue
            slack_of_row[i] = len(cols)
            cols.append({i: num(1) if s == "<=" else num(-1)})
            cost.append(num(0))
        # upper bounds as extra rows  x'_col + t = ub - lb
        m = nr
        for col, width in bound_rows:
            cols[col][m] = num(1)
            slack_of_row[m] = len(cols)
            cols.append({m: num(1)})
            cost.append(num(0))
            rhs.append(width)
            m += 1
        self.m = m
        self.n_real = len(cols)
        # normalise to rhs >= 0
        self.row_sign = [1] * m
        for i in range(m):
            if rhs[i] < 0:
                self.row_sign[i] = -1
                rhs[i] = -rhs[i]
        if any(s == -1 for s in self.row_sign):
            for col in cols:
                for i in list(col):
                    if self.row_sign[i] == -1:
                        col[i] = -col[i]
        # initial basis: a +1 slack where available, otherwise an artificial
        self.basis = []
        self.artificial = set()
        for i in range(m):
            sc = slack_of_row.get(i)
            if sc is not None and cols[sc][i] == 1:
                self.basis.append(sc)
            else:
                self.artificial.add(len(cols))
                self.basis.append(len(cols))
                cols.append({i: num(1)})
                cost.append(num(0))
        self.cols = cols
        self.cost = cost
        self.b = rhs

    def recover_x(self, xs: Sequence) -> list:
        out = []
        for shift, terms in self.var_map:
            v = shift
            for col, coef in terms:
                v = v + coef * xs[col]
            out.append(v)
        return out


# ---------------------------------------------------------------------------
# kernels


class _ExactKernel:
    def __init__(self, sf: _StandardForm):
        self.sf = sf
        self.m = sf.m
        self.basis = list(sf.basis)
        self.binv: list[dict[int, Fraction]] = [{i: Fraction(1)} for i in range(self.m)]
        self.xb = [Fraction(v) for v in sf.b]
        self.in_basis = set(self.basis)

    def duals(self, cost) -> dict[int, Fraction]:
        y: dict[int, Fraction] = {}
        for i, bj in enumerate(self.basis):
            cb = cost[bj]
            if cb == 0:
                continue
            for k, v in self.binv[i].items():
                y[k] = y.get(k, 0) + cb * v
        return y

    def choose_entering(self, cost, allowed, bland):
        y = self.duals(cost)
        best, best_rc = None, 0
        for j in range(len(self.sf.cols)):
            if j in self.in_basis or not allowed(j):
                continue
            rc = cost[j]
            for i, a in self.sf.cols[j].items():
                yi = y.get(i)
                if yi is not None:
                    rc -= yi * a
            if rc < 0:
                if bland:
                    return j
                if rc < best_rc:
                    best, best_rc = j, rc
        return best

    def direction(self, q):
        col = self.sf.cols[q]
        d = []
        for row in self.binv:
            s = 0
            for i, a in col.items():
                v = row.get(i)
                if v is not None:
                    s += v * a
            d.append(s)
        return d

    def ratio_test(self, d, phase2):
        best, best_ratio, best_var = None, None, None
        for i, di in enumerate(d):
            if di == 0:
                continue
            bj = self.basis[i]
            if phase2 and bj in self.sf.artificial:
                ratio = Fraction(0)
            elif di > 0:
                ratio = self.xb[i] / di
            else:
                continue
            if best is None or ratio < best_ratio or (ratio == best_ratio and bj < best_var):
                best, best_ratio, best_var = i, ratio, bj
        return best, best_ratio

    def pivot(self, r, q, d, theta):
        for i, di in enumerate(d):
            if di != 0:
                self.xb[i] -= theta * di
        self.xb[r] = theta
        dr = d[r]
        prow = {k: v / dr for k, v in self.binv[r].items()}
        self.binv[r] = prow
        for i, di in enumerate(d):
            if i == r or di == 0:
                continue
            row = self.binv[i]
            for k, v in prow.items():
                nv = row.get(k, 0) - di * v
                if nv == 0:
                    row.pop(k, None)
                else:
                    row[k] = nv
        self.in_basis.discard(self.basis[r])
        self.basis[r] = q
        self.in_basis.add(q)

    def values(self):
        xs = [Fraction(0)] * len(self.sf.cols)
        for i, bj in enumerate(self.basis):
            xs[bj] = self.xb[i]
        return xs

    def is_zero(self, v):
        return v == 0


class _FloatKernel:
    REFACTOR_EVERY = 64

    def __init__(self, sf: _StandardForm, tol: float = 1e-9):
        self.sf = sf
        self.m = sf.m
        n = len(sf.cols)
        self.A = np.zeros((self.m, n))
        for j, col in enumerate(sf.cols):
            for i, v in col.items():
                self.A[i, j] = v
        self.b = np.array(sf.b, dtype=float)
        self.basis = list(sf.basis)
        self.in_basis = np.zeros(n, dtype=bool)
        self.in_basis[self.basis] = True
        self.binv = np.eye(self.m)
        self.xb = self.b.copy()
        self.tol = tol
        self.piv_tol = 1e-9
        self.since_refactor = 0
        self.art_mask = np.zeros(n, dtype=bool)
        self.art_mask[list(sf.artificial)] = True

    def refactor(self):
        if self.m == 0:
            return
        B = self.A[:, self.basis]
        try:
            self.binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular basis during refactorisation") from exc
        xb = self.binv @ self.b
        # one step of iterative refinement
        xb += self.binv @ (self.b - B @ xb)
        self.xb = xb
        self.since_refactor = 0

    def duals(self, cost):
        cb = np.asarray(cost, dtype=float)[self.basis]
        return cb @ self.binv if self.m else np.zeros(0)

    def choose_entering(self, cost, allowed_mask, bland):
        y = self.duals(cost)
        rc = cost - y @ self.A if self.m else cost.copy()
        scale = 1.0 + np.abs(cost).max(initial=0.0)
        cand = (rc < -self.tol * scale) & allowed_mask & ~self.in_basis
        idx = np.flatnonzero(cand)
        if idx.size == 0:
            return None
        if bland:
            return int(idx[0])
        return int(idx[np.argmin(rc[idx])])

    def direction(self, q):
        return self.binv @ self.A[:, q]

    def ratio_test(self, d, phase2):
        best, best_ratio, best_var = None, None, None
        for i in np.flatnonzero(np.abs(d) > self.piv_tol):
            di = d[i]
            bj = self.basis[i]
            if phase2 and self.art_mask[bj]:
                ratio = 0.0
            elif di > 0:
                ratio = max(self.xb[i], 0.0) / di
            else:
                continue
            if best is None or ratio < best_ratio - 1e-12 or (abs(ratio - best_ratio) <= 1e-12 and bj < best_var):
                best, best_ratio, best_var = int(i), ratio, bj
        return best, best_ratio

    def pivot(self, r, q, d, theta):
        self.xb -= theta * d
        self.xb[r] = theta
        prow = self.binv[r] / d[r]
        self.binv -= np.outer(d, prow)
        self.binv[r] = prow
        self.in_basis[self.basis[r]] = False
        self.basis[r] = q
        self.in_basis[q] = True
        self.since_refactor += 1
        if self.since_refactor >= self.REFACTOR_EVERY:
            self.refactor()

    def values(self):
        xs = np.zeros(len(self.sf.cols))
        xs[self.basis] = self.xb
        return xs

    def is_zero(self, v):
        return abs(v) <= 1e-12


# ---------------------------------------------------------------------------
# driver


class _Simplex:
    DEGENERATE_STREAK = 25

    def __init__(self, sf: _StandardForm, max_iter: int | None = None):
        self.sf = sf
        self.exact = sf.exact
        self.kernel = _ExactKernel(sf) if sf.exact else _FloatKernel(sf)
        self.iterations = 0
        self.max_iter = max_iter or 50 * (sf.m + len(sf.cols)) + 1000

    def _loop(self, cost, phase2: bool):
        k = self.kernel
        if self.exact:
            art = self.sf.artificial
            allowed = (lambda j: j not in art) if phase2 else (lambda j: True)
        else:
            allowed = ~k.art_mask if phase2 else np.ones(len(self.sf.cols), dtype=bool)
            cost = np.asarray(cost, dtype=float)
        streak = 0
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError("simplex iteration limit reached", {"iterations": self.iterations})
            q = k.choose_entering(cost, allowed, streak >= self.DEGENERATE_STREAK)
            if q is None:
                return OPTIMAL
            d = k.direction(q)
            r, theta = k.ratio_test(d, phase2)
            if r is None:
                return UNBOUNDED
            k.pivot(r, q, d, theta)
            self.iterations += 1
            streak = streak + 1 if k.is_zero(theta) else 0

    def solve(self):
        sf = self.sf
        k = self.kernel
        if sf.artificial:
            zero = Fraction(0) if self.exact else 0.0
            one = Fraction(1) if self.exact else 1.0
            phase1 = [one if j in sf.artificial else zero for j in range(len(sf.cols))]
            self._loop(phase1, phase2=False)
            if not self.exact:
                k.refactor()
            infeas = sum(v for j, v in zip(k.basis, k.xb) if j in sf.artificial)
            scale = 1.0 + max((abs(float(v)) for v in sf.b), default=0.0)
            if (infeas > 0) if self.exact else (infeas > 1e-9 * scale):
                return INFEASIBLE, infeas
        status = self._loop(sf.cost, phase2=True)
        if status == OPTIMAL and not self.exact:
            # refine and re-price until the refactorised basis is stable
            for _ in range(5):
                k.refactor()
                if self._loop(sf.cost, phase2=True) == UNBOUNDED:
                    return UNBOUNDED, None
                if k.since_refactor == 0:
                    break
        return status, None


def _choose_arithmetic(lp: LinearProgram, arithmetic: str) -> bool:
    if arithmetic == "exact":
        return True
    if arithmetic == "float":
        return False
    if arithmetic != "auto":
        raise DomainError(f"unknown arithmetic mode {arithmetic!r}")
    return lp.nnz <= EXACT_NNZ_LIMIT and lp.is_rational()


def solve_lp(lp: LinearProgram, arithmetic: str = "auto", *, max_iter: int | None = None) -> LPSolution:
    """Solve ``lp`` and attach a dual certificate.

    ``arithmetic="auto"`` runs exactly when the data are rational and the
    matrix has at most 2000 nonzeros, and in float otherwise.  In exact mode an
    optimal solution has zero infeasibility and zero duality gap; in float mode
    the residuals are reported and a :class:`SolverError` is raised if they
    exceed 1e-9 (feasibility) or 1e-8 relative (gap).
    """
    exact = _choose_arithmetic(lp, arithmetic)
    sf = _StandardForm(lp, exact)
    smp = _Simplex(sf, max_iter)
    status, info = smp.solve()
    mode = "exact" if exact else "float"
    if status != OPTIMAL:
        diag = {"phase1_residual": info} if status == INFEASIBLE else {}
        return LPSolution(status, arithmetic=mode, iterations=smp.iterations, diagnostics=diag)
    k = smp.kernel
    xs = k.values()
    x = sf.recover_x(xs)
    y_std = k.duals(sf.cost)
    if exact:
        y_std = [y_std.get(i, Fraction(0)) for i in range(sf.m)]
    sign = -1 if lp.maximize else 1
    y_min = [sf.row_sign[i] * y_std[i] for i in range(lp.n_rows)]
    if not exact:
        x = [float(v) for v in x]
        y_min = [float(v) for v in y_min]
    cert = _certificate(lp, x, y_min, exact)
    objective = sum((cj * xj for cj, xj in zip(lp.c, x)), Fraction(0) if exact else 0.0)
    if exact:
        objective = _simplify(objective)
        x = [_simplify(v) for v in x]
        y_min = [_simplify(v) for v in y_min]
    dual = tuple(sign * v for v in y_min)
    dual_obj = sign * cert["dual_objective_min"]
    sol = LPSolution(
        OPTIMAL,
        tuple(x),
        dual,
        objective,
        _simplify(dual_obj) if exact else dual_obj,
        _simplify(sign * objective - cert["dual_objective_min"]) if exact else sign * objective - cert["dual_objective_min"],
        cert["primal_infeasibility"],
        cert["dual_infeasibility"],
        mode,
        smp.iterations,
    )
    if not exact and not sol.certified():
        raise SolverError(
            "float simplex failed to certify optimality after refinement",
            {
                "primal_infeasibility": sol.primal_infeasibility,
                "dual_infeasibility": sol.dual_infeasibility,
                "gap": sol.gap,
                "iterations": sol.iterations,
            },
        )
    return sol


def _simplify(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


def _certificate(lp: LinearProgram, x, y, exact: bool) -> dict:
    """Residuals and Lagrangian dual value for the min-form of ``lp``.

    ``y`` are min-form row multipliers.  The dual value is
    ``b.y + sum_j min over the box of z_j x_j`` with ``z = c - A^T y``; an
    unbounded box term counts as dual infeasibility.
    """
    zero = Fraction(0) if exact else 0.0
    sign = -1 if lp.maximize else 1
    act = [zero] * lp.n_rows
    z = [sign * (Fraction(c) if exact else float(c)) for c in lp.c]
    for i, j, v in lp.triplets:
        v = Fraction(v) if exact else float(v)
        act[i] += v * x[j]
        z[j] -= v * y[i]
    p_inf = zero
    d_inf = zero
    dual_val = zero
    for i, (s, b) in enumerate(zip(lp.senses, lp.rhs)):
        b = Fraction(b) if exact else float(b)
        dual_val += b * y[i]
        if s == "<=":
            p_inf = max(p_inf, act[i] - b)
            d_inf = max(d_inf, y[i])
        elif s == ">=":
            p_inf = max(p_inf, b - act[i])
            d_inf = max(d_inf, -y[i])
        else:
            p_inf = max(p_inf, abs(act[i] - b))
    for j, (lb, ub) in enumerate(lp.bounds):
        if lb != -INF:
            p_inf = max(p_inf, (Fraction(lb) if exact else float(lb)) - x[j])
        if ub != INF:
            p_inf = max(p_inf, x[j] - (Fraction(ub) if exact else float(ub)))
        zj = z[j]
        if zj > 0:
            if lb == -INF:
                d_inf = max(d_inf, zj)
            else:
                dual_val += zj * (Fraction(lb) if exact else float(lb))
        elif zj < 0:
            if ub == INF:
                d_inf = max(d_inf, -zj)
            else:
                dual_val += zj * (Fraction(ub) if exact else float(ub))
    return {
        "primal_infeasibility": _simplify(p_inf) if exact else float(p_inf),
        "dual_infeasibility": _simplify(d_inf) if exact else float(d_inf),
        "dual_objective_min": dual_val,
    }
