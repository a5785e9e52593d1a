"""Desk-scale drivers for the two lower-bound constructions.

Expander construction: an r-magnified random regular graph with the boundary
map ``x -> e_x - mean`` into W1 over S.  Twisted-cube construction: the
identity of layer 0 into R^n, extended over the second layer.

All logarithms are natural; every report row records ``log_base = "e"``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapacityError, DomainError, LipextError
from .extension import ExtensionProblem, Target, min_extension_euclidean, min_extension_polyhedral
from .graphs import WeightedGraph, edge_expansion, random_regular_graph
from .metric import (
    FiniteMetric,
    check_rs_condition,
    magnify,
    shortest_path_metric,
    twisted_cube_metric,
    validate_metric,
)
from .wasserstein import SignedMeasure, poincare_check, w1_norm

LOG_BASE = "e"
EXPANDER_MAX_N = 64
HOLDER_MAX_N = 8
HOLDER_DESCENT_MAX_N = 4
ISOMETRY_TOL = 1e-12


# ---------------------------------------------------------------------------
# expander construction


@dataclass(frozen=True)
class ExpanderInstance:
    n: int
    d: int
    seed: int
    graph: WeightedGraph
    s: tuple
    r: float
    boundary: dict
    metric: FiniteMetric  # d_{G_r(S)} on all of V
    s_formula: int
    s_clamped: bool
    isometry_error: float


def s_size_formula(n: int, d: int) -> int:
    return math.floor(n * math.sqrt(d * math.log(d)) / math.sqrt(math.log(n)))


def magnification_radius(n: int, d: int) -> float:
    return math.sqrt(math.log(n)) / math.sqrt(d * math.log(d))


def build_expander_instance(n: int, d: int, seed: int = 0, *, s_size: int | None = None) -> ExpanderInstance:
    """Random d-regular graph, S = first |S| vertices, r-magnification and
    the boundary map ``f(x) = e_x - (1/|S|) sum_z e_z`` (exact rationals).

    ``|S| = min(n, floor(n sqrt(d ln d) / sqrt(ln n)))`` unless ``s_size``
    overrides it; the row records whether the formula was clamped at n.
    """
    if d < 3 or n < 8 or (n * d) % 2:
        raise DomainError(f"expander instance needs d >= 3, n >= 8 and nd even (n={n}, d={d})")
    g = random_regular_graph(n, d, seed)
    formula = s_size_formula(n, d)
    if s_size is None:
        k = min(n, formula)
    else:
        if not 1 <= s_size <= n:
            raise DomainError(f"s_size must lie in [1, {n}]")
        k = int(s_size)
    s = tuple(range(k))
    r = magnification_radius(n, d)
    metric = magnify(shortest_path_metric(g), s, r)
    inv = Fraction(1, k)
    boundary = {}
    for x in s:
        v = np.empty(k, dtype=object)
        v[:] = -inv
        v[x] += 1
        boundary[x] = v
    ds = metric.restrict(s)
    err = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            val = w1_norm(SignedMeasure(ds.points, boundary[s[i]] - boundary[s[j]]), ds).value
            err = max(err, abs(float(val) - float(ds.dist[i, j])))
    if err > ISOMETRY_TOL * (1.0 + float(ds.diam() if k > 1 else 0)):
        raise LipextError(f"boundary map is not isometric (error {err})")
    return ExpanderInstance(n, d, seed, g, s, r, boundary, metric, formula, formula > n and s_size is None, err)


def evaluate_expander_bound(phi, n: int, d: int, diam, s_size: int, r) -> float:
    """``phi / (1 + r|S|/n) * min(|S| ln n / (n d ln d), r (16 r ln d + ln(phi |S| / 8)) / (diam ln d))``.

    Returned without the unnamed universal constant; 0 when the second branch
    is vacuous (``16 r ln d + ln(phi |S| / 8) <= 0``).
    """
    if not 0 < phi <= 1:
        raise DomainError("phi must lie in (0, 1]")
    if s_size < 1:
        raise DomainError("|S| must be positive")
    if not 0 < r <= diam:
        raise DomainError(f"need 0 < r <= diam, got r={r}, diam={diam}")
    phi, r, diam = float(phi), float(r), float(diam)
    ld = math.log(d)
    inner = 16.0 * r * ld + math.log(phi * s_size / 8.0)
    if inner <= 0:
        return 0.0
    first = s_size * math.log(n) / (n * d * ld)
    second = r * inner / (diam * ld)
    return phi / (1.0 + r * s_size / n) * min(first, second)


@dataclass
class ExpanderInstanceReport:
    n: int
    d: int
    seed: int
    phi_used: object = None
    diam: object = None
    S_size: int | None = None
    r: float | None = None
    minL: object = None
    bound_value: float | None = None
    epsilon_discreteness: float | None = None
    poincare_check_result: bool | None = None
    phi_raw: object = None
    phi_method: str | None = None
    diam_S: object = None
    S_formula: int | None = None
    S_clamped: bool | None = None
    isometry_ok: bool | None = None
    lp_gap: object = None
    lp_certified: bool | None = None
    ratio_minL_bound: float | None = None
    poincare_lhs: float | None = None
    poincare_rhs: float | None = None
    log_base: str = LOG_BASE
    status: str = "ok"
    error: str = ""


EXPANDER_COLUMNS = [f for f in ExpanderInstanceReport.__dataclass_fields__]


def expander_row(n: int, d: int, seed: int, *, s_size: int | None = None, arithmetic: str = "auto") -> ExpanderInstanceReport:
    row = ExpanderInstanceReport(n, d, seed)
    try:
        if n > EXPANDER_MAX_N:
            raise CapacityError(f"n={n} exceeds the W1-extension LP cap n <= {EXPANDER_MAX_N}")
        inst = build_expander_instance(n, d, seed, s_size=s_size)
        g, s, r = inst.graph, inst.s, inst.r
        row.S_size, row.r = len(s), r
        row.S_formula, row.S_clamped = inst.s_formula, inst.s_clamped
        row.isometry_ok = True
        dg = shortest_path_metric(g)
        row.diam = dg.diam()
        row.diam_S = dg.restrict(s).diam()
        exp = edge_expansion(g)
        row.phi_raw, row.phi_method = exp.phi, exp.method
        row.phi_used = min(Fraction(1), exp.phi) if isinstance(exp.phi, Fraction) else min(1.0, exp.phi)
        target = Target.wasserstein(inst.metric.restrict(s))
        prob = ExtensionProblem(inst.metric, s, 1, target, inst.boundary)
        sol = min_extension_polyhedral(prob, arithmetic=arithmetic)
        row.minL = sol.constant
        row.lp_gap = sol.trace["gap"]
        row.lp_certified = sol.optimal and abs(float(sol.trace["gap"])) <= 1e-8 * (1 + abs(float(sol.constant)))
        row.bound_value = evaluate_expander_bound(row.phi_used, n, d, row.diam, len(s), r)
        pc = poincare_check(g, s, r, [sol.values[x] for x in range(n)], row.phi_used)
        row.poincare_check_result = pc.passed
        row.poincare_lhs, row.poincare_rhs = float(pc.lhs), float(pc.rhs)
        row.epsilon_discreteness = (2 * r + 1) / (2 * r + float(row.diam_S))
        row.ratio_minL_bound = float(row.minL) / row.bound_value if row.bound_value > 0 else math.inf
    except CapacityError as exc:
        row.status, row.error = "capacity", str(exc)
    except LipextError as exc:
        row.status, row.error = "error", str(exc)
    return row


def run_expander_experiment(n_list, d: int = 4, seed: int = 0, *, s_size: int | None = None, arithmetic: str = "auto"):
    return [expander_row(n, d, seed, s_size=s_size, arithmetic=arithmetic) for n in n_list]


# ---------------------------------------------------------------------------
# twisted-cube construction


@dataclass(frozen=True)
class HolderInstance:
    n: int
    alpha: float
    r: float
    s: float
    metric: FiniteMetric
    layer0: tuple
    boundary: dict
    rs_condition_ok: bool
    isometry_error: float


def holder_parameters(n: int, alpha) -> tuple[float, float]:
    """``r = n^(1/(4 a^2))`` and ``s = n^(-(2a-1)/(4 a^2))``."""
    a = float(alpha)
    return n ** (1.0 / (4 * a * a)), n ** (-(2 * a - 1) / (4 * a * a))


def build_holder_instance(n: int, alpha) -> HolderInstance:
    if not 0.5 < alpha <= 1:
        raise DomainError(f"alpha must lie in (1/2, 1], got {alpha}")
    if not 1 <= n <= HOLDER_MAX_N:
        raise CapacityError(f"holder instance supports 1 <= n <= {HOLDER_MAX_N}, got {n}")
    r, s = holder_parameters(n, alpha)
    ok = check_rs_condition(alpha, r, s)
    metric = twisted_cube_metric(n, alpha, r, s)
    layer0 = tuple(range(2**n))
    boundary = {i: np.array(metric.points[i].word, dtype=float) for i in layer0}
    err = 0.0
    for i in layer0:
        for j in layer0:
            lhs = float(np.linalg.norm(boundary[i] - boundary[j]))
            rhs = float(metric.dist[i, j]) ** float(alpha)
            err = max(err, abs(lhs - rhs))
    return HolderInstance(n, float(alpha), r, s, metric, layer0, boundary, ok, err)


def evaluate_holder_bound(n: int, alpha, r, s) -> float:
    """``sqrt(n) / (s^a sqrt(n) + 2 r^a)``."""
    if n <= 0 or r <= 0 or s <= 0 or alpha <= 0:
        raise DomainError("holder bound needs positive arguments")
    a = float(alpha)
    rn = math.sqrt(n)
    return rn / (float(s) ** a * rn + 2.0 * float(r) ** a)


@dataclass(frozen=True)
class EnfloReport:
    diagonal: object
    edges: object
    passed: bool


def enflo_check(F, *, tol: float = 1e-9) -> EnfloReport:
    """``sum_x |F(x + 1...1) - F(x)|^2 <= sum_j sum_x |F(x + e_j) - F(x)|^2``.

    ``F`` has one row per vertex of the cube, indexed by the integer whose
    binary expansion is the word.
    """
    F = np.asarray(F)
    if F.ndim == 1:
        F = F[:, None]
    size = F.shape[0]
    n = size.bit_length() - 1
    if size != 2**n or n < 1:
        raise DomainError("F must have 2^n rows")
    if n > 10:
        raise CapacityError("enflo_check supports n <= 10")
    idx = np.arange(size)

    def energy(flip):
        diff = F[idx ^ flip] - F
        return (diff * diff).sum()

    diag = energy(size - 1)
    edges = sum((energy(1 << j) for j in range(n)), 0 * diag)
    if F.dtype == object:
        ok = diag <= edges
    else:
        diag, edges = float(diag), float(edges)
        ok = diag <= edges + tol * (1.0 + abs(edges))
    return EnfloReport(diag, edges, bool(ok))


@dataclass
class HolderInstanceReport:
    n: int
    alpha: float
    r: float | None = None
    s: float | None = None
    rs_condition_ok: bool | None = None
    metric_valid: bool | None = None
    minL_upper: float | None = None
    exact_bound: float | None = None
    enflo_ok: bool | None = None
    boundary_error: float | None = None
    bound_ok: bool | None = None
    descent_converged: bool | None = None
    enflo_diagonal: float | None = None
    enflo_edges: float | None = None
    log_base: str = LOG_BASE
    status: str = "ok"
    error: str = ""


HOLDER_COLUMNS = [f for f in HolderInstanceReport.__dataclass_fields__]


def holder_row(n: int, alpha, *, seed: int = 0, restarts: int = 5, max_iter: int = 20000) -> HolderInstanceReport:
    row = HolderInstanceReport(n, float(alpha))
    try:
        if n > HOLDER_DESCENT_MAX_N:
            raise CapacityError(f"Euclidean descent supports n <= {HOLDER_DESCENT_MAX_N}, got {n}")
        inst = build_holder_instance(n, alpha)
        row.r, row.s, row.rs_condition_ok = inst.r, inst.s, inst.rs_condition_ok
        row.boundary_error = inst.isometry_error
        row.metric_valid = validate_metric(inst.metric, exhaustive_limit=inst.metric.n).ok
        prob = ExtensionProblem(inst.metric, inst.layer0, inst.alpha, Target.euclidean(n), inst.boundary)
        sol = min_extension_euclidean(prob, restarts=restarts, seed=seed, max_iter=max_iter)
        row.minL_upper = float(sol.constant)
        row.descent_converged = bool(sol.trace["converged"])
        row.exact_bound = evaluate_holder_bound(n, alpha, inst.r, inst.s)
        row.bound_ok = row.minL_upper >= row.exact_bound - 1e-3
        layer1 = np.asarray(sol.values[2**n :], dtype=float)
        en = enflo_check(layer1)
        row.enflo_ok, row.enflo_diagonal, row.enflo_edges = en.passed, en.diagonal, en.edges
        if not row.bound_ok:
            row.status = "check_failed"
    except CapacityError as exc:
        row.status, row.error = "capacity", str(exc)
    except LipextError as exc:
        row.status, row.error = "error", str(exc)
    return row


def run_holder_experiment(n_list, alpha_list, *, seed: int = 0, restarts: int = 5, max_iter: int = 20000):
    return [holder_row(n, a, seed=seed, restarts=restarts, max_iter=max_iter) for n in n_list for a in alpha_list]


def report_rows(reports) -> list[dict]:
    return [asdict(r) for r in reports]
