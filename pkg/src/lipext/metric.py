"""Finite metric spaces and the constructions built on top of them.

Every constructor returns a :class:`FiniteMetric` with a dense distance matrix.
Rational inputs (ints, Fractions) stay rational wherever the construction is a
rational formula; snowflakes and the twisted cube are necessarily floating point.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from ._numeric import FLOAT_TOL, as_number_array, is_exact_array
from .errors import CapacityError, ConnectivityError, DomainError, ShapeError

TWISTED_CUBE_MAX_N = 14


@dataclass(frozen=True, eq=False)
class FiniteMetric:
    """Labelled point set with a dense symmetric distance matrix.

    The constructor only checks shapes; use :func:`validate_metric` to check the
    metric axioms.
    """

    points: tuple
    dist: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = tuple(self.points)
        dist = self.dist if isinstance(self.dist, np.ndarray) else as_number_array(self.dist)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise ShapeError(f"distance matrix must be square, got shape {dist.shape}")
        if len(pts) != dist.shape[0]:
            raise ShapeError(f"{len(pts)} labels for a {dist.shape[0]}x{dist.shape[0]} matrix")
        if len(set(pts)) != len(pts):
            raise DomainError("point labels must be distinct")
        dist = dist.copy()
        dist.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dist", dist)

    @classmethod
    def from_matrix(cls, dist, points: Sequence[Hashable] | None = None, *, exact: bool | None = None):
        arr = as_number_array(dist, exact=exact)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"distance matrix must be square, got shape {arr.shape}")
        if points is None:
            points = range(arr.shape[0])
        return cls(tuple(points), arr)

    def __len__(self):
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def exact(self) -> bool:
        return is_exact_array(self.dist)

    def index(self, label) -> int:
        return self.points.index(label)

    def diam(self):
        if self.n < 2:
            return 0
        return self.dist.max()

    def min_positive(self):
        """Smallest distance between distinct points (``None`` for one point)."""
        if self.n < 2:
            return None
        iu = np.triu_indices(self.n, 1)
        vals = self.dist[iu]
        pos = [v for v in vals if v > 0]
        return min(pos) if pos else None

    def restrict(self, indices: Sequence[int]) -> "FiniteMetric":
        idx = list(indices)
        return FiniteMetric(tuple(self.points[i] for i in idx), self.dist[np.ix_(idx, idx)])

    def as_float(self) -> "FiniteMetric":
        if not self.exact:
            return self
        return FiniteMetric(self.points, self.dist.astype(float))

    def __eq__(self, other):
        if not isinstance(other, FiniteMetric):
            return NotImplemented
        return self.points == other.points and np.array_equal(self.dist, other.dist)

    __hash__ = None


class HypercubePoint(NamedTuple):
    """A vertex ``(word, layer)`` of two stacked copies of the hypercube."""

    word: tuple
    layer: int


def check_subset(indices: Iterable[int], n: int, *, nonempty: bool = True) -> tuple[int, ...]:
    """Validate a subset handle: distinct in-range indices, order preserved."""
    idx = tuple(int(i) for i in indices)
    if nonempty and not idx:
        raise DomainError("subset must be nonempty")
    if len(set(idx)) != len(idx):
        raise DomainError(f"subset has repeated indices: {idx}")
    for i in idx:
        if not 0 <= i < n:
            raise DomainError(f"subset index {i} out of range for {n} points")
    return idx


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str  # "diagonal" | "symmetry" | "positivity" | "negative" | "triangle"
    points: tuple
    excess: Any

    def __str__(self):
        return f"{self.kind} {self.points} excess={self.excess}"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    n_points: int
    violations: tuple
    n_violations: int
    triples_checked: int
    exhaustive: bool
    tol: float
    semi: bool

    def __bool__(self):
        return self.ok


def validate_metric(
    m,
    tol: float | None = None,
    *,
    semi: bool = False,
    max_report: int = 100,
    exhaustive_limit: int | None = None,
    n_samples: int = 200_000,
    seed: int = 0,
) -> ValidationReport:
    """Check the metric axioms of a distance matrix.

    Reports zero-diagonal, symmetry, positivity (skipped when ``semi``) and
    triangle violations exceeding ``tol``.  Triangle violations are listed as
    ``(x, via, y)`` with ``d(x, y) > d(x, via) + d(via, y) + tol``.  Rational
    matrices are checked with ``tol = 0`` unless told otherwise.

    Matrices with more than ``exhaustive_limit`` points are checked on
    ``n_samples`` random triples instead of all of them.
    """
    if isinstance(m, FiniteMetric):
        labels, d = m.points, m.dist
    else:
        d = as_number_array(m)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ShapeError(f"distance matrix must be square, got shape {d.shape}")
        labels = tuple(range(d.shape[0]))
    n = d.shape[0]
    exact = is_exact_array(d)
    if tol is None:
        tol = 0 if exact else FLOAT_TOL
    if exhaustive_limit is None:
        exhaustive_limit = 64 if exact else 1024

    found: list[Violation] = []
    count = 0

    def note(kind, pts, excess):
        nonlocal count
        count += 1
        if len(found) < max_report:
            found.append(Violation(kind, tuple(labels[p] for p in pts), excess))

    for i in range(n):
        if d[i, i] != 0:
            note("diagonal", (i,), d[i, i])
    for i, j in itertools.combinations(range(n), 2):
        if abs(d[i, j] - d[j, i]) > tol:
            note("symmetry", (i, j), abs(d[i, j] - d[j, i]))
        lo = min(d[i, j], d[j, i])
        if lo < -tol:
            note("negative", (i, j), -lo)
        elif not semi and lo <= 0:
            note("positivity", (i, j), lo)

    exhaustive = n <= exhaustive_limit
    if exhaustive:
        checked = n ** 3
        if exact:
            for k in range(n):
                for i in range(n):
                    dik = d[i, k]
                    for j in range(i + 1, n):
                        if k == i or k == j:
                            continue
                        excess = d[i, j] - dik - d[k, j]
                        if excess > tol:
                            note("triangle", (i, k, j), excess)
        else:
            df = d.astype(float)
            iu = np.triu(np.ones((n, n), dtype=bool), 1)
            for k in range(n):
                excess = df - df[:, k : k + 1] - df[k : k + 1, :]
                bad = np.argwhere((excess > tol) & iu)
                for i, j in bad:
                    if k != i and k != j:
                        note("triangle", (int(i), k, int(j)), float(excess[i, j]))
    else:
        rng = np.random.default_rng(seed)
        trip = rng.integers(0, n, size=(n_samples, 3))
        checked = n_samples
        df = d.astype(float) if not exact else d
        for i, k, j in trip:
            if i == j or k == i or k == j:
                continue
            excess = df[i, j] - df[i, k] - df[k, j]
            if excess > tol:
                note("triangle", (int(i), int(k), int(j)), excess)

    return ValidationReport(
        ok=count == 0,
        n_points=n,
        violations=tuple(found),
        n_violations=count,
        triples_checked=checked,
        exhaustive=exhaustive,
        tol=tol,
        semi=semi,
    )


# ---------------------------------------------------------------------------
# constructions


def floyd_warshall(w: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths on a dense weight matrix (``inf`` = no edge)."""
    dist = w.copy()
    n = dist.shape[0]
    for k in range(n):
        via = dist[:, k : k + 1] + dist[k : k + 1, :]
        dist = np.minimum(dist, via)
    return dist


def shortest_path_metric(g) -> FiniteMetric:
    """Shortest-path metric of a connected graph with positive edge weights."""
    n = g.n
    weights = [w for _, _, w in g.edges]
    exact = all(isinstance(w, (int, Fraction)) for w in weights)
    for u, v, w in g.edges:
        if not w > 0:
            raise DomainError(f"edge ({u}, {v}) has nonpositive weight {w}")
    if exact:
        mat = np.full((n, n), math.inf, dtype=object)
    else:
        mat = np.full((n, n), math.inf)
    for i in range(n):
        mat[i, i] = 0
    for u, v, w in g.edges:
        if w < mat[u, v]:
            mat[u, v] = mat[v, u] = w
    dist = floyd_warshall(mat)
    if n and any(x == math.inf for x in dist.ravel()):
        raise ConnectivityError("graph is disconnected")
    return FiniteMetric(tuple(g.labels), dist)


def magnify(x: FiniteMetric, s: Iterable[int], r) -> FiniteMetric:
    """The r-magnification of ``x`` at the subset ``s``.

    Distinct points are pushed apart by ``r`` for every endpoint lying in ``s``.
    """
    if not r > 0:
        raise DomainError(f"magnification radius must be positive, got {r}")
    s = check_subset(s, x.n, nonempty=False)
    member = np.zeros(x.n, dtype=int)
    member[list(s)] = 1
    bump = member[:, None] + member[None, :]
    if x.exact and isinstance(r, (int, Fraction)):
        dist = x.dist + np.array(bump.tolist(), dtype=object) * r
    else:
        dist = x.dist.astype(float) + float(r) * bump
    np.fill_diagonal(dist, 0)
    return FiniteMetric(x.points, dist)


def snowflake(x: FiniteMetric, alpha) -> FiniteMetric:
    """Raise every distance to the power ``alpha`` in (0, 1]."""
    if not 0 < alpha <= 1:
        raise DomainError(f"snowflake exponent must lie in (0, 1], got {alpha}")
    if alpha == 1:
        return x
    return FiniteMetric(x.points, np.power(x.dist.astype(float), float(alpha)))


def glue_metric(x: FiniteMetric, y: FiniteMetric, sigma, r) -> FiniteMetric:
    """Glue ``x`` onto ``y`` along ``sigma`` with bridges of length ``r``.

    Builds the weighted graph with all pairs inside ``x`` (weights ``d_x``), all
    pairs inside ``y`` (weights ``d_y``) and an edge ``{p, sigma(p)}`` of weight
    ``r`` per point of ``x``, and returns its shortest-path metric.  Points are
    relabelled ``(0, label)`` for ``x`` and ``(1, label)`` for ``y``.

    ``sigma`` may be a mapping between labels, a callable on labels, or a
    sequence of target indices aligned with ``x.points``.
    """
    if not r > 0:
        raise DomainError(f"bridge length must be positive, got {r}")
    targets = _resolve_sigma(x, y, sigma)
    nx_, ny = x.n, y.n
    n = nx_ + ny
    exact = x.exact and y.exact and isinstance(r, (int, Fraction))
    if exact:
        w = np.full((n, n), math.inf, dtype=object)
    else:
        w = np.full((n, n), math.inf)
    w[:nx_, :nx_] = x.dist
    w[nx_:, nx_:] = y.dist
    for i, t in enumerate(targets):
        j = nx_ + t
        if r < w[i, j]:
            w[i, j] = w[j, i] = r
    dist = floyd_warshall(w)
    labels = tuple((0, p) for p in x.points) + tuple((1, q) for q in y.points)
    return FiniteMetric(labels, dist)


def _resolve_sigma(x, y, sigma) -> list[int]:
    if isinstance(sigma, Mapping):
        missing = [p for p in x.points if p not in sigma]
        if missing:
            raise DomainError(f"sigma undefined on {missing}")
        return [y.index(sigma[p]) for p in x.points]
    if callable(sigma):
        return [y.index(sigma(p)) for p in x.points]
    targets = [int(t) for t in sigma]
    if len(targets) != x.n:
        raise DomainError("sigma must assign a target to every point of x")
    for t in targets:
        if not 0 <= t < y.n:
            raise DomainError(f"sigma target {t} out of range")
    return targets


def check_rs_condition(alpha, r, s) -> bool:
    """Sufficient condition on ``(r, s)`` for the twisted cube to be a metric.

    Tests ``(2a)^(2a) s (2r)^(2a-1) >= ((2a)^(2a/(2a-1)) - 1)^(2a-1)`` with a
    relative slack of 1e-12 to absorb rounding in the powers.
    """
    if not 0.5 < alpha <= 1:
        raise DomainError(f"alpha must lie in (1/2, 1], got {alpha}")
    if not (r > 0 and s > 0):
        raise DomainError("r and s must be positive")
    a2 = 2.0 * float(alpha)
    lhs = a2**a2 * float(s) * (2.0 * float(r)) ** (a2 - 1.0)
    rhs = (a2 ** (a2 / (a2 - 1.0)) - 1.0) ** (a2 - 1.0)
    return lhs >= rhs * (1.0 - 1e-12)


class RsConditionWarning(UserWarning):
    """Twisted cube built with parameters outside the sufficient condition."""


def hamming_matrix(n: int) -> np.ndarray:
    words = np.arange(2**n, dtype=np.uint32)
    return np.bitwise_count(words[:, None] ^ words[None, :]).astype(np.int64)


def twisted_cube_points(n: int) -> tuple[HypercubePoint, ...]:
    words = [tuple((w >> (n - 1 - b)) & 1 for b in range(n)) for w in range(2**n)]
    return tuple(HypercubePoint(w, 0) for w in words) + tuple(HypercubePoint(w, 1) for w in words)


def twisted_cube_metric(n: int, alpha, r, s, *, max_n: int = TWISTED_CUBE_MAX_N) -> FiniteMetric:
    """Two copies of the Hamming cube joined by the three-case twisted metric.

    Points ``0 .. 2^n - 1`` form layer 0 (word ``w`` is the binary expansion of
    the index, most significant bit first); the next ``2^n`` points form layer 1.
    Within layer 0 the distance is ``h^(1/(2 alpha))`` for Hamming distance
    ``h``; within layer 1 it is ``min(s h, 2r + h^(1/(2 alpha)))``; across
    layers it is ``r + min(s h, h^(1/(2 alpha)))``.

    Emits :class:`RsConditionWarning` when :func:`check_rs_condition` fails; the
    matrix is still returned and :func:`validate_metric` has the final word.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if n > min(max_n, TWISTED_CUBE_MAX_N):
        raise CapacityError(f"twisted cube with n={n} exceeds the dense-storage cap n <= {min(max_n, TWISTED_CUBE_MAX_N)}")
    if not check_rs_condition(alpha, r, s):
        warnings.warn(
            f"rs-condition fails for alpha={alpha}, r={r}, s={s}; metric axioms not guaranteed",
            RsConditionWarning,
            stacklevel=2,
        )
    r, s = float(r), float(s)
    h = hamming_matrix(n).astype(float)
    root = h ** (1.0 / (2.0 * float(alpha)))
    same0 = root
    same1 = np.minimum(s * h, 2.0 * r + root)
    cross = r + np.minimum(s * h, root)
    dist = np.block([[same0, cross], [cross.T, same1]])
    np.fill_diagonal(dist, 0.0)
    return FiniteMetric(twisted_cube_points(n), dist)


def hamming_metric(n: int) -> FiniteMetric:
    words = tuple(tuple((w >> (n - 1 - b)) & 1 for b in range(n)) for w in range(2**n))
    return FiniteMetric(words, np.array(hamming_matrix(n).tolist(), dtype=object))
