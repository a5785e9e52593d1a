"""Exact/float number plumbing shared by every module.

Exact data is represented by ``int`` and :class:`fractions.Fraction` scalars held
in ``dtype=object`` arrays; anything else is coerced to ``float64``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np

FLOAT_TOL = 1e-12


def is_exact_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, Rational)) and not isinstance(x, bool)


def is_exact_array(a: np.ndarray) -> bool:
    return a.dtype == object


def as_number_array(values, *, exact: bool | None = None) -> np.ndarray:
    """Return ``values`` as an ndarray, object-typed iff every entry is rational.

    ``exact=True`` forces rational conversion (floats are converted exactly);
    ``exact=False`` forces float64.
    """
    if isinstance(values, np.ndarray) and values.dtype != object and exact is not True:
        return values.astype(float)
    arr = np.array(values, dtype=object)
    flat = arr.ravel()
    if exact is None:
        exact = all(is_exact_scalar(v) for v in flat)
    if not exact:
        return np.array(arr.tolist(), dtype=float).reshape(arr.shape)
    out = np.empty(arr.shape, dtype=object)
    oflat = out.ravel()
    for i, v in enumerate(flat):
        oflat[i] = _to_rational(v)
    return out


def _to_rational(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, str):
        return _to_rational(Fraction(v))
    f = Fraction(v)
    return f.numerator if f.denominator == 1 else f


def rational(v):
    """Exact rational view of a scalar (floats converted bit-exactly)."""
    return _to_rational(v)


def is_zero(x, tol: float = 0.0) -> bool:
    if is_exact_scalar(x):
        return x == 0
    return abs(x) <= tol


def parse_number(v):
    """Decode a JSON scalar: ints stay ints, ``"p/q"`` strings become Fractions."""
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
        return _to_rational(Fraction(v))
    raise TypeError(f"cannot parse number from {v!r}")


def encode_number(v):
    """Encode a scalar for JSON with a canonical, round-trippable form."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return v.numerator
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    raise TypeError(f"cannot encode {type(v).__name__}")


def to_float(v) -> float:
    return float(v)
