"""JSON/CSV serialization with canonical, byte-stable formatting.

Floats are written with Python's shortest round-trip repr, exact rationals as
``"p/q"`` strings (integers stay integers), infinities as ``"inf"``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from ._numeric import encode_number, parse_number
from .errors import DomainError
from .graphs import WeightedGraph
from .metric import FiniteMetric


def to_jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (bool, np.bool_, int, float, Fraction, np.integer, np.floating)):
        return encode_number(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    enc = encode_number(v) if isinstance(v, (int, float, Fraction, np.integer, np.floating)) else v
    return repr(enc) if isinstance(enc, float) else str(enc)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# readers


def _label(v):
    return tuple(_label(x) for x in v) if isinstance(v, list) else v


def _matrix(rows):
    return [[parse_number(v) for v in row] for row in rows]


def metric_from_dict(d: dict) -> FiniteMetric:
    try:
        dist = _matrix(d["dist"])
    except (KeyError, TypeError) as exc:
        raise DomainError(f"metric JSON needs a 'dist' matrix: {exc}") from exc
    points = [_label(p) for p in d.get("points", range(len(dist)))]
    return FiniteMetric.from_matrix(dist, points)


def metric_to_dict(m: FiniteMetric) -> dict:
    return {"points": list(m.points), "dist": m.dist.tolist()}


def graph_from_dict(d: dict) -> WeightedGraph:
    try:
        edges = tuple((int(e[0]), int(e[1]), parse_number(e[2]) if len(e) > 2 else 1) for e in d["edges"])
        return WeightedGraph(int(d["n"]), edges, tuple(_label(x) for x in d["labels"]) if "labels" in d else None)
    except (KeyError, TypeError, IndexError) as exc:
        raise DomainError(f"graph JSON needs 'n' and 'edges': {exc}") from exc


def graph_to_dict(g: WeightedGraph) -> dict:
    out = {"n": g.n, "edges": [list(e) for e in g.edges]}
    if g.labels != tuple(range(g.n)):
        out["labels"] = list(g.labels)
    return out


def measure_values(d: dict, m: FiniteMetric) -> list:
    """Values of a ``{"base": ..., "values": {label: real}}`` document in the
    point order of ``m``; unlisted points get 0."""
    vals = d.get("values", d)
    if isinstance(vals, list):
        if len(vals) != m.n:
            raise DomainError("value list must have one entry per point")
        return [parse_number(v) for v in vals]
    keyed = {str(k): parse_number(v) for k, v in vals.items()}
    names = [str(p) for p in m.points]
    unknown = set(keyed) - set(names)
    if unknown:
        raise DomainError(f"unknown point labels {sorted(unknown)}")
    return [keyed.get(name, 0) for name in names]


def load_json(path: str) -> dict:
    """Read a JSON document; ``@name`` refers to a bundled example."""
    try:
        if path.startswith("@"):
            text = resources.files("lipext").joinpath("data", f"{path[1:]}.json").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        return json.loads(text)
    except FileNotFoundError as exc:
        raise DomainError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from exc


def zext_instance_from_dict(d: dict):
    from .zero_extension import ZeroExtensionInstance

    g = graph_from_dict(d["graph"])
    terms = [g.labels.index(_label(t)) if _label(t) in g.labels else int(t) for t in d["terminals"]]
    dt = FiniteMetric.from_matrix(_matrix(d["d_T"]), points=[g.labels[t] for t in terms])
    return ZeroExtensionInstance(g, tuple(terms), dt)


def extension_problem_from_dict(d: dict, target_kind: str | None = None):
    from .extension import ExtensionProblem, Target

    m = metric_from_dict(d["metric"])
    subset = [int(x) for x in d["subset"]]
    alpha = parse_number(d.get("alpha", 1))
    boundary = {}
    for k, v in d["boundary"].items():
        v = [parse_number(x) for x in v] if isinstance(v, list) else [parse_number(v)]
        boundary[int(k)] = v
    tdoc = d.get("target", {})
    kind = target_kind or tdoc.get("kind", "real")
    kind = {"w1": "w1", "l1": "l1", "linf": "linf", "l2": "l2", "real": "real"}.get(kind, kind)
    if kind == "w1":
        tm = metric_from_dict(tdoc["metric"]) if "metric" in tdoc else m.restrict(subset)
        target = Target.wasserstein(tm)
    elif kind == "real":
        target = Target.real()
    else:
        k = len(next(iter(boundary.values())))
        target = Target(kind, k)
    return ExtensionProblem(m, tuple(subset), alpha, target, boundary)
