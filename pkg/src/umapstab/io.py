"""Readers and writers for the on-disk formats."""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from umapstab._numeric import serialize, to_exact
from umapstab.epmetric import EpMetric
from umapstab.errors import FormatError, UmapStabError
from umapstab.neighborhood import NeighborhoodSystem

__all__ = [
    "read_distance_csv",
    "write_distance_csv",
    "read_points_csv",
    "read_neighborhood_json",
    "neighborhood_to_dict",
    "read_inclusion_csv",
    "write_json_atomic",
    "point_metric",
]


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [[c.strip() for c in row] for row in csv.reader(fh) if row and any(c.strip() for c in row)]


def _number(tok, exact, allow_inf):
    try:
        v = to_exact(tok) if exact else float(tok)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a number: {tok!r}") from None
    if isinstance(v, float) and (math.isnan(v) or (math.isinf(v) and not allow_inf)):
        raise FormatError(f"non-finite value {tok!r} is not allowed here")
    if v == math.inf and not allow_inf:
        raise FormatError(f"non-finite value {tok!r} is not allowed here")
    return v


def read_distance_csv(path, exact=False) -> EpMetric:
    """First row: identifiers in total order; then one matrix row per point (``inf`` allowed)."""
    rows = _rows(path)
    if not rows:
        raise FormatError(f"{path}: empty distance file")
    ids = rows[0]
    body = rows[1:]
    if len(body) != len(ids) or any(len(r) != len(ids) for r in body):
        raise FormatError(f"{path}: expected a {len(ids)}x{len(ids)} matrix under the header")
    mat = [[_number(t, exact, allow_inf=True) for t in r] for r in body]
    try:
        return EpMetric(tuple(ids), mat, exact)
    except UmapStabError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_distance_csv(m: EpMetric, path) -> None:
    lines = [",".join(m.points)]
    for row in m.dist.tolist():
        lines.append(",".join(str(serialize(v, m.exact)) for v in row))
    _atomic_text(path, "\n".join(lines) + "\n")


def _is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _sqrt_exact(q: Fraction):
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return Fraction(math.sqrt(q))


def point_metric(ids, coords, metric="euclidean", exact=False) -> EpMetric:
    """Distance matrix of a point cloud.  Exact euclidean roots are rational only for perfect squares."""
    n = len(coords)
    mat = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            diffs = [p - q for p, q in zip(coords[a], coords[b])]
            if metric == "manhattan":
                v = sum(abs(t) for t in diffs)
            elif metric == "euclidean":
                sq = sum(t * t for t in diffs)
                v = _sqrt_exact(Fraction(sq)) if exact else math.sqrt(sq)
            else:
                raise FormatError(f"unknown point metric {metric!r}")
            mat[a][b] = mat[b][a] = v
    return EpMetric(tuple(ids), mat, exact)


def read_points_csv(path, metric="euclidean", exact=False) -> EpMetric:
    """One point per row: ``id, x1, x2, ...``.  A non-numeric first row is a header."""
    rows = _rows(path)
    if rows and not all(_is_number(t) for t in rows[0][1:]):
        rows = rows[1:]
    if not rows:
        raise FormatError(f"{path}: no points")
    dim = len(rows[0]) - 1
    if dim < 1:
        raise FormatError(f"{path}: rows need an identifier and at least one coordinate")
    ids, coords = [], []
    for r in rows:
        if len(r) - 1 != dim:
            raise FormatError(f"{path}: point {r[0]!r} has {len(r) - 1} coordinates, expected {dim}")
        ids.append(r[0])
        coords.append([_number(t, exact, allow_inf=False) for t in r[1:]])
    try:
        return point_metric(ids, coords, metric, exact)
    except UmapStabError as exc:
        raise FormatError(f"{path}: {exc}") from None


def read_neighborhood_json(path, exact=False) -> NeighborhoodSystem:
    """``{points: [...], neighbors: {x: [y, ...]}, weights: {x: [w, ...]}}``; weights optional."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    if not isinstance(doc, dict) or "points" not in doc or "neighbors" not in doc:
        raise FormatError(f"{path}: expected an object with 'points' and 'neighbors'")
    w = doc.get("weights")
    if w is not None:
        w = {k: [_number(str(v), exact, allow_inf=False) for v in vals] for k, vals in w.items()}
    try:
        return NeighborhoodSystem.from_mapping(doc["points"], doc["neighbors"], w, exact=exact)
    except UmapStabError as exc:
        raise FormatError(f"{path}: {exc}") from None


def neighborhood_to_dict(ns: NeighborhoodSystem) -> dict:
    out = {
        "points": list(ns.points),
        "neighbors": {p: list(ns.neighbors_of(p)) for p in ns.points},
    }
    if ns.weights is not None:
        out["weights"] = {p: [serialize(v, ns.exact) for v in ws] for p, ws in zip(ns.points, ns.weights)}
    return out


def read_inclusion_csv(path) -> dict:
    """Two columns per row: source identifier, target identifier."""
    mapping = {}
    for r in _rows(path):
        if len(r) != 2:
            raise FormatError(f"{path}: inclusion rows must have exactly two columns")
        if r[0] in mapping:
            raise FormatError(f"{path}: {r[0]!r} is mapped twice")
        mapping[r[0]] = r[1]
    return mapping


def _atomic_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path, payload) -> None:
    _atomic_text(path, json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
