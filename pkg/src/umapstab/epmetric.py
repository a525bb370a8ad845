"""Finite extended pseudo-metric spaces and their wedge (colimit) metric."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from umapstab import _kernels
from umapstab._numeric import INF, leq, to_exact
from umapstab.errors import StructuralError

__all__ = [
    "EpMetric",
    "GlobalPartition",
    "Violation",
    "validate",
    "wedge_colimit",
    "global_components",
    "restrict",
    "shortest_paths",
]


def _as_matrix(dist, n, exact):
    try:
        arr = np.array(dist, dtype=object)
    except ValueError:
        raise StructuralError("distance matrix is ragged") from None
    if arr.shape != (n, n):
        raise StructuralError(f"distance matrix has shape {arr.shape}, expected ({n}, {n})")
    if exact:
        try:
            return np.vectorize(to_exact, otypes=[object])(arr) if n else arr
        except (TypeError, ValueError) as exc:
            raise StructuralError(f"bad distance entry: {exc}") from None
    arr = arr.astype(np.float64)
    if np.isnan(arr).any():
        raise StructuralError("distance matrix contains NaN")
    return arr


@dataclass(frozen=True, eq=False)
class EpMetric:
    """A finite set with a symmetric ``[0, inf]``-valued distance matrix.

    ``points`` fixes the total order.  ``exact=True`` stores ``Fraction``
    entries in an object array; otherwise a float64 array.  The matrix is made
    read-only on construction.
    """

    points: tuple
    dist: np.ndarray
    exact: bool = False

    def __post_init__(self):
        pts = tuple(str(p) for p in self.points)
        if not pts:
            raise StructuralError("empty point set")
        if len(set(pts)) != len(pts):
            raise StructuralError("duplicate point identifiers")
        n = len(pts)
        arr = _as_matrix(self.dist, n, self.exact)
        arr.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dist", arr)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(pts)})

    def __len__(self):
        return len(self.points)

    def index(self, p) -> int:
        try:
            return self._index[str(p)]
        except KeyError:
            raise StructuralError(f"unknown point {p!r}") from None

    def d(self, x, y):
        return self.dist[self.index(x), self.index(y)]

    def is_finite(self) -> bool:
        return all(not math.isinf(v) for v in self.dist.ravel().tolist())

    @classmethod
    def discrete(cls, points, exact=False):
        """The metric with every off-diagonal distance infinite."""
        n = len(points)
        m = [[0 if i == j else INF for j in range(n)] for i in range(n)]
        return cls(tuple(points), m, exact)

    def to_exact(self) -> EpMetric:
        if self.exact:
            return self
        return EpMetric(self.points, self.dist.tolist(), exact=True)

    def to_float(self) -> EpMetric:
        if not self.exact:
            return self
        return EpMetric(self.points, [[float(v) for v in row] for row in self.dist.tolist()], exact=False)

    def equals(self, other: EpMetric, tol: float = 1e-9) -> bool:
        """Same points, and entries equal (exactly when both sides are exact)."""
        if self.points != other.points:
            return False
        a, b = self.dist.tolist(), other.dist.tolist()
        exact = self.exact and other.exact
        for ra, rb in zip(a, b):
            for x, y in zip(ra, rb):
                if math.isinf(x) or math.isinf(y):
                    if x != y:
                        return False
                elif exact:
                    if x != y:
                        return False
                elif abs(float(x) - float(y)) > tol:
                    return False
        return True


@dataclass(frozen=True)
class Violation:
    kind: str  # "diagonal" | "negative" | "symmetry" | "triangle"
    points: tuple

    def __str__(self):
        return f"{self.kind} violation {self.points}"


def validate(m: EpMetric) -> list[Violation]:
    """Check the ep-metric axioms; return one report per offending pair/triple."""
    n = len(m)
    if m.dist.shape != (n, n):
        raise StructuralError("distance matrix does not match the point count")
    d = m.dist.tolist()
    p = m.points
    out = []
    for i in range(n):
        if d[i][i] != 0:
            out.append(Violation("diagonal", (p[i],)))
    for i in range(n):
        for j in range(n):
            if d[i][j] < 0:
                out.append(Violation("negative", (p[i], p[j])))
            if j > i and d[i][j] != d[j][i]:
                out.append(Violation("symmetry", (p[i], p[j])))
    # (x, y, z) reported once, with y the intermediate point and x before z
    for i in range(n):
        for j in range(n):
            dij = d[i][j]
            if math.isinf(dij) or j == i:
                continue
            for k in range(i + 1, n):
                if k != j and not leq(d[i][k], dij + d[j][k], m.exact):
                    out.append(Violation("triangle", (p[i], p[j], p[k])))
    return out


def shortest_paths(weights: np.ndarray, exact: bool) -> np.ndarray:
    """All-pairs shortest paths over a symmetric weight matrix with zero diagonal.

    Pivots run over the point order, so float results are bit-deterministic.
    """
    if not exact:
        d = np.array(weights, dtype=np.float64, order="C", copy=True)
        _kernels.floyd_warshall(d)
        return d
    d = weights.tolist()
    n = len(d)
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == INF:
                continue
            di = d[i]
            for j in range(n):
                c = dik + dk[j]
                if c < di[j]:
                    di[j] = c
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = d[i][j]
    return out


def _leg_minimum(metrics: Sequence[EpMetric]) -> np.ndarray:
    base = metrics[0].dist
    if metrics[0].exact:
        w = np.array(base, dtype=object, copy=True)
        for m in metrics[1:]:
            w = np.minimum(w, m.dist)
        return w
    w = np.array(base, dtype=np.float64, copy=True)
    for m in metrics[1:]:
        np.minimum(w, m.dist, out=w)
    return w


def wedge_colimit(metrics: Iterable[EpMetric]) -> EpMetric:
    """Glue ep-metrics on a common ordered point set into their colimit.

    ``D(x, y)`` is the cheapest polygonal path from ``x`` to ``y`` where each
    leg may use any of the input metrics; i.e. shortest paths on the graph
    weighted by the pointwise minimum of the inputs.  If any input is exact,
    all inputs are converted to exact arithmetic.
    """
    metrics = list(metrics)
    if not metrics:
        raise StructuralError("wedge of an empty family")
    pts = metrics[0].points
    for m in metrics[1:]:
        if m.points != pts:
            raise StructuralError("wedge inputs must share the same ordered point set")
    exact = any(m.exact for m in metrics)
    if exact:
        metrics = [m.to_exact() for m in metrics]
    w = _leg_minimum(metrics)
    return EpMetric(pts, shortest_paths(w, exact), exact)


@dataclass(frozen=True)
class GlobalPartition:
    """Global components: maximal blocks with pairwise finite distance."""

    blocks: tuple
    representatives: tuple

    def block_of(self, p):
        for b in self.blocks:
            if p in b:
                return b
        raise StructuralError(f"unknown point {p!r}")


def global_components(m: EpMetric) -> GlobalPartition:
    n = len(m)
    finite = np.array([[not math.isinf(v) for v in row] for row in m.dist.tolist()], dtype=np.float64)
    # closure of the finiteness relation: components of the graph {finite}
    labels = _kernels.threshold_labels(np.ascontiguousarray(1.0 - finite), 0.5)
    blocks = {}
    for i in range(n):
        blocks.setdefault(int(labels[i]), []).append(m.points[i])
    ordered = tuple(tuple(blocks[r]) for r in sorted(blocks))
    return GlobalPartition(ordered, tuple(b[0] for b in ordered))


def restrict(m: EpMetric, block) -> EpMetric:
    """Submetric on a global component (which is then an honest metric space)."""
    members = set(str(p) for p in block)
    if not members:
        raise StructuralError("empty block")
    idx = sorted(m.index(p) for p in members)
    gp = global_components(m)
    comp = gp.block_of(m.points[idx[0]])
    if set(comp) != members:
        raise StructuralError("block is not a global component of the metric")
    sub = m.dist[np.ix_(idx, idx)]
    return EpMetric(tuple(m.points[i] for i in idx), sub.tolist() if m.exact else sub, m.exact)
