"""Neighbourhood systems, their weights, and the star ep-metrics they generate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

import numpy as np

from umapstab._numeric import INF, TOL, leq, to_exact
from umapstab.epmetric import EpMetric, shortest_paths
from umapstab.errors import DomainError, ParameterError, StructuralError

__all__ = [
    "NeighborhoodSystem",
    "StarMetric",
    "Compatibility",
    "SCHEMES",
    "knn",
    "weights",
    "star_metric",
    "umap_metric",
    "inclusion_compatible",
    "neighbourhood_pairs",
    "full_system",
]

SCHEMES = ("ambient", "scaled", "shifted")
DEFAULT_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class NeighborhoodSystem:
    """Neighbour lists ``N_x`` (as indices into ``points``) with optional weights.

    ``weights[i][j]`` is the weight from ``points[i]`` to its ``j``-th
    neighbour.  ``radius`` and ``nearest`` hold the largest and smallest
    ambient neighbour distance per point when the system came from an
    ambient metric.
    """

    points: tuple
    neighbors: tuple
    weights: tuple | None = None
    radius: tuple | None = None
    nearest: tuple | None = None
    exact: bool = False
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(str(p) for p in self.points)
        if not pts:
            raise StructuralError("empty point set")
        if len(set(pts)) != len(pts):
            raise StructuralError("duplicate point identifiers")
        n = len(pts)
        if len(self.neighbors) != n:
            raise StructuralError("one neighbour list per point is required")
        nbrs = tuple(tuple(int(j) for j in row) for row in self.neighbors)
        for i, row in enumerate(nbrs):
            if i in row:
                raise StructuralError(f"{pts[i]} is listed as its own neighbour")
            if len(set(row)) != len(row):
                raise StructuralError(f"repeated neighbour in N_{pts[i]}")
            if any(j < 0 or j >= n for j in row):
                raise StructuralError(f"neighbour index out of range in N_{pts[i]}")
        w = self.weights
        if w is not None:
            conv = to_exact if self.exact else float
            w = tuple(tuple(conv(v) for v in row) for row in w)
            if len(w) != n or any(len(a) != len(b) for a, b in zip(w, nbrs)):
                raise StructuralError("weights must parallel the neighbour lists")
            for i, row in enumerate(w):
                for j, v in zip(nbrs[i], row):
                    if not v > 0 or math.isinf(v) or (isinstance(v, float) and math.isnan(v)):
                        raise DomainError(f"weight d_{pts[i]}({pts[i]},{pts[j]}) = {v} is not positive and finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "neighbors", nbrs)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(pts)})

    @classmethod
    def from_mapping(cls, points, neighbors: Mapping, weights: Mapping | None = None, exact=False):
        """Build from ``{x: [y, ...]}`` (and ``{x: [w, ...]}``) keyed by identifier."""
        pts = tuple(str(p) for p in points)
        index = {p: i for i, p in enumerate(pts)}
        unknown = set(map(str, neighbors)) - set(pts)
        if unknown:
            raise StructuralError(f"neighbour lists for unknown points {sorted(unknown)}")
        try:
            nbrs = tuple(tuple(index[str(y)] for y in neighbors.get(p, ())) for p in pts)
        except KeyError as exc:
            raise StructuralError(f"unknown neighbour {exc.args[0]!r}") from None
        w = None
        if weights is not None:
            w = tuple(tuple(weights.get(p, ())) for p in pts)
        return cls(pts, nbrs, w, exact=exact)

    def __len__(self):
        return len(self.points)

    def index(self, p) -> int:
        try:
            return self._index[str(p)]
        except KeyError:
            raise StructuralError(f"unknown point {p!r}") from None

    @property
    def has_weights(self) -> bool:
        return self.weights is not None

    def neighbors_of(self, x) -> tuple:
        return tuple(self.points[j] for j in self.neighbors[self.index(x)])

    def weight(self, x, y):
        i, j = self.index(x), self.index(y)
        self._require_weights()
        try:
            return self.weights[i][self.neighbors[i].index(j)]
        except ValueError:
            raise StructuralError(f"{y} is not a neighbour of {x}") from None

    def to_exact(self) -> NeighborhoodSystem:
        if self.exact:
            return self
        return replace(self, exact=True)

    def _require_weights(self):
        if self.weights is None:
            raise StructuralError("neighbourhood system has no weights; call weights() first")


@dataclass(frozen=True, eq=False)
class StarMetric:
    """The ep-metric ``D_x`` generated by the spokes from ``center``.

    Only the block on ``members`` (the centre, then its neighbours) is stored;
    every other off-diagonal entry is infinite.
    """

    points: tuple
    center: int
    members: tuple
    block: tuple
    exact: bool = False

    def d(self, u, v):
        if u == v:
            return Fraction(0) if self.exact else 0.0
        try:
            a, b = self.members.index(u), self.members.index(v)
        except ValueError:
            return INF
        return self.block[a][b]

    def to_epmetric(self) -> EpMetric:
        n = len(self.points)
        zero = Fraction(0) if self.exact else 0.0
        dense = [[zero if i == j else INF for j in range(n)] for i in range(n)]
        for a, u in enumerate(self.members):
            for b, v in enumerate(self.members):
                dense[u][v] = self.block[a][b]
        return EpMetric(self.points, dense, self.exact)


def knn(ambient: EpMetric, k: int) -> NeighborhoodSystem:
    """k nearest neighbours, chosen one at a time with ties going to the earliest point.

    Repeated argmin rather than a sort: at each step the first remaining point
    (in the total order) at minimal distance is taken.  In float mode
    distances within ``1e-9`` count as tied.
    """
    n = len(ambient)
    if k < 0:
        raise ParameterError("k must be nonnegative")
    if n > 1 and k >= n:
        raise ParameterError(f"k={k} must be at most |X|-1={n - 1}")
    if n == 1 and k > 0:
        raise ParameterError("a single point has no neighbours")
    if not ambient.is_finite():
        raise DomainError("k-NN needs an ambient metric with finite distances")
    d = ambient.dist.tolist()
    exact = ambient.exact
    neighbors, radius, nearest = [], [], []
    for x in range(n):
        remaining = [y for y in range(n) if y != x]
        chosen = []
        for _ in range(k):
            best = remaining[0]
            for y in remaining[1:]:
                if (d[x][y] < d[x][best]) if exact else (d[x][y] < d[x][best] - TOL):
                    best = y
            chosen.append(best)
            remaining.remove(best)
        neighbors.append(tuple(chosen))
        raw = [d[x][y] for y in chosen]
        radius.append(max(raw) if raw else None)
        nearest.append(min(raw) if raw else None)
    return NeighborhoodSystem(ambient.points, tuple(neighbors), None, tuple(radius), tuple(nearest), exact)


def weights(
    ns: NeighborhoodSystem,
    ambient: EpMetric,
    scheme: str = "ambient",
    floor: float = DEFAULT_FLOOR,
) -> NeighborhoodSystem:
    """Attach spoke weights computed from the ambient metric.

    ``ambient``: ``d(x,y)``; ``scaled``: ``d(x,y)/r_x``; ``shifted``:
    ``(d(x,y) - eta_x)/r_x``, where ``r_x`` and ``eta_x`` are the largest and
    smallest ambient distances from ``x`` into ``N_x``.  Every weight is then
    raised to at least ``floor`` so that all weights are strictly positive.
    """
    if scheme not in SCHEMES:
        raise ParameterError(f"unknown weight scheme {scheme!r}; expected one of {SCHEMES}")
    if ambient.points != ns.points:
        raise StructuralError("ambient metric and neighbourhood system have different point sets")
    exact = ambient.exact
    if exact:
        floor = Fraction(repr(floor)) if isinstance(floor, float) else to_exact(floor)
    else:
        floor = float(floor)
    if not floor > 0:
        raise ParameterError("floor must be positive")
    d = ambient.dist.tolist()
    out_w, radius, nearest = [], [], []
    for x, row in enumerate(ns.neighbors):
        raw = [d[x][y] for y in row]
        if any(math.isinf(v) for v in raw):
            raise DomainError(f"infinite ambient distance inside N_{ns.points[x]}")
        if not raw:
            out_w.append(())
            radius.append(None)
            nearest.append(None)
            continue
        r, eta = max(raw), min(raw)
        if scheme != "ambient" and min(raw) == 0:
            raise DomainError(
                f"zero ambient distance inside N_{ns.points[x]} (duplicate points); "
                f"r_x={r} cannot scale the {scheme} scheme"
            )
        if scheme == "ambient":
            w = raw
        elif scheme == "scaled":
            w = [v / r for v in raw]
        else:
            w = [(v - eta) / r for v in raw]
        out_w.append(tuple(max(v, floor) for v in w))
        radius.append(r)
        nearest.append(eta)
    return NeighborhoodSystem(ns.points, ns.neighbors, tuple(out_w), tuple(radius), tuple(nearest), exact)


def _star_block(ns: NeighborhoodSystem, i: int):
    row = ns.neighbors[i]
    w = ns.weights[i]
    members = (i,) + row
    zero = Fraction(0) if ns.exact else 0.0
    m = len(members)
    block = [[zero] * m for _ in range(m)]
    for a in range(1, m):
        block[0][a] = block[a][0] = w[a - 1]
        for b in range(a + 1, m):
            block[a][b] = block[b][a] = w[a - 1] + w[b - 1]
    return members, tuple(tuple(r) for r in block)


def star_metric(ns: NeighborhoodSystem, x) -> StarMetric:
    """``D_x``: spokes ``d_x(x,y)``, ``d_x(y,x) + d_x(x,z)`` between spokes, infinite elsewhere."""
    ns._require_weights()
    i = ns.index(x)
    members, block = _star_block(ns, i)
    return StarMetric(ns.points, i, members, block, ns.exact)


def umap_metric(ns: NeighborhoodSystem) -> EpMetric:
    """The colimit ``D`` of all star metrics ``D_x``.

    Equal to ``wedge_colimit([star_metric(ns, x).to_epmetric() for x])``, but
    the pointwise minimum of the stars is accumulated from their blocks
    instead of from dense matrices.
    """
    ns._require_weights()
    n = len(ns)
    if ns.exact:
        w = np.empty((n, n), dtype=object)
        w.fill(INF)
        for i in range(n):
            w[i, i] = Fraction(0)
    else:
        w = np.full((n, n), INF)
        np.fill_diagonal(w, 0.0)
    for i in range(n):
        members, block = _star_block(ns, i)
        for a, u in enumerate(members):
            for b, v in enumerate(members):
                if block[a][b] < w[u, v]:
                    w[u, v] = block[a][b]
    return EpMetric(ns.points, shortest_paths(w, ns.exact), ns.exact)


@dataclass(frozen=True)
class Compatibility:
    """Outcome of checking that an inclusion respects neighbourhoods and weights."""

    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok


def inclusion_compatible(nsX: NeighborhoodSystem, nsY: NeighborhoodSystem, mapping: Mapping) -> Compatibility:
    """Check ``i(N_x) ⊆ N'_{i(x)}`` and ``d'_{i(x)}(i(x), i(z)) <= d_x(x, z)`` for all ``z in N_x``.

    ``mapping`` sends every identifier of ``nsX`` to an identifier of ``nsY``.
    Violations are ``(x, z, reason)`` triples.
    """
    nsX._require_weights()
    nsY._require_weights()
    mapping = {str(a): str(b) for a, b in mapping.items()}
    missing = [p for p in nsX.points if p not in mapping]
    if missing:
        raise StructuralError(f"inclusion is undefined on {missing}")
    if len(set(mapping.values())) != len(mapping):
        raise StructuralError("inclusion is not injective")
    for b in mapping.values():
        nsY.index(b)
    exact = nsX.exact and nsY.exact
    violations = []
    for xi, x in enumerate(nsX.points):
        yi = nsY.index(mapping[x])
        target = nsY.neighbors[yi]
        for z_idx, w in zip(nsX.neighbors[xi], nsX.weights[xi]):
            z = nsX.points[z_idx]
            iz = nsY.index(mapping[z])
            if iz not in target:
                violations.append((x, z, f"{mapping[z]} is not a neighbour of {mapping[x]}"))
                continue
            w2 = nsY.weights[yi][target.index(iz)]
            if not leq(w2, w, exact):
                violations.append((x, z, f"weight grows from {w} to {w2}"))
    return Compatibility(not violations, tuple(violations))


def neighbourhood_pairs(ns: NeighborhoodSystem) -> set:
    """Unordered index pairs ``{x, y}`` with ``x in N_y`` or ``y in N_x``."""
    return {frozenset((i, j)) for i, row in enumerate(ns.neighbors) for j in row}


def full_system(points, weight=1, exact=True) -> NeighborhoodSystem:
    """Every ``N_x`` is ``X - {x}`` with a constant weight."""
    pts = tuple(str(p) for p in points)
    n = len(pts)
    nbrs = tuple(tuple(j for j in range(n) if j != i) for i in range(n))
    w = tuple(tuple(weight for _ in row) for row in nbrs)
    return NeighborhoodSystem(pts, nbrs, w, exact=exact)
