"""Vietoris-Rips systems: cluster hierarchies, the glued wedge complex, GF(2) homology."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from umapstab import _kernels
from umapstab._numeric import TOL, dedup_sorted, leq, within
from umapstab.epmetric import EpMetric
from umapstab.errors import ParameterError, ResourceError
from umapstab.neighborhood import NeighborhoodSystem, _star_block, umap_metric

__all__ = [
    "Filtration",
    "MergeEvent",
    "LabeledComplex",
    "BettiReport",
    "ExcisionReport",
    "critical_values",
    "components_at",
    "merge_tree",
    "wedge_edges",
    "wedge_components_at",
    "excision_check",
    "clique_complex_at",
    "wedge_complex",
    "betti_gf2",
    "MAX_COMPLEX_POINTS",
    "MAX_CELLS",
]

MAX_COMPLEX_POINTS = 25
MAX_CELLS = 500_000


def _blocks_from_labels(points, labels):
    blocks = {}
    for i, lab in enumerate(labels):
        blocks.setdefault(int(lab), []).append(points[i])
    return tuple(tuple(blocks[r]) for r in sorted(blocks))


def _union_find_blocks(points, edges):
    parent = list(range(len(points)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    return _blocks_from_labels(points, [find(i) for i in range(len(points))])


def critical_values(m: EpMetric) -> list:
    """Sorted distinct finite off-diagonal distances (near-ties merged in float mode)."""
    n = len(m)
    if m.exact:
        d = m.dist.tolist()
        vals = sorted({d[i][j] for i in range(n) for j in range(i + 1, n) if not math.isinf(d[i][j])})
        return vals
    iu = np.triu_indices(n, 1)
    vals = m.dist[iu]
    vals = np.sort(vals[np.isfinite(vals)])
    return [float(v) for v in dedup_sorted(vals.tolist(), exact=False)]


def components_at(m: EpMetric, s) -> tuple:
    """Path components of ``V(X, d)_s``: connectivity of the graph ``{d <= s}``.

    Pairs at infinite distance are never joined, so at ``s = inf`` the blocks
    are the global components.

    Blocks list points in the total order and are ordered by their least point.
    """
    if s < 0:
        raise ParameterError("scale must be nonnegative")
    n = len(m)
    if m.exact:
        d = m.dist.tolist()
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if within(d[i][j], s, True)]
        return _union_find_blocks(m.points, edges)
    # infinite distances never form edges, even at s = inf
    thr = np.finfo(np.float64).max if math.isinf(s) else float(s) + TOL
    labels = _kernels.threshold_labels(np.ascontiguousarray(m.dist, dtype=np.float64), thr)
    return _blocks_from_labels(m.points, labels)


@dataclass(frozen=True)
class MergeEvent:
    s: object
    absorbed: str
    into: str


@dataclass(frozen=True)
class Filtration:
    """The pi_0 hierarchy of an ep-metric: merges and partitions at each critical value."""

    points: tuple
    critical_values: tuple
    partitions: tuple
    merges: tuple
    roots: tuple
    exact: bool = False

    def partition_at(self, s) -> tuple:
        """Replay the merge list up to scale ``s``."""
        idx = {p: i for i, p in enumerate(self.points)}
        edges = [(idx[e.absorbed], idx[e.into]) for e in self.merges if leq(e.s, s, self.exact)]
        return _union_find_blocks(self.points, edges)


def merge_tree(m: EpMetric) -> Filtration:
    """Single-linkage merge tree of ``m``.

    Edges are processed by (critical value, then lexicographic point order);
    the block whose least point comes later is absorbed.
    """
    n = len(m)
    crit = critical_values(m)
    d = m.dist.tolist()
    edges = [(d[i][j], i, j) for i in range(n) for j in range(i + 1, n) if not math.isinf(d[i][j])]
    edges.sort()
    if not m.exact:
        # snap near-tied weights onto the anchor of their run, as critical_values does
        snapped, anchor = [], None
        for w, i, j in edges:
            if anchor is None or w > anchor + TOL:
                anchor = w
            snapped.append((anchor, i, j))
        edges = sorted(snapped)
    us = np.array([e[1] for e in edges], dtype=np.int64)
    vs = np.array([e[2] for e in edges], dtype=np.int64)
    eidx, absorbed, into = _kernels.merge_sequence(n, us, vs)
    merges = tuple(
        MergeEvent(edges[e][0], m.points[a], m.points[b])
        for e, a, b in zip(eidx.tolist(), absorbed.tolist(), into.tolist())
    )
    partitions = tuple(components_at(m, s) for s in crit)
    absorbed_set = {e.absorbed for e in merges}
    roots = tuple(p for p in m.points if p not in absorbed_set)
    return Filtration(m.points, tuple(crit), partitions, merges, roots, m.exact)


def wedge_edges(ns: NeighborhoodSystem):
    """Labelled 1-cells of the glued system: ``(weight, u, v, label)`` with ``u < v``.

    Each star contributes its spokes and the pairwise sums between spokes.
    """
    ns._require_weights()
    out = []
    for x in range(len(ns)):
        members, block = _star_block(ns, x)
        for a, b in combinations(range(len(members)), 2):
            u, v = members[a], members[b]
            out.append((block[a][b], min(u, v), max(u, v), x))
    return out


def wedge_components_at(ns: NeighborhoodSystem, s) -> tuple:
    """Path components of the glued system ``V(X, N)_s``.

    Only vertices are shared between stars, so this is connectivity over all
    star edges with ``D_x(u, v) <= s``.
    """
    if s < 0:
        raise ParameterError("scale must be nonnegative")
    edges = [(u, v) for w, u, v, _ in wedge_edges(ns) if leq(w, s, ns.exact)]
    return _union_find_blocks(ns.points, edges)


@dataclass(frozen=True)
class ExcisionReport:
    verdict: bool
    scales: tuple
    diffs: tuple  # (s, wedge partition, colimit partition) where they differ

    def __bool__(self):
        return self.verdict


def excision_check(ns: NeighborhoodSystem) -> ExcisionReport:
    """Compare pi_0 of the glued stars with pi_0 of Rips on the colimit metric.

    Tested at 0 and at every critical value of the colimit metric and of the
    star edges; components are constant between consecutive values.
    """
    D = umap_metric(ns)
    star_vals = [w for w, *_ in wedge_edges(ns)]
    zero = Fraction(0) if ns.exact else 0.0
    vals = sorted(set(critical_values(D)) | set(star_vals) | {zero})
    if not ns.exact:
        vals = dedup_sorted(vals, exact=False)
    diffs = []
    for s in vals:
        a = wedge_components_at(ns, s)
        b = components_at(D, s)
        if a != b:
            diffs.append((s, a, b))
    return ExcisionReport(not diffs, tuple(vals), tuple(diffs))


@dataclass(frozen=True)
class LabeledComplex:
    """Cells ``(label, simplex)`` glued along a shared vertex set.

    ``simplex`` is a sorted tuple of at least two vertex indices.  Cells with
    different labels are distinct even when their vertex sets coincide;
    vertices carry no label.
    """

    points: tuple
    cells: tuple
    cap: int

    def count_by_dim(self) -> list:
        counts = [len(self.points)]
        for _, sigma in self.cells:
            dim = len(sigma) - 1
            while len(counts) <= dim:
                counts.append(0)
            counts[dim] += 1
        return counts


def _check_size(n):
    if n > MAX_COMPLEX_POINTS:
        raise ResourceError(f"{n} points exceeds the complex guard of {MAX_COMPLEX_POINTS}")


def _cliques(n, adjacent, cap, limit):
    """All cliques with 2..cap+1 vertices of an adjacency predicate, as sorted tuples."""
    out = []

    def extend(clique, candidates):
        for pos, v in enumerate(candidates):
            c = clique + (v,)
            if len(c) >= 2:
                out.append(c)
                if len(out) > limit:
                    raise ResourceError(f"more than {limit} cells")
            if len(c) <= cap:
                extend(c, [w for w in candidates[pos + 1 :] if adjacent(v, w)])

    extend((), list(range(n)))
    return out


def clique_complex_at(m: EpMetric, s, cap: int) -> LabeledComplex:
    """Rips complex at scale ``s``: every subset of finite diameter ``<= s``, up to dimension ``cap``."""
    n = len(m)
    _check_size(n)
    if cap < 1:
        raise ParameterError("cap must be at least 1")
    d = m.dist.tolist()
    cells = _cliques(n, lambda u, v: within(d[u][v], s, m.exact), cap, MAX_CELLS)
    return LabeledComplex(m.points, tuple((None, c) for c in cells), cap)


def wedge_complex(ns: NeighborhoodSystem, s, cap: int) -> LabeledComplex:
    """The glued system ``V(X, N)_s``: one labelled Rips complex per star."""
    _check_size(len(ns))
    if cap < 1:
        raise ParameterError("cap must be at least 1")
    cells = []
    for x in range(len(ns)):
        members, block = _star_block(ns, x)
        order = sorted(range(len(members)), key=lambda a: members[a])
        local = _cliques(
            len(members),
            lambda a, b: within(block[order[a]][order[b]], s, ns.exact),
            cap,
            MAX_CELLS - len(cells),
        )
        cells.extend((ns.points[x], tuple(members[order[a]] for a in c)) for c in local)
    return LabeledComplex(ns.points, tuple(cells), cap)


@dataclass(frozen=True)
class BettiReport:
    euler_characteristic: int
    betti: tuple
    cell_counts: tuple

    def to_dict(self):
        return {"chi": self.euler_characteristic, "betti": list(self.betti)}


def _pack(columns, nbits):
    nwords = max(1, (nbits + 63) // 64)
    arr = np.zeros((len(columns), nwords), dtype=np.uint64)
    for r, col in enumerate(columns):
        for b in col:
            arr[r, b >> 6] |= np.uint64(1) << np.uint64(b & 63)
    return arr


def betti_gf2(c: LabeledComplex) -> BettiReport:
    """Betti numbers over GF(2) for dimensions ``0..cap`` and the Euler characteristic.

    Faces of ``(x, sigma)`` are ``(x, tau)`` for codimension-one ``tau`` with at
    least two vertices, otherwise the shared vertex.
    """
    if len(c.cells) > MAX_CELLS:
        raise ResourceError(f"{len(c.cells)} cells exceeds the guard of {MAX_CELLS}")
    by_dim = {0: [(None, (i,)) for i in range(len(c.points))]}
    for cell in c.cells:
        by_dim.setdefault(len(cell[1]) - 1, []).append(cell)
    top = max(by_dim)
    index = {dim: {cell: k for k, cell in enumerate(cells)} for dim, cells in by_dim.items()}
    ranks = {0: 0}
    for dim in range(1, top + 1):
        cells = by_dim.get(dim, [])
        faces = index.get(dim - 1, {})
        cols = []
        for label, sigma in cells:
            col = []
            for drop in range(len(sigma)):
                tau = sigma[:drop] + sigma[drop + 1 :]
                key = (None, tau) if len(tau) == 1 else (label, tau)
                col.append(faces[key])
            cols.append(col)
        ranks[dim] = _kernels.gf2_rank(_pack(cols, len(faces))) if cols else 0
    counts = [len(by_dim.get(dim, [])) for dim in range(top + 1)]
    chi = sum((-1) ** dim * k for dim, k in enumerate(counts))
    betti = []
    for dim in range(min(top, c.cap) + 1):
        kernel = counts[dim] - ranks[dim]
        betti.append(kernel - ranks.get(dim + 1, 0))
    return BettiReport(chi, tuple(betti), tuple(counts))
