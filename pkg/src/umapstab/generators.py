"""Seeded random instances for the property suites and ``umapstab verify``."""

from __future__ import annotations

import random
from fractions import Fraction

from umapstab.epmetric import EpMetric
from umapstab.io import point_metric
from umapstab.neighborhood import SCHEMES, NeighborhoodSystem, knn, weights


def random_ambient(rng: random.Random, n: int, exact=True, spread=20) -> EpMetric:
    """Manhattan metric on distinct random integer points in the plane."""
    pts = set()
    while len(pts) < n:
        pts.add((rng.randint(0, spread), rng.randint(0, spread)))
    coords = [list(p) for p in sorted(pts, key=lambda _: rng.random())]
    return point_metric([f"p{i}" for i in range(n)], coords, "manhattan", exact)


def random_epmetric(rng: random.Random, n: int, exact=True, p_edge=0.5, max_w=9) -> EpMetric:
    """Shortest-path closure of a random graph with integer weights; may contain infinities."""
    from umapstab.epmetric import wedge_colimit

    inf = float("inf")
    mat = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                mat[i][j] = mat[j][i] = rng.randint(1, max_w)
    return wedge_colimit([EpMetric([f"p{i}" for i in range(n)], mat, exact)])


def random_system(rng: random.Random, n_max=12, k_max=4, scheme=None, exact=True, floor=1e-6) -> NeighborhoodSystem:
    """k-NN system on a random ambient metric with a random (or given) weight scheme."""
    n = rng.randint(2, n_max)
    k = rng.randint(1, min(k_max, n - 1))
    amb = random_ambient(rng, n, exact)
    return weights(knn(amb, k), amb, scheme or rng.choice(SCHEMES), floor)


def random_weighted_system(rng: random.Random, n_max=12, k_max=4, exact=True) -> NeighborhoodSystem:
    """Arbitrary neighbour sets with random positive rational weights."""
    n = rng.randint(1, n_max)
    nbrs, ws = [], []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        k = rng.randint(0, min(k_max, len(others)))
        row = rng.sample(others, k)
        nbrs.append(tuple(row))
        ws.append(tuple(Fraction(rng.randint(1, 30), rng.randint(1, 6)) for _ in row))
    return NeighborhoodSystem([f"p{i}" for i in range(n)], nbrs, ws, exact=exact)


def random_nested_systems(rng: random.Random, n_max=12, k_max=4, exact=True):
    """A compatible pair ``(nsX, nsY, mapping)`` for an inclusion ``X ⊆ Y``.

    ``nsY`` is a scaled-weight k-NN system on a random ambient metric; each
    ``N_x`` is a random subset of ``N'_x ∩ X`` with weights scaled up by a
    factor >= 1, so the neighbourhood and weight conditions hold by construction.
    """
    n = rng.randint(2, n_max)
    k = rng.randint(1, min(k_max, n - 1))
    amb = random_ambient(rng, n, exact)
    nsY = weights(knn(amb, k), amb, rng.choice(SCHEMES))
    size = rng.randint(1, n)
    keep = sorted(rng.sample(range(n), size))
    pos = {j: a for a, j in enumerate(keep)}
    nbrs, ws = [], []
    for j in keep:
        row, wrow = [], []
        for z, w in zip(nsY.neighbors[j], nsY.weights[j]):
            if z in pos and rng.random() < 0.8:
                row.append(pos[z])
                wrow.append(w * Fraction(rng.randint(4, 8), 4))
        nbrs.append(tuple(row))
        ws.append(tuple(wrow))
    pts = tuple(nsY.points[j] for j in keep)
    nsX = NeighborhoodSystem(pts, tuple(nbrs), tuple(ws), exact=exact)
    return nsX, nsY, {p: p for p in pts}
