import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import pair_reachability, star_pair_distance
from umapstab.epmetric import EpMetric, global_components, validate, wedge_colimit
from umapstab.errors import DomainError, ParameterError, StructuralError
from umapstab.generators import random_ambient, random_system, random_weighted_system
from umapstab.neighborhood import (
    NeighborhoodSystem,
    inclusion_compatible,
    knn,
    neighbourhood_pairs,
    star_metric,
    umap_metric,
    weights,
)

INF = math.inf


def names(ns):
    return {p: list(ns.neighbors_of(p)) for p in ns.points}


def test_knn_line(line):
    assert names(knn(line, 1)) == {"a": ["b"], "b": ["a"], "c": ["b"]}


def test_knn_ties_follow_total_order():
    eq = EpMetric("abc", [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert names(knn(eq, 2)) == {"a": ["b", "c"], "b": ["a", "c"], "c": ["a", "b"]}
    # reversing the declared order reverses the tie-break
    rev = EpMetric("cba", [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert names(knn(rev, 1)) == {"c": ["b"], "b": ["c"], "a": ["c"]}


def test_knn_full(line):
    ns = knn(line, 2)
    for p in ns.points:
        assert set(ns.neighbors_of(p)) == set(line.points) - {p}


def test_knn_errors(line):
    with pytest.raises(ParameterError):
        knn(line, 3)
    with pytest.raises(DomainError):
        knn(EpMetric("ab", [[0, INF], [INF, 0]]), 1)


def test_knn_radius_and_nearest(line):
    ns = knn(line, 2)
    assert ns.radius == (3, 2, 3)
    assert ns.nearest == (1, 1, 2)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1).map(random.Random))
def test_knn_equals_stable_sort(n, r):
    amb = random_ambient(r, n, spread=6)
    k = r.randint(0, n - 1)
    ns = knn(amb, k)
    for i in range(n):
        ranked = sorted((j for j in range(n) if j != i), key=lambda j: (amb.dist[i, j], j))
        assert list(ns.neighbors[i]) == ranked[:k]
        # equal-distance runs appear in ascending total order
        ds = [amb.dist[i, j] for j in ns.neighbors[i]]
        assert ds == sorted(ds)


def test_weights_ambient_verbatim(line):
    ns = weights(knn(line, 2), line, "ambient")
    assert ns.weight("c", "b") == 2 and ns.weight("c", "a") == 3


def test_weights_scaled(line):
    ns = weights(knn(line, 2), line, "scaled")
    assert ns.weight("c", "b") == Fraction(2, 3)
    assert ns.weight("c", "a") == 1


def test_weights_shifted_clamps(line):
    ns = weights(knn(line, 2), line, "shifted", floor=1e-6)
    assert ns.weight("c", "b") == Fraction(1, 10**6)
    assert ns.weight("c", "a") == Fraction(1, 3)
    flt = weights(knn(line.to_float(), 2), line.to_float(), "shifted", floor=1e-6)
    assert flt.weight("c", "b") == 1e-6


def test_weights_reject_duplicate_points():
    dup = EpMetric("abc", [[0, 0, 2], [0, 0, 2], [2, 2, 0]], exact=True)
    ns = knn(dup, 1)
    with pytest.raises(DomainError, match="N_a"):
        weights(ns, dup, "scaled")
    with pytest.raises(DomainError):
        weights(ns, dup, "shifted")
    amb = weights(ns, dup, "ambient", floor=Fraction(1, 100))
    assert amb.weight("a", "b") == Fraction(1, 100)


def test_weights_bad_scheme(line):
    with pytest.raises(ParameterError):
        weights(knn(line, 1), line, "fuzzy")


def test_nonpositive_weights_rejected():
    with pytest.raises(DomainError):
        NeighborhoodSystem("ab", [[1], []], [[0], []])
    with pytest.raises(StructuralError):
        NeighborhoodSystem("ab", [[0], []], [[1], []])


def test_star_one_spoke():
    ns = NeighborhoodSystem.from_mapping("xy", {"x": ["y"]}, {"x": [Fraction(5, 2)]}, exact=True)
    st_ = star_metric(ns, "x").to_epmetric()
    assert st_.d("x", "y") == Fraction(5, 2)
    assert star_metric(ns, "y").to_epmetric().d("x", "y") == INF


def test_star_spoke_sums_and_outside_is_infinite():
    ns = NeighborhoodSystem.from_mapping("xyzu", {"x": ["y", "z"]}, {"x": [1, 2]}, exact=True)
    D = star_metric(ns, "x").to_epmetric()
    assert D.d("y", "z") == 3
    assert D.d("x", "y") == 1 and D.d("x", "z") == 2
    assert all(D.d("u", p) == INF for p in "xyz")
    assert validate(D) == []


def test_star_unknown_point():
    ns = NeighborhoodSystem.from_mapping("xy", {"x": ["y"]}, {"x": [1]})
    with pytest.raises(StructuralError):
        star_metric(ns, "q")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1).map(random.Random))
def test_star_matches_definition(r):
    ns = random_weighted_system(r, n_max=8)
    n = len(ns)
    for x in range(n):
        D = star_metric(ns, ns.points[x]).to_epmetric()
        assert validate(D) == []
        for u in range(n):
            for v in range(n):
                assert D.dist[u, v] == star_pair_distance(ns, x, u, v)


def test_umap_metric_singleton():
    ns = NeighborhoodSystem(["a"], [()], [()])
    D = umap_metric(ns)
    assert D.dist.tolist() == [[0.0]]


def test_umap_metric_line(line):
    D = umap_metric(weights(knn(line, 1), line, "ambient"))
    assert D.d("a", "c") == 3
    assert D.d("a", "b") + D.d("b", "c") == 3


def test_umap_metric_two_clusters():
    amb = EpMetric("abcd", [[0, 1, 50, 51], [1, 0, 49, 50], [50, 49, 0, 1], [51, 50, 1, 0]], exact=True)
    D = umap_metric(weights(knn(amb, 1), amb, "ambient"))
    assert D.d("a", "c") == INF
    assert global_components(D).blocks == (("a", "b"), ("c", "d"))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1).map(random.Random))
def test_umap_metric_is_wedge_of_stars(r):
    ns = random_weighted_system(r, n_max=9)
    dense = [star_metric(ns, p).to_epmetric() for p in ns.points]
    assert umap_metric(ns).equals(wedge_colimit(dense))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1).map(random.Random))
def test_zero_distance_only_on_diagonal(r):
    ns = random_system(r, n_max=10) if r.random() < 0.5 else random_weighted_system(r, n_max=10)
    D = umap_metric(ns)
    n = len(ns)
    for u in range(n):
        for v in range(n):
            assert (D.dist[u, v] == 0) == (u == v)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1).map(random.Random))
def test_finite_iff_neighbourhood_pair_chain(r):
    ns = random_weighted_system(r, n_max=10, k_max=2)
    D = umap_metric(ns)
    assert global_components(D).blocks == pair_reachability(ns)


def test_neighbourhood_pairs_symmetric_closure():
    ns = NeighborhoodSystem.from_mapping("abc", {"a": ["b"], "c": ["b"]}, {"a": [1], "c": [1]})
    assert neighbourhood_pairs(ns) == {frozenset((0, 1)), frozenset((1, 2))}


def test_inclusion_identity_is_compatible(line):
    ns = weights(knn(line, 1), line)
    assert inclusion_compatible(ns, ns, {p: p for p in line.points})


def test_inclusion_weight_growth_is_reported():
    nx = NeighborhoodSystem.from_mapping("xz", {"x": ["z"]}, {"x": [1]}, exact=True)
    ny = NeighborhoodSystem.from_mapping("XZ", {"X": ["Z"]}, {"X": [2]}, exact=True)
    res = inclusion_compatible(nx, ny, {"x": "X", "z": "Z"})
    assert not res.ok
    assert [v[:2] for v in res.violations] == [("x", "z")]


def test_inclusion_subsample_verdict(line, line4):
    nx = weights(knn(line, 1), line)
    same_k = inclusion_compatible(nx, weights(knn(line4, 1), line4), {p: p for p in "abc"})
    assert not same_k.ok
    assert [v[:2] for v in same_k.violations] == [("c", "b")]
    assert inclusion_compatible(nx, weights(knn(line4, 2), line4), {p: p for p in "abc"}).ok


def test_inclusion_must_be_injective(line):
    ns = weights(knn(line, 1), line)
    with pytest.raises(StructuralError):
        inclusion_compatible(ns, ns, {"a": "a", "b": "a", "c": "c"})


def test_float_system_round_trip():
    rng = random.Random(5)
    ns = random_system(rng, exact=False)
    assert not ns.exact and all(isinstance(w, float) for row in ns.weights for w in row)
