from itertools import product

import pytest
from hypothesis import given, strategies as st

from mosg import polytope as P
from mosg.lp import dominated_by_hull
from mosg.polytope import DwcPolytope, PolytopeError, Region
from mosg.rational import to_q

from conftest import grid, points, polytopes

Q = to_q
TRI = P.from_points([(0, 1), (1, 0)])


def pt(*xs):
    return P.from_points([tuple(Q(x) for x in xs)])


def test_canonical_forms():
    p = P.from_points([(Q("1/2"), 1), (1, Q("1/2")), (Q("1/4"), Q("1/4"))])
    assert p.generators == ((Q("1/2"), 1), (1, Q("1/2")))
    assert repr(p) == "dwc{(1/2,1),(1,1/2)}"
    assert P.from_points([(0, 1), (Q("1/2"), Q("1/2")), (1, 0)]) == TRI


def test_worked_examples():
    assert P.intersect(TRI, pt(1, "1/2")) == P.from_points([(Q("1/2"), Q("1/2")), (1, 0)])
    half = P.weighted_combination([(Q("1/2"), P.full_box(2)), (Q("1/2"), TRI)])
    assert half == P.from_points([(Q("1/2"), 1), (1, Q("1/2"))])
    a = P.from_points([(0, 1), (Q("1/2"), Q("1/2"))])
    b = P.from_points([(Q("1/2"), Q("1/2")), (1, 0)])
    assert P.intersect(a, b) == pt("1/2", "1/2")


def test_three_dim():
    simplex = P.from_points([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    cut = P.intersect(simplex, P.from_points([(Q("1/2"), Q("1/2"), Q("1/2"))]))
    assert P.contains_point(cut, (Q("1/3"), Q("1/3"), Q("1/3")))
    assert P.contains_point(cut, (Q("1/2"), Q("1/2"), 0))
    assert not P.contains_point(cut, (Q("1/2"), Q("1/2"), Q("1/10")))
    assert P.is_subset(cut, simplex)
    assert len(simplex.constraints) >= 1


def test_bad_inputs():
    with pytest.raises(PolytopeError):
        P.from_points([(Q(2), 0)])
    with pytest.raises(PolytopeError):
        P.from_points([])
    with pytest.raises(PolytopeError):
        P.intersect(TRI, P.full_box(3))
    with pytest.raises(PolytopeError):
        P.weighted_combination([(Q("1/3"), TRI), (Q("1/3"), TRI)])


def test_json_roundtrip():
    p = P.from_points([(Q("1/2"), 1), (1, Q("1/3"))])
    assert DwcPolytope.from_json(p.to_json()) == p


def test_strict_containment():
    box = P.full_box(2)
    assert P.contains_point(box, (Q("1/2"), Q("1/2")), strict=True)
    assert not P.contains_point(box, (1, Q("1/2")), strict=(True, False))
    assert P.contains_point(TRI, (Q("1/2"), Q("1/2")))
    assert not P.contains_point(TRI, (Q("1/2"), Q("1/2")), strict=True)
    seg = P.from_points([(1, 0)])
    assert P.contains_point(seg, (Q("1/2"), 0), strict=(True, False))
    assert not P.contains_point(seg, (Q("1/2"), 0), strict=(False, True))


# properties -----------------------------------------------------------------------

@given(polytopes(2))
def test_canonical_idempotent(p):
    assert P.from_points(p.generators) == p
    assert DwcPolytope.from_json(p.to_json()) == p


@given(polytopes(2), polytopes(2))
def test_intersection_laws(a, b):
    ab = P.intersect(a, b)
    assert ab == P.intersect(b, a)
    assert P.is_subset(ab, a) and P.is_subset(ab, b)
    assert P.intersect(a, a) == a


@given(polytopes(2), polytopes(2), polytopes(2))
def test_intersection_associative(a, b, c):
    assert P.intersect(P.intersect(a, b), c) == P.intersect(a, P.intersect(b, c))


@given(polytopes(2), polytopes(2))
def test_intersection_matches_grid(a, b):
    ab = P.intersect(a, b)
    for x in grid(2, 12):
        assert P.contains_point(ab, x) == (P.contains_point(a, x) and P.contains_point(b, x))


@given(polytopes(3, 3), polytopes(3, 3))
def test_intersection_matches_grid_3d(a, b):
    ab = P.intersect(a, b)
    for x in grid(3, 6):
        assert P.contains_point(ab, x) == (P.contains_point(a, x) and P.contains_point(b, x))


@given(polytopes(2), polytopes(2))
def test_convex_union_matches_lp(a, b):
    u = P.convex_union(a, b)
    assert u == P.convex_union(b, a)
    assert P.is_subset(a, u) and P.is_subset(b, u)
    gens = list(a.generators) + list(b.generators)
    for x in grid(2, 6):
        assert P.contains_point(u, x) == dominated_by_hull(x, gens)


@given(polytopes(3, 3), polytopes(3, 3))
def test_convex_union_matches_lp_3d(a, b):
    u = P.convex_union(a, b)
    gens = list(a.generators) + list(b.generators)
    for x in grid(3, 4):
        assert P.contains_point(u, x) == dominated_by_hull(x, gens)


@given(polytopes(2), polytopes(2), st.integers(1, 5))
def test_weighted_combination_contains_mixtures(a, b, k):
    w = Q(f"{k}/6")
    m = P.weighted_combination([(w, a), (1 - w, b)])
    for x in a.generators:
        for y in b.generators:
            z = tuple(w * xi + (1 - w) * yi for xi, yi in zip(x, y))
            assert P.contains_point(m, z)
    # every generator of the mixture is a mixture of generators
    for g in m.generators:
        assert any(tuple(w * xi + (1 - w) * yi for xi, yi in zip(x, y)) == tuple(g)
                   for x in a.generators for y in b.generators)


@given(polytopes(2), polytopes(2), polytopes(2))
def test_subset_monotone(a, b, c):
    if P.is_subset(a, b):
        assert P.is_subset(P.intersect(a, c), P.intersect(b, c))
        assert P.is_subset(P.convex_union(a, c), P.convex_union(b, c))


@given(polytopes(2), points(2), st.lists(st.booleans(), min_size=2, max_size=2))
def test_strict_matches_epsilon(p, x, mask):
    eps = Q("1/1000000")
    moved = tuple(xi + eps if m else xi for xi, m in zip(x, mask))
    expect = all(c <= 1 for c in moved) and P.contains_point(p, moved)
    assert P.contains_point(p, x, strict=mask) == expect


@given(st.lists(polytopes(2), min_size=1, max_size=5))
def test_min_filter(fam):
    kept = P.min_filter(fam)
    assert kept
    for a in kept:
        assert not any(b != a and P.is_subset(b, a) for b in kept)
    for x in fam:
        assert any(P.is_subset(k, x) for k in kept)
    assert P.intersect_all(kept) == P.intersect_all(fam)


@given(st.lists(polytopes(2), min_size=1, max_size=4))
def test_region_canonical_keeps_membership(parts):
    r = Region.of(parts)
    for x in grid(2, 12):
        assert r.contains(x) == any(P.contains_point(p, x) for p in parts)
    assert r.same_set(Region.of(list(reversed(parts))))


def test_region_cover_2d():
    a = P.from_points([(Q("1/2"), 1)])
    b = P.from_points([(1, Q("1/2"))])
    mid = P.from_points([(Q("1/2"), Q("1/2"))])
    r = Region.of([a, b, mid])
    assert set(r.parts) == {a, b}
    assert Region.of([mid]).subset_of(r)
    assert not Region.of([P.from_points([(Q("3/4"), Q("3/4"))])]).subset_of(r)


def test_halfspace_in_box():
    assert P.halfspace_in_box((1, 1), 1) == TRI
    assert P.halfspace_in_box((1, 0), 5) == P.full_box(2)
    assert P.halfspace_in_box((1, 1), -1) is None
