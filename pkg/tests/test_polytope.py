"""Exact polytope layer: hulls, halfspaces, triangulation, chambers."""

from fractions import Fraction as Q
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horokit.linalg import mat_vec
from horokit.polytope import (
    EmptyRegionError,
    UnboundedRegionError,
    DualChamberReport,
    cone_over_facet,
    polytope_from_halfspaces,
    polytope_from_vertices,
    rel_interior_dual_chamber,
    shoelace_area,
    simplex_volume,
    support_function,
    triangulate,
    volume,
    weyl_orbit_hull,
)
from horokit.restricted import derive, restricted_weyl_group
from horokit.rootdata import build_involution, build_parabolic, build_root_system

coord = st.fractions(min_value=Q(-4), max_value=Q(4), max_denominator=4)


def points_strategy(dim, min_size, max_size):
    return st.lists(
        st.tuples(*([coord] * dim)), min_size=min_size, max_size=max_size,
        unique=True,
    )


@lru_cache(maxsize=1)
def bc2_weyl_group():
    system = build_root_system("A", 4)
    sigma = build_involution(system, "AIII", r=2, m=5)
    parabolic = build_parabolic(system, [0, 1, 2, 3])
    return restricted_weyl_group(derive(system, parabolic, sigma, "fixed-subgroup"))


@given(points_strategy(2, 3, 7))
@settings(max_examples=40, deadline=None)
def test_vertex_halfspace_round_trip_2d(pts):
    try:
        poly = polytope_from_vertices(pts)
    except (ValueError, EmptyRegionError):
        return  # degenerate input, nothing to round-trip
    back = polytope_from_halfspaces(poly.halfspaces, 2)
    assert set(back.vertices) == set(poly.vertices)


@given(points_strategy(3, 4, 6))
@settings(max_examples=15, deadline=None)
def test_vertex_halfspace_round_trip_3d(pts):
    try:
        poly = polytope_from_vertices(pts)
    except (ValueError, EmptyRegionError):
        return
    back = polytope_from_halfspaces(poly.halfspaces, 3)
    assert set(back.vertices) == set(poly.vertices)


@given(points_strategy(2, 3, 7))
@settings(max_examples=40, deadline=None)
def test_triangulation_conserves_volume_2d(pts):
    try:
        poly = polytope_from_vertices(pts)
    except (ValueError, EmptyRegionError):
        return
    pieces = triangulate(poly)
    assert sum(simplex_volume(s) for s in pieces) == volume(poly)


def test_triangulation_conserves_volume_3d():
    cube = polytope_from_vertices(
        [(Q(i), Q(j), Q(k)) for i in (0, 2) for j in (0, 2) for k in (0, 2)]
    )
    assert volume(cube) == 8
    assert sum(simplex_volume(s) for s in triangulate(cube)) == 8


def test_volume_against_shoelace():
    pts = [(Q(0), Q(0)), (Q(3), Q(0)), (Q(3), Q(2)), (Q(1), Q(3)), (Q(0), Q(2))]
    poly = polytope_from_vertices(pts)
    assert volume(poly) == shoelace_area(pts)


def test_support_function_square():
    sq = polytope_from_vertices(
        [(Q(1), Q(1)), (Q(-1), Q(1)), (Q(1), Q(-1)), (Q(-1), Q(-1))]
    )
    assert support_function(sq, (Q(1), Q(0))) == 1
    assert support_function(sq, (Q(2), Q(3))) == 5
    assert support_function(sq, (Q(-1, 2), Q(0))) == Q(1, 2)


def test_unbounded_halfspace_set_raises():
    with pytest.raises(UnboundedRegionError):
        polytope_from_halfspaces([((Q(1), Q(0)), Q(1))], 2)


def test_empty_halfspace_set_raises():
    with pytest.raises(EmptyRegionError):
        polytope_from_halfspaces([((Q(1),), Q(-1)), ((Q(-1),), Q(-1))], 1)


def test_cone_over_facet_tiles_triangle():
    tri = polytope_from_vertices([(Q(0), Q(0)), (Q(4), Q(0)), (Q(0), Q(4))])
    apex = (Q(1), Q(1))
    cones = [cone_over_facet(tri, apex, i) for i in range(len(tri.halfspaces))]
    assert sum(volume(c) for c in cones) == volume(tri)


@given(st.tuples(coord, coord))
@settings(max_examples=30, deadline=None)
def test_weyl_orbit_hull_invariance(point):
    group = bc2_weyl_group()
    try:
        hull = weyl_orbit_hull(point, group)
    except ValueError:
        return  # the orbit of the origin spans nothing
    moved = {tuple(mat_vec(w, v)) for w in group for v in hull.vertices}
    assert moved == set(hull.vertices)


def test_weyl_orbit_hull_of_regular_point(p1p1_datum):
    group = restricted_weyl_group(p1p1_datum)
    hull = weyl_orbit_hull((Q(3, 2),), group)
    assert set(hull.vertices) == {(Q(3, 2),), (Q(-3, 2),)}


def test_dual_chamber_detection(aiii_datum):
    inside = rel_interior_dual_chamber((Q(1), Q(1, 2)), aiii_datum)
    assert isinstance(inside, DualChamberReport)
    assert inside.verdict
    assert all(c > 0 for c in inside.coefficients)
    # alpha_1 coefficient collapses to zero on this ray
    edge = rel_interior_dual_chamber((Q(0), Q(1)), aiii_datum)
    assert not edge.verdict


def test_dual_chamber_central_component_must_vanish(torus_datum):
    # no roots at all: only the zero covector passes
    assert rel_interior_dual_chamber((Q(0), Q(0)), torus_datum).verdict
    assert not rel_interior_dual_chamber((Q(1), Q(0)), torus_datum).verdict
