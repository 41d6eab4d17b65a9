"""Exact integration of the density product over rational polytopes."""

import math
from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horokit.dhintegrate import (
    build_dh_measure,
    degree,
    density_polynomial,
    integrate_dh,
    integrate_lebesgue,
    integrate_monomial_simplex,
    poly_add,
    poly_const,
    poly_coordinate,
    poly_form,
    poly_mul,
    poly_scale,
)
from horokit.linebundle import delta_tilde_pieces, moment_polytope

B_HALF = Q(72629, 12176232284160)
DEGREE_ANTICANONICAL = Q(1810488690780)

coeff = st.fractions(min_value=Q(-3), max_value=Q(3), max_denominator=5)
expo2 = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys2 = st.lists(st.tuples(expo2, coeff), min_size=0, max_size=5).map(
    lambda ts: poly_form(2, ts)
)
points2 = st.tuples(coeff, coeff)


@given(polys2, polys2, points2)
@settings(max_examples=60, deadline=None)
def test_poly_ring_operations(p, q, x):
    assert poly_add(p, q)(x) == p(x) + q(x)
    assert poly_mul(p, q)(x) == p(x) * q(x)
    assert poly_scale(Q(7, 3), p)(x) == Q(7, 3) * p(x)


def test_monomial_over_unit_simplex():
    simplex = [(Q(0), Q(0)), (Q(1), Q(0)), (Q(0), Q(1))]
    # int x^a y^b = a! b! / (a + b + 2)!
    for a in range(4):
        for b in range(4):
            expected = (
                Q(math.factorial(a) * math.factorial(b))
                / math.factorial(a + b + 2)
            )
            assert integrate_monomial_simplex(simplex, (a, b)) == expected


def test_monomial_translation_covariance():
    simplex = [(Q(2), Q(1)), (Q(3), Q(1)), (Q(2), Q(2))]
    # int over shifted simplex of 1 equals the area
    assert integrate_monomial_simplex(simplex, (0, 0)) == Q(1, 2)


def test_aiii_measure_shape(aiii_family):
    measure = build_dh_measure(aiii_family(Q(1, 2)))
    assert measure.lattice_normalization == Q(1, 4)
    dens = density_polynomial(measure)
    # dimension n = 12 means a degree 10 polynomial on the rank 2 plane
    assert max(sum(e) for e, _ in dens.terms) == 10


def test_aiii_mass_frozen(aiii_family):
    pv = aiii_family(Q(1, 2))
    measure = build_dh_measure(pv)
    poly = moment_polytope(pv)
    assert integrate_dh(poly, poly_const(2, Q(1)), measure) == B_HALF


def test_aiii_anticanonical_degree_frozen(aiii_anticanonical):
    assert degree(aiii_anticanonical) == DEGREE_ANTICANONICAL


@pytest.mark.parametrize("k", range(1, 6))
@pytest.mark.parametrize("m", range(1, 6))
def test_p1p1_degree_is_2km(p1p1, k, m):
    assert degree(p1p1(k, m)) == 2 * k * m


def test_toric_degrees(toric_fanos):
    expected = {"P2": 9, "P1xP1": 8, "F1": 8}
    for name, pv in toric_fanos.items():
        assert degree(pv) == expected[name]


def test_toric_density_is_lebesgue(toric_fanos):
    pv = toric_fanos["P2"]
    measure = build_dh_measure(pv)
    assert measure.forms == ()
    assert measure.lattice_normalization == 1
    poly = moment_polytope(pv)
    one = poly_const(2, Q(1))
    assert integrate_dh(poly, one, measure) == Q(9, 2)
    assert integrate_lebesgue(poly, one, measure) == Q(9, 2)


def test_subdivision_additivity_exact(aiii_family, toric_fanos, p1p1):
    for pv in [aiii_family(Q(1, 2)), aiii_family(Q(2, 5)),
               toric_fanos["P2"], toric_fanos["F1"], p1p1(1, 1)]:
        measure = build_dh_measure(pv)
        poly = moment_polytope(pv)
        dens = poly_const(pv.datum.rank, Q(1))
        whole = integrate_dh(poly, dens, measure)
        parts = sum(
            integrate_dh(piece, dens, measure)
            for _, piece in delta_tilde_pieces(pv)
        )
        assert parts == whole


def mc_estimate(pv, nsamples, seed):
    """Plain rejection-sampling oracle for the density integral, built
    from nothing but the halfspace data and the affine density forms."""
    measure = build_dh_measure(pv)
    poly = moment_polytope(pv)
    verts = np.array([[float(x) for x in v] for v in poly.vertices])
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(nsamples, poly.dim))
    normals = np.array([[float(x) for x in n] for n, _ in poly.halfspaces])
    bounds = np.array([float(b) for _, b in poly.halfspaces])
    inside = (pts @ normals.T <= bounds + 1e-12).all(axis=1)
    values = np.ones(nsamples)
    for c, lin in measure.forms:
        values = values * (float(c) + pts @ np.array([float(x) for x in lin]))
    values = np.where(inside, values, 0.0)
    scale = float(np.prod(hi - lo)) * float(measure.lattice_normalization)
    mean = values.mean() * scale
    stderr = values.std(ddof=1) / math.sqrt(nsamples) * scale
    return mean, stderr


def test_monte_carlo_cross_check(aiii_family, p1p1, toric_fanos):
    fixtures = {
        "aiii-half": aiii_family(Q(1, 2)),
        "quadric-11": p1p1(1, 1),
        "quadric-12": p1p1(1, 2),
        "P2": toric_fanos["P2"],
        "F1": toric_fanos["F1"],
    }
    for name, pv in fixtures.items():
        measure = build_dh_measure(pv)
        poly = moment_polytope(pv)
        exact = float(integrate_dh(poly, poly_const(pv.datum.rank, Q(1)), measure))
        mean, stderr = mc_estimate(pv, 10**5, seed=20260817)
        assert abs(mean - exact) <= 3 * stderr, (name, mean, exact, stderr)


def test_first_moment_against_monte_carlo(aiii_family):
    pv = aiii_family(Q(1, 2))
    measure = build_dh_measure(pv)
    poly = moment_polytope(pv)
    exact = float(integrate_dh(poly, poly_coordinate(2, 0), measure))

    verts = np.array([[float(x) for x in v] for v in poly.vertices])
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    rng = np.random.default_rng(7)
    pts = rng.uniform(lo, hi, size=(10**5, 2))
    normals = np.array([[float(x) for x in n] for n, _ in poly.halfspaces])
    bounds = np.array([float(b) for _, b in poly.halfspaces])
    inside = (pts @ normals.T <= bounds + 1e-12).all(axis=1)
    values = pts[:, 0].copy()
    for c, lin in measure.forms:
        values *= float(c) + pts @ np.array([float(x) for x in lin])
    values = np.where(inside, values, 0.0)
    scale = float(np.prod(hi - lo)) * float(measure.lattice_normalization)
    mean = values.mean() * scale
    stderr = values.std(ddof=1) / math.sqrt(len(values)) * scale
    assert abs(mean - exact) <= 3 * stderr


def test_density_positive_inside(aiii_family):
    pv = aiii_family(Q(1, 2))
    dens = density_polynomial(build_dh_measure(pv))
    assert dens((Q(1, 2), Q(1, 4))) > 0
    # the density vanishes on restricted walls
    assert dens((Q(1, 2), Q(1, 2))) == 0
    assert dens((Q(1, 2), Q(0))) == 0


def test_flat_vertex_sets_are_rejected():
    from horokit.polytope import polytope_from_vertices

    with pytest.raises(ValueError):
        polytope_from_vertices([(Q(0), Q(0)), (Q(1), Q(0))])
