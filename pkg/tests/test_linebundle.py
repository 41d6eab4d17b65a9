"""Polarizations: moment polytopes, ampleness, structural assumptions."""

from fractions import Fraction as Q

import pytest

from horokit.linalg import mat_vec
from horokit.linebundle import (
    anticanonical_coefficients,
    check_assumptions,
    delta_tilde_pieces,
    is_ample,
    lambda0,
    make_variety,
    moment_polytope,
    toric_polytope,
    variety_dimension,
)
from horokit.polytope import volume
from horokit.restricted import restricted_weyl_group


def test_aiii_moment_polytope(aiii_family):
    poly = moment_polytope(aiii_family(Q(1, 2)))
    assert set(poly.vertices) == {
        (Q(0), Q(0)),
        (Q(1), Q(0)),
        (Q(1), Q(1, 2)),
        (Q(3, 4), Q(3, 4)),
    }
    assert set(poly.facet_tags) == {
        "ray:0", "ray:1", "color:fiber:0", "color:fiber:1:+",
    }


def test_aiii_anticanonical_coefficients(aiii_family, aiii_anticanonical):
    assert anticanonical_coefficients(aiii_family(Q(1, 2))) == (Q(7), Q(5))
    assert anticanonical_coefficients(aiii_anticanonical) == (Q(7), Q(5))


def test_aiii_base_point(aiii_family):
    assert lambda0(aiii_family(Q(1, 2))) == (Q(0), Q(0))


def test_aiii_dimension(aiii_datum, p1p1_datum):
    assert variety_dimension(aiii_datum) == 12
    assert variety_dimension(p1p1_datum) == 2


@pytest.mark.parametrize("b,expected", [
    (Q(1, 100), True),
    (Q(1, 2), True),
    (Q(99, 100), True),
    (Q(1), False),
    (Q(3, 2), False),
])
def test_aiii_ampleness_window(aiii_family, b, expected):
    report = is_ample(aiii_family(b))
    assert report.ample is expected
    if not expected:
        assert report.reasons


def test_ample_failure_names_the_defect(aiii_family):
    reasons = " ".join(is_ample(aiii_family(Q(3, 2))).reasons)
    assert "support function" in reasons


def test_aiii_assumptions(aiii_family):
    report = check_assumptions(aiii_family(Q(1, 2)))
    assert report.assumption_T
    assert report.assumption_R
    assert dict(report.wall_counts) == {
        (Q(0), Q(1)): 3,
        (Q(1), Q(-1)): 2,
        (Q(1), Q(0)): 3,
        (Q(1), Q(1)): 2,
    }


def test_subdivision_pieces_tile(aiii_family):
    pv = aiii_family(Q(1, 2))
    poly = moment_polytope(pv)
    pieces = delta_tilde_pieces(pv)
    assert [i for i, _ in pieces] == [0, 1]
    assert sum(volume(p) for _, p in pieces) == volume(poly)


@pytest.mark.parametrize("k,m,lo,hi", [
    (1, 1, 0, 2),
    (2, 2, 0, 4),
    (1, 2, 1, 3),
    (3, 1, 2, 4),
])
def test_p1p1_moment_intervals(p1p1, k, m, lo, hi):
    poly = moment_polytope(p1p1(k, m))
    assert set(poly.vertices) == {(Q(lo),), (Q(hi),)}
    toric = toric_polytope(p1p1(k, m))
    assert set(toric.vertices) == {(Q(-k - m),), (Q(k + m),)}
    assert is_ample(p1p1(k, m)).ample


def test_toric_polytope_is_weyl_invariant(aiii_family, aiii_datum):
    hull = toric_polytope(aiii_family(Q(1, 2)))
    verts = set(hull.vertices)
    for w in restricted_weyl_group(aiii_datum):
        assert {tuple(mat_vec(w, v)) for v in verts} == verts


def test_p1p1_assumptions(p1p1):
    report = check_assumptions(p1p1(1, 1))
    assert report.assumption_T
    # a single restricted root class cannot give two roots per wall
    assert not report.assumption_R
    assert report.details


def test_asymmetric_polarization_has_no_invariant_base_point(p1p1):
    with pytest.raises(ValueError):
        lambda0(p1p1(1, 2))


def test_toric_fixture_coefficients(toric_fanos):
    for pv in toric_fanos.values():
        assert anticanonical_coefficients(pv) == (Q(1),) * len(pv.rays)
        assert lambda0(pv) == (Q(0), Q(0))
        assert is_ample(pv).ample
        report = check_assumptions(pv)
        assert report.assumption_T and report.assumption_R


def test_make_variety_validation(aiii_datum):
    rays = [(Q(-1, 2), Q(-1, 2)), (Q(-1, 2), Q(0))]
    with pytest.raises(ValueError):
        make_variety(aiii_datum, rays=rays, v_values=[Q(1)])
    with pytest.raises(ValueError):
        make_variety(aiii_datum, rays=[rays[0], rays[0]], v_values=[Q(1), Q(1)])
    with pytest.raises(ValueError):
        make_variety(
            aiii_datum, rays=rays, v_values=[Q(1), Q(1)],
            color_constants={"no:such:label": Q(1)},
        )
    # chi must kill the split part
    with pytest.raises(ValueError):
        make_variety(
            aiii_datum, rays=rays, v_values=[Q(1), Q(1)],
            chi=(Q(1), Q(0), Q(0), Q(0), Q(0)),
        )


def test_non_primitive_ray_rejected(aiii_datum):
    with pytest.raises(ValueError):
        make_variety(
            aiii_datum,
            rays=[(Q(-1), Q(-1)), (Q(-1, 2), Q(0))],
            v_values=[Q(1), Q(1)],
        )
