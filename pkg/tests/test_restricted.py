"""Restricted root data derived from (system, parabolic, involution)."""

from fractions import Fraction as Q

import pytest

from horokit.linalg import mat_vec
from horokit.restricted import (
    cartan_matrix_restricted,
    classify_restricted_type,
    color_images,
    derive,
    restricted_weyl_group,
)
from horokit.rootdata import build_involution, build_parabolic, build_root_system


def full_levi_datum(rank, kind, **params):
    system = build_root_system("A", rank)
    sigma = build_involution(system, kind, **params)
    parabolic = build_parabolic(system, list(range(rank)))
    return derive(system, parabolic, sigma, "fixed-subgroup")


GOLDEN_COROOTS = {
    (Q(2), Q(0)): (Q(1, 2), Q(0)),
    (Q(0), Q(2)): (Q(0), Q(1, 2)),
    (Q(1), Q(-1)): (Q(1, 2), Q(-1, 2)),
    (Q(1), Q(1)): (Q(1, 2), Q(1, 2)),
    (Q(1), Q(0)): (Q(1), Q(0)),
    (Q(0), Q(1)): (Q(0), Q(1)),
}


def test_aiii_coroot_table(aiii_datum):
    table = {c.root: c.coroot_vec for c in aiii_datum.classes}
    assert table == GOLDEN_COROOTS


def test_aiii_multiplicities(aiii_datum):
    mult = {c.root: c.multiplicity for c in aiii_datum.classes}
    assert mult == {
        (Q(2), Q(0)): 1,
        (Q(0), Q(2)): 1,
        (Q(1), Q(-1)): 2,
        (Q(1), Q(1)): 2,
        (Q(1), Q(0)): 2,
        (Q(0), Q(1)): 2,
    }


@pytest.mark.parametrize(
    "r,m,expected",
    [(1, 3, "BC1"), (2, 5, "BC2"), (2, 6, "BC2"), (2, 4, "C2"), (3, 6, "C3")],
)
def test_type_detection_aiii(r, m, expected):
    assert classify_restricted_type(full_levi_datum(m - 1, "AIII", r=r, m=m)) == expected


@pytest.mark.parametrize("p", [2, 3])
def test_type_detection_aii(p):
    datum = full_levi_datum(2 * p - 1, "AII")
    assert classify_restricted_type(datum) == f"A{p - 1}"
    assert all(c.multiplicity == 4 for c in datum.classes)
    assert len(datum.classes) == p * (p - 1) // 2


@pytest.mark.parametrize("m", [2, 3, 4])
def test_type_detection_ai_is_doubled_ambient(m):
    datum = full_levi_datum(m - 1, "AI")
    assert classify_restricted_type(datum) == f"A{m - 1}"
    # every ambient positive root survives as its own class, unfolded
    assert len(datum.classes) == m * (m - 1) // 2
    assert all(c.multiplicity == 1 for c in datum.classes)
    assert all(len(c.members) == 1 for c in datum.classes)
    positives = set(datum.system.positive_roots)
    assert {c.root_ambient for c in datum.classes} == positives


def test_cartan_matrix_bc2(aiii_datum):
    assert cartan_matrix_restricted(aiii_datum) == (
        (Q(2), Q(-2)),
        (Q(-1), Q(2)),
    )


def test_weyl_group_orders(aiii_datum, p1p1_datum):
    assert len(restricted_weyl_group(aiii_datum)) == 8
    assert len(restricted_weyl_group(p1p1_datum)) == 2


def test_weyl_group_permutes_restricted_roots(aiii_datum):
    roots = {c.root for c in aiii_datum.classes}
    everything = roots | {tuple(-x for x in v) for v in roots}
    for w in restricted_weyl_group(aiii_datum):
        assert {mat_vec(w, v) for v in everything} == everything


def test_simple_restricted_coroot_basis(aiii_datum):
    # the basis of the dual system, not the coroots of the simple roots:
    # the second entry belongs to the long root (0, 2)
    assert aiii_datum.simple_restricted_roots == ((Q(1), Q(-1)), (Q(0), Q(1)))
    assert aiii_datum.simple_restricted_coroots == (
        (Q(1, 2), Q(-1, 2)),
        (Q(0), Q(1, 2)),
    )
    table = {c.root: c.coroot_vec for c in aiii_datum.classes}
    assert aiii_datum.simple_restricted_coroots == (
        table[(Q(1), Q(-1))],
        table[(Q(0), Q(2))],
    )


def test_p1p1_datum_shape(p1p1_datum):
    assert p1p1_datum.rank == 1
    assert len(p1p1_datum.classes) == 1
    cls = p1p1_datum.classes[0]
    assert cls.root == (Q(2),)
    assert cls.coroot_vec == (Q(1, 2),)
    assert cls.multiplicity == 1
    colors = color_images(p1p1_datum)
    assert len(colors) == 1
    assert colors[0].fiber_degree == 2
    assert colors[0].point == (Q(1, 2),)


def test_aiii_colors(aiii_datum):
    colors = color_images(aiii_datum)
    points = sorted(c.point for c in colors)
    assert points == sorted(aiii_datum.simple_restricted_coroots)


def test_torus_datum_is_empty(torus_datum):
    assert torus_datum.classes == ()
    assert torus_datum.phi_Qu == ()
    assert classify_restricted_type(torus_datum) == "empty"
    assert torus_datum.two_rho_H == (Q(0), Q(0))
    assert torus_datum.lattice_N == ((Q(1), Q(0)), (Q(0), Q(1)))


def test_bad_normalizer_mode():
    system = build_root_system("A", 1)
    sigma = build_involution(system, "AIII", r=1, m=2)
    parabolic = build_parabolic(system, [0])
    with pytest.raises(ValueError):
        derive(system, parabolic, sigma, "weird")


def test_sigma_must_stabilize_levi():
    system = build_root_system("A", 2)
    sigma = build_involution(system, "AIII", r=1, m=3)
    parabolic = build_parabolic(system, [0])
    with pytest.raises(ValueError):
        derive(system, parabolic, sigma, "fixed-subgroup")
