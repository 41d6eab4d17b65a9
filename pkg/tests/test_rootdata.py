"""Ambient root systems, involutions, parabolics."""

from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horokit.linalg import dot, identity_mat, mat_mul, mat_vec, vscale
from horokit.rootdata import (
    build_involution,
    build_parabolic,
    build_root_system,
    coroot,
    reflection,
    torus,
)

rationals = st.fractions(
    min_value=Q(-5), max_value=Q(5), max_denominator=6
)


def test_series_a_counts():
    for n in range(1, 6):
        system = build_root_system("A", n)
        assert len(system.positive_roots) == n * (n + 1) // 2
        assert len(system.simple_roots) == n
        assert system.ambient_dim == n + 1


def test_rho_pairs_to_one_on_simple_coroots():
    system = build_root_system("A", 4)
    for alpha in system.simple_roots:
        assert dot(system.rho, coroot(system, alpha)) == 1


def test_unknown_series_rejected():
    with pytest.raises(ValueError):
        build_root_system("E", 8)
    with pytest.raises(ValueError):
        build_root_system("A", 0)


def test_torus_has_no_roots():
    t = torus(3)
    assert t.positive_roots == ()
    assert t.ambient_dim == 3
    with pytest.raises(ValueError):
        torus(0)


@given(st.lists(rationals, min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_reflection_is_involutive(coords):
    system = build_root_system("A", 2)
    x = tuple(coords)
    for alpha in system.positive_roots:
        y = reflection(system, alpha, reflection(system, alpha, x))
        assert y == x


def test_reflection_negates_its_root():
    system = build_root_system("A", 3)
    for alpha in system.positive_roots:
        assert reflection(system, alpha, alpha) == vscale(Q(-1), alpha)


@pytest.mark.parametrize(
    "rank,kind,params",
    [
        (3, "AI", {}),
        (3, "AII", {}),
        (4, "AIII", {"r": 2, "m": 5}),
        (3, "GroupType", {}),
        (2, "Horospherical", {"levi": (0,)}),
    ],
)
def test_involution_squares_to_identity(rank, kind, params):
    system = build_root_system("A", rank)
    sigma = build_involution(system, kind, **params)
    assert mat_mul(sigma.matrix, sigma.matrix) == identity_mat(system.ambient_dim)


def test_involutions_permute_roots():
    system = build_root_system("A", 4)
    roots = set(system.all_roots)
    for kind, params in [("AI", {}), ("AIII", {"r": 1, "m": 5}), ("AIII", {"r": 2, "m": 5})]:
        sigma = build_involution(system, kind, **params)
        assert {mat_vec(sigma.matrix, a) for a in roots} == roots


def test_aiii_parameter_validation():
    system = build_root_system("A", 4)
    with pytest.raises(ValueError):
        build_involution(system, "AIII", r=3, m=5)
    with pytest.raises(ValueError):
        build_involution(system, "AIII", r=1, m=4)
    with pytest.raises(ValueError):
        build_involution(system, "nope")


def test_aii_needs_even_dimension():
    system = build_root_system("A", 2)
    with pytest.raises(ValueError):
        build_involution(system, "AII")


def test_horospherical_fixes_levi_coroots():
    system = build_root_system("A", 3)
    sigma = build_involution(system, "Horospherical", levi=(0, 2))
    for i in (0, 2):
        cv = coroot(system, system.simple_roots[i])
        assert mat_vec(sigma.matrix, cv) == cv


def test_explicit_matrix_must_be_involutive():
    system = build_root_system("A", 1)
    good = ((Q(0), Q(1)), (Q(1), Q(0)))
    sigma = build_involution(system, "ExplicitMatrix", matrix=good)
    assert sigma.matrix == good
    bad = ((Q(1), Q(1)), (Q(0), Q(1)))
    with pytest.raises(ValueError):
        build_involution(system, "ExplicitMatrix", matrix=bad)


def test_parabolic_splits_positive_roots():
    system = build_root_system("A", 3)
    parabolic = build_parabolic(system, [0, 2])
    positives = set(system.positive_roots)
    assert set(parabolic.phi_l_positive) | set(parabolic.phi_qu) == positives
    assert not set(parabolic.phi_l_positive) & set(parabolic.phi_qu)
    assert len(parabolic.phi_l) == 2 * len(parabolic.phi_l_positive)


def test_parabolic_index_validation():
    system = build_root_system("A", 3)
    with pytest.raises((ValueError, IndexError)):
        build_parabolic(system, [5])
