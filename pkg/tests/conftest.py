"""Shared fixtures: the rank-one symmetric space, the rank-two example
family, and the torus realizations of the three smooth del Pezzo fans."""

from fractions import Fraction as Q

import pytest

from horokit.linebundle import make_variety
from horokit.restricted import derive
from horokit.rootdata import build_involution, build_parabolic, build_root_system, torus


@pytest.fixture(scope="session")
def p1p1_datum():
    system = build_root_system("A", 1)
    sigma = build_involution(system, "AIII", r=1, m=2)
    parabolic = build_parabolic(system, [0])
    return derive(system, parabolic, sigma, "fixed-subgroup")


@pytest.fixture(scope="session")
def p1p1(p1p1_datum):
    """O(k, m) on the quadric surface; k = m is the symmetric square."""

    def build(k: int, m: int):
        return make_variety(
            p1p1_datum,
            rays=[(Q(-1, 2),)],
            v_values=[Q(k + m, 2)],
            color_constants={
                "fiber:0:+": -Q(k - m, 2),
                "fiber:0:-": Q(k - m, 2),
            },
        )

    return build


@pytest.fixture(scope="session")
def aiii_datum():
    system = build_root_system("A", 4)
    sigma = build_involution(system, "AIII", r=2, m=5)
    parabolic = build_parabolic(system, [0, 1, 2, 3])
    return derive(system, parabolic, sigma, "fixed-subgroup")


@pytest.fixture(scope="session")
def aiii_family(aiii_datum):
    """L(b) = O((1+b) Y1 + Y2) on the rank-two wonderful example."""

    def build(b):
        b = Q(b)
        return make_variety(
            aiii_datum,
            rays=[(Q(-1, 2), Q(-1, 2)), (Q(-1, 2), Q(0))],
            v_values=[(1 + b) / 2, Q(1, 2)],
        )

    return build


@pytest.fixture(scope="session")
def aiii_anticanonical(aiii_datum):
    return make_variety(
        aiii_datum,
        rays=[(Q(-1, 2), Q(-1, 2)), (Q(-1, 2), Q(0))],
        v_values=[Q(7), Q(5)],
    )


@pytest.fixture(scope="session")
def torus_datum():
    system = torus(2)
    return derive(
        system, build_parabolic(system, []), build_involution(system, "AI"),
        "fixed-subgroup",
    )


@pytest.fixture(scope="session")
def toric_fanos(torus_datum):
    """Anticanonical fans: projective plane, quadric, one-point blowup."""

    def build(rays):
        return make_variety(
            torus_datum,
            rays=[tuple(map(Q, r)) for r in rays],
            v_values=[Q(1)] * len(rays),
        )

    return {
        "P2": build([(1, 0), (0, 1), (-1, -1)]),
        "P1xP1": build([(1, 0), (-1, 0), (0, 1), (0, -1)]),
        "F1": build([(1, 0), (0, 1), (-1, 1), (0, -1)]),
    }
