"""Decision procedures: coercivity, canonical-metric criterion, scans."""

from fractions import Fraction as Q

import pytest

from horokit.criteria import (
    central_directions,
    check_F_positive,
    check_ke,
    coercivity_report,
    lambda_Y,
    log_futaki,
    s_bar_theta,
    scan_family,
)
from horokit.linebundle import make_variety

B_HALF = Q(72629, 12176232284160)
A_HALF = Q(25103, 434865438720)
SBAR_HALF = Q(8434608, 72629)
KE_BAR = (Q(1426329931935, 163022358304), Q(4418316612263, 1141156508128))
W_HALF = (Q(27151972699, 58342585184), Q(-44524569745, 175027755552))


def test_coercivity_frozen_values(aiii_family):
    rep = coercivity_report(aiii_family(Q(1, 2)))
    assert rep.B == B_HALF
    assert rep.A == A_HALF
    assert rep.s_bar_theta == SBAR_HALF
    assert rep.lambda_Y == (Q(28, 3), Q(10))
    assert rep.test_vector == W_HALF
    assert rep.f_status == "positive"
    assert rep.verdict_F_positive
    assert rep.verdict_barycenter
    assert rep.verdict
    assert rep.assumption_T and rep.assumption_R
    assert rep.base_point == (Q(0), Q(0))


def test_coercivity_negative_case(aiii_family):
    rep = coercivity_report(aiii_family(Q(1, 5)))
    assert rep.f_status == "negative"
    assert not rep.verdict_barycenter
    assert not rep.verdict
    assert rep.witnesses


def test_barycenter_drives_the_near_transition_verdict(aiii_family):
    # just left of the lower transition the linear part is already
    # certified positive; the barycenter condition is what still fails
    rep = coercivity_report(aiii_family(Q(61, 200)))
    assert rep.f_status == "positive"
    assert not rep.verdict_barycenter
    assert not rep.verdict


def test_lambda_y_two_routes_agree(aiii_family, p1p1, toric_fanos):
    from horokit.linebundle import anticanonical_coefficients, moment_polytope
    from horokit.polytope import support_function
    from horokit.linalg import vscale

    fixtures = [aiii_family(Q(1, 2)), aiii_family(Q(2, 5)), p1p1(1, 1),
                p1p1(2, 2), toric_fanos["P2"], toric_fanos["F1"]]
    for pv in fixtures:
        n_y = anticanonical_coefficients(pv)
        poly = moment_polytope(pv)
        for i in range(len(pv.rays)):
            direct = (n_y[i] - pv.boundary[i]) / pv.v_values[i]
            sup = support_function(poly, vscale(Q(-1), pv.rays[i]))
            via_support = (n_y[i] - pv.boundary[i]) / sup
            assert lambda_Y(pv, i) == direct == via_support


def test_lambda_y_undefined_at_zero(aiii_datum):
    pv = make_variety(
        aiii_datum,
        rays=[(Q(-1, 2), Q(-1, 2)), (Q(-1, 2), Q(0))],
        v_values=[Q(0), Q(1, 2)],
    )
    with pytest.raises(ValueError):
        lambda_Y(pv, 0)


def test_test_vector_scale_invariance(aiii_family, aiii_datum):
    base = coercivity_report(aiii_family(Q(1, 2)))
    rays = [(Q(-1, 2), Q(-1, 2)), (Q(-1, 2), Q(0))]
    for lam in (Q(2), Q(3)):
        scaled = make_variety(
            aiii_datum, rays=rays,
            v_values=[lam * Q(3, 4), lam * Q(1, 2)],
        )
        rep = coercivity_report(scaled)
        assert rep.test_vector == base.test_vector
        assert rep.bar_vector == tuple(lam * x for x in base.bar_vector)
        assert rep.verdict == base.verdict


def test_normalizing_rescale_equates_A_and_B(aiii_family, aiii_datum):
    base = coercivity_report(aiii_family(Q(1, 2)))
    lam = base.A / base.B
    scaled = make_variety(
        aiii_datum,
        rays=[(Q(-1, 2), Q(-1, 2)), (Q(-1, 2), Q(0))],
        v_values=[lam * Q(3, 4), lam * Q(1, 2)],
    )
    rep = coercivity_report(scaled)
    assert rep.A == rep.B
    assert rep.test_vector == base.test_vector


def test_ke_frozen_anticanonical(aiii_anticanonical):
    rep = check_ke(aiii_anticanonical)
    assert rep.verdict
    assert rep.bar_vector == KE_BAR
    assert rep.assumption_T and rep.assumption_R


def test_ke_requires_anticanonical_values(aiii_family):
    with pytest.raises(ValueError):
        check_ke(aiii_family(Q(1, 2)))


def test_ke_requires_canonical_character(aiii_datum):
    pv = make_variety(
        aiii_datum,
        rays=[(Q(-1, 2), Q(-1, 2)), (Q(-1, 2), Q(0))],
        v_values=[Q(7), Q(5)],
        chi=(Q(0), Q(0), Q(1), Q(0), Q(0)),
    )
    with pytest.raises(ValueError):
        check_ke(pv)


def test_toric_ke_iff_centered_barycenter(toric_fanos):
    from horokit.dhintegrate import build_dh_measure, integrate_dh, poly_const, poly_coordinate
    from horokit.linebundle import moment_polytope

    expected = {"P2": True, "P1xP1": True, "F1": False}
    for name, pv in toric_fanos.items():
        rep = check_ke(pv)
        measure = build_dh_measure(pv)
        poly = moment_polytope(pv)
        mass = integrate_dh(poly, poly_const(2, Q(1)), measure)
        bar = tuple(
            integrate_dh(poly, poly_coordinate(2, j), measure) / mass
            for j in range(2)
        )
        assert rep.verdict is expected[name]
        assert rep.verdict is (bar == (Q(0), Q(0)))
        assert rep.bar_vector == bar


def test_f1_barycenter_value(toric_fanos):
    rep = check_ke(toric_fanos["F1"])
    assert rep.bar_vector == (Q(1, 12), Q(1, 6))


def test_central_directions(aiii_datum, torus_datum, p1p1_datum):
    assert central_directions(aiii_datum) == ()
    assert central_directions(p1p1_datum) == ()
    assert set(central_directions(torus_datum)) == {(Q(1), Q(0)), (Q(0), Q(1))}


def test_futaki_vanishes_on_symmetric_toric(toric_fanos):
    for name in ("P2", "P1xP1"):
        pv = toric_fanos[name]
        for b in central_directions(pv.datum):
            assert log_futaki(pv, b) == 0


def test_futaki_obstructs_the_blowup(toric_fanos):
    pv = toric_fanos["F1"]
    values = [log_futaki(pv, b) for b in central_directions(pv.datum)]
    assert any(v != 0 for v in values)


def test_futaki_rejects_noncentral_direction(aiii_anticanonical):
    with pytest.raises(ValueError):
        log_futaki(aiii_anticanonical, (Q(1), Q(0)))


def test_sbar_matches_across_realizations(p1p1, toric_fanos):
    # the quadric carries both a symmetric-space and a torus structure;
    # cohomological quantities cannot depend on which one is used
    symmetric = p1p1(2, 2)
    toric = toric_fanos["P1xP1"]
    from horokit.dhintegrate import degree

    assert degree(symmetric) == degree(toric) == 8
    assert s_bar_theta(symmetric) == s_bar_theta(toric) == 2


def test_f_certificate_depth_zero_near_transition(aiii_family):
    # exact interval bounds decide even with no subdivision budget
    assert check_F_positive(aiii_family(Q(54799, 204800)), 0).status == "positive"
    assert check_F_positive(aiii_family(Q(8767, 32768)), 0).status == "negative"


def test_scan_brackets(aiii_family):
    result = scan_family(aiii_family, Q(1, 4), Q(3, 8), Q(1, 100))
    assert all(row.error is None for row in result.rows)
    assert len(result.brackets) == 1
    lo, hi = result.brackets[0]
    assert hi - lo == Q(1, 100)
    assert lo < Q(31, 100) <= hi


def test_scan_records_errors_and_continues(aiii_datum):
    rays = [(Q(-1, 2), Q(-1, 2)), (Q(-1, 2), Q(0))]

    def family(b):
        return make_variety(aiii_datum, rays=rays, v_values=[Q(b), Q(1, 2)])

    result = scan_family(family, Q(-1, 20), Q(3, 20), Q(1, 20))
    assert [row.param for row in result.rows] == [Q(0), Q(1, 20), Q(1, 10)]
    assert all(row.report is None for row in result.rows)
    assert "undefined" in result.rows[0].error
    assert "support function" in result.rows[1].error
    assert result.brackets == ()


def test_scan_step_validation(aiii_family):
    with pytest.raises(ValueError):
        scan_family(aiii_family, Q(0), Q(1), Q(0))
