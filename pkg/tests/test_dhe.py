import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sta_dirac.algebra import Multivector, approx_eq, blade, gamma, gp, norm, odd, reverse, scalar
from sta_dirac.dhe import (
    U_SIGN,
    DheParams,
    PotentialField,
    SpinorField,
    dhe_residual,
    gauge_transport,
    potential_transport,
    relative_residual,
    rest_plane_wave,
    right_multipliers,
)
from sta_dirac.frames import GaugeId, Point, PoleProximityError, rotor_Omega
from sta_dirac.separation import residual_grid

ZERO_V = PotentialField(lambda r: 0.0)


def some_field(p: Point) -> Multivector:
    x = p.cartesian
    return (
        scalar(math.cos(x[0]) + x[1])
        + blade("12") * (x[2] * x[3])
        + blade("03") * math.sin(x[1])
        + blade("0123") * 0.3
    )


FIELD = SpinorField(some_field)
P = Point(0.2, 1.4, 0.9, 0.6)


def test_u_sign_recorded():
    assert U_SIGN == -1


def test_right_multipliers():
    B, T = right_multipliers(GaugeId.Xi)
    assert B == blade("21") and T == gamma(0)
    B, T = right_multipliers(GaugeId.XiO)
    assert approx_eq(B, blade("13")) and approx_eq(T, gamma(0))
    B, T = right_multipliers(GaugeId.XiS, Point(0, 1, 0, 0))
    assert approx_eq(B, blade("13")) and approx_eq(T, gamma(0))
    B, T = right_multipliers(GaugeId.XiS, P)
    O = rotor_Omega(P)
    assert approx_eq(B, gp(gp(O, blade("13")), reverse(O)), 1e-12)
    assert approx_eq(gp(B, B), scalar(-1.0), 1e-12)


def test_params_validate_multipliers():
    with pytest.raises(ValueError):
        DheParams(1.0, 1.0, GaugeId.Xi, B_right=gamma(1))
    with pytest.raises(ValueError):
        DheParams(-1.0, 1.0, GaugeId.Xi)


@pytest.mark.parametrize("g", list(GaugeId))
def test_zero_field_has_zero_residual(g):
    zero = SpinorField(lambda p: Multivector(np.zeros(16)))
    assert norm(dhe_residual(DheParams(1.0, 1.0, g), zero, ZERO_V, P)) == 0


def test_rest_plane_wave():
    par = DheParams(1.0, 1.0, GaugeId.Xi)
    assert norm(dhe_residual(par, rest_plane_wave(1.0), ZERO_V, P)) < 1e-9
    # exp(-m t g21) alone leaves 2 m psi g0
    bare = rest_plane_wave(1.0, scalar(1.0))
    res = dhe_residual(par, bare, ZERO_V, P)
    assert approx_eq(res, gp(bare.eval(P), gamma(0)) * 2.0, 1e-9)
    plus = SpinorField(lambda p: scalar(math.cos(p.t)) + blade("21") * math.sin(p.t))
    assert norm(dhe_residual(par, plus, ZERO_V, P)) < 1e-9


@pytest.mark.parametrize("g", [GaugeId.XiO, GaugeId.XiS])
def test_plane_wave_in_every_gauge(g):
    psi = gauge_transport(rest_plane_wave(1.0), GaugeId.Xi, g)
    assert norm(dhe_residual(DheParams(1.0, 1.0, g), psi, ZERO_V, P)) < 1e-9


@pytest.mark.parametrize("g", list(GaugeId))
def test_linearity(g):
    other = SpinorField(lambda p: gp(some_field(p), blade("23")) * p.r)
    combo = SpinorField(lambda p: some_field(p) * 2.0 - other.eval(p) * 0.5)
    par = DheParams(0.7, 1.0, g)
    pot = PotentialField(lambda r: -0.3 / r)
    lhs = dhe_residual(par, combo, pot, P)
    rhs = dhe_residual(par, FIELD, pot, P) * 2.0 - dhe_residual(par, other, pot, P) * 0.5
    assert approx_eq(lhs, rhs, 1e-8)


def test_transport_round_trip_and_evenness():
    for src in GaugeId:
        for dst in GaugeId:
            if src is dst:
                continue
            back = gauge_transport(gauge_transport(FIELD, src, dst), dst, src)
            assert approx_eq(back.eval(P), FIELD.eval(P), 1e-12)
            moved = gauge_transport(FIELD, src, dst).eval(P)
            assert norm(odd(moved)) < 1e-12


def test_transport_same_gauge_rejected():
    with pytest.raises(ValueError):
        gauge_transport(FIELD, GaugeId.Xi, GaugeId.Xi)


def test_spherical_and_rotated_agree_where_omega_is_one():
    q = Point(0.3, 1.2, 0.0, 0.0)
    s = gauge_transport(FIELD, GaugeId.XiO, GaugeId.XiS).eval(q)
    assert approx_eq(s, FIELD.eval(q), 1e-14)


def test_transport_chain_relations():
    psi_o = gauge_transport(FIELD, GaugeId.Xi, GaugeId.XiO)
    psi_s = gauge_transport(psi_o, GaugeId.XiO, GaugeId.XiS)
    O = rotor_Omega(P)
    assert approx_eq(psi_s.eval(P), gp(psi_o.eval(P), reverse(O)), 1e-12)


def test_potential_transport():
    A = PotentialField(lambda r: -0.5 / r)
    A2 = potential_transport(A)
    for p in (P, Point(0, 3.0, 2.0, 5.0)):
        assert approx_eq(A2.A(p), A.A(p), 1e-14)
    zero = potential_transport(ZERO_V)
    assert norm(zero.A(P)) == 0
    custom = PotentialField(lambda r: 0.0, lambda p: gamma(1))
    assert approx_eq(potential_transport(custom).A(P).grade(1), potential_transport(custom).A(P))


def test_spherical_residual_rejects_poles():
    with pytest.raises(PoleProximityError):
        dhe_residual(DheParams(1, 1, GaugeId.XiS), FIELD, ZERO_V, Point(0, 1, 1e-4, 0))


@given(st.floats(0.3, 3.0), st.floats(0.2, math.pi - 0.2), st.floats(0, 6.28))
@settings(max_examples=15, deadline=None)
def test_residual_gauge_covariance(r, th, ph):
    """Transporting a field transports its residual (bounded constant, here exactly 1)."""
    p = Point(0.1, r, th, ph)
    pot = PotentialField(lambda rr: -0.4 / rr)
    res = {}
    for g in GaugeId:
        psi = FIELD if g is GaugeId.Xi else gauge_transport(FIELD, GaugeId.Xi, g)
        res[g] = float(norm(dhe_residual(DheParams(1.0, 1.0, g), psi, pot, p)))
    assert math.isclose(res[GaugeId.XiO], res[GaugeId.Xi], rel_tol=1e-6)
    assert math.isclose(res[GaugeId.XiS], res[GaugeId.Xi], rel_tol=1e-6)


def test_ground_state_residual_all_gauges(ground_state, coulomb_field):
    pts = residual_grid(ground_state, 6, 6)
    for g in GaugeId:
        psi = ground_state.field(g)
        worst = max(relative_residual(DheParams(1.0, 1.0, g), psi, coulomb_field, p) for p in pts)
        assert worst < 1e-6


def test_gauge_equivalence_bound(ground_state, coulomb_field):
    pts = residual_grid(ground_state, 5, 5)
    psi_s = ground_state.field(GaugeId.XiS)
    psi_o = gauge_transport(psi_s, GaugeId.XiS, GaugeId.XiO)
    eps = max(relative_residual(DheParams(1, 1, GaugeId.XiS), psi_s, coulomb_field, p) for p in pts)
    eps_o = max(relative_residual(DheParams(1, 1, GaugeId.XiO), psi_o, coulomb_field, p) for p in pts)
    assert eps_o < 10 * max(eps, 1e-9)


def test_connection_term_cannot_be_dropped(ground_state, coulomb_field):
    """Dropping omega is only legitimate for the rescaled field chi = r sqrt(sin) psi."""
    par = DheParams(1.0, 1.0, GaugeId.XiS)
    psi = ground_state.field(GaugeId.XiS)
    p = residual_grid(ground_state, 3, 3)[4]
    with_w = relative_residual(par, psi, coulomb_field, p)
    without = relative_residual(par, psi, coulomb_field, p, with_connection=False)
    assert with_w < 1e-6 and without > 1e-2
