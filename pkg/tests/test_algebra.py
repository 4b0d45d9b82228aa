import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sta_dirac.algebra import (
    DIM,
    BivectorSquareError,
    Multivector,
    NotUnitRotorError,
    Rotor,
    angle_rotor,
    approx_eq,
    basis,
    blade,
    commutator,
    conjugate,
    even,
    exp_bivector,
    gamma,
    gp,
    grade,
    idempotent_e,
    norm,
    odd,
    pseudoscalar,
    reverse,
    scalar,
)

coeffs = arrays(np.float64, DIM, elements=st.floats(-3, 3, allow_nan=False))
ETA = (1, -1, -1, -1)


@pytest.mark.parametrize("mu", range(4))
@pytest.mark.parametrize("nu", range(4))
def test_anticommutator_is_metric(mu, nu):
    a, b = gamma(mu), gamma(nu)
    expected = scalar(2.0 * ETA[mu] if mu == nu else 0.0)
    assert gp(a, b) + gp(b, a) == expected


def test_pseudoscalar_squares_to_minus_one():
    assert gp(pseudoscalar(), pseudoscalar()) == scalar(-1.0)


def test_blade_ordering_sign():
    assert blade("21") == -blade("12")
    assert blade("0123") == pseudoscalar()
    assert blade("") == scalar(1.0)


@settings(max_examples=200, deadline=None)
@given(coeffs, coeffs, coeffs)
def test_associativity(a, b, c):
    lhs, rhs = gp(gp(a, b), c), gp(a, gp(b, c))
    assert approx_eq(lhs, rhs, 1e-12 * max(1.0, float(norm(lhs))))


@settings(max_examples=200, deadline=None)
@given(coeffs, coeffs)
def test_reverse_is_anti_automorphism(a, b):
    lhs, rhs = reverse(gp(a, b)), gp(reverse(b), reverse(a))
    assert approx_eq(lhs, rhs, 1e-12 * max(1.0, float(norm(lhs))))


@given(coeffs)
def test_grade_projections_sum_to_whole(a):
    total = sum((grade(a, k) for k in range(5)), Multivector(np.zeros(DIM)))
    assert total == Multivector(a)
    assert even(a) + odd(a) == Multivector(a)


def test_grade_rejects_out_of_range():
    with pytest.raises(ValueError):
        grade(scalar(1.0), 5)
    with pytest.raises(ValueError):
        grade(scalar(1.0), -1)


def test_idempotent():
    e = idempotent_e()
    assert gp(e, e) == e


def test_multivector_is_immutable():
    m = gamma(1)
    with pytest.raises(ValueError):
        m.coeffs[0] = 1.0


def test_batched_product_matches_loop():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(5, DIM)), rng.normal(size=(5, DIM))
    batch = gp(a, b).coeffs
    for i in range(5):
        np.testing.assert_allclose(batch[i], gp(a[i], b[i]).coeffs, atol=1e-14)


def test_exp_bivector_rotation_boost_and_null():
    R = exp_bivector(blade("12") * 0.3)
    assert approx_eq(R, scalar(math.cos(0.3)) + blade("12") * math.sin(0.3))
    Bst = exp_bivector(blade("01") * 0.4)
    assert approx_eq(Bst, scalar(math.cosh(0.4)) + blade("01") * math.sinh(0.4))
    null = blade("01") + blade("13")
    assert approx_eq(gp(null, null), scalar(0.0))
    assert approx_eq(exp_bivector(null), scalar(1.0) + null)


def test_exp_bivector_rejects_non_scalar_square():
    with pytest.raises(BivectorSquareError):
        exp_bivector(blade("12") + blade("03") * 0.5 + blade("01"))
    with pytest.raises(BivectorSquareError):
        exp_bivector(gamma(1))


def test_angle_rotor_matches_general_exponential():
    for plane in ("12", "31", "23", "01"):
        assert approx_eq(angle_rotor(plane, 0.7), exp_bivector(blade(plane) * 0.7), 1e-14)


def test_conjugation_rotates_vector():
    # R g1 ~R = g1 exp(g12 pi/2) = g1 g12 = -g2 for R = exp(-g12 pi/4)
    R = angle_rotor("12", -math.pi / 4)
    assert approx_eq(conjugate(R, gamma(1)), -gamma(2), 1e-12)


def test_conjugate_rejects_non_unit():
    with pytest.raises(NotUnitRotorError):
        conjugate(scalar(2.0), gamma(1))
    with pytest.raises(NotUnitRotorError):
        Rotor(gamma(1).coeffs)


@given(st.floats(-6, 6), st.floats(-6, 6))
def test_rotor_conjugation_preserves_grade_and_norm(t1, t2):
    R = gp(angle_rotor("23", t1), angle_rotor("12", t2))
    v = gamma(1) * 0.3 + gamma(3) * 1.2
    img = conjugate(R, v)
    assert approx_eq(grade(img, 1), img, 1e-12)
    assert math.isclose(gp(img, img).scalar_part(), gp(v, v).scalar_part(), abs_tol=1e-12)


def test_commutator_is_half_difference():
    a, b = blade("12"), gamma(1)
    assert commutator(a, b) == (gp(a, b) - gp(b, a)) * 0.5


def test_basis_range():
    with pytest.raises(ValueError):
        basis(16)
    with pytest.raises(ValueError):
        gamma(4)
