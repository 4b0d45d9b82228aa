"""Dirac-Hestenes residual in any of the three gauges, and gauge transport."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (
    Multivector,
    approx_eq,
    blade,
    conjugate,
    gamma,
    gp,
    grade,
    norm,
    pseudoscalar,
    reverse,
    scalar,
)
from .frames import (
    FD_STEP,
    GaugeId,
    Point,
    coframe,
    connection,
    frame_derivative,
    gauge_rotor,
    rotor_Omega,
    rotor_U,
)

DerivFn = Callable[[Point, int], Multivector]


def _u_conjugation_sign() -> int:
    img = conjugate(rotor_U(), blade("21"))
    for s in (1, -1):
        if approx_eq(img, blade("13") * s):
            return s
    raise ArithmeticError("U does not map g21 to +-g13")


#: ``U g21 ~U = U_SIGN * g13``, found by direct multiplication.
U_SIGN = _u_conjugation_sign()


@dataclass(frozen=True)
class SpinorField:
    """Even multivector field.

    ``frame_derivs(p, mu)`` optionally supplies the exact Pfaff derivative
    along frame vector ``mu`` of ``gauge``; it is only used when the residual
    is evaluated in that same gauge.
    """

    eval: Callable[[Point], Multivector]
    frame_derivs: DerivFn | None = None
    gauge: GaugeId | None = None

    def __call__(self, p: Point) -> Multivector:
        return self.eval(p)


@dataclass(frozen=True)
class PotentialField:
    """Electrostatic potential ``A = V(r) g0`` unless a custom ``A`` is supplied."""

    V: Callable[[float], float]
    A_fn: Callable[[Point], Multivector] | None = None

    def A(self, p: Point) -> Multivector:
        if self.A_fn is not None:
            return self.A_fn(p)
        return gamma(0) * float(self.V(p.r))


@dataclass(frozen=True)
class DheParams:
    m: float
    q: float
    gauge: GaugeId
    B_right: Multivector | None = None
    T_right: Multivector | None = None

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("mass must be non-negative")
        checks = ((self.B_right, 2, -1.0, "B_right"), (self.T_right, 1, 1.0, "T_right"))
        for mv, k, target, name in checks:
            if mv is None:
                continue
            if not approx_eq(grade(mv, k), mv, 1e-12):
                raise ValueError(f"{name} must be of grade {k}")
            if not approx_eq(gp(mv, mv), scalar(target), 1e-10):
                raise ValueError(f"{name} must square to {target:+g}")

    def multipliers(self, p: Point) -> tuple[Multivector, Multivector]:
        B, T = right_multipliers(self.gauge, p)
        if self.B_right is not None:
            B = self.B_right
        if self.T_right is not None:
            T = self.T_right
        return B, T


def right_multipliers(g: GaugeId, p: Point | None = None) -> tuple[Multivector, Multivector]:
    """Gauge images ``(R g21 ~R, R g0 ~R)`` of the Cartesian right multipliers.

    That is ``(g21, g0)`` in ``Xi``, ``(g13, g0)`` in ``XiO`` and
    ``(Omega g13 ~Omega, g0)`` in ``XiS``.
    """
    if U_SIGN != -1:  # pragma: no cover - structural invariant of the algebra
        raise ArithmeticError("unexpected orientation of the U rotation")
    R = gauge_rotor(g, p)
    return conjugate(R, blade("21")), conjugate(R, gamma(0))


def pfaff_derivative(psi: SpinorField, g: GaugeId, p: Point, mu: int, h: float = FD_STEP):
    if psi.frame_derivs is not None and psi.gauge is g:
        return psi.frame_derivs(p, mu)
    return frame_derivative(psi.eval, g, p, mu, h)


def dhe_residual(
    params: DheParams,
    psi: SpinorField,
    pot: PotentialField,
    p: Point,
    with_connection: bool = True,
    h: float = FD_STEP,
) -> Multivector:
    """``sum_mu c^mu (D_mu psi + omega_mu psi / 2) B + m psi T - q A psi``.

    ``D_mu`` is the Pfaff derivative of the gauge.  ``with_connection=False``
    drops the ``omega`` term.
    """
    g = params.gauge
    if g is GaugeId.XiS:
        p.check_interior()
    c = coframe(g, p).upper
    B, T = params.multipliers(p)
    value = psi.eval(p)
    total = np.zeros(16)
    for mu in range(4):
        d = pfaff_derivative(psi, g, p, mu, h)
        if with_connection and g is GaugeId.XiS:
            d = d + gp(connection(g, p, mu), value) * 0.5
        total += gp(gp(c[mu], d), B).coeffs
    total += params.m * gp(value, T).coeffs
    total -= params.q * gp(pot.A(p), value).coeffs
    return Multivector(total)


def relative_residual(params, psi, pot, p, **kw) -> float:
    """``|residual(p)| / |psi(p)|``."""
    return float(norm(dhe_residual(params, psi, pot, p, **kw)) / norm(psi.eval(p)))


def gauge_transport(psi: SpinorField, src: GaugeId, dst: GaugeId) -> SpinorField:
    """Representative in ``dst`` of the field represented by ``psi`` in ``src``.

    With ``psi_g = psi_Xi ~R_g`` this is right multiplication by
    ``R_src(p) ~R_dst(p)``, e.g. ``psi_s = psi_o ~Omega``.
    """
    if src is dst:
        raise ValueError("source and destination gauge coincide")

    def ev(p: Point) -> Multivector:
        link = gp(gauge_rotor(src, p), reverse(gauge_rotor(dst, p)))
        return gp(psi.eval(p), link)

    return SpinorField(ev, None, dst)


def potential_transport(A: PotentialField) -> PotentialField:
    """Potential seen from the spherical gauge, ``~Omega A Omega``."""

    def A_new(p: Point) -> Multivector:
        Om = rotor_Omega(p)
        return gp(gp(reverse(Om), A.A(p)), Om)

    return PotentialField(A.V, A_new)


def rest_plane_wave(m: float, body: Multivector | None = None) -> SpinorField:
    """``body * exp(-m t g21)`` in gauge ``Xi``.

    The default body ``eps5`` anticommutes with ``g0`` and gives a free
    solution of energy ``+m``; ``body = 1`` leaves the residual ``2 m psi g0``.
    """
    b = pseudoscalar() if body is None else body

    def ev(p: Point) -> Multivector:
        return gp(b, scalar(math.cos(m * p.t)) - blade("21") * math.sin(m * p.t))

    return SpinorField(ev, None, GaugeId.Xi)
