"""Spacetime points, spin-coframe gauges, rotors, connections and Pfaff derivatives.

Three global gauges are provided:

``Xi``
    the Cartesian coframe ``{gamma^mu}`` with frame ``d/dx^mu``;
``XiO``
    the constant rotated coframe ``Gamma^mu`` obtained from ``gamma^mu`` by a
    quarter turn in the 2-3 plane;
``XiS``
    the spherical coframe ``theta^mu = Omega Gamma^mu ~Omega`` whose dual frame
    is ``(d/dt, (1/r) d/dtheta, -d/dr, (1/(r sin theta)) d/dphi)``.

Every gauge is described by a single rotor ``R(p)`` with
``c^mu(p) = R(p) gamma^mu ~R(p)``; representatives of spinor fields transform
as ``psi_g = psi_c ~R``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (
    Multivector,
    Rotor,
    angle_rotor,
    blade,
    conjugate,
    gamma,
    gp,
    reverse,
    scalar,
)

R_MIN = 1e-6
THETA_PAD = 1e-3
FD_STEP = 1e-5

Field = Callable[["Point"], Multivector]


class PoleProximityError(ValueError):
    """Point too close to the polar axis for a derivative-taking operation."""


@dataclass(frozen=True)
class Point:
    """Spacetime event in spherical coordinates.

    ``phi`` is kept as given (never wrapped) so fields that are double valued
    under ``phi -> phi + 2 pi`` stay continuous through finite differences.
    """

    t: float
    r: float
    theta: float
    phi: float

    def __post_init__(self):
        vals = (self.t, self.r, self.theta, self.phi)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite coordinate in {vals}")
        if self.r <= 0.0:
            raise ValueError(f"radius must be positive, got {self.r}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"colatitude outside [0, pi]: {self.theta}")

    @property
    def cartesian(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [
                self.t,
                self.r * st * math.cos(self.phi),
                self.r * st * math.sin(self.phi),
                self.r * math.cos(self.theta),
            ]
        )

    @classmethod
    def from_cartesian(cls, x, phi_ref: float | None = None) -> "Point":
        t, x1, x2, x3 = (float(v) for v in x)
        r = math.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
        theta = math.acos(max(-1.0, min(1.0, x3 / r)))
        phi = math.atan2(x2, x1)
        if phi_ref is not None:
            phi += 2.0 * math.pi * round((phi_ref - phi) / (2.0 * math.pi))
        return cls(t, r, theta, phi)

    def check_interior(self, r_min: float = R_MIN, theta_pad: float = THETA_PAD) -> None:
        if self.r <= r_min:
            raise ValueError(f"radius {self.r} below r_min={r_min}")
        if math.sin(self.theta) < theta_pad:
            raise PoleProximityError(
                f"theta={self.theta} within {theta_pad} of the polar axis"
            )


class GaugeId(enum.Enum):
    Xi = "xi"
    XiO = "xio"
    XiS = "xis"


@dataclass(frozen=True)
class CoframeSet:
    upper: tuple[Multivector, ...]
    lower: tuple[Multivector, ...]


@dataclass(frozen=True)
class FrameVector:
    """A frame vector field as ``scale(p) * d/d(coordinate)``.

    ``chart`` is ``"cartesian"`` (coordinates t, x, y, z) or ``"spherical"``
    (t, r, theta, phi).
    """

    chart: str
    index: int
    scale: Callable[[Point], float]


# --- rotors -----------------------------------------------------------------


def rotor_U() -> Rotor:
    """``exp(gamma^23 pi/4)``; conjugation by it sends gamma^2 to +gamma^3."""
    return angle_rotor("23", math.pi / 4)


def rotor_Omega(p: Point) -> Rotor:
    """``exp(gamma^12 phi/2) exp(gamma^31 theta/2)``."""
    out = angle_rotor("12", p.phi / 2) * angle_rotor("31", p.theta / 2)
    return Rotor._trusted(out.coeffs)


def d_rotor_Omega(p: Point) -> tuple[Multivector, Multivector]:
    """Analytic partials ``(dOmega/dtheta, dOmega/dphi)``."""
    a = angle_rotor("12", p.phi / 2)
    b = angle_rotor("31", p.theta / 2)
    d_theta = a * blade("31") * b * 0.5
    d_phi = blade("12") * a * b * 0.5
    return d_theta, d_phi


def gauge_rotor(g: GaugeId, p: Point | None = None) -> Rotor:
    """Rotor ``R`` with coframe ``c^mu = R gamma^mu ~R`` for gauge ``g``.

    The rotated Cartesian gauge uses ``~U``: with ``U`` itself the resulting
    coframe would not be dual to the spherical frame (the radial and
    azimuthal legs would both flip sign).
    """
    if g is GaugeId.Xi:
        return Rotor._trusted(scalar(1.0).coeffs)
    u_inv = rotor_U().inverse()
    if g is GaugeId.XiO:
        return u_inv
    if p is None:
        raise ValueError("the spherical gauge rotor depends on the point")
    return Rotor._trusted((rotor_Omega(p) * u_inv).coeffs)


def coframe(g: GaugeId, p: Point | None = None) -> CoframeSet:
    R = gauge_rotor(g, p)
    upper = tuple(conjugate(R, gamma(mu)) for mu in range(4))
    lower = (upper[0],) + tuple(-c for c in upper[1:])
    return CoframeSet(upper, lower)


# --- frames -----------------------------------------------------------------

_ONE = lambda p: 1.0  # noqa: E731
_MINUS_ONE = lambda p: -1.0  # noqa: E731

FRAMES: dict[GaugeId, tuple[FrameVector, ...]] = {
    GaugeId.Xi: tuple(FrameVector("cartesian", mu, _ONE) for mu in range(4)),
    # dual to Gamma = (g0, g1, -g3, g2)
    GaugeId.XiO: (
        FrameVector("cartesian", 0, _ONE),
        FrameVector("cartesian", 1, _ONE),
        FrameVector("cartesian", 3, _MINUS_ONE),
        FrameVector("cartesian", 2, _ONE),
    ),
    GaugeId.XiS: (
        FrameVector("spherical", 0, _ONE),
        FrameVector("spherical", 2, lambda p: 1.0 / p.r),
        FrameVector("spherical", 1, _MINUS_ONE),
        FrameVector("spherical", 3, lambda p: 1.0 / (p.r * math.sin(p.theta))),
    ),
}


def _shift(p: Point, chart: str, index: int, delta: float) -> Point:
    if chart == "spherical":
        coords = [p.t, p.r, p.theta, p.phi]
        coords[index] += delta
        return Point(*coords)
    x = p.cartesian
    x[index] += delta
    return Point.from_cartesian(x, phi_ref=p.phi)


def _step(p: Point, chart: str, index: int, h: float) -> float:
    if chart == "spherical" and index in (2, 3):
        return h
    if chart == "spherical" and index == 1:
        return h * p.r
    return h * max(1.0, p.r)


def directional_derivative(
    F: Field, vec: FrameVector, p: Point, h: float = FD_STEP, absolute: bool = False
):
    """Central difference of ``F`` along ``vec``, applied to all 16 coefficients.

    ``h`` is scaled to the coordinate unless ``absolute`` is set, in which case
    it is the raw coordinate increment.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    d = h if absolute else _step(p, vec.chart, vec.index, h)
    fp = F(_shift(p, vec.chart, vec.index, d)).coeffs
    fm = F(_shift(p, vec.chart, vec.index, -d)).coeffs
    return Multivector(vec.scale(p) * (fp - fm) / (2.0 * d))


def frame_derivative(
    F: Field, g: GaugeId, p: Point, mu: int, h: float = FD_STEP
) -> Multivector:
    """Pfaff derivative ``e_mu(F)`` in gauge ``g``.

    Coefficients are differentiated with respect to the gauge's own coframe
    basis held fixed.  For the constant gauges that is the plain derivative
    of the gamma-basis coefficients; in the spherical gauge the field is first
    expressed in the ``theta^mu`` basis.
    """
    vec = FRAMES[g][mu]
    if g is not GaugeId.XiS:
        return directional_derivative(F, vec, p, h)
    if vec.chart == "spherical" and vec.index in (2, 3):
        p.check_interior()

    def components(q: Point) -> Multivector:
        R = gauge_rotor(g, q)
        return gp(gp(reverse(R), F(q)), R)

    R = gauge_rotor(g, p)
    return conjugate(R, directional_derivative(components, vec, p, h))


def plain_frame_derivative(
    F: Field, g: GaugeId, p: Point, mu: int, h: float = FD_STEP
) -> Multivector:
    """Derivative of the gamma-basis coefficients along frame vector ``mu``."""
    return directional_derivative(F, FRAMES[g][mu], p, h)


def frame_components(g: GaugeId, p: Point) -> np.ndarray:
    """Cartesian components ``E[b, nu]`` of the frame vectors ``e_b`` at ``p``."""
    out = np.zeros((4, 4))
    st, ct = math.sin(p.theta), math.cos(p.theta)
    sp, cp = math.sin(p.phi), math.cos(p.phi)
    # d/dr, d/dtheta, d/dphi in Cartesian components
    jac = {
        1: np.array([0.0, st * cp, st * sp, ct]),
        2: np.array([0.0, p.r * ct * cp, p.r * ct * sp, -p.r * st]),
        3: np.array([0.0, -p.r * st * sp, p.r * st * cp, 0.0]),
    }
    for b, vec in enumerate(FRAMES[g]):
        if vec.chart == "cartesian" or vec.index == 0:
            out[b, vec.index] = vec.scale(p)
        else:
            out[b] = vec.scale(p) * jac[vec.index]
    return out


# --- connection -------------------------------------------------------------


def _zero() -> Multivector:
    return Multivector(np.zeros(16))


def connection(g: GaugeId, p: Point, mu: int) -> Multivector:
    """Connection bivector ``omega_mu = 2 (e_mu Omega) ~Omega`` of gauge ``g``.

    Zero in both Cartesian gauges.  In the spherical gauge only the polar and
    azimuthal legs survive::

        omega_1 = (cos(phi) g31 + sin(phi) g32) / r
        omega_3 = g12 / (r sin(theta))
    """
    if mu not in (0, 1, 2, 3):
        raise ValueError(f"frame index must be 0..3, got {mu}")
    if g is not GaugeId.XiS:
        return _zero()
    p.check_interior()
    if mu == 1:
        return (blade("31") * math.cos(p.phi) + blade("32") * math.sin(p.phi)) / p.r
    if mu == 3:
        return blade("12") / (p.r * math.sin(p.theta))
    return _zero()


def connection_fd(p: Point, mu: int, h: float) -> Multivector:
    """Finite-difference estimate of ``2 (e_mu Omega) ~Omega``."""
    vec = FRAMES[GaugeId.XiS][mu]
    dO = directional_derivative(rotor_Omega, vec, p, h, absolute=True)
    return gp(dO, reverse(rotor_Omega(p))) * 2.0


def omega_terms(p: Point) -> list[Multivector]:
    """``Gamma^mu (e_mu ~Omega) Omega`` for mu = 0..3, from analytic derivatives.

    Their sum is ``-g3/r - cot(theta) g1/(2r)``, the gradient of
    ``log(1/(r sqrt(sin theta)))`` written with the rotated Cartesian coframe.
    """
    p.check_interior()
    Gam = coframe(GaugeId.XiO).upper
    Om = rotor_Omega(p)
    d_theta, d_phi = d_rotor_Omega(p)
    # e_mu(~Omega) = reverse(e_mu(Omega))
    derivs = [
        _zero(),
        reverse(d_theta) / p.r,
        _zero(),
        reverse(d_phi) / (p.r * math.sin(p.theta)),
    ]
    return [gp(gp(Gam[mu], derivs[mu]), Om) for mu in range(4)]


def omega_terms_reference(p: Point) -> list[Multivector]:
    """Reference closed forms whose sum is claimed to vanish.

    They disagree with :func:`omega_terms` for mu = 1 and mu = 3.
    """
    cot = math.cos(p.theta) / math.sin(p.theta)
    g1, g3 = gamma(1), gamma(3)
    t1 = g1 * (cot / (2 * p.r)) - g3 / (2 * p.r)
    return [_zero(), t1, _zero(), -t1]


def omega_terms_closed(p: Point) -> list[Multivector]:
    """Closed forms of :func:`omega_terms` obtained by hand differentiation."""
    cot = math.cos(p.theta) / math.sin(p.theta)
    g1, g3 = gamma(1), gamma(3)
    return [
        _zero(),
        -g3 / (2 * p.r),
        _zero(),
        -(g1 * cot + g3) / (2 * p.r),
    ]


def omega_term_check(p: Point) -> list[Multivector]:
    return omega_terms(p)
