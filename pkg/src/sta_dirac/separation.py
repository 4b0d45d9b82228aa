"""Separation of variables for the Dirac-Hestenes equation with a central potential.

The reduced field ``chi = r sqrt(sin theta) psi`` obeys a connection-free
equation whose operator is built from a *blade set* ``c^mu``: the constant
rotated coframe ``Gamma^mu`` on the Cartesian path, or the spherical coframe
``theta^mu(p)`` on the spherical path.  Writing

    B = c^2 c^1,  q1 = c^3 c^2,  q3 = c^3 c^1,  I = c^0 c^1 c^2 c^3,
    Y = zeta - q1 zeta~,       (zeta, zeta~ in span{1, B})
    chi = [f(r) q3 Y B + g(r) I Y] exp((n phi - E t) B),

separates the equation into an angular system for ``(zeta, zeta~)`` and the
radial pair ``(f, g) = (g0, g1)``.  Both systems are obtained here by blade
projection of the operator itself, so the two paths literally share the same
numerical code and differ only in the blade set handed to it.

Complex numbers stand for ``span{1, B}`` with ``i -> B`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numba import njit
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.interpolate import BPoly

from .algebra import Multivector, gp, reverse, scalar
from .frames import GaugeId, Point, coframe, d_rotor_Omega, gauge_rotor, rotor_Omega, rotor_U
from .dhe import SpinorField
from .special import gegenbauer, normalization_b

THETA_EPS = 1e-3


class NotFoundError(RuntimeError):
    """No eigenvalue could be bracketed."""


# --- problem data -----------------------------------------------------------


@dataclass(frozen=True)
class CoulombPotential:
    """Attractive point charge, ``qV(r) = -Zalpha / r``."""

    Zalpha: float

    def __post_init__(self):
        if not 0.0 < self.Zalpha < 1.0:
            raise ValueError(f"Zalpha must lie in (0, 1), got {self.Zalpha}")

    def __call__(self, r):
        return -self.Zalpha / np.asarray(r, dtype=float)


@dataclass(frozen=True)
class SeparatedAnsatz:
    n: float
    E: float
    kappa: float
    lam: float
    p: int
    m: float
    Zalpha: float


def phase_factor(n: float, E: float, B: Multivector, p: Point) -> Multivector:
    """``exp((n phi - E t) B) = cos + B sin`` for a unit bivector ``B``."""
    sq = gp(B, B).coeffs
    if abs(sq[0] + 1.0) > 1e-12 or np.linalg.norm(sq[1:]) > 1e-12:
        raise ValueError("phase bivector must square to -1")
    a = n * p.phi - E * p.t
    return scalar(math.cos(a)) + B * math.sin(a)


# --- blade sets -------------------------------------------------------------


@dataclass(frozen=True)
class BladeSet:
    c: tuple[Multivector, Multivector, Multivector, Multivector]

    @classmethod
    def cartesian(cls) -> "BladeSet":
        """Plain ``gamma^mu``; the components every gauge is conjugated from."""
        return cls(coframe(GaugeId.Xi).upper)

    @classmethod
    def rotated(cls) -> "BladeSet":
        return cls(coframe(GaugeId.XiO).upper)

    @classmethod
    def spherical(cls, p: Point) -> "BladeSet":
        return cls(coframe(GaugeId.XiS, p).upper)

    @property
    def B(self) -> Multivector:
        return self.c[2] * self.c[1]

    @property
    def q1(self) -> Multivector:
        return self.c[3] * self.c[2]

    @property
    def q3(self) -> Multivector:
        return self.c[3] * self.c[1]

    @property
    def I(self) -> Multivector:  # noqa: E743
        return self.c[0] * self.c[1] * self.c[2] * self.c[3]

    def cplx(self, z: complex) -> Multivector:
        return scalar(z.real) + self.B * z.imag

    def Y(self, zeta: complex, zeta_t: complex) -> Multivector:
        return self.cplx(zeta) - self.q1 * self.cplx(zeta_t)

    def upper_part(self, Y: Multivector) -> Multivector:
        return self.q3 * Y * self.B

    def lower_part(self, Y: Multivector) -> Multivector:
        return self.I * Y

    def spinor(self, f: float, g: float, zeta: complex, zeta_t: complex) -> Multivector:
        """``f q3 Y B + g I Y`` (no phase, no radial prefactor)."""
        Y = self.Y(zeta, zeta_t)
        return self.upper_part(Y) * f + self.lower_part(Y) * g


def _stack(*mvs: Multivector) -> np.ndarray:
    return np.concatenate([m.coeffs for m in mvs])


def _solve_projection(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    resid = np.linalg.norm(lhs @ sol - rhs)
    if resid > 1e-10 * max(1.0, np.linalg.norm(rhs)):
        raise ArithmeticError(f"ansatz does not close under projection (residual {resid:.2e})")
    return sol


def angular_matrices(bs: BladeSet) -> tuple[np.ndarray, np.ndarray]:
    """Matrices with ``y' = (kappa A_k + (n / sin theta) A_n) y``.

    ``y = (Re zeta, Im zeta, Re zeta~, Im zeta~)``.  They follow from demanding
    that the angular operator ``c^1 (dX/dtheta) B - (n/sin) c^3 X`` maps the
    upper part to ``+kappa c^2 X B`` and the lower part to ``-kappa c^2 X B``.
    """
    basis_Y = [bs.Y(1, 0), bs.Y(1j, 0), bs.Y(0, 1), bs.Y(0, 1j)]
    c, B = bs.c, bs.B
    lhs = np.array(
        [_stack(c[1] * bs.upper_part(Y) * B, c[1] * bs.lower_part(Y) * B) for Y in basis_Y]
    ).T
    rk = np.array(
        [_stack(c[2] * bs.upper_part(Y) * B, -(c[2] * bs.lower_part(Y) * B)) for Y in basis_Y]
    ).T
    rn = np.array([_stack(c[3] * bs.upper_part(Y), c[3] * bs.lower_part(Y)) for Y in basis_Y]).T
    return _solve_projection(lhs, rk), _solve_projection(lhs, rn)


RADIAL_KEYS = ("kappa_over_r", "E", "m", "qV")


def radial_matrices(bs: BladeSet, Y: Multivector | None = None) -> dict[str, np.ndarray]:
    """2x2 matrices with ``(f, g)' = sum_k coeff_k M_k (f, g)``.

    Coefficients are ``kappa/r, E, m, qV``.  ``Y`` is any angular value; the
    result must not depend on it, which is what makes the ansatz separable.
    """
    if Y is None:
        Y = bs.Y(0.3 - 0.7j, 1.1 + 0.2j)
    c, B = bs.c, bs.B
    up, lo = bs.upper_part(Y), bs.lower_part(Y)
    lhs = np.stack([_stack(-(c[2] * up * B)), _stack(-(c[2] * lo * B))], axis=1)
    out = {}
    for key in RADIAL_KEYS:
        cols = []
        for chi, k_sign in ((up, 1.0), (lo, -1.0)):
            if key == "kappa_over_r":
                term = -(c[2] * chi * B) * k_sign
            elif key == "E":
                term = -(c[0] * chi)
            elif key == "m":
                term = -(chi * c[0])
            else:
                term = c[0] * chi
            cols.append(_stack(term))
        out[key] = _solve_projection(lhs, np.stack(cols, axis=1))
    return out


# --- angular pair -----------------------------------------------------------


@dataclass(frozen=True)
class AngularPair:
    """``(zeta, zeta~)`` as complex functions of theta with their derivatives."""

    zeta_c: Callable[[float], complex]
    zeta_t_c: Callable[[float], complex]
    dzeta_c: Callable[[float], complex] | None = None
    dzeta_t_c: Callable[[float], complex] | None = None
    kappa: float | None = None
    lam: float | None = None
    blades: BladeSet = field(default_factory=BladeSet.rotated)

    def zeta(self, theta: float) -> Multivector:
        return self.blades.cplx(complex(self.zeta_c(theta)))

    def zeta_tilde(self, theta: float) -> Multivector:
        return self.blades.cplx(complex(self.zeta_t_c(theta)))

    def derivs(self, theta: float, h: float = 1e-6) -> tuple[complex, complex]:
        def d(fn, dfn):
            if dfn is not None:
                return complex(dfn(theta))
            return complex((fn(theta + h) - fn(theta - h)) / (2 * h))

        return d(self.zeta_c, self.dzeta_c), d(self.zeta_t_c, self.dzeta_t_c)

    def scaled(self, s: complex) -> "AngularPair":
        wrap = lambda fn: None if fn is None else (lambda th: s * fn(th))  # noqa: E731
        return AngularPair(
            wrap(self.zeta_c), wrap(self.zeta_t_c), wrap(self.dzeta_c), wrap(self.dzeta_t_c),
            self.kappa, self.lam, self.blades,
        )


def _check_theta(theta: float) -> None:
    if not THETA_EPS < theta < math.pi - THETA_EPS:
        from .frames import PoleProximityError

        raise PoleProximityError(f"theta={theta} too close to a pole")


def angular_residual(pair: AngularPair, kappa: float, lam: float, theta: float) -> Multivector:
    """``sin(theta) (zeta' + B kappa zeta) - lambda zeta~``."""
    _check_theta(theta)
    dz, _ = pair.derivs(theta)
    z, zt = complex(pair.zeta_c(theta)), complex(pair.zeta_t_c(theta))
    return pair.blades.cplx(math.sin(theta) * (dz + 1j * kappa * z) - lam * zt)


def partner_residual(pair: AngularPair, kappa: float, lam: float, theta: float) -> Multivector:
    """``sin(theta) (zeta~' - B kappa zeta~) - lambda zeta``."""
    _check_theta(theta)
    _, dzt = pair.derivs(theta)
    z, zt = complex(pair.zeta_c(theta)), complex(pair.zeta_t_c(theta))
    return pair.blades.cplx(math.sin(theta) * (dzt - 1j * kappa * zt) - lam * z)


def _gegenbauer_prime(p: int, a: float, z: float) -> float:
    return 2.0 * a * gegenbauer(p - 1, a + 1.0, z) if p >= 1 else 0.0


def angular_closed_form(p: int, lam: float) -> AngularPair:
    """Gegenbauer solution of the angular pair.

    ``zeta = b sin^|l| e^{B theta/2} [2 B |l| sin C_{p-1}^{|l|+1} + (p+2|l|) C_p^{|l|}]``
    with ``z = cos theta``.  It solves the system for ``kappa = -(p + |l| + 1/2)``;
    ``zeta~`` then follows from the first angular equation.
    """
    if int(p) != p or p < 0:
        raise ValueError(f"p must be a non-negative integer, got {p!r}")
    if lam == 0:
        raise ValueError("lambda must be non-zero")
    p = int(p)
    a = abs(lam)
    b = normalization_b(p, lam)
    kappa = -(p + a + 0.5)

    def bracket(th):
        s, z = math.sin(th), math.cos(th)
        return 2j * a * s * gegenbauer(p - 1, a + 1.0, z) + (p + 2 * a) * gegenbauer(p, a, z)

    def d_bracket(th):
        s, z = math.sin(th), math.cos(th)
        return 2j * a * (
            z * gegenbauer(p - 1, a + 1.0, z) - s * s * _gegenbauer_prime(p - 1, a + 1.0, z)
        ) - (p + 2 * a) * s * _gegenbauer_prime(p, a, z)

    def zeta(th):
        return b * math.sin(th) ** a * np.exp(0.5j * th) * bracket(th)

    def dzeta(th):
        s = math.sin(th)
        log_d = a * math.cos(th) / s + 0.5j
        return zeta(th) * log_d + b * s**a * np.exp(0.5j * th) * d_bracket(th)

    def zeta_t(th):
        return math.sin(th) * (dzeta(th) + 1j * kappa * zeta(th)) / lam

    return AngularPair(zeta, zeta_t, dzeta, None, kappa, lam)


def _regular_start(A_k, A_n, kappa: float, nu: float, x0: float) -> np.ndarray:
    """Two-term Frobenius start ``x0^|nu| (v0 + x0 v1)`` of the regular branch."""
    a = abs(nu)
    w, V = np.linalg.eigh(nu * A_n)
    keep = V[:, np.isclose(w, a)]
    v0 = keep @ keep.T @ np.array([1.0, 0.0, 0.0, 0.0])
    if np.linalg.norm(v0) < 1e-8:
        v0 = keep[:, 0]
    v0 /= np.linalg.norm(v0)
    v1 = np.linalg.solve((a + 1.0) * np.eye(4) - nu * A_n, kappa * A_k @ v0)
    return x0**a * (v0 + x0 * v1)


def _as_complex(y: np.ndarray) -> tuple[complex, complex]:
    return complex(y[0], y[1]), complex(y[2], y[3])


@dataclass
class _AngularShot:
    forward: object
    backward: object
    det: float


def _shoot_angular(A_k, A_n, kappa: float, nu: float, eps: float = THETA_EPS) -> _AngularShot:
    def rhs(th, y):
        return (kappa * A_k + (nu / math.sin(th)) * A_n) @ y

    opts = dict(method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
    mid = 0.5 * math.pi
    fw = solve_ivp(rhs, (eps, mid), _regular_start(A_k, A_n, kappa, nu, eps), **opts)
    # near theta = pi the system in u = pi - theta has kappa, nu -> -kappa, -nu
    bw = solve_ivp(rhs, (math.pi - eps, mid), _regular_start(A_k, A_n, -kappa, -nu, eps), **opts)
    zf, ztf = _as_complex(fw.y[:, -1])
    zb, ztb = _as_complex(bw.y[:, -1])
    return _AngularShot(fw, bw, (zf * ztb - ztf * zb).real)


def angular_numeric(
    kappa: float, n: float, blades: BladeSet | None = None, eps: float = THETA_EPS
) -> tuple[AngularPair, float]:
    """Regular solution of the projected angular system, quantizing ``nu`` near ``n``.

    The azimuthal parameter is searched in ``[n - 1/2, n + 1/2]`` (excluding 0);
    the matching determinant at the equator is real, so a sign change brackets
    the eigenvalue.  Returns the pair and ``lambda = nu``.
    """
    if abs(kappa) < 1:
        raise ValueError(f"|kappa| must be >= 1, got {kappa}")
    bs = blades or BladeSet.rotated()
    A_k, A_n = angular_matrices(bs)
    det = lambda nu: _shoot_angular(A_k, A_n, kappa, nu, eps).det  # noqa: E731
    lo_edge, hi_edge = n - 0.5, n + 0.5
    if lo_edge < 0 < hi_edge:
        lo_edge, hi_edge = (1e-3, hi_edge) if n > 0 else (lo_edge, -1e-3)
    grid = np.linspace(lo_edge, hi_edge, 9)
    vals = [det(v) for v in grid]
    roots = []
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(det, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps))
    if not roots:
        raise NotFoundError(f"no regular angular solution for kappa={kappa} near n={n}")
    nu = min(roots, key=lambda v: abs(v - n))
    return _build_numeric_pair(A_k, A_n, kappa, nu, bs, eps), nu


def _build_numeric_pair(A_k, A_n, kappa, nu, bs, eps) -> AngularPair:
    shot = _shoot_angular(A_k, A_n, kappa, nu, eps)
    yf = shot.forward.y[:, -1]
    yb = shot.backward.y[:, -1]
    zf, ztf = _as_complex(yf)
    zb, ztb = _as_complex(yb)
    # right multiplication by span{1, B} maps solutions to solutions
    s = zf / zb if abs(zb) > abs(ztb) else ztf / ztb
    mid = 0.5 * math.pi

    def y_at(th):
        if th <= mid:
            return _as_complex(shot.forward.sol(th))
        z, zt = _as_complex(shot.backward.sol(th))
        return s * z, s * zt

    def dy_at(th):
        z, zt = y_at(th)
        y = np.array([z.real, z.imag, zt.real, zt.imag])
        return _as_complex((kappa * A_k + (nu / math.sin(th)) * A_n) @ y)

    return AngularPair(
        lambda th: y_at(th)[0],
        lambda th: y_at(th)[1],
        lambda th: dy_at(th)[0],
        lambda th: dy_at(th)[1],
        kappa,
        nu,
        bs,
    )


# --- radial system ----------------------------------------------------------


def radial_rhs(r: float, g0: float, g1: float, E: float, kappa: float, V, m: float = 1.0):
    """Derivatives ``(g0', g1')`` of the radial pair.

    ``g1' = -(kappa/r) g1 - (V - m - E) g0`` and
    ``g0' = (kappa/r) g0 - (E - m - V) g1``; ``V`` is a number or a callable of r.
    """
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    v = V(r) if callable(V) else V
    dg1 = -(kappa / r) * g1 - (v - m - E) * g0
    dg0 = (kappa / r) * g0 - (E - m - v) * g1
    return dg0, dg1


def sommerfeld_energy(n_r: int, kappa: int, Zalpha: float, m: float = 1.0) -> float:
    """Closed-form Coulomb bound-state energy."""
    _check_state(n_r, kappa)
    if Zalpha**2 >= kappa**2:
        raise ValueError("need (Z alpha)^2 < kappa^2")
    gam = math.sqrt(kappa * kappa - Zalpha * Zalpha)
    return m / math.sqrt(1.0 + (Zalpha / (n_r + gam)) ** 2)


def _check_state(n_r: int, kappa: int) -> None:
    if int(n_r) != n_r or n_r < 0:
        raise ValueError(f"n_r must be a non-negative integer, got {n_r}")
    if int(kappa) != kappa or kappa == 0:
        raise ValueError(f"kappa must be a non-zero integer, got {kappa}")
    if n_r == 0 and kappa > 0:
        raise ValueError("n_r = 0 requires kappa < 0 (no normalizable state)")


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_max: float
    N: int = 4000

    @classmethod
    def for_state(cls, n_r: int, kappa: int, Zalpha: float, m: float = 1.0, N: int = 4000):
        n = n_r + abs(kappa)
        return cls(1e-6 / (m * Zalpha), 50.0 * n * n / (m * Zalpha), N)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(math.log(self.r_min), math.log(self.r_max), self.N + 1)


def _generator(mats: dict[str, np.ndarray], kappa, E, m, Zalpha):
    """Split ``r M(r)`` into ``base + r * lin`` for the Coulomb case."""
    base = kappa * mats["kappa_over_r"] - Zalpha * mats["qV"]
    lin = E * mats["E"] + m * mats["m"]
    return np.ascontiguousarray(base), np.ascontiguousarray(lin)


DEFAULT_MATS = None


def _default_mats():
    global DEFAULT_MATS
    if DEFAULT_MATS is None:
        DEFAULT_MATS = radial_matrices(BladeSet.rotated())
    return DEFAULT_MATS


@dataclass(frozen=True)
class _Shooter:
    kappa: int
    Zalpha: float
    m: float
    grid: RadialGrid
    mats: dict

    @property
    def i_match(self) -> int:
        n_eff = max(1.0, abs(self.kappa))
        r_match = n_eff * n_eff / (self.m * self.Zalpha)
        x = self.grid.x
        return int(np.clip(np.searchsorted(x, math.log(r_match)), 1, self.grid.N - 1))

    def _setup(self, E):
        base, lin = _generator(self.mats, self.kappa, E, self.m, self.Zalpha)
        x = self.grid.x
        return base, lin, x[0], x[1] - x[0]

    def start_out(self) -> np.ndarray:
        gam = math.sqrt(self.kappa**2 - self.Zalpha**2)
        return np.array([(gam + self.kappa) / self.Zalpha, 1.0])

    def start_in(self, E) -> np.ndarray:
        beta = math.sqrt(max(self.m * self.m - E * E, 0.0))
        return np.array([-beta / (E + self.m), 1.0])

    def nodes(self, E) -> int:
        base, lin, x0, h = self._setup(E)
        _, n = _march(x0, h, self.grid.N, self.start_out(), base, lin)
        return n

    def mismatch(self, E, normalized: bool = False) -> float:
        base, lin, x0, h = self._setup(E)
        im = self.i_match
        yo, _ = _march(x0, h, im, self.start_out(), base, lin)
        yi, _ = _march(x0 + self.grid.N * h, -h, self.grid.N - im, self.start_in(E), base, lin)
        # f and g are rescaled by positive factors, so the sign is meaningful
        w = yo[1] * yi[0] - yo[0] * yi[1]
        if normalized:
            w /= math.hypot(*yo) * math.hypot(*yi)
        return w

    def solution(self, E) -> tuple[np.ndarray, np.ndarray]:
        base, lin, x0, h = self._setup(E)
        im, N = self.i_match, self.grid.N
        out = _path(x0, h, im, self.start_out(), base, lin)
        inn = _path(x0 + N * h, -h, N - im, self.start_in(E), base, lin)[::-1]
        k = 1 if abs(out[-1, 1]) >= abs(out[-1, 0]) else 0
        inn = inn * (out[-1, k] / inn[0, k])
        y = np.vstack([out[:-1], inn])
        return self.grid.x, y


def _rk4_kernel(x0, h, n, y0, base, lin, store, count):
    y = y0.copy()
    path = np.empty((n + 1 if store else 1, 2))
    path[0] = y
    nodes = 0
    x = x0
    for i in range(n):
        r0 = math.exp(x)
        rh = math.exp(x + 0.5 * h)
        r1 = math.exp(x + h)
        a00, a01 = base[0, 0] + r0 * lin[0, 0], base[0, 1] + r0 * lin[0, 1]
        a10, a11 = base[1, 0] + r0 * lin[1, 0], base[1, 1] + r0 * lin[1, 1]
        k1f = a00 * y[0] + a01 * y[1]
        k1g = a10 * y[0] + a11 * y[1]
        b00, b01 = base[0, 0] + rh * lin[0, 0], base[0, 1] + rh * lin[0, 1]
        b10, b11 = base[1, 0] + rh * lin[1, 0], base[1, 1] + rh * lin[1, 1]
        f2, g2 = y[0] + 0.5 * h * k1f, y[1] + 0.5 * h * k1g
        k2f, k2g = b00 * f2 + b01 * g2, b10 * f2 + b11 * g2
        f3, g3 = y[0] + 0.5 * h * k2f, y[1] + 0.5 * h * k2g
        k3f, k3g = b00 * f3 + b01 * g3, b10 * f3 + b11 * g3
        c00, c01 = base[0, 0] + r1 * lin[0, 0], base[0, 1] + r1 * lin[0, 1]
        c10, c11 = base[1, 0] + r1 * lin[1, 0], base[1, 1] + r1 * lin[1, 1]
        f4, g4 = y[0] + h * k3f, y[1] + h * k3g
        k4f, k4g = c00 * f4 + c01 * g4, c10 * f4 + c11 * g4
        g_old = y[1]
        y[0] += h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f)
        y[1] += h / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g)
        if count and (y[1] > 0) != (g_old > 0) and g_old != 0.0:
            nodes += 1
        if store:
            path[i + 1] = y
        else:
            big = max(abs(y[0]), abs(y[1]))
            if big > 1e150:
                y /= big
        x += h
    return y, nodes, path


_kernel = njit(cache=True)(_rk4_kernel)


def _march(x0, h, n, y0, base, lin):
    """Final state (rescaled, signs kept) and sign changes of g."""
    y, nodes, _ = _kernel(x0, h, n, y0, base, lin, False, True)
    return y, nodes


def _path(x0, h, n, y0, base, lin):
    _, _, path = _kernel(x0, h, n, y0, base, lin, True, False)
    return path


def _state_index(n_r: int, kappa: int) -> int:
    """Number of nodes of g1 below the target state on the kappa ladder."""
    return n_r if kappa < 0 else n_r - 1


@dataclass(frozen=True)
class RadialPair:
    """Bound-state radial functions ``(g0, g1)`` on a log grid.

    Evaluation uses quintic Hermite interpolation in ``x = ln r`` built from
    the values and the first two derivatives supplied by the ODE itself.
    ``mismatch`` is the matching-point Wronskian of the unit-normalized
    inward and outward solutions.
    """

    E: float
    kappa: int
    n_r: int
    r: np.ndarray
    g0_grid: np.ndarray
    g1_grid: np.ndarray
    interp: BPoly
    grid: RadialGrid
    mismatch: float

    def _x(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.grid.r_min) or np.any(r > self.grid.r_max):
            raise ValueError(f"radius outside the radial grid [{self.grid.r_min}, {self.grid.r_max}]")
        return np.log(r)

    def __call__(self, r):
        y = self.interp(self._x(r))
        return y[..., 0], y[..., 1]

    def derivative(self, r):
        x = self._x(r)
        dy = self.interp.derivative()(x) / np.asarray(r, dtype=float)[..., None]
        return dy[..., 0], dy[..., 1]

    @property
    def nodes_g1(self) -> int:
        g = self.g1_grid
        g = g[np.abs(g) > 1e-12 * np.abs(g).max()]
        return int(np.count_nonzero(np.signbit(g[1:]) != np.signbit(g[:-1])))


class _Search:
    def __init__(self, kappa, n_r, pot, m, N, mats):
        _check_state(n_r, kappa)
        if pot.Zalpha**2 >= kappa**2:
            raise ValueError("need (Z alpha)^2 < kappa^2")
        self.m = m
        self.n_r, self.kappa = int(n_r), int(kappa)
        grid = RadialGrid.for_state(n_r, kappa, pot.Zalpha, m, N)
        self.shooter = _Shooter(self.kappa, pot.Zalpha, m, grid, mats or _default_mats())

    def run(self, bracket, tol, max_iter) -> float:
        m, sh = self.m, self.shooter
        lo, hi = bracket if bracket is not None else (1e-6 * m, m * (1.0 - 1e-13))
        if not 0.0 < lo < hi < m:
            raise ValueError(f"bracket must satisfy 0 < E_lo < E_hi < m, got {(lo, hi)}")
        k = _state_index(self.n_r, self.kappa)
        n_lo, n_hi = sh.nodes(lo), sh.nodes(hi)
        if not n_lo <= k < n_hi:
            raise NotFoundError(
                f"bracket {(lo, hi)} does not contain state n_r={self.n_r}, kappa={self.kappa}"
            )
        # node bisection until exactly one eigenvalue is enclosed
        w_lo, w_hi = sh.mismatch(lo), sh.mismatch(hi)
        for _ in range(max_iter):
            if n_lo == k and n_hi == k + 1 and w_lo * w_hi < 0:
                break
            mid = 0.5 * (lo + hi)
            if sh.nodes(mid) <= k:
                lo, w_lo = mid, sh.mismatch(mid)
                n_lo = sh.nodes(mid)
            else:
                hi, w_hi = mid, sh.mismatch(mid)
                n_hi = sh.nodes(mid)
        else:
            raise NotFoundError("could not isolate a single eigenvalue")
        for _ in range(max_iter):
            if hi - lo < tol * m:
                break
            mid = 0.5 * (lo + hi)
            w = sh.mismatch(mid)
            if w == 0.0:
                return mid
            if w * w_lo < 0:
                hi = mid
            else:
                lo, w_lo = mid, w
        return 0.5 * (lo + hi)


def shoot_eigenvalue(
    kappa: int,
    n_r: int,
    pot: CoulombPotential,
    bracket: tuple[float, float] | None = None,
    m: float = 1.0,
    tol: float = 1e-10,
    N: int = 4000,
    max_iter: int = 200,
    mats: dict | None = None,
) -> float:
    """Bound-state energy by node-bracketing and bisection on the matching Wronskian.

    ``mats`` are the radial matrices of a blade set (default: the rotated
    Cartesian path); any blade set that separates gives the same system.
    """
    return _Search(kappa, n_r, pot, m, N, mats).run(bracket, tol, max_iter)


def radial_solution(
    kappa: int,
    n_r: int,
    pot: CoulombPotential,
    E: float | None = None,
    m: float = 1.0,
    N: int = 4000,
    mats: dict | None = None,
) -> RadialPair:
    """Normalized radial pair, ``int (g0^2 + g1^2) dr = 1``, at the shot energy."""
    search = _Search(kappa, n_r, pot, m, N, mats)
    if E is None:
        E = search.run(None, 1e-13, 200)
    sh = search.shooter
    x, y = sh.solution(E)
    r = np.exp(x)
    mismatch = sh.mismatch(E, normalized=True)
    norm = math.sqrt(np.trapezoid((y[:, 0] ** 2 + y[:, 1] ** 2) * r, x))
    sign = 1.0 if y[sh.i_match, 1] >= 0 else -1.0
    y = y * (sign / norm)
    base, lin = _generator(sh.mats, kappa, E, m, pot.Zalpha)
    A = base[None] + r[:, None, None] * lin[None]
    dy = np.einsum("nij,nj->ni", A, y)
    d2y = np.einsum("nij,nj->ni", A, dy) + r[:, None] * np.einsum("ij,nj->ni", lin, y)
    interp = BPoly.from_derivatives(x, np.stack([y, dy, d2y], axis=1))
    return RadialPair(E, kappa, n_r, r, y[:, 0], y[:, 1], interp, sh.grid, mismatch)


# --- assembly ---------------------------------------------------------------

_SPHERICAL_FRAME = (  # (coordinate index in (t, r, theta, phi), scale)
    (0, lambda p: 1.0),
    (2, lambda p: 1.0 / p.r),
    (1, lambda p: -1.0),
    (3, lambda p: 1.0 / (p.r * math.sin(p.theta))),
)
_CARTESIAN_FRAMES = {
    GaugeId.Xi: ((0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)),
    GaugeId.XiO: ((0, 1.0), (1, 1.0), (3, -1.0), (2, 1.0)),
}


def _cartesian_partials(p: Point, d_sph):
    """Convert partials in (t, r, theta, phi) to partials in (t, x, y, z)."""
    st, ct = math.sin(p.theta), math.cos(p.theta)
    sp, cp = math.sin(p.phi), math.cos(p.phi)
    r = p.r
    # rows: x, y, z; columns: d r, d theta, d phi
    J = (
        (st * cp, ct * cp / r, -sp / (r * st)),
        (st * sp, ct * sp / r, cp / (r * st)),
        (ct, -st / r, 0.0),
    )
    out = [d_sph[0]]
    for row in J:
        out.append(d_sph[1] * row[0] + d_sph[2] * row[1] + d_sph[3] * row[2])
    return out


@dataclass(frozen=True, eq=False)
class SeparatedSolution:
    """A separated bound state, evaluable as a spinor field in any gauge.

    With ``K`` the reduced field written in plain ``gamma`` blades and divided
    by ``r sqrt(sin theta)``, and ``R = Omega ~U`` the spherical gauge rotor,
    the representatives are ``psi_Xi = R K``, ``psi_XiO = R K U`` and
    ``psi_XiS = R K ~R``.  The spherical one equals the same construction
    carried out directly with the ``theta^mu`` blades.
    """

    ansatz: SeparatedAnsatz
    ang: AngularPair
    rad: RadialPair

    def _parts(self, p: Point, derivs: bool):
        a = self.ansatz
        bs = BladeSet.cartesian()
        st = math.sin(p.theta)
        pref = 1.0 / (p.r * math.sqrt(st))
        f, g = (float(v) for v in self.rad(p.r))
        z, zt = complex(self.ang.zeta_c(p.theta)), complex(self.ang.zeta_t_c(p.theta))
        P = phase_factor(a.n, a.E, bs.B, p)
        K = bs.spinor(f, g, z, zt) * P * pref
        if not derivs:
            return K, None
        df, dg = (float(v) for v in self.rad.derivative(p.r))
        dz, dzt = self.ang.derivs(p.theta)
        KB = K * bs.B
        dK = (
            KB * (-a.E),
            bs.spinor(df, dg, z, zt) * P * pref - K / p.r,
            bs.spinor(f, g, dz, dzt) * P * pref - K * (0.5 * math.cos(p.theta) / st),
            KB * a.n,
        )
        return K, dK

    def _rotor(self, p: Point, derivs: bool):
        u_inv = rotor_U().inverse()
        R = Multivector(gauge_rotor(GaugeId.XiS, p).coeffs)
        if not derivs:
            return R, None
        d_th, d_ph = d_rotor_Omega(p)
        zero = Multivector(np.zeros(16))
        return R, (zero, zero, d_th * u_inv, d_ph * u_inv)

    def field(self, gauge: GaugeId) -> SpinorField:
        return SpinorField(
            lambda p: self.evaluate(gauge, p),
            lambda p, mu: self.frame_derivative(gauge, p, mu),
            gauge,
        )

    def evaluate(self, gauge: GaugeId, p: Point) -> Multivector:
        p.check_interior()
        if gauge is GaugeId.XiS:
            return self.evaluate_with_blades(BladeSet.spherical(p), p)
        if gauge is GaugeId.XiO:
            Om = rotor_Omega(p)
            return Om * self.evaluate_with_blades(BladeSet.rotated(), p)
        K, _ = self._parts(p, False)
        R, _ = self._rotor(p, False)
        return R * K

    def evaluate_with_blades(self, bs: BladeSet, p: Point) -> Multivector:
        """Reduced field built from ``bs``, divided by ``r sqrt(sin theta)``."""
        a = self.ansatz
        f, g = (float(v) for v in self.rad(p.r))
        z, zt = complex(self.ang.zeta_c(p.theta)), complex(self.ang.zeta_t_c(p.theta))
        chi = bs.spinor(f, g, z, zt) * phase_factor(a.n, a.E, bs.B, p)
        return chi / (p.r * math.sqrt(math.sin(p.theta)))

    def frame_derivative(self, gauge: GaugeId, p: Point, mu: int) -> Multivector:
        """Exact Pfaff derivative along frame vector ``mu`` by the product rule."""
        if mu not in (0, 1, 2, 3):
            raise ValueError(f"frame index must be 0..3, got {mu}")
        return _all_frame_derivatives(self, gauge, p)[mu]


@lru_cache(maxsize=256)
def _all_frame_derivatives(sol: SeparatedSolution, gauge: GaugeId, p: Point):
    p.check_interior()
    K, dK = sol._parts(p, True)
    R, dR = sol._rotor(p, True)
    if gauge is GaugeId.XiS:
        Rr = reverse(R)
        return tuple(R * dK[idx] * Rr * sc(p) for idx, sc in _SPHERICAL_FRAME)
    d_sph = [dR[i] * K + R * dK[i] for i in range(4)]
    if gauge is GaugeId.XiO:
        U = rotor_U()
        d_sph = [d * U for d in d_sph]
    cart = _cartesian_partials(p, d_sph)
    return tuple(cart[idx] * sc for idx, sc in _CARTESIAN_FRAMES[gauge])


def assemble(
    gauge: GaugeId, ansatz: SeparatedAnsatz, ang: AngularPair, rad: RadialPair
) -> SpinorField:
    """Full spinor field of a separated state in ``gauge``."""
    if ang.kappa is not None and ang.kappa != ansatz.kappa:
        raise ValueError("angular pair belongs to a different kappa")
    if rad.kappa != ansatz.kappa:
        raise ValueError("radial pair belongs to a different kappa")
    return SeparatedSolution(ansatz, ang, rad).field(gauge)


def bound_state(
    n_r: int,
    kappa: int,
    n: float,
    Zalpha: float,
    m: float = 1.0,
    N: int = 4000,
    blades: BladeSet | None = None,
) -> SeparatedSolution:
    """Solve and assemble the state ``(n_r, kappa, n)`` of the Coulomb problem."""
    bs = blades or BladeSet.rotated()
    pot = CoulombPotential(Zalpha)
    rad = radial_solution(kappa, n_r, pot, m=m, N=N, mats=radial_matrices(bs))
    ang, lam = angular_numeric(kappa, n, bs)
    p_deg = max(0, int(round(abs(kappa) - abs(lam) - 0.5)))
    ansatz = SeparatedAnsatz(lam, rad.E, kappa, lam, p_deg, m, Zalpha)
    return SeparatedSolution(ansatz, ang, rad)


def residual_grid(
    sol: SeparatedSolution, n_r: int = 20, n_theta: int = 20, t: float = 0.3, phi: float = 0.7
) -> list[Point]:
    """``n_r x n_theta`` points, r geometric over [0.1, 10] x the orbit scale."""
    a = sol.ansatz
    nq = sol.rad.n_r + abs(a.kappa)
    scale = nq * nq / (a.m * a.Zalpha)
    rs = np.geomspace(0.1 * scale, 10.0 * scale, n_r)
    ths = np.linspace(0.1, math.pi - 0.1, n_theta)
    return [Point(t, float(r), float(th), phi) for r in rs for th in ths]


# --- spectrum ---------------------------------------------------------------

PATHS = ("xio", "xis")
_PATH_POINT = Point(0.0, 1.0, 0.9, 0.4)


@lru_cache(maxsize=None)
def _path_mats(path: str) -> dict:
    if path == "xio":
        return radial_matrices(BladeSet.rotated())
    if path == "xis":
        return radial_matrices(BladeSet.spherical(_PATH_POINT))
    raise ValueError(f"unknown path {path!r}; expected one of {PATHS}")


def path_blades(path: str, p: Point = _PATH_POINT) -> BladeSet:
    _path_mats(path)
    return BladeSet.rotated() if path == "xio" else BladeSet.spherical(p)


@dataclass(frozen=True)
class SpectrumRow:
    n_r: int
    kappa: int
    E_shoot: float | None
    E_analytic: float
    rel_err: float | None

    @property
    def found(self) -> bool:
        return self.E_shoot is not None


def valid_states(max_n: int) -> list[tuple[int, int]]:
    """All ``(n_r, kappa)`` with ``n_r + |kappa| <= max_n``, sorted; ``max_n^2`` of them."""
    out = []
    for n_r in range(max_n):
        for k in range(1, max_n - n_r + 1):
            out.append((n_r, -k))
            if n_r > 0:
                out.append((n_r, k))
    return sorted(out)


def spectrum_table(
    pot: CoulombPotential,
    max_n: int,
    m: float = 1.0,
    path: str = "xio",
    N: int = 4000,
    tol: float = 1e-10,
) -> list[SpectrumRow]:
    if not 1 <= max_n <= 10:
        raise ValueError(f"max_n must be in [1, 10], got {max_n}")
    mats = _path_mats(path)
    rows = []
    for n_r, k in valid_states(max_n):
        ref = sommerfeld_energy(n_r, k, pot.Zalpha, m)
        try:
            E = shoot_eigenvalue(k, n_r, pot, m=m, tol=tol, N=N, mats=mats)
        except NotFoundError:
            rows.append(SpectrumRow(n_r, k, None, ref, None))
            continue
        rows.append(SpectrumRow(n_r, k, E, ref, abs(E - ref) / ref))
    return rows
