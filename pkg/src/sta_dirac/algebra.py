"""Dense real spacetime algebra Cl(1,3).

Multivectors are stored as 16 real coefficients indexed by a generator
bitmask: bit ``i`` is set iff ``gamma^i`` is a factor of the basis blade,
and blades are always written in ascending generator order.  The metric is
``diag(+1, -1, -1, -1)``.

The geometric product is driven by a 16x16 sign/target table built once at
import time.  Every public operation also accepts stacked coefficient arrays
of shape ``(..., 16)`` so grids of points can be processed in one call.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable

import numpy as np

__all__ = [
    "ETA",
    "DIM",
    "Multivector",
    "Rotor",
    "NotUnitRotorError",
    "BivectorSquareError",
    "grade_of",
    "blade_name",
    "basis",
    "blade",
    "gamma",
    "scalar",
    "pseudoscalar",
    "gp",
    "grade",
    "even",
    "odd",
    "reverse",
    "add",
    "scale",
    "commutator",
    "norm",
    "approx_eq",
    "exp_bivector",
    "conjugate",
    "idempotent_e",
    "angle_rotor",
]

ETA = (1.0, -1.0, -1.0, -1.0)
DIM = 16

UNIT_TOL = 1e-9
SQUARE_TOL = 1e-12


def grade_of(bits: int) -> int:
    return bin(bits).count("1")


def blade_name(bits: int) -> str:
    if bits == 0:
        return "1"
    return "g" + "".join(str(i) for i in range(4) if bits >> i & 1)


def _blade_product(a: int, b: int) -> tuple[float, int]:
    """Sign and target bitmask of the product of two canonical blades.

    Sign = (-1)^(transpositions needed to sort the concatenated word)
    times the metric factor of every generator that appears twice.
    """
    swaps = 0
    for j in range(4):
        if b >> j & 1:
            # generators of ``a`` above j must hop over gamma^j
            swaps += grade_of(a >> (j + 1))
    sign = -1.0 if swaps % 2 else 1.0
    for i in range(4):
        if (a & b) >> i & 1:
            sign *= ETA[i]
    return sign, a ^ b


_SIGN = np.zeros((DIM, DIM))
_TARGET = np.zeros((DIM, DIM), dtype=np.intp)
for _a in range(DIM):
    for _b in range(DIM):
        _SIGN[_a, _b], _TARGET[_a, _b] = _blade_product(_a, _b)

# structure tensor: (a*b)_k = sum_ij a_i b_j T[i, j, k]
_PRODUCT = np.zeros((DIM, DIM, DIM))
for _a in range(DIM):
    for _b in range(DIM):
        _PRODUCT[_a, _b, _TARGET[_a, _b]] = _SIGN[_a, _b]
_PRODUCT.setflags(write=False)

_GRADES = np.array([grade_of(b) for b in range(DIM)])
_REVERSE_SIGN = np.array([(-1.0) ** (k * (k - 1) // 2) for k in _GRADES])
_EVEN_MASK = (_GRADES % 2 == 0).astype(float)


class NotUnitRotorError(ValueError):
    """A versor used for conjugation is not a unit even element."""


class BivectorSquareError(ValueError):
    """A bivector's square is not a pure scalar."""


def _coeffs(x) -> np.ndarray:
    if isinstance(x, Multivector):
        return x.coeffs
    if np.isscalar(x):
        out = np.zeros(DIM)
        out[0] = float(x)
        return out
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != DIM:
        raise ValueError(f"expected trailing dimension {DIM}, got shape {arr.shape}")
    return arr


class Multivector:
    """Immutable element of Cl(1,3).

    Supports ``a * b`` (geometric product), ``a + b``, ``a - b``, scalar
    multiplication and ``~a`` (reversion).  ``coeffs`` may carry leading
    batch dimensions.
    """

    __slots__ = ("_coeffs",)
    __array_priority__ = 100

    def __init__(self, coeffs):
        arr = np.array(_coeffs(coeffs), dtype=float)
        arr.setflags(write=False)
        self._coeffs = arr

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def shape(self) -> tuple[int, ...]:
        return self._coeffs.shape[:-1]

    def __getitem__(self, key) -> "Multivector":
        return Multivector(self._coeffs[key])

    def __add__(self, other):
        return Multivector(self._coeffs + _coeffs(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Multivector(self._coeffs - _coeffs(other))

    def __rsub__(self, other):
        return Multivector(_coeffs(other) - self._coeffs)

    def __neg__(self):
        return Multivector(-self._coeffs)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return gp(self, other)
        other = np.asarray(other, dtype=float)
        return Multivector(self._coeffs * other[..., None])

    def __rmul__(self, other):
        other = np.asarray(other, dtype=float)
        return Multivector(self._coeffs * other[..., None])

    def __truediv__(self, other):
        other = np.asarray(other, dtype=float)
        return Multivector(self._coeffs / other[..., None])

    def __invert__(self):
        return reverse(self)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return bool(np.array_equal(self._coeffs, other._coeffs))

    def __hash__(self):
        return hash(self._coeffs.tobytes())

    def __repr__(self):
        if self._coeffs.ndim > 1:
            return f"Multivector(shape={self.shape})"
        terms = [
            f"{c:+.6g}*{blade_name(b)}" if b else f"{c:+.6g}"
            for b, c in enumerate(self._coeffs)
            if c != 0.0
        ]
        return "Multivector(" + (" ".join(terms) if terms else "0") + ")"

    def scalar_part(self):
        return self._coeffs[..., 0]

    def grade(self, k: int) -> "Multivector":
        return grade(self, k)


class Rotor(Multivector):
    """Even unit multivector, ``R ~R = 1`` within ``UNIT_TOL``."""

    __slots__ = ()

    def __init__(self, coeffs, tol: float = UNIT_TOL):
        super().__init__(coeffs)
        _check_unit(self._coeffs, tol)

    def inverse(self) -> "Rotor":
        return Rotor._trusted(self._coeffs * _REVERSE_SIGN)

    @classmethod
    def _trusted(cls, coeffs) -> "Rotor":
        """Wrap coefficients already known to form a unit rotor."""
        obj = object.__new__(cls)
        arr = np.array(coeffs, dtype=float)
        arr.setflags(write=False)
        obj._coeffs = arr
        return obj


def _check_unit(c: np.ndarray, tol: float) -> None:
    odd_part = c * (1.0 - _EVEN_MASK)
    if np.any(np.abs(odd_part) > tol):
        raise NotUnitRotorError("rotor has odd-grade content")
    rr = np.einsum("...i,...j,ijk->...k", c, c * _REVERSE_SIGN, _PRODUCT)
    rr[..., 0] -= 1.0
    if np.any(np.linalg.norm(rr, axis=-1) > tol):
        raise NotUnitRotorError("R * reverse(R) differs from 1")


def basis(bits: int) -> Multivector:
    if not 0 <= bits < DIM:
        raise ValueError(f"blade bitmask out of range: {bits}")
    c = np.zeros(DIM)
    c[bits] = 1.0
    return Multivector(c)


def blade(indices: Iterable[int] | str) -> Multivector:
    """Product ``gamma^i gamma^j ...`` in the given (not necessarily sorted) order.

    ``blade("21")`` is ``gamma^2 gamma^1 = -gamma^12``.
    """
    out = scalar(1.0)
    for i in indices:
        out = out * gamma(int(i))
    return out


def gamma(mu: int) -> Multivector:
    if mu not in (0, 1, 2, 3):
        raise ValueError(f"generator index must be 0..3, got {mu}")
    return basis(1 << mu)


def scalar(s: float) -> Multivector:
    return Multivector(_coeffs(float(s)))


def pseudoscalar() -> Multivector:
    """``eps5 = gamma^0 gamma^1 gamma^2 gamma^3``."""
    return basis(0b1111)


_PRODUCT_FLAT = _PRODUCT.reshape(DIM, DIM * DIM)


def gp(a, b) -> Multivector:
    ca, cb = _coeffs(a), _coeffs(b)
    if ca.ndim == 1 and cb.ndim == 1:
        return Multivector(cb @ (ca @ _PRODUCT_FLAT).reshape(DIM, DIM))
    return Multivector(np.einsum("...i,...j,ijk->...k", ca, cb, _PRODUCT))


def grade(a, k: int) -> Multivector:
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= 4:
        raise ValueError(f"grade must be an integer in [0, 4], got {k!r}")
    return Multivector(_coeffs(a) * (_GRADES == k))


def even(a) -> Multivector:
    return Multivector(_coeffs(a) * _EVEN_MASK)


def odd(a) -> Multivector:
    return Multivector(_coeffs(a) * (1.0 - _EVEN_MASK))


def reverse(a) -> Multivector:
    return Multivector(_coeffs(a) * _REVERSE_SIGN)


def add(a, b) -> Multivector:
    return Multivector(_coeffs(a) + _coeffs(b))


def scale(a, s) -> Multivector:
    return Multivector(_coeffs(a) * np.asarray(s, dtype=float)[..., None])


def commutator(a, b) -> Multivector:
    """Half commutator ``(ab - ba) / 2``."""
    return Multivector(0.5 * (gp(a, b).coeffs - gp(b, a).coeffs))


def norm(a):
    return np.linalg.norm(_coeffs(a), axis=-1)


def approx_eq(a, b, tol: float = 1e-12) -> bool:
    return bool(np.all(norm(Multivector(_coeffs(a) - _coeffs(b))) <= tol))


def exp_bivector(B) -> Rotor:
    """Exponential of a bivector whose square is a scalar.

    Covers the three cases ``B^2 = -s^2`` (rotation), ``B^2 = +s^2``
    (boost) and ``B^2 = 0`` (null).
    """
    cb = _coeffs(B)
    if np.any(np.abs(cb * (_GRADES != 2)) > SQUARE_TOL):
        raise BivectorSquareError("exp_bivector expects a pure bivector")
    sq = np.einsum("...i,...j,ijk->...k", cb, cb, _PRODUCT)
    tol = SQUARE_TOL * np.maximum(1.0, np.abs(sq[..., 0]))
    if np.any(np.linalg.norm(sq[..., 1:], axis=-1) > tol):
        raise BivectorSquareError("bivector square has a non-scalar part")
    s2 = sq[..., 0]
    s = np.sqrt(np.abs(s2))
    with np.errstate(invalid="ignore", divide="ignore"):
        neg = np.where(s > 0, np.sin(s) / np.where(s > 0, s, 1.0), 1.0)
        pos = np.where(s > 0, np.sinh(s) / np.where(s > 0, s, 1.0), 1.0)
    c0 = np.where(s2 < 0, np.cos(s), np.where(s2 > 0, np.cosh(s), 1.0))
    factor = np.where(s2 < 0, neg, np.where(s2 > 0, pos, 1.0))
    out = cb * np.asarray(factor)[..., None]
    out = np.array(out)
    out[..., 0] += c0
    return Rotor(out)


def conjugate(R, a) -> Multivector:
    """Versor conjugation ``R a ~R``."""
    cr = _coeffs(R)
    if not isinstance(R, Rotor):
        _check_unit(cr, UNIT_TOL)
    return gp(gp(cr, a), cr * _REVERSE_SIGN)


def idempotent_e() -> Multivector:
    """Primitive idempotent ``(1 + gamma^0) / 2``."""
    return Multivector(0.5 * (basis(0).coeffs + basis(1).coeffs))


@lru_cache(maxsize=None)
def _plane(plane: str) -> tuple[int, float, float]:
    B = blade(plane).coeffs
    bits = int(np.flatnonzero(B)[0])
    return bits, float(B[bits]), float(gp(B, B).coeffs[0])


def angle_rotor(plane: str, angle) -> Rotor:
    """``exp(gamma^{plane} * angle)`` for a coordinate plane like ``"23"``."""
    bits, sign, sq = _plane(plane)
    if grade_of(bits) != 2:
        raise BivectorSquareError(f"{plane!r} is not a coordinate plane")
    a = np.asarray(angle, dtype=float)
    out = np.zeros(a.shape + (DIM,))
    if sq < 0:
        out[..., 0], out[..., bits] = np.cos(a), sign * np.sin(a)
    else:
        out[..., 0], out[..., bits] = np.cosh(a), sign * np.sinh(a)
    return Rotor._trusted(out)

