"""Gegenbauer polynomials, the gamma function and the angular normalization constant."""

from __future__ import annotations

import math


def gegenbauer(p: int, a: float, z: float) -> float:
    """``C_p^a(z)`` by forward three-term recurrence from ``C_-1 = 0, C_0 = 1``."""
    if int(p) != p:
        raise ValueError(f"degree must be an integer, got {p!r}")
    p = int(p)
    if p < -1:
        raise ValueError(f"degree must be >= -1, got {p}")
    if p == -1:
        return 0.0
    prev, cur = 0.0, 1.0
    for k in range(p):
        prev, cur = cur, (2.0 * (k + a) * z * cur - (k + 2.0 * a - 1.0) * prev) / (k + 1)
    return cur


def gamma_fn(x: float) -> float:
    """Gamma function for positive real arguments."""
    if not x > 0:
        raise ValueError(f"gamma_fn is only defined here for x > 0, got {x!r}")
    return math.gamma(x)


def normalization_b(p: int, lam: float) -> float:
    """``(2^|l| Gamma(|l|) / 4 pi) * sqrt(p! / Gamma(p + 2|l| + 1))``."""
    if int(p) != p or p < 0:
        raise ValueError(f"p must be a non-negative integer, got {p!r}")
    if lam == 0:
        raise ValueError("lambda = 0 hits the pole of Gamma(|lambda|)")
    al = abs(lam)
    return (
        2.0**al
        * gamma_fn(al)
        / (4.0 * math.pi)
        * math.sqrt(math.factorial(int(p)) / gamma_fn(p + 2.0 * al + 1.0))
    )
