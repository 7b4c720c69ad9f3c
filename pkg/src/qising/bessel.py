"""Exponentially scaled modified Bessel functions ``e^{-x} I_nu(x)`` of integer order."""
from __future__ import annotations

import math

__all__ = ["bessel_ive", "bessel_i"]

# below this argument the power series is always used
ASYMPTOTIC_THRESHOLD = 30.0


def _series(nu: int, x: float) -> float:
    # all terms positive; evaluated in log space so large x cannot overflow
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    lx = math.log(x) - math.log(2.0)
    total = 0.0
    peak = -math.inf
    m = 0
    while True:
        log_term = (2 * m + nu) * lx - math.lgamma(m + 1) - math.lgamma(m + nu + 1) - x
        term = math.exp(log_term)
        total += term
        peak = max(peak, log_term)
        if log_term < peak - 40.0 and m > 0.5 * x:
            return total
        m += 1


def _asymptotic(nu: int, x: float) -> float | None:
    """Large-argument expansion; ``None`` when it cannot reach full precision."""
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    k = 1
    while True:
        new = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if new == 0.0 or abs(new) < 1e-17 * abs(total):
            total += new
            return total / math.sqrt(2.0 * math.pi * x)
        if abs(new) > abs(term) and k > 1:
            return None
        total += new
        term = new
        k += 1
        if k > 200:
            return None


def bessel_ive(nu: int, x: float) -> float:
    """``e^{-x} I_nu(x)`` for integer ``nu`` and real ``x >= 0``."""
    if x < 0:
        raise ValueError("x must be non-negative")
    nu = abs(int(nu))
    if x >= ASYMPTOTIC_THRESHOLD:
        val = _asymptotic(nu, x)
        if val is not None:
            return val
    return _series(nu, x)


def bessel_i(nu: int, x: float) -> float:
    """``I_nu(x)``; overflows for ``x`` beyond about 700."""
    return bessel_ive(nu, x) * math.exp(x)
