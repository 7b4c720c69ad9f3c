"""q-shifted factorials and basic hypergeometric series.

Everything here works in complex double precision and broadcasts over numpy
arrays, because the spectral code evaluates the same series on whole
quadrature grids at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DivergenceError, DomainError, PoleError

__all__ = [
    "QTriple",
    "SeriesResult",
    "qpoch",
    "qpoch_infinite",
    "phi_rs",
    "identity_residual",
    "IDENTITIES",
]

EPS = np.finfo(float).eps
# factors with |a q^j| below this are dropped from infinite products
PRODUCT_CUTOFF = 2.0 ** -60
POLE_EPS = 1e-14


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    return q


@dataclass(frozen=True)
class QTriple:
    """Parameter triple ``(q, alpha, beta)`` of the polynomial family.

    ``0 < q < 1``, ``|alpha| < 1`` and ``beta < 1`` are enforced on
    construction.
    """

    q: float
    alpha: float
    beta: float

    def __post_init__(self):
        _check_q(self.q)
        if not abs(self.alpha) < 1.0:
            raise DomainError(f"|alpha| must be < 1, got {self.alpha!r}")
        if not self.beta < 1.0:
            raise DomainError(f"beta must be < 1, got {self.beta!r}")

    @property
    def genfunc_admissible(self) -> bool:
        """True when ``alpha`` is in ``(-q, q]``, where generating functions exist."""
        return -self.q < self.alpha <= self.q

    def shifted(self) -> "QTriple":
        """The triple ``(q, alpha q, beta q)`` of the second-kind family."""
        return QTriple(self.q, self.alpha * self.q, self.beta * self.q)


@dataclass(frozen=True)
class SeriesResult:
    """A truncated sum or product.

    ``tail_bound`` bounds the absolute error of ``value``: the geometric
    estimate of the discarded tail plus an allowance for rounding.
    ``abs_sum`` is the largest sum of absolute term values, the scale on
    which cancellation error should be judged.
    """

    value: complex | np.ndarray
    terms_used: int
    tail_bound: float
    abs_sum: float = 1.0


def qpoch_infinite(a, q: float) -> SeriesResult:
    """``(a; q)_inf`` truncated once ``|a q^j| < 2**-60``."""
    q = _check_q(q)
    a = np.asarray(a, dtype=complex)
    prod = np.ones_like(a)
    aj = a.copy()
    j = 0
    while True:
        mag = np.abs(aj)
        if mag.size == 0 or mag.max() < PRODUCT_CUTOFF:
            break
        prod = prod * (1.0 - aj)
        aj = aj * q
        j += 1
    # |log prod_{i>=j}(1 - a q^i)| <= y / ((1 - y)(1 - q)) with y = |a q^j|
    y = np.abs(aj)
    log_bound = y / ((1.0 - y) * (1.0 - q))
    bound = np.abs(prod) * (np.expm1(log_bound) + 4 * EPS * max(j, 1))
    value = prod if prod.ndim else complex(prod)
    return SeriesResult(value, max(j, 1), float(np.max(bound)) if bound.size else 0.0)


def qpoch(a, q: float, n=math.inf):
    """q-shifted factorial ``(a; q)_n``.

    ``n`` may be a (possibly negative) integer or ``math.inf``.  For negative
    ``n`` the reciprocal extension ``prod_{j=n}^{-1} (1 - a q^j)^{-1}`` is used
    and :class:`PoleError` is raised when one of its factors vanishes.
    """
    q = _check_q(q)
    if n == math.inf:
        return qpoch_infinite(a, q).value
    if n != int(n):
        raise DomainError(f"n must be an integer or infinity, got {n!r}")
    n = int(n)
    a = np.asarray(a, dtype=complex)
    out = np.ones_like(a)
    if n >= 0:
        for j in range(n):
            out = out * (1.0 - a * q**j)
    else:
        for j in range(n, 0):
            f = 1.0 - a * q**j
            if np.any(np.abs(f) < POLE_EPS):
                raise PoleError(f"(a;q)_{n} has a pole: a = q^{-j}")
            out = out / f
    return out if out.ndim else complex(out)


def _terminating_length(numerators: Sequence[np.ndarray], q: float) -> int | None:
    """Smallest ``n`` with some scalar numerator equal to ``q**-n``."""
    best = None
    for a in numerators:
        if a.ndim or abs(a.imag) > 0 or a.real < 1.0 - 1e-14:
            continue
        m = math.log(max(a.real, 1.0)) / -math.log(q)
        k = round(m)
        if abs(m - k) < 1e-9:
            best = k if best is None else min(best, k)
    return best


def phi_rs(numerators, denominators, q: float, z, tol: float = 1e-16,
           max_terms: int = 200_000) -> SeriesResult:
    r"""Basic hypergeometric series :math:`{}_r\phi_s(a; b; q, z)`.

    Parameters and ``z`` broadcast against each other.  A numerator equal to
    ``q**-n`` makes the series a polynomial that is summed exactly up to
    ``k = n``.  Otherwise terms are added until two consecutive terms fall
    below ``tol * |partial sum|``.
    """
    q = _check_q(q)
    a = [np.asarray(x, dtype=complex) for x in numerators]
    b = [np.asarray(x, dtype=complex) for x in denominators]
    z = np.asarray(z, dtype=complex)
    r, s = len(a), len(b)
    shape = np.broadcast_shapes(z.shape, *(x.shape for x in a + b))
    power = s - r + 1

    nterm = _terminating_length(a, q)
    if nterm is None:
        if r > s + 1 and np.any(z != 0):
            raise DivergenceError(f"{r}phi{s} diverges for z != 0")
        if r == s + 1 and np.any(np.abs(z) >= 1.0):
            raise DivergenceError(f"{r}phi{s} needs |z| < 1, got max |z| = {np.abs(z).max():.3g}")
        limit_ratio = float(np.abs(z).max()) if (r == s + 1 and z.size) else 0.0
    else:
        limit_ratio = 0.0

    term = np.ones(shape, dtype=complex)
    total = np.ones(shape, dtype=complex)
    abs_sum = np.ones(shape)
    small_run = np.zeros(shape, dtype=int)
    prev_mag = np.ones(shape)
    ratio = 0.0
    k = 0
    while True:
        if nterm is not None and k >= nterm:
            break
        if k >= max_terms:
            raise DivergenceError(f"{r}phi{s} did not converge in {max_terms} terms")
        qk = q**k
        num = np.ones(shape, dtype=complex)
        for x in a:
            num = num * (1.0 - x * qk)
        for x in b:
            f = 1.0 - x * qk
            if np.any(np.abs(f) < POLE_EPS):
                raise PoleError(f"denominator parameter hits q^-{k}")
            num = num / f
        if power:
            num = num * (-qk) ** power
        term = term * num * z / (1.0 - qk * q)
        total = total + term
        mag = np.abs(term)
        abs_sum = abs_sum + mag
        k += 1
        if nterm is not None:
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(prev_mag > 0, mag / prev_mag, 0.0)
        prev_mag = mag
        small = mag <= tol * np.abs(total)
        small_run = np.where(small, small_run + 1, 0)
        if np.all(small_run >= 2):
            ratio = float(np.max(step)) if step.size else 0.0
            break

    rounding = 4 * EPS * (k + 1) * abs_sum
    if nterm is None:
        rho = min(max(ratio, limit_ratio), 0.999)
        bound = prev_mag * rho / (1.0 - rho) + rounding
    else:
        bound = rounding
    value = total if total.ndim else complex(total)
    return SeriesResult(value, k + 1, float(np.max(bound)) if bound.size else 0.0,
                        float(np.max(abs_sum)) if abs_sum.size else 1.0)


def _phi(numerators, denominators, q, z, tol=1e-16):
    return phi_rs(numerators, denominators, q, z, tol)


# each identity returns (series side, closed side, absolute-term scale)
def _q_binomial(q, a, z):
    lhs = _phi([a], [], q, z)
    return lhs.value, qpoch(a * z, q) / qpoch(z, q), lhs.abs_sum


def _q_chu_vandermonde(q, n, a, c):
    lhs = _phi([q ** -n, a], [c], q, q)
    rhs = qpoch(c / a, q, n) / qpoch(c, q, n) * a**n
    return lhs.value, rhs, lhs.abs_sum


def _q_gauss_sum(q, a, b, c):
    lhs = _phi([a, b], [c], q, c / (a * b))
    rhs = qpoch(c / a, q) * qpoch(c / b, q) / (qpoch(c, q) * qpoch(c / (a * b), q))
    return lhs.value, rhs, lhs.abs_sum


def _jackson_transform(q, n, b, c, z):
    qn = q ** -n
    lhs = _phi([qn, b], [c], q, z)
    pref = qpoch(c / b, q, n) / qpoch(c, q, n)
    rhs = _phi([qn, b, qn * b * z / c], [q ** (1 - n) * b / c, 0.0], q, q)
    return lhs.value, pref * rhs.value, max(lhs.abs_sum, abs(pref) * rhs.abs_sum)


IDENTITIES = {
    "q_binomial": _q_binomial,
    "q_chu_vandermonde": _q_chu_vandermonde,
    "q_gauss_sum": _q_gauss_sum,
    "jackson_transform": _jackson_transform,
}


def identity_residual(kind: str, params: dict, q: float, scaled: bool = False) -> float:
    """``|LHS - RHS|`` of a classical summation/transformation formula.

    With ``scaled=True`` the difference is divided by ``max(1, S)`` where
    ``S`` is the sum of absolute term values, so that cancellation inside
    large terminating sums is not mistaken for a formula error.

    ``kind`` is one of ``q_binomial`` (``a, z``), ``q_chu_vandermonde``
    (``n, a, c``), ``q_gauss_sum`` (``a, b, c``) or ``jackson_transform``
    (``n, b, c, z``).  The series side is summed term by term; the other side
    comes from q-shifted factorials (or, for Jackson's formula, from the
    transformed 3phi2).
    """
    try:
        fn = IDENTITIES[kind]
    except KeyError:
        raise DomainError(f"unknown identity {kind!r}; choose from {sorted(IDENTITIES)}") from None
    q = _check_q(q)
    lhs, rhs, scale = fn(q, **params)
    diff = float(abs(lhs - rhs))
    return diff / max(1.0, scale) if scaled else diff
