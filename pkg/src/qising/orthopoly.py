"""Symmetric orthogonal polynomials with q-rational recurrence coefficients.

The monic family ``p_n(x) = p_n^{(alpha, beta)}(x; q)`` obeys

    p_{n+1}(x) = x p_n(x) - g_{n-1} g_n p_{n-1}(x),   p_{-1} = 0,  p_0 = 1,

with ``g_n = (1 - alpha q^n) / (1 - beta q^n)``.  Besides the recurrence this
module evaluates the two q-Gauss solutions ``psi^{+-}`` of the associated
second-order difference equation, their Wronskian, the closed form of ``p_n``
built from them, large-``n`` asymptotics, generating functions and the
explicit formulas available when ``alpha = q``.

The spectral variable is ``z`` with ``x = z + 1/z``; the auxiliary ``tau``
solves ``alpha (tau + 1/tau) = beta (z + 1/z)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .qseries import QTriple, SeriesResult, phi_rs, qpoch

__all__ = [
    "PolyFamily",
    "SpectralPoint",
    "gamma_tilde",
    "joukowsky",
    "poly_recurrence",
    "poly_table",
    "poly_second_kind",
    "tau_from_z",
    "psi",
    "psi_table",
    "wronskian",
    "wronskian_direct",
    "poly_spectral",
    "poly_spectral_table",
    "poly_asymptotic",
    "genfunc_series",
    "genfunc_closed",
    "genfunc_check",
    "poly_alpha_q",
    "poly_alpha_q_hypergeometric",
    "continuous_dual_qhahn",
]

# poly_spectral falls back to the recurrence this close to +-q^{Z/2}
DEGENERATE_RADIUS = 1e-6
# below this |alpha| the alpha -> 0 limit formulas are used; the error is O(alpha)
ALPHA_LIMIT = 1e-30


def joukowsky(z):
    return z + 1.0 / z


def gamma_tilde(n, params: QTriple):
    """``(1 - alpha q^n) / (1 - beta q^n)``; ``n`` may be an integer array."""
    qn = params.q ** np.asarray(n, dtype=float)
    out = (1.0 - params.alpha * qn) / (1.0 - params.beta * qn)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PolyFamily:
    """A parameter triple together with a precomputed table of ``g_n``."""

    params: QTriple
    size: int = 128
    gammas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        table = gamma_tilde(np.arange(self.size), self.params)
        table.setflags(write=False)
        object.__setattr__(self, "gammas", table)

    def gamma(self, n: int) -> float:
        if 0 <= n < self.size:
            return float(self.gammas[n])
        return gamma_tilde(n, self.params)

    def off_diagonal(self, n: int) -> float:
        """``a_n = g_n g_{n+1}``, the squared off-diagonal Jacobi entry."""
        return self.gamma(n) * self.gamma(n + 1)

    def shifted(self) -> "PolyFamily":
        return PolyFamily(self.params.shifted(), self.size)


def _family(family) -> PolyFamily:
    if isinstance(family, PolyFamily):
        return family
    if isinstance(family, QTriple):
        return PolyFamily(family)
    raise TypeError(f"expected PolyFamily or QTriple, got {type(family).__name__}")


def poly_table(nmax: int, x, family) -> np.ndarray:
    """Rows ``p_0(x), ..., p_nmax(x)`` by forward recurrence (x broadcasts)."""
    fam = _family(family)
    x = np.asarray(x)
    dtype = np.result_type(x, float)
    out = np.empty((nmax + 1,) + x.shape, dtype=dtype)
    prev = np.zeros(x.shape, dtype=dtype)
    cur = np.ones(x.shape, dtype=dtype)
    out[0] = cur
    for n in range(nmax):
        a_prev = fam.off_diagonal(n - 1) if n > 0 else 0.0
        prev, cur = cur, x * cur - a_prev * prev
        out[n + 1] = cur
    return out


def poly_recurrence(n: int, x, family):
    """Monic ``p_n(x)`` by the three-term recurrence, ``n >= -1``."""
    if n < -1:
        raise DomainError(f"n must be >= -1, got {n}")
    x = np.asarray(x)
    if n == -1:
        out = np.zeros_like(x, dtype=np.result_type(x, float))
    else:
        out = poly_table(n, x, family)[n]
    return out if out.ndim else out[()]


def poly_second_kind(n: int, x, family):
    """Second-kind polynomial ``q_n = p_{n-1}`` of the ``(alpha q, beta q)`` family."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return poly_recurrence(n - 1, x, _family(family).shifted())


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral coordinates ``z``, ``tau`` and, on the unit circle, ``theta``.

    ``tau`` is ``None`` when ``|alpha| < ALPHA_LIMIT``; the ``alpha -> 0`` limit formulas
    are used then.  Of the two roots ``tau, 1/tau`` the one with ``|tau| <= 1``
    is stored, ties going to the root with nonnegative imaginary part.
    """

    z: complex
    tau: complex | None
    theta: float | None = None

    @property
    def x(self) -> complex:
        return joukowsky(self.z)


def _tau(z, alpha: float, beta: float):
    """Root ``|tau| <= 1`` of ``alpha tau^2 - beta (z + 1/z) tau + alpha = 0``."""
    bu = beta * joukowsky(np.asarray(z, dtype=complex))
    d = np.sqrt(bu * bu - 4.0 * alpha * alpha)
    s1, s2 = bu + d, bu - d
    tau = 2.0 * alpha / np.where(np.abs(s1) >= np.abs(s2), s1, s2)
    on_circle = np.abs(np.abs(tau) - 1.0) < 1e-12
    tau = np.where(on_circle & (tau.imag < 0), 1.0 / tau, tau)
    return tau if tau.ndim else complex(tau)


def tau_from_z(z, params: QTriple) -> SpectralPoint:
    z = complex(z)
    if z == 0:
        raise DomainError("z must be nonzero")
    theta = None
    if abs(abs(z) - 1.0) < 1e-14 and z.imag >= 0:
        theta = math.atan2(z.imag, z.real)
    if abs(params.alpha) < ALPHA_LIMIT:
        return SpectralPoint(z, None, theta)
    return SpectralPoint(z, _tau(z, params.alpha, params.beta), theta)


def _as_z(point) -> complex:
    return point.z if isinstance(point, SpectralPoint) else complex(point)


def _core(z, n: int, params: QTriple):
    """The q-Gauss factor of ``psi^+_n(z)``.

    ``2phi1(z tau, z/tau; q z^2; q, alpha q^{n+1})``, or its ``alpha -> 0``
    limit ``1phi1(0; q z^2; q, beta (1 + z^2) q^{n+1})``.  Vectorised in ``z``.
    """
    q, alpha, beta = params.q, params.alpha, params.beta
    z = np.asarray(z, dtype=complex)
    if abs(alpha) < ALPHA_LIMIT:
        return phi_rs([0.0], [q * z * z], q, beta * (1.0 + z * z) * q ** (n + 1)).value
    tau = _tau(z, alpha, beta)
    return phi_rs([z * tau, z / tau], [q * z * z], q, alpha * q ** (n + 1)).value


def psi(sign: str, n: int, z, params: QTriple):
    """``psi^+_n(z)`` or ``psi^-_n(z) = psi^+_n(1/z)`` for ``n >= -1``."""
    if sign not in ("+", "-"):
        raise DomainError(f"sign must be '+' or '-', got {sign!r}")
    if n < -1:
        raise DomainError(f"n must be >= -1, got {n}")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("z must be nonzero")
    w = z if sign == "+" else 1.0 / z
    if _near_pole(w, params.q):
        out = w**n * _regularized(w, n, params)
    else:
        out = w**n * qpoch(params.q * w * w, params.q) * _core(w, n, params)
    return out if np.ndim(out) else complex(out)


def psi_table(sign: str, nmax: int, z, params: QTriple) -> np.ndarray:
    """``psi^{sign}_n(z)`` for ``n = -1..nmax`` at a single point (index ``n + 1``)."""
    if sign not in ("+", "-"):
        raise DomainError(f"sign must be '+' or '-', got {sign!r}")
    z = complex(z)
    if z == 0:
        raise DomainError("z must be nonzero")
    w = z if sign == "+" else 1.0 / z
    n = np.arange(-1, nmax + 1)
    if _near_pole(w, params.q):
        return np.array([w**k * _regularized(w, int(k), params) for k in n], dtype=complex)
    return w**n * qpoch(params.q * w * w, params.q) * _core(w, n, params)


def _near_pole(w, q: float, radius: float = 1e-6) -> bool:
    """Whether ``q w^2`` is close to a point of ``q^{-N_0}``."""
    u = np.abs(np.asarray(w, dtype=complex)) ** 2
    j = np.rint(-np.log(np.maximum(u, 1e-300)) / math.log(q)) - 1.0
    j = np.maximum(j, 0.0)
    return bool(np.any(np.abs(1.0 - q ** (j + 1) * np.asarray(w) ** 2) < radius))


def _regularized(w, n: int, params: QTriple, tol: float = 1e-17, max_terms: int = 5000):
    """``(q w^2; q)_inf * core`` summed as ``sum_k c_k (q^{k+1} w^2; q)_inf``.

    No denominator ``(q w^2; q)_k`` appears, so this stays finite where the
    q-Gauss series itself has a pole.
    """
    q, alpha, beta = params.q, params.alpha, params.beta
    w = np.asarray(w, dtype=complex)
    w2 = w * w
    if abs(alpha) < ALPHA_LIMIT:
        nums, x, power = [], beta * (1.0 + w2) * q ** (n + 1), 1
    else:
        tau = _tau(w, alpha, beta)
        nums, x, power = [w * tau, w / tau], alpha * q ** (n + 1), 0
    coef = np.ones_like(w)
    total = np.zeros_like(w)
    small = 0
    for k in range(max_terms):
        term = coef * qpoch(q ** (k + 1) * w2, q)
        total = total + term
        if np.all(np.abs(coef) <= tol * np.maximum(np.abs(total), 1e-300)):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        qk = q**k
        f = np.ones_like(w)
        for a in nums:
            f = f * (1.0 - a * qk)
        if power:
            f = f * (-qk)
        coef = coef * f * x / (1.0 - qk * q)
    return total


def wronskian(z, params: QTriple):
    """Closed form ``z^{-1} (z^2, q z^{-2}; q)_inf`` (independent of alpha, beta)."""
    z = np.asarray(z, dtype=complex)
    q = params.q
    out = qpoch(z * z, q) * qpoch(q / (z * z), q) / z
    return out if np.ndim(out) else complex(out)


def wronskian_direct(z, params: QTriple, n: int = 0):
    """``psi^+_n psi^-_{n+1} - psi^+_{n+1} psi^-_n`` evaluated from the series."""
    return (psi("+", n, z, params) * psi("-", n + 1, z, params)
            - psi("+", n + 1, z, params) * psi("-", n, z, params))


def _near_degenerate(z: complex, q: float) -> bool:
    """Whether ``z`` lies within DEGENERATE_RADIUS of a point of ``+-q^{Z/2}``."""
    r = abs(z)
    if r == 0:
        return True
    j0 = 2.0 * math.log(r) / math.log(q)
    for j in (math.floor(j0), math.ceil(j0)):
        c = q ** (j / 2.0)
        if min(abs(z - c), abs(z + c)) < DEGENERATE_RADIUS:
            return True
    return False


def poly_spectral(n: int, point, params: QTriple):
    """``p_n(z + 1/z)`` from the two-``psi`` closed form.

    Near ``z in +-q^{Z/2}`` (where the closed form is a removable 0/0) the
    value comes from the recurrence instead.
    """
    if n < -1:
        raise DomainError(f"n must be >= -1, got {n}")
    z = _as_z(point)
    if z == 0:
        raise DomainError("z must be nonzero")
    if n == -1:
        return 0j
    if n == 0:
        return 1 + 0j
    if _near_degenerate(z, params.q):
        return complex(poly_recurrence(n, joukowsky(z), params))
    zi = 1.0 / z
    pref = qpoch(params.alpha, params.q, n) / qpoch(params.beta, params.q, n) / (zi - z)
    bracket = (z ** (-n - 1) * _core(z, -1, params) * _core(zi, n, params)
               - z ** (n + 1) * _core(zi, -1, params) * _core(z, n, params))
    return complex(pref * bracket)


def poly_spectral_table(nmax: int, z, params: QTriple) -> np.ndarray:
    """``p_n(z + 1/z)`` for ``n = 0..nmax`` from the closed form, all ``n`` at once."""
    z = complex(z)
    if z == 0:
        raise DomainError("z must be nonzero")
    if _near_degenerate(z, params.q):
        return poly_table(nmax, joukowsky(z), params).astype(complex).ravel()
    zi = 1.0 / z
    n = np.arange(nmax + 1)
    q = params.q
    ratio = np.array([qpoch(params.alpha, q, k) / qpoch(params.beta, q, k) for k in n])
    bracket = (z ** (-n - 1) * _core(z, -1, params) * _core(zi, n, params)
               - z ** (n + 1) * _core(zi, -1, params) * _core(z, n, params))
    out = ratio * bracket / (zi - z)
    out[0] = 1.0
    return out


class Asymptotic(NamedTuple):
    value: complex
    branch: str  # "interior" or "boundary"


def poly_asymptotic(n: int, point, params: QTriple, form: str = "auto") -> Asymptotic:
    """Leading large-``n`` term of ``p_n``.

    ``interior`` needs ``0 < |z| < 1``; ``boundary`` needs ``z = e^{i theta}``
    with ``theta`` in ``(0, pi)``.  ``auto`` picks by ``|z|``.
    """
    q = params.q
    ratio = qpoch(params.alpha, q) / qpoch(params.beta, q)
    if isinstance(point, SpectralPoint) and point.theta is not None and form != "interior":
        theta = point.theta
        form = "boundary"
    else:
        z = _as_z(point)
        if form == "auto":
            form = "boundary" if abs(abs(z) - 1.0) < 1e-14 else "interior"
        theta = math.atan2(z.imag, z.real)

    if form == "boundary":
        if not 0.0 < theta < math.pi:
            raise DomainError(f"boundary form needs theta in (0, pi), got {theta}")
        zc = complex(math.cos(theta), -math.sin(theta))
        val = ratio * (np.exp(1j * (n + 1) * theta) * _core(zc, -1, params)).imag / math.sin(theta)
        return Asymptotic(complex(val), "boundary")
    if form != "interior":
        raise DomainError(f"unknown form {form!r}")
    z = _as_z(point)
    if not 0.0 < abs(z) < 1.0:
        raise DomainError(f"interior form needs 0 < |z| < 1, got |z| = {abs(z)}")
    val = ratio * z ** (-n - 1) * _core(z, -1, params) / (1.0 / z - z)
    return Asymptotic(complex(val), "interior")


def _check_genfunc_domain(t, z, params: QTriple):
    if not abs(t) < abs(z) < 1.0:
        raise DomainError(f"generating function needs |t| < |z| < 1, got |t|={abs(t)}, |z|={abs(z)}")
    if not params.genfunc_admissible:
        raise DomainError(f"generating function needs alpha in (-q, q], got alpha={params.alpha}")


def genfunc_series(t, z, params: QTriple, n_max: int) -> SeriesResult:
    """``sum_{n <= n_max} (beta;q)_n / (alpha;q)_n p_n(z + 1/z) t^n``."""
    t, z = complex(t), complex(z)
    _check_genfunc_domain(t, z, params)
    q = params.q
    p = poly_table(n_max, joukowsky(z), params)
    n = np.arange(n_max + 1)
    weights = np.array([qpoch(params.beta, q, k) / qpoch(params.alpha, q, k) for k in n])
    terms = weights * p * t**n
    rho = abs(t / z)
    tail = abs(terms[-1]) * rho / (1.0 - rho)
    return SeriesResult(complex(terms.sum()), n_max + 1, float(tail))


def genfunc_closed(t, z, params: QTriple) -> complex:
    """Closed-form generating function, ``alpha`` in ``(-q, q]``."""
    t, z = complex(t), complex(z)
    _check_genfunc_domain(t, z, params)
    q, alpha = params.q, params.alpha
    if abs(alpha) < ALPHA_LIMIT:
        return 1.0 / ((1.0 - z * t) * (1.0 - t / z))
    tau = _tau(z, alpha, params.beta)
    if alpha == q:
        return complex(qpoch(q * tau * t, q) * qpoch(q * t / tau, q)
                       / (qpoch(z * t, q) * qpoch(t / z, q)))
    f = phi_rs([q, q * tau * t, q * t / tau], [q * z * t, q * t / z], q, alpha / q).value
    return complex((1.0 - alpha / q) / ((1.0 - z * t) * (1.0 - t / z)) * f)


def genfunc_check(t, z, params: QTriple, n_max: int = 40) -> float:
    """``|truncated series - closed form|``."""
    series = genfunc_series(t, z, params, n_max)
    return float(abs(series.value - genfunc_closed(t, z, params)))


def _tau_alpha_q(z: complex, beta: float, q: float) -> complex:
    return _tau(z, q, beta)


def poly_alpha_q(n: int, point, beta: float, q: float) -> complex:
    """``p_n^{(q, beta)}(z + 1/z)`` from the finite double-q-Pochhammer sum."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    z = _as_z(point)
    tau = _tau_alpha_q(z, beta, q)
    total = 0j
    for k in range(n + 1):
        total += (qpoch(q * tau / z, q, k) * qpoch(q * z / tau, q, n - k)
                  / (qpoch(q, q, k) * qpoch(q, q, n - k)) * z ** (2 * k - n))
    return complex(qpoch(q, q, n) / qpoch(beta, q, n) * total)


def poly_alpha_q_hypergeometric(n: int, point, beta: float, q: float) -> tuple[complex, complex]:
    """The terminating 2phi1 and 3phi2 representations of ``p_n^{(q, beta)}``."""
    z = _as_z(point)
    tau = _tau_alpha_q(z, beta, q)
    qn = q ** -n
    bq = qpoch(beta, q, n)
    first = (qpoch(q * z / tau, q, n) / (z**n * bq)
             * phi_rs([qn, q * tau / z], [qn * tau / z], q, tau * z).value)
    second = (qpoch(q * q, q, n) / (q**n * tau**n * bq)
              * phi_rs([qn, q * tau / z, q * tau * z], [q * q, 0.0], q, q).value)
    return complex(first), complex(second)


def continuous_dual_qhahn(n: int, w: complex, a, b, c, q: float) -> complex:
    """Continuous dual q-Hahn ``p_n(x; a, b, c | q)`` at ``x = (w + 1/w) / 2``."""
    qn = q ** -n
    val = (a ** -n * qpoch(a * b, q, n) * qpoch(a * c, q, n)
           * phi_rs([qn, a * w, a / w], [a * b, a * c], q, q).value)
    return complex(val)
