"""Orthogonality measure of ``p_n^{(alpha, beta)}``.

The measure is symmetric: an absolutely continuous part on ``[-2, 2]``,
parametrised here by ``x = 2 cos(theta)``, plus finitely many atoms at
``+-(z_k + 1/z_k)`` where ``z_k`` are the zeros of ``psi^+_{-1}`` in
``(0, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalError, QuadratureError
from .orthopoly import _core, joukowsky, poly_table, psi
from .qseries import QTriple, qpoch

__all__ = [
    "gauss_legendre",
    "ac_density",
    "OrthoMeasure",
    "ZeroSet",
    "build_measure",
    "cauchy_transform",
    "cauchy_transform_quadrature",
    "find_zeros",
    "psi_minus1_derivative",
    "discrete_atoms",
    "orthogonality_matrix",
    "orthogonality_residual",
]


@lru_cache(maxsize=None)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(f: Callable, a: float, b: float, rtol: float = 1e-13, atol: float = 0.0,
                   start: int = 16, max_order: int = 2048):
    """Integrate ``f`` over ``[a, b]`` with Gauss-Legendre, doubling the order.

    ``f`` maps a 1-d array of nodes to an array whose first axis runs over the
    nodes; trailing axes are integrated independently.  Returns
    ``(value, order)``.
    """
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    prev = None
    order = start
    while order <= max_order:
        x, w = _leggauss(order)
        vals = np.asarray(f(mid + half * x))
        est = half * np.tensordot(w, vals, axes=(0, 0))
        if prev is not None:
            diff = np.max(np.abs(est - prev))
            if diff <= atol + rtol * np.max(np.abs(est)):
                return est, order
        prev = est
        order *= 2
    raise QuadratureError(f"Gauss-Legendre did not converge by order {max_order}")


def ac_density(theta, params: QTriple, closed_form: bool | None = None):
    """Density of the absolutely continuous part with respect to ``theta``.

    For ``alpha = q`` the q-Gauss factor is summed in closed form (unless
    ``closed_form=False``).  Vectorised in ``theta``.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any((theta <= 0) | (theta >= math.pi)):
        raise DomainError("theta must lie in the open interval (0, pi)")
    q, alpha, beta = params.q, params.alpha, params.beta
    if closed_form is None:
        closed_form = alpha == q
    z = np.exp(1j * theta)
    s2 = np.sin(theta) ** 2
    if closed_form:
        if alpha != q:
            raise DomainError("closed-form density needs alpha == q")
        from .orthopoly import _tau

        tau = _tau(z, q, beta)
        ratio = (qpoch(q, q) * qpoch(q * z * z, q)
                 / (qpoch(q * z * tau, q) * qpoch(q * z / tau, q)))
        out = 2.0 * (1.0 - beta) / (math.pi * (1.0 - q)) * s2 * np.abs(ratio) ** 2
    else:
        core = _core(z, -1, params)
        out = 2.0 * (1.0 - beta) / (math.pi * (1.0 - alpha)) * s2 / np.abs(core) ** 2
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ZeroSet:
    """Increasing positive zeros of ``psi^+_{-1}`` inside ``(0, 1)``."""

    zeros: tuple[float, ...]
    method: str = "scan"

    @property
    def count(self) -> int:
        return len(self.zeros)


def _scan_grid(q: float, fine: int = 8, floor: float = 1e-8) -> np.ndarray:
    jmax = math.ceil(fine * math.log(floor) / math.log(q))
    return q ** (np.arange(jmax, -1, -1) / fine)


def _real_core(x, n, params):
    return np.real(_core(x, n, params))


def scan_zeros(params: QTriple, n: int = -1, fine: int = 8, xtol: float = 1e-15) -> tuple[float, ...]:
    """Zeros of ``psi^+_n`` in ``(0, 1)`` by sign changes on a geometric grid.

    Only the q-Gauss factor is scanned; the prefactor ``x^n (q x^2; q)_inf``
    is positive on ``(0, 1)``.
    """
    grid = _scan_grid(params.q, fine)
    vals = _real_core(grid, n, params)
    f = lambda x: float(_real_core(x, n, params))  # noqa: E731
    zeros = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0 and i > 0:
            zeros.append(float(a))
        elif fa * fb < 0:
            zeros.append(brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))
    return tuple(zeros)


def closed_form_zeros_alpha_q(q: float, beta: float) -> tuple[float, ...]:
    """Zeros in ``(0, 1)`` for ``alpha = q``: ``sqrt((q^{1-k} - beta)/(beta - q^{k+1}))``."""
    if beta <= q:
        return ()
    out = []
    k = 1
    while beta > 0.5 * q * (q**-k + q**k):
        out.append(math.sqrt((q ** (1 - k) - beta) / (beta - q ** (k + 1))))
        k += 1
    return tuple(out)


def find_zeros(params: QTriple, method: str = "auto") -> ZeroSet:
    """Zeros of ``psi^+_{-1}`` in ``(0, 1)``.

    ``auto`` uses the closed form when ``alpha = q`` and verifies it against
    the scan; ``scan`` forces the numerical route.
    """
    if method not in ("auto", "scan"):
        raise DomainError(f"unknown method {method!r}")
    scanned = scan_zeros(params)
    if method == "scan" or params.alpha != params.q:
        return ZeroSet(scanned, "scan")
    closed = closed_form_zeros_alpha_q(params.q, params.beta)
    if len(closed) != len(scanned) or any(abs(a - b) > 1e-9 for a, b in zip(closed, scanned)):
        raise NumericalError(f"zero scan {scanned} disagrees with closed form {closed}")
    return ZeroSet(closed, "closed")


def psi_minus1_derivative(x: float, params: QTriple, rel_step: float = 1e-2, levels: int = 4) -> float:
    """``d/dz psi^+_{-1}`` at real ``x`` by Richardson-extrapolated central differences."""
    f = lambda z: psi("+", -1, z, params).real  # noqa: E731
    h = rel_step * abs(x)
    table = []
    for i in range(levels):
        hi = h / 2**i
        row = [(f(x + hi) - f(x - hi)) / (2 * hi)]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (4**j - 1))
        table.append(row)
    return table[-1][-1]


def discrete_atoms(params: QTriple, zeros: ZeroSet | None = None) -> tuple[tuple[float, float], ...]:
    """Positive atoms ``(x_k, w_k)``; each has a mirror at ``-x_k`` with equal weight."""
    if zeros is None:
        zeros = find_zeros(params)
    scale = (1.0 - params.beta) / (1.0 - params.alpha)
    atoms = []
    for z in zeros.zeros:
        deriv = psi_minus1_derivative(z, params)
        w = scale * (z * z - 1.0) / (z * z) * psi("+", 0, z, params).real / deriv
        if not w > 0:
            raise NumericalError(f"non-positive atom weight {w} at z={z}")
        atoms.append((float(joukowsky(z)), float(w)))
    return tuple(atoms)


@dataclass(frozen=True)
class OrthoMeasure:
    """Density on ``theta in (0, pi)`` plus positive atoms (mirrors implied)."""

    params: QTriple
    atoms: tuple[tuple[float, float], ...]
    zeros: ZeroSet

    def density(self, theta):
        return ac_density(theta, self.params)

    def all_atoms(self) -> list[tuple[float, float]]:
        out = []
        for x, w in self.atoms:
            out += [(-x, w), (x, w)]
        return sorted(out)

    def integrate(self, f: Callable, rtol: float = 1e-13, atol: float = 1e-15):
        """``int f(x) dmu(x)`` for ``f`` vectorised in ``x`` (trailing axes allowed)."""
        def integrand(theta):
            vals = np.asarray(f(2.0 * np.cos(theta)))
            dens = self.density(theta)
            return vals * dens.reshape(dens.shape + (1,) * (vals.ndim - 1))

        total, _ = gauss_legendre(integrand, 0.0, math.pi, rtol=rtol, atol=atol)
        for x, w in self.atoms:
            total = total + w * (np.asarray(f(np.array([x])))[0] + np.asarray(f(np.array([-x])))[0])
        return total

    def total_mass(self, rtol: float = 1e-13) -> float:
        return float(self.integrate(lambda x: np.ones_like(x), rtol=rtol))


def build_measure(params: QTriple) -> OrthoMeasure:
    zeros = find_zeros(params)
    return OrthoMeasure(params, discrete_atoms(params, zeros), zeros)


def cauchy_transform(z, params: QTriple):
    """``C_mu(z + 1/z)`` for ``0 < |z| < 1`` as a ratio of q-Gauss series."""
    z = np.asarray(z, dtype=complex)
    if np.any((np.abs(z) <= 0) | (np.abs(z) >= 1)):
        raise DomainError("cauchy_transform needs 0 < |z| < 1")
    scale = (1.0 - params.beta) / (1.0 - params.alpha)
    den = _core(z, -1, params)
    if np.any(den == 0):
        from .errors import PoleError

        raise PoleError("z is a zero of psi^+_{-1}")
    out = z * scale * _core(z, 0, params) / den
    return out if out.ndim else complex(out)


def cauchy_transform_quadrature(u, measure: OrthoMeasure, rtol: float = 1e-13):
    """``int dmu(x) / (u - x)`` by quadrature plus the atom sum."""
    u = complex(u)
    return complex(measure.integrate(lambda x: 1.0 / (u - x), rtol=rtol))


def orthogonality_matrix(nmax: int, params: QTriple, measure: OrthoMeasure | None = None,
                         rtol: float = 1e-14) -> np.ndarray:
    """Matrix of ``int p_m p_n dmu`` for ``m, n <= nmax``."""
    if measure is None:
        measure = build_measure(params)

    def f(x):
        p = poly_table(nmax, x, params)  # (nmax+1, npts)
        return np.einsum("ik,jk->kij", p, p).reshape(len(x), -1)

    gram = measure.integrate(f, rtol=rtol, atol=1e-15)
    return np.real(gram).reshape(nmax + 1, nmax + 1)


def orthogonality_norm(n: int, params: QTriple) -> float:
    """Right-hand side ``(alpha;q)_n (alpha;q)_{n+1} / ((beta;q)_n (beta;q)_{n+1})``."""
    q, a, b = params.q, params.alpha, params.beta
    return float((qpoch(a, q, n) * qpoch(a, q, n + 1) / (qpoch(b, q, n) * qpoch(b, q, n + 1))).real)


def orthogonality_residual(m: int, n: int, params: QTriple, measure: OrthoMeasure | None = None,
                           gram: np.ndarray | None = None) -> float:
    """Residual of the orthogonality relation in its normalisation.

    The left side is the measure integral rescaled by ``(1-alpha)/(1-beta)``
    (quadrature over ``theta`` plus atoms); the right side vanishes off the
    diagonal and equals :func:`orthogonality_norm` on it.
    """
    if m < 0 or n < 0:
        raise DomainError("m, n must be >= 0")
    if gram is None:
        gram = orthogonality_matrix(max(m, n), params, measure)
    lhs = (1.0 - params.alpha) / (1.0 - params.beta) * gram[m, n]
    rhs = orthogonality_norm(n, params) if m == n else 0.0
    return float(abs(lhs - rhs))
