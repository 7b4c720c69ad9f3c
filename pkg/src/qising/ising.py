"""Semi-infinite kinetic Ising chain with ``gamma_n = tanh(kappa n)``.

Single-spin dynamics are expressed through the kernel ``q_n^{(k)}(t)`` (the
magnetization of site ``n`` started from a unit spin at site ``k``), written
as a Laplace-type integral over ``theta in (0, pi)``.  Pair correlations are
built from 2x2 determinants of that kernel around a stationary state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .bessel import bessel_ive
from .errors import DomainError, NumericalError, TruncationError
from .measure import gauss_legendre
from .qseries import QTriple, qpoch

__all__ = [
    "ChainModel",
    "Trajectory",
    "AsymptoticCoeffs",
    "ising_weight",
    "kernel_P",
    "kernel_P_table",
    "kernel_P_derivs",
    "magnetization_matrix",
    "magnetization_kernel",
    "magnetization",
    "magnetization_trajectory",
    "phi_constants",
    "asymptotic_coeffs",
    "magnetization_asymptotic",
    "twospin_kernel",
    "twospin_matrix",
    "twospin_asymptotic",
    "apply_T",
    "stationary",
    "stationary_residual",
    "contraction_ratio",
    "twospin",
    "constant_T_kernel",
    "constant_T_asymptotic",
]

# integrand cut where t (1 - cos theta) reaches this value
LAPLACE_CUT = 45.0
SITE_CAP = 2000
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ChainModel:
    """Chain with coupling profile ``gamma_n = tanh(kappa n)``."""

    kappa: float

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise DomainError(f"kappa must be positive, got {self.kappa!r}")

    @property
    def q(self) -> float:
        return math.exp(-2.0 * self.kappa)

    @property
    def params(self) -> QTriple:
        return QTriple(self.q, self.q, -self.q)

    def gamma(self, n):
        n = np.asarray(n, dtype=float)
        out = np.tanh(self.kappa * n)
        return out if out.ndim else float(out)

    def gamma_q_form(self, n):
        """Same profile written as ``(1 - q q^{n-1}) / (1 + q q^{n-1})``."""
        qn = self.q ** np.asarray(n, dtype=float)
        out = (1.0 - qn) / (1.0 + qn)
        return out if out.ndim else float(out)

    def gamma_product(self) -> float:
        """``prod_{k>=1} gamma_k``, stopped once ``1 - gamma_k`` drops below 1e-18."""
        out = 1.0
        k = 1
        while True:
            g = math.tanh(self.kappa * k)
            out *= g
            if 1.0 - g < 1e-18 or 2.0 * math.exp(-2.0 * self.kappa * k) < 1e-18:
                return out
            k += 1

    @cached_property
    def pochhammer_ratio(self) -> float:
        """``(q;q)_inf / (-q;q)_inf``."""
        q = self.q
        return float((qpoch(q, q) / qpoch(-q, q)).real)


@dataclass(frozen=True)
class Trajectory:
    """Values sampled on a time grid; ``values[i]`` belongs to ``times[i]``."""

    times: np.ndarray
    values: np.ndarray
    labels: tuple = ()


def ising_weight(theta, model: ChainModel):
    """``|(q, q e^{2i theta}; q)_inf / (-q, -q e^{2i theta}; q)_inf|^2``."""
    q = model.q
    e2 = np.exp(2j * np.asarray(theta, dtype=float))
    ratio = qpoch(q, q) * qpoch(q * e2, q) / (qpoch(-q, q) * qpoch(-q * e2, q))
    out = np.abs(ratio) ** 2
    return out if np.ndim(out) else float(out)


def _cosine_coeffs(n: int, q: float) -> np.ndarray:
    ratio = np.array([(qpoch(-q, q, j) / qpoch(q, q, j)).real for j in range(n)])
    return ratio * ratio[::-1]


def kernel_P(n: int, theta, model: ChainModel):
    """Orthonormal kernel ``P_n(theta)`` from its finite cosine sum; ``P_0 = 0``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    theta = np.asarray(theta, dtype=float)
    if n == 0:
        out = np.zeros_like(theta)
    else:
        c = _cosine_coeffs(n, model.q)
        m = 2 * np.arange(n) - n + 1
        out = math.sqrt(model.gamma(1) / model.gamma(n)) * (
            np.cos(np.multiply.outer(theta, m)) @ c)
    return out if out.ndim else float(out)


def kernel_P_table(nmax: int, theta, model: ChainModel) -> np.ndarray:
    """Rows ``P_0..P_nmax`` at ``theta`` from the symmetric three-term recurrence."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.zeros((nmax + 1, theta.size))
    if nmax == 0:
        return out
    out[1] = 1.0
    g = model.gamma(np.arange(0, nmax + 2))
    c = np.cos(theta)
    for n in range(1, nmax):
        b_prev = 0.5 * math.sqrt(g[n - 1] * g[n])
        b_next = 0.5 * math.sqrt(g[n] * g[n + 1])
        out[n + 1] = (c * out[n] - b_prev * out[n - 1]) / b_next
    return out


def kernel_P_derivs(n: int, model: ChainModel) -> tuple[float, float, float]:
    """``(P_n(0), P_n''(0), P_n''''(0))`` from the cosine sum; odd derivatives vanish."""
    if n < 1:
        raise DomainError("n must be >= 1")
    c = _cosine_coeffs(n, model.q)
    m = (2 * np.arange(n) - n + 1).astype(float)
    s = math.sqrt(model.gamma(1) / model.gamma(n))
    return (s * float(c.sum()), -s * float(c @ m**2), s * float(c @ m**4))


def _theta_cut(t: float) -> float:
    if t <= 0 or 2.0 * t <= LAPLACE_CUT:
        return math.pi
    return math.acos(1.0 - LAPLACE_CUT / t)


def magnetization_matrix(size: int, t: float, model: ChainModel, rtol: float = 1e-13,
                         cols: int | None = None) -> np.ndarray:
    """``Q[n-1, k-1] = q_n^{(k)}(t)`` for ``n <= size`` and ``k <= cols`` (default ``size``)."""
    if t < 0:
        raise DomainError("t must be >= 0")
    cols = size if cols is None else cols
    nmax = max(size, cols)
    g = model.gamma(np.arange(1, nmax + 1))
    pref = 2.0 / (math.pi * model.gamma(1))

    def integrand(theta):
        P = kernel_P_table(nmax, theta, model)[1:]
        f = np.exp(-t * (1.0 - np.cos(theta))) * np.sin(theta) ** 2 * ising_weight(theta, model)
        # (nodes, size*cols); the quadrature sums over the first axis
        return (P[:size].T[:, :, None] * (f[:, None] * P[:cols].T)[:, None, :]).reshape(len(theta), -1)

    theta_c = _theta_cut(t)
    start = max(16, int(2 ** math.ceil(math.log2(nmax + 8))))
    G, _ = gauss_legendre(integrand, 0.0, theta_c, rtol=rtol, atol=1e-300, start=start,
                          max_order=max(8192, 4 * start))
    G = pref * G.reshape(size, cols)
    return np.sqrt(g[:size])[:, None] * G / np.sqrt(g[:cols])[None, :]


def magnetization_kernel(n: int, k: int, t: float, model: ChainModel, tol: float = 1e-13) -> float:
    """``q_n^{(k)}(t)``: magnetization at ``n`` for unit initial spin at ``k``."""
    if n < 1 or k < 1:
        raise DomainError("n, k must be >= 1")
    Q = magnetization_matrix(max(n, k), t, model, rtol=tol)
    return float(Q[n - 1, k - 1])


def _tail_estimate(col_abs: np.ndarray, ks: np.ndarray, floor: float = 0.0) -> float:
    # power-law fit over the last five terms; tail bound via the integral test
    a = np.maximum(col_abs[-5:], 1e-300)
    if np.all(a <= floor):
        return 0.0
    s = np.polyfit(np.log(ks[-5:]), np.log(a), 1)[0]
    if s >= -1.0:
        return math.inf
    return float(a[-1] * ks[-1] / (-s - 1.0))


def magnetization(t: float, initial, model: ChainModel, n_sites: int, tol: float = 1e-12,
                  site_max: int = SITE_CAP) -> np.ndarray:
    """``q_n(t)`` for ``n = 1..n_sites`` by superposing kernels over initial spins.

    ``initial`` is either a finite sequence (sites beyond it start at 0) or a
    callable ``k -> q_{k,0}``.  For a callable the sum over ``k`` is extended
    until the fitted tail of ``|q_n^{(k)}|`` is below ``tol``.
    """
    if callable(initial):
        K = max(2 * n_sites, 32)
        while True:
            if K > site_max:
                raise TruncationError(f"superposition tail above {tol} at site cap {site_max}")
            Q = magnetization_matrix(n_sites, t, model, cols=K)
            ks = np.arange(1, K + 1, dtype=float)
            # entries below the quadrature noise floor carry no tail information
            floor = 1e2 * EPS * float(np.max(np.abs(Q)))
            tail = max(_tail_estimate(np.abs(Q[i]), ks, floor) for i in range(n_sites))
            if tail < tol:
                break
            K *= 2
        q0 = np.array([initial(k) for k in range(1, K + 1)], dtype=float)
    else:
        q0 = np.asarray(initial, dtype=float)
        if q0.size > site_max:
            raise TruncationError(f"initial data longer than site cap {site_max}")
        K = q0.size
        if K == 0:
            return np.zeros(n_sites)
        Q = magnetization_matrix(n_sites, t, model, cols=K)
    if np.any(np.abs(q0) > 1.0):
        raise DomainError("initial magnetizations must lie in [-1, 1]")
    return Q @ q0


def magnetization_trajectory(times: Sequence[float], initial, model: ChainModel, n_sites: int,
                             tol: float = 1e-12, site_max: int = SITE_CAP) -> Trajectory:
    times = np.asarray(times, dtype=float)
    vals = np.array([magnetization(t, initial, model, n_sites, tol, site_max) for t in times])
    return Trajectory(times, vals, tuple(range(1, n_sites + 1)))


def phi_constants(q: float, tail: float = 1e-17) -> tuple[float, float, float]:
    """The three lattice sums entering the small-angle expansion of the weight."""
    p1 = p2 = p3 = 0.0
    j = 1
    while True:
        qj = q**j
        d = 1.0 - qj * qj
        t1 = 2.0 * qj / d
        t2 = 2.0 * qj**3 / d**2
        t3 = (2.0 / 3.0) * qj**3 * (1.0 + 3.0 * qj * qj) / d**3
        p1, p2, p3 = p1 + t1, p2 + t2, p3 + t3
        if t1 < tail * p1:
            return p1, p2, p3
        j += 1


@dataclass(frozen=True)
class AsymptoticCoeffs:
    """Large-time expansion data of the magnetization kernel.

    ``P0, P2, P4`` hold ``P_m(0), P_m''(0), P_m''''(0)`` indexed by site
    ``m`` (index 0 is unused).  ``A``, ``B``, ``R`` are evaluated at the
    requested ``(n, k)``; :meth:`A_of`, :meth:`B_of`, :meth:`R_of` work for
    any pair in range.
    """

    phi1: float
    phi2: float
    phi3: float
    P0: np.ndarray
    P2: np.ndarray
    P4: np.ndarray
    n: int
    k: int

    def _a(self, m):
        return self.P2[m] / self.P0[m]

    def _b(self, m):
        return self.P4[m] / self.P0[m]

    @property
    def w1(self) -> float:
        return 8.0 * (self.phi1 + 2.0 * self.phi2)

    def A_of(self, n: int, k: int) -> float:
        return self._a(n) + self._a(k) + self.w1 - 0.25

    def B_of(self, n: int, k: int) -> float:
        f1, f2, f3 = self.phi1, self.phi2, self.phi3
        const = (-16.0 / 3.0 * f1**4 + 64 * f1**2 * f2 + 64 * f2**2 + 128 * f1 * f2
                 - 128 * f1 * f3 + 32 * f1**2 - 6 * f1 - 76 * f2 - 192 * f3 - 1.0 / 32.0)
        return (self._a(n) * self._a(k) + (self.w1 - 1.0 / 12.0) * (self._a(n) + self._a(k))
                + (self._b(n) + self._b(k)) / 6.0 + const)

    def R_of(self, m: int, n: int) -> float:
        return self.P0[m] * self.P2[n] - self.P2[m] * self.P0[n]

    @property
    def A(self) -> float:
        return self.A_of(self.n, self.k)

    @property
    def B(self) -> float:
        return self.B_of(self.n, self.k)

    @property
    def R(self) -> float:
        return self.R_of(self.n, self.k)


def asymptotic_coeffs(n: int, k: int, model: ChainModel, nmax: int | None = None) -> AsymptoticCoeffs:
    if n < 1 or k < 1:
        raise DomainError("n, k must be >= 1")
    nmax = max(n, k, nmax or 0)
    d = np.array([(math.nan,) * 3] + [kernel_P_derivs(m, model) for m in range(1, nmax + 1)])
    return AsymptoticCoeffs(*phi_constants(model.q), d[:, 0], d[:, 1], d[:, 2], n, k)


def magnetization_asymptotic(n: int, k: int, t: float, model: ChainModel, order: int = 1) -> float:
    """Large-``t`` expansion of ``q_n^{(k)}(t)`` with ``order`` terms (1, 2 or 3)."""
    if order not in (1, 2, 3):
        raise DomainError("order must be 1, 2 or 3")
    if t <= 0:
        raise DomainError("t must be positive")
    c = asymptotic_coeffs(n, k, model)
    g1 = model.gamma(1)
    lead = (math.sqrt(2.0 / math.pi * model.gamma(n) / model.gamma(k)) / g1
            * model.pochhammer_ratio**4 * c.P0[n] * c.P0[k] * t**-1.5)
    corr = 1.0
    if order >= 2:
        corr += 1.5 * c.A / t
    if order >= 3:
        corr += 3.75 * c.B / t**2
    return lead * corr


def _pair_from_Q(Q: np.ndarray, m: int, n: int, k: int, l: int) -> float:
    if m < n:
        m, n = n, m
    return Q[m - 1, k - 1] * Q[n - 1, l - 1] - Q[n - 1, k - 1] * Q[m - 1, l - 1]


def twospin_kernel(m: int, n: int, k: int, l: int, t: float, model: ChainModel,
                   tol: float = 1e-13) -> float:
    """Homogeneous pair solution with zero diagonal started from the pair ``(k, l)``."""
    if not k > l >= 1 or m < 1 or n < 1:
        raise DomainError("need k > l >= 1 and m, n >= 1")
    if m == n:
        return 0.0
    Q = magnetization_matrix(max(m, n, k), t, model, rtol=tol)
    return float(_pair_from_Q(Q, m, n, k, l))


def twospin_matrix(size: int, k: int, l: int, t: float, model: ChainModel) -> np.ndarray:
    """``r^{(k,l)}_{m,n}(t)`` for ``m, n <= size``."""
    if not k > l >= 1:
        raise DomainError("need k > l >= 1")
    Q = magnetization_matrix(max(size, k), t, model)[:size, :]
    low = np.outer(Q[:, k - 1], Q[:, l - 1])
    full = low - low.T
    out = np.tril(full, -1)
    return out + out.T


def twospin_asymptotic(m: int, n: int, k: int, l: int, t: float, model: ChainModel) -> float:
    """Leading ``t^{-5}`` term of the pair kernel for ``m >= n``, ``k > l``."""
    if not (m >= n and k > l >= 1):
        raise DomainError("need m >= n and k > l >= 1")
    if t <= 0:
        raise DomainError("t must be positive")
    c = asymptotic_coeffs(m, n, model, nmax=max(m, n, k, l))
    g = model.gamma
    return (3.0 / (math.pi * g(1) ** 2) * model.pochhammer_ratio**8
            * math.sqrt(g(m) * g(n) / (g(k) * g(l))) * c.R_of(k, l) * c.R_of(m, n) * t**-5)


def apply_T(x: np.ndarray, model: ChainModel) -> np.ndarray:
    """Stationarity map on an ``M x M`` grid with zero values beyond it; diagonal set to 1."""
    M = x.shape[0]
    g = model.gamma(np.arange(1, M + 1))
    pad = np.zeros((M + 2, M + 2))
    pad[1:-1, 1:-1] = x
    out = (0.25 * g[:, None] * (pad[2:, 1:-1] + pad[:-2, 1:-1])
           + 0.25 * g[None, :] * (pad[1:-1, 2:] + pad[1:-1, :-2]))
    np.fill_diagonal(out, 1.0)
    return out


def stationary_residual(rho: np.ndarray, model: ChainModel) -> float:
    return float(np.max(np.abs(rho - apply_T(rho, model))))


def contraction_ratio(model: ChainModel, size: int, samples: int = 200, seed: int = 0) -> float:
    """Largest ``||Tx - Ty|| / ||x - y||`` over random ``x, y`` in ``[-1, 1]^{M x M}``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(-1, 1, (size, size))
        y = rng.uniform(-1, 1, (size, size))
        worst = max(worst, np.max(np.abs(apply_T(x, model) - apply_T(y, model))) / np.max(np.abs(x - y)))
    return float(worst)


def _stationary_fixed(model: ChainModel, M: int, tol: float, polish: int) -> np.ndarray:
    # unknowns: strictly lower triangle m > n (1-based); symmetry closes the system
    g = model.gamma(np.arange(1, M + 1))
    idx = -np.ones((M + 2, M + 2), dtype=int)
    cells = [(m, n) for m in range(2, M + 1) for n in range(1, m)]
    for i, (m, n) in enumerate(cells):
        idx[m, n] = i
    rows, cols, vals = [], [], []
    rhs = np.zeros(len(cells))
    for i, (m, n) in enumerate(cells):
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        for (a, b), w in (((m + 1, n), g[m - 1]), ((m - 1, n), g[m - 1]),
                          ((m, n + 1), g[n - 1]), ((m, n - 1), g[n - 1])):
            w *= 0.25
            if a > M or b < 1:
                continue
            if a == b:
                rhs[i] += w
            else:
                rows.append(i)
                cols.append(idx[max(a, b), min(a, b)])
                vals.append(-w)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(cells),) * 2)
    sol = spsolve(A.tocsc(), rhs) if cells else np.zeros(0)
    rho = np.eye(M)
    for i, (m, n) in enumerate(cells):
        rho[m - 1, n - 1] = rho[n - 1, m - 1] = sol[i]
    for _ in range(polish):
        rho = apply_T(rho, model)
    if stationary_residual(rho, model) > tol:
        raise NumericalError("stationary solve failed its fixed-point certificate")
    return rho


def stationary(model: ChainModel, site_max: int, tol: float = 1e-12, refine: bool = False,
               window: int | None = None, cap: int = 1024) -> np.ndarray:
    """Fixed point ``rho = T rho`` on the grid ``[1..site_max]^2`` with zero values beyond.

    The grid system is solved directly and certified by ``||rho - T rho|| <= tol``.
    With ``refine=True`` the grid is doubled until the block ``[1..window]^2``
    (default: the inner half) changes by less than ``tol``; :class:`TruncationError`
    is raised once ``cap`` is exceeded.
    """
    if site_max < 2:
        raise DomainError("site_max must be >= 2")
    rho = _stationary_fixed(model, site_max, tol, polish=2)
    if not refine:
        return rho
    M = site_max
    while True:
        w = window or M // 2
        M2 = 2 * M
        if M2 > cap:
            raise TruncationError(f"stationary block [1..{w}] still moving at grid cap {cap}")
        rho2 = _stationary_fixed(model, M2, tol, polish=2)
        if np.max(np.abs(rho2[:w, :w] - rho[:w, :w])) < tol:
            return rho2
        rho, M = rho2, M2


def twospin(t: float, initial: np.ndarray, model: ChainModel, rho: np.ndarray | None = None) -> np.ndarray:
    """Pair correlations at time ``t`` on the grid of ``initial``.

    ``r(t) = rho + sum_{k>l} (r_{k,l}(0) - rho_{k,l}) r^{(k,l)}(t)``, with
    ``rho`` the grid stationary state; sites beyond the grid start at ``rho``.
    """
    r0 = np.asarray(initial, dtype=float)
    M = r0.shape[0]
    if r0.shape != (M, M) or not np.allclose(r0, r0.T, atol=0) or np.any(np.diag(r0) != 1.0):
        raise DomainError("initial correlations must be symmetric with unit diagonal")
    if np.any(np.abs(r0) > 1.0):
        raise DomainError("initial correlations must lie in [-1, 1]")
    if rho is None:
        rho = stationary(model, M)
    D = np.tril(r0 - rho, -1)
    Q = magnetization_matrix(M, t, model)
    low = np.tril(Q @ (D - D.T) @ Q.T, -1)
    return rho + low + low.T


def constant_T_kernel(n: int, k: int, t: float, gamma: float) -> float:
    """Uniform-coupling kernel ``e^{-t} (I_{n-k}(gamma t) - I_{n+k}(gamma t))``."""
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    if t < 0:
        raise DomainError("t must be >= 0")
    x = gamma * t
    damp = math.exp(-t * (1.0 - gamma))
    return damp * (bessel_ive(n - k, x) - bessel_ive(n + k, x))


def constant_T_asymptotic(n: int, k: int, t: float, gamma: float) -> float:
    return math.sqrt(2.0 / math.pi) * math.exp(-t * (1.0 - gamma)) * n * k / (gamma * t) ** 1.5
