"""Finite-chain ground truth for the Ising dynamics.

Couplings are given as a :class:`~qising.ising.ChainModel` (``gamma_n =
tanh(kappa n)``), a scalar (uniform ``gamma``) or an explicit sequence
``gamma_1..gamma_N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, NumericalError, SizeError
from .ising import ChainModel

__all__ = [
    "couplings",
    "FiniteJacobi",
    "jacobi_expm_magnetization",
    "MasterState",
    "product_state",
    "master_generator",
    "master_equation",
    "pair_ode_rhs",
    "pair_ode_oracle",
    "SamplerStats",
    "glauber_sampler",
]

MAX_SPINS = 12


def couplings(N: int, coupling) -> np.ndarray:
    """``gamma_1..gamma_N`` from a model, a uniform value or an explicit sequence."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if isinstance(coupling, ChainModel):
        return np.asarray(coupling.gamma(np.arange(1, N + 1)), dtype=float)
    g = np.asarray(coupling, dtype=float)
    if g.ndim == 0:
        g = np.full(N, float(g))
    if g.shape != (N,):
        raise DomainError(f"need {N} couplings, got shape {g.shape}")
    if np.any(np.abs(g) >= 1.0):
        raise DomainError("couplings must satisfy |gamma| < 1")
    return g


@dataclass(frozen=True)
class FiniteJacobi:
    """Symmetrised generator of the N-site magnetization equations.

    ``q(t) = G exp(tJ) G^{-1} q(0)`` with ``G = diag(sqrt(gamma_n))`` and
    ``J`` tridiagonal: ``-1`` on the diagonal, ``sqrt(gamma_n gamma_{n+1})/2``
    beside it.
    """

    gammas: np.ndarray

    @property
    def N(self) -> int:
        return len(self.gammas)

    @property
    def diag(self) -> np.ndarray:
        return -np.ones(self.N)

    @property
    def offdiag(self) -> np.ndarray:
        g = self.gammas
        return 0.5 * np.sqrt(g[:-1] * g[1:])

    @cached_property
    def eig(self):
        if self.N == 1:
            return np.array([-1.0]), np.ones((1, 1))
        return eigh_tridiagonal(self.diag, self.offdiag)

    def propagator(self, t: float) -> np.ndarray:
        """Matrix ``G exp(tJ) G^{-1}``; column ``k`` is the response to a unit spin at ``k+1``."""
        lam, V = self.eig
        s = np.sqrt(self.gammas)
        return (s[:, None] * (V * np.exp(t * lam)) @ V.T) / s[None, :]


def jacobi_expm_magnetization(N: int, t: float, coupling, initial) -> np.ndarray:
    """Magnetizations of an N-site chain at time ``t`` (zero boundary spins)."""
    jac = FiniteJacobi(couplings(N, coupling))
    q0 = np.asarray(initial, dtype=float)
    if q0.shape != (N,):
        raise DomainError(f"initial vector must have length {N}")
    return jac.propagator(t) @ q0


@dataclass(frozen=True)
class MasterState:
    """Distribution over ``{-1, 1}^N``; bit ``i`` of the index is ``(sigma_{i+1} + 1)/2``."""

    N: int
    p: np.ndarray

    def __post_init__(self):
        if not 1 <= self.N <= MAX_SPINS:
            raise SizeError(f"N must be in 1..{MAX_SPINS}, got {self.N}")
        if self.p.shape != (2**self.N,):
            raise DomainError("probability vector has wrong length")
        if np.any(self.p < 0) or abs(self.p.sum() - 1.0) > 1e-12:
            raise DomainError("probability vector must be nonnegative and sum to 1")

    @cached_property
    def spins(self) -> np.ndarray:
        return _spin_table(self.N)

    def magnetization(self) -> np.ndarray:
        return self.spins.T @ self.p

    def correlation(self) -> np.ndarray:
        s = self.spins
        return (s * self.p[:, None]).T @ s


def _spin_table(N: int) -> np.ndarray:
    idx = np.arange(2**N)
    return 2.0 * ((idx[:, None] >> np.arange(N)) & 1) - 1.0


def product_state(N: int, magnetizations) -> MasterState:
    """Independent spins with the given means."""
    m = np.broadcast_to(np.asarray(magnetizations, dtype=float), (N,))
    if np.any(np.abs(m) > 1.0):
        raise DomainError("magnetizations must lie in [-1, 1]")
    s = _spin_table(N)
    p = np.prod(0.5 * (1.0 + s * m[None, :]), axis=1)
    return MasterState(N, p)


def _rates(spins: np.ndarray, g: np.ndarray) -> np.ndarray:
    pad = np.zeros((spins.shape[0], spins.shape[1] + 2))
    pad[:, 1:-1] = spins
    return 0.5 - 0.25 * g[None, :] * spins * (pad[:, :-2] + pad[:, 2:])


def master_generator(N: int, coupling) -> sp.csr_matrix:
    """Sparse generator ``L`` with ``dp/dt = L p``; columns sum to zero."""
    if N > MAX_SPINS:
        raise SizeError(f"master equation limited to N <= {MAX_SPINS}")
    g = couplings(N, coupling)
    s = _spin_table(N)
    w = _rates(s, g)
    idx = np.arange(2**N)
    rows = [idx]
    cols = [idx]
    vals = [-w.sum(axis=1)]
    for n in range(N):
        rows.append(idx ^ (1 << n))
        cols.append(idx)
        vals.append(w[:, n])
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(2**N, 2**N))


def master_equation(N: int, coupling, initial, t: float, tol: float = 1e-16) -> MasterState:
    """Distribution at time ``t`` by uniformization.

    ``initial`` is a :class:`MasterState` or a vector of independent-spin means.
    """
    if N > MAX_SPINS:
        raise SizeError(f"master equation limited to N <= {MAX_SPINS}")
    if t < 0:
        raise DomainError("t must be >= 0")
    p0 = initial.p if isinstance(initial, MasterState) else product_state(N, initial).p
    L = master_generator(N, coupling)
    lam = float(np.max(-L.diagonal()))
    P = sp.identity(2**N, format="csr") + L / lam
    mu = lam * t
    v = p0.copy()
    out = np.zeros_like(p0)
    acc = 0.0
    k = 0
    kmax = int(mu + 20.0 * math.sqrt(mu) + 50)
    while True:
        wk = math.exp(k * math.log(mu) - mu - math.lgamma(k + 1)) if mu > 0 else float(k == 0)
        out += wk * v
        acc += wk
        if (k > mu and 1.0 - acc < tol) or k > kmax:
            break
        v = P @ v
        k += 1
    if abs(out.sum() - 1.0) > 1e-12:
        raise NumericalError(f"uniformization lost probability mass: {out.sum()}")
    return MasterState(N, out)


def _pair_system(N: int, g: np.ndarray, diag: float):
    # unknowns r_{m,n}, m > n (0-based rows); diagonal neighbours enter as a source
    cells = [(m, n) for m in range(N) for n in range(m)]
    index = {c: i for i, c in enumerate(cells)}
    rows, cols, vals = [], [], []
    src = np.zeros(len(cells))
    for i, (m, n) in enumerate(cells):
        rows.append(i)
        cols.append(i)
        vals.append(-2.0)
        for (a, b), w in (((m + 1, n), g[m]), ((m - 1, n), g[m]), ((m, n + 1), g[n]), ((m, n - 1), g[n])):
            if not (0 <= a < N and 0 <= b < N):
                continue
            if a == b:
                src[i] += 0.5 * w * diag
            else:
                rows.append(i)
                cols.append(index[(max(a, b), min(a, b))])
                vals.append(0.5 * w)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(cells),) * 2)
    return cells, A, src


def _pack(r: np.ndarray, cells) -> np.ndarray:
    m, n = np.array(cells, dtype=int).reshape(-1, 2).T
    return r[m, n]


def _unpack(x: np.ndarray, cells, N: int, diag: float) -> np.ndarray:
    r = np.eye(N) * diag
    if cells:
        m, n = np.array(cells).T
        r[m, n] = x
        r[n, m] = x
    return r


def pair_ode_rhs(r: np.ndarray, coupling, diag: float = 1.0) -> np.ndarray:
    """Time derivative of the off-diagonal pair correlations (zero on the diagonal)."""
    N = r.shape[0]
    g = couplings(N, coupling)
    pad = np.zeros((N + 2, N + 2))
    pad[1:-1, 1:-1] = r
    np.fill_diagonal(pad[1:-1, 1:-1], diag)
    out = (-2.0 * pad[1:-1, 1:-1] + 0.5 * g[:, None] * (pad[2:, 1:-1] + pad[:-2, 1:-1])
           + 0.5 * g[None, :] * (pad[1:-1, 2:] + pad[1:-1, :-2]))
    np.fill_diagonal(out, 0.0)
    return out


def pair_ode_oracle(N: int, coupling, initial, t: float, diag: float = 1.0,
                    rtol: float = 1e-12, atol: float = 1e-15) -> np.ndarray:
    """Integrate the closed pair-correlation equations of an N-site chain.

    ``diag`` pins ``r_{m,m}``: 1 for genuine correlations, 0 for the
    homogeneous kernels with vanishing diagonal.
    """
    r0 = np.asarray(initial, dtype=float)
    if r0.shape != (N, N) or np.max(np.abs(r0 - r0.T)) > 0:
        raise DomainError("initial correlations must be a symmetric N x N matrix")
    g = couplings(N, coupling)
    cells, A, src = _pair_system(N, g, diag)
    if not cells or t == 0:
        return _unpack(_pack(r0, cells), cells, N, diag)
    sol = solve_ivp(lambda _, x: A @ x + src, (0.0, t), _pack(r0, cells), method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericalError(sol.message)
    return _unpack(sol.y[:, -1], cells, N, diag)


@dataclass(frozen=True)
class SamplerStats:
    """Sample means and standard errors on the requested time grid."""

    times: np.ndarray
    q_mean: np.ndarray
    q_se: np.ndarray
    r_mean: np.ndarray
    r_se: np.ndarray
    n_trajectories: int


def _simulate_chunk(rng: np.random.Generator, s0: np.ndarray, g: np.ndarray, times: np.ndarray, n: int):
    N = s0.size
    S = np.tile(s0, (n, 1))
    tcur = np.zeros(n)
    nxt = np.zeros(n, dtype=int)
    G = len(times)
    q_sum = np.zeros((G, N))
    q_sq = np.zeros((G, N))
    r_sum = np.zeros((G, N, N))
    r_sq = np.zeros((G, N, N))
    active = np.arange(n)
    while active.size:
        Sa = S[active]
        w = _rates(Sa, g)
        R = w.sum(axis=1)
        tnew = tcur[active] + rng.exponential(1.0 / R)
        # record every grid time passed before the jump
        while True:
            hit = (nxt[active] < G)
            hit[hit] = times[nxt[active][hit]] < tnew[hit]
            if not hit.any():
                break
            ids = active[hit]
            gi = nxt[ids]
            st = S[ids]
            np.add.at(q_sum, gi, st)
            np.add.at(q_sq, gi, st * st)
            pr = st[:, :, None] * st[:, None, :]
            np.add.at(r_sum, gi, pr)
            np.add.at(r_sq, gi, pr * pr)
            nxt[ids] += 1
        cum = np.cumsum(w, axis=1)
        u = rng.random(active.size) * R
        site = np.minimum((cum < u[:, None]).sum(axis=1), N - 1)
        S[active, site] *= -1
        tcur[active] = tnew
        active = active[nxt[active] < G]
    return q_sum, q_sq, r_sum, r_sq


def glauber_sampler(N: int, coupling, initial_spins, times, n_trajectories: int, seed: int,
                    chunk: int = 20000) -> SamplerStats:
    """Exact continuous-time (Gillespie) simulation of the N-site chain.

    Chunks of trajectories draw from independent streams spawned from
    ``seed``, so results are reproducible bit for bit.
    """
    g = couplings(N, coupling)
    s0 = np.asarray(initial_spins, dtype=float)
    if s0.shape != (N,) or not np.all(np.abs(s0) == 1.0):
        raise DomainError("initial spins must be a length-N vector of +-1")
    times = np.sort(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise DomainError("times must be >= 0")
    if n_trajectories < 2:
        raise DomainError("need at least two trajectories")
    sizes = [chunk] * (n_trajectories // chunk)
    if n_trajectories % chunk:
        sizes.append(n_trajectories % chunk)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    acc = None
    for ss, n in zip(streams, sizes):
        part = _simulate_chunk(np.random.default_rng(ss), s0, g, times, n)
        acc = part if acc is None else tuple(a + b for a, b in zip(acc, part))
    q_sum, q_sq, r_sum, r_sq = acc
    M = float(n_trajectories)
    q_mean, r_mean = q_sum / M, r_sum / M
    q_var = np.maximum(q_sq / M - q_mean**2, 0.0) * M / (M - 1)
    r_var = np.maximum(r_sq / M - r_mean**2, 0.0) * M / (M - 1)
    return SamplerStats(times, q_mean, np.sqrt(q_var / M), r_mean, np.sqrt(r_var / M), n_trajectories)
