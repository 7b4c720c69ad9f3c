"""End-to-end acceptance checks shared by ``qising verify`` and the test suite.

Each check returns ``(passed, detail)``; :func:`run` times them and adds the
runtime budget to the verdict.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .ising import (ChainModel, asymptotic_coeffs, constant_T_asymptotic,
                    constant_T_kernel, contraction_ratio, magnetization_asymptotic,
                    magnetization_kernel, magnetization_matrix, stationary, stationary_residual,
                    twospin_asymptotic, twospin_kernel)
from .measure import (build_measure, closed_form_zeros_alpha_q, find_zeros, orthogonality_matrix,
                      orthogonality_residual)
from .oracle import (FiniteJacobi, couplings, jacobi_expm_magnetization, master_equation,
                     pair_ode_oracle, pair_ode_rhs, product_state, glauber_sampler)
from .orthopoly import (genfunc_closed, genfunc_series, gamma_tilde, joukowsky, poly_spectral_table,
                        poly_table, psi_table, wronskian)
from .qseries import QTriple, identity_residual

__all__ = ["CheckResult", "CHECKS", "run", "format_table"]

SEED = 20240611
SAMPLER_SEED = 12345


@dataclass(frozen=True)
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float


@dataclass(frozen=True)
class _Check:
    number: int
    title: str
    budget: float
    fn: Callable


CHECKS: dict[int, _Check] = {}


def _check(number: int, title: str, budget: float):
    def deco(fn):
        CHECKS[number] = _Check(number, title, budget, fn)
        return fn
    return deco


def _sym_uniform(rng, lo, hi):
    return rng.choice([-1.0, 1.0]) * rng.uniform(lo, hi)


def _identity_draws(rng, count):
    draws = []
    for _ in range(count):
        q = rng.uniform(0.2, 0.8)
        a, z = rng.uniform(-0.9, 0.9), rng.uniform(-0.8, 0.8)
        draws.append(("q_binomial", dict(a=a, z=z), q))
        n = int(rng.integers(0, 16))
        draws.append(("q_chu_vandermonde",
                      dict(n=n, a=_sym_uniform(rng, 0.2, 0.9), c=rng.uniform(-0.9, 0.9)), q))
        a, b = _sym_uniform(rng, 0.3, 0.95), _sym_uniform(rng, 0.3, 0.95)
        draws.append(("q_gauss_sum", dict(a=a, b=b, c=a * b * rng.uniform(0.05, 0.7)), q))
        while True:
            n = int(rng.integers(0, 13))
            b, c = _sym_uniform(rng, 0.2, 0.9), _sym_uniform(rng, 0.2, 0.9)
            gaps = [abs(1.0 - q ** (1 - n + j) * b / c) for j in range(n)]
            if min(gaps, default=1.0) > 1e-2:
                break
        draws.append(("jackson_transform", dict(n=n, b=b, c=c, z=rng.uniform(-2.0, 2.0)), q))
    return draws


@_check(1, "q-series identities (100 draws each)", 1.0)
def check_identities(quick=False):
    rng = np.random.default_rng(SEED)
    worst = {}
    for kind, params, q in _identity_draws(rng, 100):
        worst[kind] = max(worst.get(kind, 0.0), identity_residual(kind, params, q, scaled=True))
    m = max(worst.values())
    return m <= 1e-11, "max scaled residual " + ", ".join(f"{k}={v:.1e}" for k, v in worst.items())


def _random_point(rng, rmin=0.2, rmax=0.95):
    return rng.uniform(rmin, rmax) * np.exp(1j * rng.uniform(0.05, math.pi - 0.05))


def psi_recurrence_residuals(z, params: QTriple, nmax: int = 30):
    """Scaled residuals of the psi difference equation and of Wronskian constancy."""
    x = joukowsky(z)
    n = np.arange(0, nmax + 1)
    g = gamma_tilde(n, params)
    tables = {s: psi_table(s, nmax + 1, z, params) for s in "+-"}
    out_eq = 0.0
    for vals in tables.values():
        # vals[i] holds psi_{i-1}
        a, b, c = vals[n], x / g * vals[n + 1], vals[n + 2]
        out_eq = max(out_eq, float(np.max(np.abs(a - b + c) / (np.abs(a) + np.abs(b) + np.abs(c)))))
    plus, minus = tables["+"], tables["-"]
    u, v = plus[:-1] * minus[1:], plus[1:] * minus[:-1]
    out_w = float(np.max(np.abs(u - v - wronskian(z, params)) / (np.abs(u) + np.abs(v))))
    return out_eq, out_w


@_check(2, "psi difference equation and Wronskian (20 draws)", 1.0)
def check_psi(quick=False):
    rng = np.random.default_rng(SEED + 2)
    eq = wr = 0.0
    for _ in range(20):
        params = QTriple(rng.uniform(0.2, 0.8), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9))
        z = _random_point(rng, 0.3, 0.95)
        e, w = psi_recurrence_residuals(z, params)
        eq, wr = max(eq, e), max(wr, w)
    return max(eq, wr) <= 1e-12, f"difference eq {eq:.1e}, Wronskian {wr:.1e} (relative to term size)"


@_check(3, "spectral vs recurrence p_n (100 draws, n<=20)", 2.0)
def check_poly_dual(quick=False):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(100):
        params = QTriple(rng.uniform(0.2, 0.8), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9))
        z = _random_point(rng, 0.3, 0.9)
        ref = poly_table(20, joukowsky(z), params).ravel()
        spectral = poly_spectral_table(20, z, params)
        worst = max(worst, float(np.max(np.abs(spectral - ref)[1:] / np.abs(ref[1:]))))
    return worst <= 1e-10, f"max relative difference {worst:.1e}"


@_check(4, "generating functions, both branches (20 draws)", 2.0)
def check_genfunc(quick=False):
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for i in range(20):
        q = rng.uniform(0.2, 0.8)
        alpha = q if i % 2 == 0 else rng.uniform(-0.95, 0.95) * q
        params = QTriple(q, alpha, rng.uniform(-0.9, 0.9))
        z = _random_point(rng, 0.3, 0.9)
        t = z * rng.uniform(0.05, 0.6) * np.exp(1j * rng.uniform(-math.pi, math.pi))
        rho = abs(t / z)
        n_max = int(math.ceil(math.log(1e-16) / math.log(rho))) + 10
        s = genfunc_series(t, z, params, n_max)
        worst = max(worst, abs(s.value - genfunc_closed(t, z, params)))
    return worst <= 1e-10, f"max |series - closed| {worst:.1e}"


@_check(5, "orthogonality residuals m,n<=12 on three parameter sets", 30.0)
def check_orthogonality(quick=False):
    sets = [QTriple(0.5, 0.3, 0.2), QTriple(0.5, 0.5, 0.9),
            QTriple(math.exp(-1), math.exp(-1), -math.exp(-1))]
    parts, ok = [], True
    for p in sets:
        mu = build_measure(p)
        gram = orthogonality_matrix(12, p, mu)
        r = max(orthogonality_residual(m, n, p, gram=gram) for m in range(13) for n in range(13))
        ok &= r <= 1e-8
        parts.append(f"({p.q:.3g},{p.alpha:.3g},{p.beta:.3g}) atoms={len(mu.atoms)} max={r:.1e}")
    return ok, "; ".join(parts)


def atom_threshold_bisection(q: float, tol: float = 1e-7) -> float:
    """Smallest beta (alpha = q) at which the zero scan finds a zero in (0, 1)."""
    lo, hi = q, 1.0 - 1e-9
    has = lambda b: find_zeros(QTriple(q, q, b), method="scan").count > 0  # noqa: E731
    if has(lo) or not has(hi):
        raise DomainError("bisection bracket does not straddle the threshold")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if has(mid) else (mid, hi)
    return 0.5 * (lo + hi)


@_check(6, "zeros vs closed form; atom threshold bisection", 5.0)
def check_zeros(quick=False):
    worst = 0.0
    for q, beta in [(0.5, 0.9), (0.5, 0.99), (0.3, 0.95), (0.7, 0.97), (0.6, 0.999)]:
        scan = find_zeros(QTriple(q, q, beta), method="scan").zeros
        closed = closed_form_zeros_alpha_q(q, beta)
        if len(scan) != len(closed):
            return False, f"zero count mismatch at q={q}, beta={beta}: {len(scan)} vs {len(closed)}"
        worst = max([worst] + [abs(a - b) for a, b in zip(scan, closed)])
    flips = []
    for q in (0.3, 0.5, 0.7):
        flips.append(abs(atom_threshold_bisection(q) - (1 + q * q) / 2))
    return worst <= 1e-10 and max(flips) <= 1e-6, (
        f"max zero error {worst:.1e}; threshold offsets {', '.join(f'{f:.1e}' for f in flips)}")


@_check(7, "oracle triangle (kappa=0.7, N=8)", 20.0)
def check_oracle_triangle(quick=False):
    model = ChainModel(0.7)
    rng = np.random.default_rng(SEED + 7)
    q0 = rng.uniform(-1, 1, 8)
    r0 = product_state(8, q0).correlation()
    dq = dr = 0.0
    for t in (0.5, 1.0, 5.0):
        st = master_equation(8, model, q0, t)
        dq = max(dq, np.max(np.abs(st.magnetization() - jacobi_expm_magnetization(8, t, model, q0))))
        dr = max(dr, np.max(np.abs(st.correlation() - pair_ode_oracle(8, model, r0, t))))
    return dq <= 1e-10 and dr <= 1e-9, f"magnetization {dq:.1e}, correlation {dr:.1e}"


@_check(8, "semi-infinite kernel vs N=400 Jacobi exponential", 30.0)
def check_truncation(quick=False):
    worst = 0.0
    for kappa in (0.3, 0.7):
        model = ChainModel(kappa)
        jac = FiniteJacobi(couplings(400, model))
        for t in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
            Q = magnetization_matrix(10, t, model)
            worst = max(worst, np.max(np.abs(Q - jac.propagator(t)[:10, :10])))
    return worst <= 1e-6, f"max difference {worst:.1e}"


def magnetization_asymptotic_report(kappa: float = 0.7) -> dict:
    model = ChainModel(kappa)
    v = {t: magnetization_kernel(1, 1, t, model) for t in (100.0, 400.0)}
    slope = math.log(v[400.0] / v[100.0]) / math.log(4.0)
    ratio = v[400.0] / magnetization_asymptotic(1, 1, 400.0, model, order=1)
    A = asymptotic_coeffs(1, 1, model).A
    explained = (ratio - 1.0) / (1.5 * A / 400.0)
    return dict(slope=slope, ratio=ratio, A=A, explained=explained)


@_check(9, "magnetization t^-3/2 law (q_1^(1), kappa=0.7)", 30.0)
def check_mag_asymptotics(quick=False):
    r = magnetization_asymptotic_report(0.7)
    ok_slope = abs(r["slope"] + 1.5) <= 0.02
    ok_ratio = abs(r["ratio"] - 1.0) <= 0.005
    ok_corr = 0.5 <= r["explained"] <= 2.0
    return ok_slope and ok_ratio and ok_corr, (
        f"slope {r['slope']:.4f} [{'ok' if ok_slope else 'FAIL'}], ratio(400) {r['ratio']:.4f} "
        f"[{'ok' if ok_ratio else 'FAIL'}], (ratio-1)/(1.5A/t) {r['explained']:.3f} "
        f"[{'ok' if ok_corr else 'FAIL'}], A={r['A']:.3f}")


def twospin_asymptotic_report(kappa: float = 0.7, idx=(3, 1, 4, 2)) -> dict:
    model = ChainModel(kappa)
    m, n, k, l = idx
    slope = (math.log(twospin_kernel(m, n, k, l, 300.0, model) / twospin_kernel(m, n, k, l, 100.0, model))
             / math.log(3.0))
    ts = np.linspace(100.0, 400.0, 13)
    r = np.array([twospin_kernel(m, n, k, l, t, model) for t in ts])
    powers = np.arange(3, 8)
    X = ts[:, None] ** -powers[None, :]
    # relative least squares: each row scaled by the data it fits
    coef = np.linalg.lstsq(X / r[:, None], np.ones_like(r), rcond=None)[0]
    contrib = coef * 100.0 ** -powers
    lead = twospin_asymptotic(m, n, k, l, 100.0, model) * 100.0**5
    return dict(slope=slope, rel3=abs(contrib[0] / contrib[2]), rel4=abs(contrib[1] / contrib[2]),
                c5=coef[2], c5_analytic=lead)


@_check(10, "two-spin t^-5 law ((3,1,4,2), kappa=0.7)", 60.0)
def check_twospin_asymptotics(quick=False):
    r = twospin_asymptotic_report(0.7)
    ok_slope = abs(r["slope"] + 5.0) <= 0.1
    ok_cancel = r["rel3"] <= 0.01 and r["rel4"] <= 0.01
    return ok_slope and ok_cancel, (
        f"slope {r['slope']:.4f} [{'ok' if ok_slope else 'FAIL'}], t^-3/t^-5 {r['rel3']:.1e}, "
        f"t^-4/t^-5 {r['rel4']:.1e} [{'ok' if ok_cancel else 'FAIL'}], "
        f"c5 fit {r['c5']:.4g} vs analytic {r['c5_analytic']:.4g}")


@_check(11, "stationary solution (kappa=0.5)", 10.0)
def check_stationary(quick=False):
    model = ChainModel(0.5)
    M = 40
    rho = stationary(model, M)
    fixed = stationary_residual(rho, model)
    ratio = contraction_ratio(model, M, samples=200, seed=SEED + 11)
    delta = (1 - model.q) / (1 + model.q)
    deriv = float(np.max(np.abs(pair_ode_rhs(rho, model))))
    drift = float(np.max(np.abs(pair_ode_oracle(M, model, rho, 1.0) - rho)))
    ok_fixed, ok_contr, ok_ode = fixed <= 1e-12, ratio <= delta + 1e-12, max(deriv, drift) <= 1e-8
    return ok_fixed and ok_contr and ok_ode, (
        f"||rho-T rho|| {fixed:.1e} [{'ok' if ok_fixed else 'FAIL'}], contraction {ratio:.4f} vs "
        f"{delta:.4f} [{'ok' if ok_contr else 'FAIL'}], pair-ODE derivative {deriv:.1e}, drift(t=1) "
        f"{drift:.1e} [{'ok' if ok_ode else 'FAIL'}]")


@_check(12, "constant-temperature Bessel baseline", 10.0)
def check_constant_T(quick=False):
    worst = 0.0
    for gamma in (0.3, 0.6, 0.9):
        jac = FiniteJacobi(couplings(400, gamma))
        for t in (0.5, 1.0, 2.0, 4.0, 7.0, 10.0):
            P = jac.propagator(t)
            for n in range(1, 6):
                for k in range(1, 6):
                    worst = max(worst, abs(P[n - 1, k - 1] - constant_T_kernel(n, k, t, gamma)))
    ratio = constant_T_kernel(1, 1, 200.0, 0.5) / constant_T_asymptotic(1, 1, 200.0, 0.5)
    return worst <= 1e-8 and abs(ratio - 1) <= 0.02, f"max difference {worst:.1e}; ratio(t=200) {ratio:.4f}"


SAMPLER_SPINS = (1.0, -1.0, 1.0, 1.0, -1.0, 1.0)


@_check(13, "[statistical] Glauber sampler vs master equation (N=6)", 60.0)
def check_sampler(quick=False):
    model = ChainModel(0.5)
    n_traj = 20_000 if quick else 100_000
    t = 1.0
    a = glauber_sampler(6, model, SAMPLER_SPINS, [t], n_traj, SAMPLER_SEED)
    b = glauber_sampler(6, model, SAMPLER_SPINS, [t], n_traj, SAMPLER_SEED)
    exact = master_equation(6, model, product_state(6, SAMPLER_SPINS), t)
    zq = np.abs(a.q_mean[0] - exact.magnetization()) / a.q_se[0]
    off = ~np.eye(6, dtype=bool)
    zr = np.abs(a.r_mean[0] - exact.correlation())[off] / a.r_se[0][off]
    same = all(x.tobytes() == y.tobytes() for x, y in
               ((a.q_mean, b.q_mean), (a.q_se, b.q_se), (a.r_mean, b.r_mean), (a.r_se, b.r_se)))
    z = max(zq.max(), zr.max())
    return z <= 3.0 and same, f"{n_traj} trajectories, max |z| {z:.2f}, rerun identical {same}"


def run(numbers=None, quick: bool = False) -> list[CheckResult]:
    out = []
    for num in sorted(numbers or CHECKS):
        c = CHECKS[num]
        t0 = time.perf_counter()
        try:
            passed, detail = c.fn(quick)
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        if dt > c.budget:
            passed, detail = False, detail + f"; runtime {dt:.1f}s over budget {c.budget:.0f}s"
        out.append(CheckResult(num, c.title, bool(passed), detail, dt, c.budget))
    return out


def format_table(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        lines.append(f"[{'PASS' if r.passed else 'FAIL'}] {r.number:>2} {r.title} "
                     f"({r.seconds:.2f}s/{r.budget:.0f}s): {r.detail}")
    return "\n".join(lines)
