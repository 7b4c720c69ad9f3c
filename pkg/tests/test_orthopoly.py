import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from qising.errors import DomainError
from qising.orthopoly import (ALPHA_LIMIT, PolyFamily, continuous_dual_qhahn, gamma_tilde, genfunc_check, joukowsky,
                              poly_alpha_q, poly_alpha_q_hypergeometric, poly_asymptotic,
                              poly_recurrence, poly_second_kind, poly_spectral, poly_spectral_table,
                              poly_table, psi, psi_table, tau_from_z, wronskian, wronskian_direct)
from qising.qseries import QTriple, qpoch

P = QTriple(0.5, 0.5, -0.5)
triples = st.builds(QTriple, st.floats(0.2, 0.8), st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
inner = st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0.3, 0.9), st.floats(0.05, 3.09))


# frozen values

def test_gamma_tilde_values():
    assert gamma_tilde(3, QTriple(0.5, 0.2, 0.2)) == 1.0
    assert gamma_tilde(0, P) == pytest.approx(1 / 3, abs=1e-15)
    q = math.exp(-1.0)
    assert gamma_tilde(0, QTriple(q, q, -q)) == pytest.approx(0.46211715726000974, abs=1e-14)


def test_poly_recurrence_values():
    fam = PolyFamily(P)
    assert poly_recurrence(1, 0.37, fam) == 0.37
    assert poly_recurrence(2, 1.0, fam) == pytest.approx(0.8, abs=1e-15)
    assert poly_recurrence(5, 0.0, fam) == 0.0
    assert poly_recurrence(-1, 2.0, fam) == 0.0


def test_second_kind():
    fam = PolyFamily(P)
    assert poly_second_kind(0, 1.3, fam) == 0
    assert poly_second_kind(1, 1.3, fam) == 1
    assert poly_second_kind(3, 2.0, fam) == pytest.approx(poly_recurrence(2, 2.0, fam.shifted()), abs=1e-15)


def test_tau_values():
    assert tau_from_z(0.5, QTriple(0.5, 0.3, 0.3)).tau == pytest.approx(0.5, abs=1e-15)
    t = tau_from_z(0.5, QTriple(0.5, 0.5, 0.9)).tau
    assert t == pytest.approx((4.5 - math.sqrt(4.5**2 - 4)) / 2, abs=1e-14)
    assert t.real == pytest.approx(0.2344356, abs=1e-7)
    assert tau_from_z(0.5, QTriple(0.5, 0.5, 0.0)).tau == pytest.approx(1j, abs=1e-15)
    assert tau_from_z(0.5, QTriple(0.5, 0.0, 0.3)).tau is None
    with pytest.raises(DomainError):
        tau_from_z(0, P)


def test_psi_asymptotic_ratio():
    q, z = 0.5, 0.4
    p = QTriple(q, 0.3, 0.2)
    assert abs(psi("+", 40, z, p) / z**40 - qpoch(q * z * z, q)) <= 1e-10


def test_psi_minus_is_reflection():
    z = 0.3 + 0.2j
    assert abs(psi("-", 2, z, P) - psi("+", 2, 1 / z, P)) <= 1e-12


def test_difference_equation_example():
    p, z, n = QTriple(0.5, 0.3, 0.2), 0.6, 3
    x = joukowsky(z)
    for s in "+-":
        r = psi(s, n - 1, z, p) - x / gamma_tilde(n, p) * psi(s, n, z, p) + psi(s, n + 1, z, p)
        assert abs(r) <= 1e-12 * max(1.0, abs(psi(s, n, z, p)))


def test_wronskian_vanishes_at_half_lattice():
    assert abs(wronskian(math.sqrt(0.5), P)) <= 1e-15


def test_wronskian_dual_path():
    w = wronskian(0.5, P)
    for n in (0, 7):
        assert abs(wronskian_direct(0.5, P, n) - w) <= 1e-12 * max(1.0, abs(w))


def test_wronskian_inversion_antisymmetric():
    z0 = 0.3
    assert abs(wronskian(1 / z0, P) + wronskian(z0, P)) <= 1e-12 * abs(wronskian(z0, P))
    assert abs(wronskian_direct(1 / z0, P) + wronskian_direct(z0, P)) <= 1e-10 * abs(wronskian(z0, P))


def test_psi_near_pole_regularized():
    # q z^2 = 1 makes (q z^2; q)_k singular; the product with the prefactor is finite
    z = 1 / math.sqrt(0.5)
    v = psi("+", 2, z, P)
    assert np.isfinite(v)
    near = psi("+", 2, z * (1 + 1e-5), P)
    assert abs(v - near) <= 1e-3 * max(1.0, abs(v))


def test_poly_spectral_example():
    p = QTriple(0.5, 0.4, -0.3)
    z = 0.7 * cmath.exp(0.3j)
    ref = poly_recurrence(6, joukowsky(z), p)
    assert abs(poly_spectral(6, z, p) - ref) <= 1e-10 * abs(ref)
    assert poly_spectral(-1, z, p) == 0
    assert poly_spectral(0, z, p) == 1


def test_poly_spectral_real_on_circle():
    v = poly_spectral(4, tau_from_z(1j, P), P)
    assert abs(v.imag) <= 1e-13 * max(1.0, abs(v))


def test_poly_spectral_at_degenerate_point():
    z = 0.5
    ref = poly_recurrence(5, joukowsky(z), P)
    assert abs(poly_spectral(5, z, P) - ref) <= 1e-12 * abs(ref)


def test_asymptotic_interior():
    p = QTriple(0.5, 0.3, 0.2)
    z, n = 0.4, 30
    ratio = poly_recurrence(n, joukowsky(z), p) / poly_asymptotic(n, z, p).value
    assert abs(ratio - 1) < 1e-8


def test_asymptotic_boundary():
    p = QTriple(0.5, 0.3, 0.2)
    pt = tau_from_z(1j, p)
    a = poly_asymptotic(40, pt, p)
    assert a.branch == "boundary"
    ref = poly_recurrence(40, 0.0, p)
    assert abs(ref - a.value) <= 1e-10 * max(1.0, abs(ref))


def test_asymptotic_boundary_reflection():
    p = QTriple(0.5, 0.3, 0.2)
    for n in (7, 8):
        a = poly_asymptotic(n, tau_from_z(cmath.exp(0.4j), p), p).value
        b = poly_asymptotic(n, tau_from_z(cmath.exp(1j * (math.pi - 0.4)), p), p).value
        assert abs(b - (-1) ** n * a) <= 1e-12 * abs(a)


def test_genfunc_examples():
    assert genfunc_check(0.0, 0.6, QTriple(0.5, 0.5, -0.5)) == 0.0
    assert genfunc_check(0.2, 0.6, QTriple(0.5, 0.5, -0.5), 40) <= 1e-10
    assert genfunc_check(0.2, 0.6, QTriple(0.5, 0.2, 0.1), 40) <= 1e-10


def test_genfunc_domain():
    with pytest.raises(DomainError):
        genfunc_check(0.2, 0.6, QTriple(0.5, 0.7, 0.1))
    with pytest.raises(DomainError):
        genfunc_check(0.7, 0.6, QTriple(0.5, 0.2, 0.1))


def test_poly_alpha_q_special_value():
    q, z = 0.5, 0.5
    beta = (q * q + z * z) / (1 + z * z)
    assert beta == pytest.approx(0.4)
    v = poly_alpha_q(3, z, beta, q)
    expected = qpoch(q * q, q, 3) / (z**3 * qpoch(beta, q, 3))
    assert abs(v - expected) <= 1e-12 * abs(expected)
    assert poly_alpha_q(0, z, beta, q) == pytest.approx(1.0)


def test_poly_alpha_q_all_paths():
    q, beta, z = 0.5, -0.3, 0.6 * cmath.exp(0.7j)
    ref = poly_recurrence(5, joukowsky(z), QTriple(q, q, beta))
    assert abs(poly_alpha_q(5, z, beta, q) - ref) <= 1e-11 * abs(ref)
    for v in poly_alpha_q_hypergeometric(5, z, beta, q):
        assert abs(v - ref) <= 1e-11 * abs(ref)


def test_continuous_dual_qhahn_relation():
    q, beta, z, n = 0.5, 0.3, 0.7 * cmath.exp(0.4j), 4
    tau = tau_from_z(z, QTriple(q, q, beta)).tau
    h = continuous_dual_qhahn(n, z, q * tau, q / tau, 0.0, q)
    ref = poly_recurrence(n, joukowsky(z), QTriple(q, q, beta))
    assert abs(h / qpoch(beta, q, n) - ref) <= 1e-11 * abs(ref)


# properties

@given(triples, inner)
def test_prop_tau_invariants(p, z):
    assume(abs(p.alpha) >= ALPHA_LIMIT)
    t = tau_from_z(z, p).tau
    assert abs(t) <= 1 + 1e-12
    lhs, rhs = p.alpha * (t + 1 / t), p.beta * joukowsky(z)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))


@given(triples, inner)
def test_prop_spectral_matches_recurrence(p, z):
    ref = poly_table(12, joukowsky(z), p).ravel()
    got = poly_spectral_table(12, z, p)
    assert np.all(np.abs(got - ref) <= 1e-9 * np.maximum(np.abs(ref), 1e-300))


@given(triples, inner)
def test_prop_psi_table_matches_scalar(p, z):
    tab = psi_table("+", 6, z, p)
    for n in (-1, 0, 3, 6):
        v = psi("+", n, z, p)
        assert abs(tab[n + 1] - v) <= 1e-13 * max(1.0, abs(v))


@given(triples)
def test_prop_gamma_bound(p):
    assume(p.beta <= p.alpha)
    assert np.all(np.abs(gamma_tilde(np.arange(50), p)) <= 1 + 1e-15)


@given(triples, st.floats(-3, 3))
def test_prop_parity(p, x):
    for n in range(8):
        assert poly_recurrence(n, -x, p) == pytest.approx((-1) ** n * poly_recurrence(n, x, p),
                                                          rel=1e-12, abs=1e-12)
