import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from qising.errors import DomainError
from qising.measure import (ac_density, build_measure, cauchy_transform, cauchy_transform_quadrature,
                            closed_form_zeros_alpha_q, discrete_atoms, find_zeros, gauss_legendre,
                            orthogonality_matrix, orthogonality_residual, scan_zeros)
from qising.orthopoly import PolyFamily, joukowsky, poly_recurrence, poly_second_kind, psi
from qising.qseries import QTriple

NO_ATOMS = QTriple(0.5, 0.3, 0.2)
ATOMS = QTriple(0.5, 0.5, 0.9)


@pytest.fixture(scope="module")
def mu_plain():
    return build_measure(NO_ATOMS)


@pytest.fixture(scope="module")
def mu_atoms():
    return build_measure(ATOMS)


# frozen values

def test_gauss_legendre_polynomial_exact():
    val, order = gauss_legendre(lambda x: x**5 + 1, 0.0, 2.0)
    assert val == pytest.approx(64 / 6 + 2, abs=1e-13)
    assert order == 32


def test_gauss_legendre_oscillatory():
    val, _ = gauss_legendre(lambda x: np.cos(40 * x), 0.0, math.pi, atol=1e-13)
    assert abs(val) <= 1e-12


def test_zero_example():
    zs = find_zeros(ATOMS)
    assert zs.count == 1
    assert zs.zeros[0] == pytest.approx(math.sqrt(0.1 / 0.65), abs=1e-12)
    assert zs.zeros[0] == pytest.approx(0.3922323, abs=1e-7)
    assert zs.method == "closed"


def test_zero_free_below_threshold():
    assert find_zeros(QTriple(0.5, 0.5, 0.6)).count == 0
    assert find_zeros(QTriple(0.5, 0.4, 0.1)).count == 0
    assert discrete_atoms(QTriple(0.5, 0.4, 0.1)) == ()


def test_atom_example(mu_atoms):
    (x, w), = mu_atoms.atoms
    assert x == pytest.approx(0.75 / math.sqrt(0.065), abs=1e-12)
    assert x == pytest.approx(2.9417420, abs=1e-7)
    # frozen weight
    assert w == pytest.approx(0.37551206190, rel=1e-8)
    assert [a for a, _ in mu_atoms.all_atoms()] == [-x, x]


def test_total_mass_with_atoms(mu_atoms):
    assert abs(mu_atoms.total_mass() - 1) <= 1e-8


def test_density_integrates_to_one_without_atoms():
    val, _ = gauss_legendre(lambda t: ac_density(t, NO_ATOMS), 0.0, math.pi)
    assert abs(val - 1) <= 1e-8


def test_density_symmetry():
    p = QTriple(0.5, 0.4, 0.1)
    assert abs(ac_density(0.3, p) - ac_density(math.pi - 0.3, p)) <= 1e-12


def test_density_closed_form_branch():
    p = QTriple(0.5, 0.5, -0.5)
    a = ac_density(1.0, p, closed_form=True)
    b = ac_density(1.0, p, closed_form=False)
    assert abs(a - b) <= 1e-10 * a


def test_density_domain():
    with pytest.raises(DomainError):
        ac_density(0.0, NO_ATOMS)
    with pytest.raises(DomainError):
        ac_density(1.0, NO_ATOMS, closed_form=True)


def test_orthogonality_examples(mu_plain, mu_atoms):
    assert orthogonality_residual(0, 0, NO_ATOMS, mu_plain) <= 1e-8
    assert orthogonality_residual(3, 5, NO_ATOMS, mu_plain) <= 1e-8
    assert orthogonality_residual(4, 4, ATOMS, mu_atoms) <= 1e-7


def test_orthogonality_gram_symmetric(mu_atoms):
    g = orthogonality_matrix(8, ATOMS, mu_atoms)
    assert np.max(np.abs(g - g.T)) <= 1e-12 * np.max(np.abs(g))


def test_cauchy_small_z():
    z = 1e-4
    assert cauchy_transform(z, NO_ATOMS) == pytest.approx(z, rel=1e-3)


def test_cauchy_markov_limit():
    z = 0.4
    x = joukowsky(z)
    fam = PolyFamily(NO_ATOMS)
    ratio = poly_second_kind(60, x, fam) / poly_recurrence(60, x, fam)
    assert abs(cauchy_transform(z, NO_ATOMS) - ratio) <= 1e-8


def test_cauchy_quadrature(mu_atoms):
    z = 0.35
    a = cauchy_transform(z, ATOMS)
    b = cauchy_transform_quadrature(joukowsky(z), mu_atoms)
    assert abs(a - b) <= 1e-8


def test_cauchy_domain():
    with pytest.raises(DomainError):
        cauchy_transform(1.2, NO_ATOMS)


# properties

@given(q=st.floats(0.2, 0.8), beta=st.floats(0.3, 0.999))
def test_prop_zeros_match_closed_form(q, beta):
    assume(beta > q + 1e-3)
    closed = closed_form_zeros_alpha_q(q, beta)
    scan = scan_zeros(QTriple(q, q, beta))
    assert len(closed) == len(scan)
    assert all(abs(a - b) <= 1e-10 for a, b in zip(closed, scan))


@given(q=st.floats(0.2, 0.8), beta=st.floats(0.5, 0.999))
def test_prop_zeros_real_simple_interlacing(q, beta):
    p = QTriple(q, q, beta)
    z = scan_zeros(p)
    assert all(0 < a < 1 for a in z)
    assert all(a < b for a, b in zip(z, z[1:]))
    z0 = scan_zeros(p, n=0)
    for a, b in zip(z, z[1:]):
        assert sum(a < c < b for c in z0) == 1


@given(q=st.floats(0.2, 0.8), beta=st.floats(-0.9, 0.999))
def test_prop_empty_iff_threshold(q, beta):
    assume(abs(beta - (1 + q * q) / 2) > 1e-6)
    has = find_zeros(QTriple(q, q, beta), method="scan").count > 0
    assert has == (beta > (1 + q * q) / 2)


@given(theta=st.floats(0.01, math.pi - 0.01), a=st.floats(-0.9, 0.9), b=st.floats(-0.9, 0.9))
def test_prop_density_positive(theta, a, b):
    assert ac_density(theta, QTriple(0.5, a, b)) >= 0


@given(q=st.floats(0.3, 0.7), beta=st.floats(0.7, 0.97))
def test_prop_atom_weights_positive(q, beta):
    p = QTriple(q, q, beta)
    for x, w in discrete_atoms(p):
        assert w > 0 and x > 2
        z = min(np.roots([1, -x, 1]).real)
        assert abs(psi("+", -1, z, p)) <= 1e-10
