import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qising.errors import DomainError, SizeError
from qising.ising import ChainModel, stationary
from qising.oracle import (FiniteJacobi, MasterState, couplings, glauber_sampler,
                           jacobi_expm_magnetization, master_equation, master_generator,
                           pair_ode_oracle, pair_ode_rhs, product_state)

M05 = ChainModel(0.5)
M07 = ChainModel(0.7)


def test_couplings_forms():
    assert np.allclose(couplings(3, M05), np.tanh(0.5 * np.arange(1, 4)), atol=0)
    assert np.all(couplings(4, 0.3) == 0.3)
    with pytest.raises(DomainError):
        couplings(3, [0.1, 0.2])
    with pytest.raises(DomainError):
        couplings(2, 1.0)


def test_jacobi_structure():
    jac = FiniteJacobi(couplings(10, M07))
    assert np.all(jac.diag == -1)
    assert np.all((jac.offdiag > 0) & (jac.offdiag < 0.5))
    lam, _ = jac.eig
    assert np.all(np.diff(np.sort(lam)) > 0)


def test_jacobi_single_site():
    assert jacobi_expm_magnetization(1, 2.0, M05, [0.7]) == pytest.approx([0.7 * math.exp(-2.0)], rel=1e-15)


def test_jacobi_identity_at_zero():
    q0 = np.array([0.3, -0.2, 1.0, 0.5])
    assert np.allclose(jacobi_expm_magnetization(4, 0.0, M05, q0), q0, atol=1e-15)


def test_jacobi_similarity():
    jac = FiniteJacobi(couplings(6, M07))
    lam, V = jac.eig
    s = np.sqrt(jac.gammas)
    E = (V * np.exp(1.3 * lam)) @ V.T
    for k in range(6):
        e = np.zeros(6)
        e[k] = 1.0
        assert np.allclose(jac.propagator(1.3) @ (s * e), s * (E @ e), atol=1e-15)


def test_master_vs_jacobi_N8():
    q0 = np.linspace(-0.9, 0.9, 8)
    st_ = master_equation(8, M07, q0, 1.0)
    assert np.max(np.abs(st_.magnetization() - jacobi_expm_magnetization(8, 1.0, M07, q0))) <= 1e-10


def test_master_vs_jacobi_N2():
    q0 = [0.4, -0.8]
    st_ = master_equation(2, M05, q0, 2.0)
    assert np.max(np.abs(st_.magnetization() - jacobi_expm_magnetization(2, 2.0, M05, q0))) <= 1e-10


def test_master_vs_pair_N4():
    q0 = np.array([0.5, -0.3, 0.9, 0.1])
    r0 = product_state(4, q0).correlation()
    st_ = master_equation(4, M05, q0, 1.5)
    assert np.max(np.abs(st_.correlation() - pair_ode_oracle(4, M05, r0, 1.5))) <= 1e-9


def test_master_mass_conserved_from_uniform():
    N = 6
    st_ = master_equation(N, M05, MasterState(N, np.full(2**N, 2.0**-N)), 5.0)
    assert abs(st_.p.sum() - 1) <= 1e-12
    assert np.all(st_.p >= 0)


def test_generator_columns_sum_to_zero():
    L = master_generator(5, M07)
    assert np.max(np.abs(np.asarray(L.sum(axis=0)))) <= 1e-15


def test_master_size_cap():
    with pytest.raises(SizeError):
        master_equation(13, M05, np.zeros(13), 1.0)


def test_master_state_validation():
    with pytest.raises(DomainError):
        MasterState(2, np.array([0.5, 0.5, 0.5, -0.5]))


def test_pair_ode_stationary_start():
    rho = stationary(M05, 12)
    assert np.max(np.abs(pair_ode_rhs(rho, M05))) <= 1e-8
    r = pair_ode_oracle(12, M05, rho, 1.0)
    assert np.all(np.diag(r) == 1.0)
    assert np.max(np.abs(r - rho)) <= 1e-8


def test_pair_ode_validation():
    with pytest.raises(DomainError):
        pair_ode_oracle(3, M05, np.triu(np.ones((3, 3))), 1.0)


def test_sampler_infinite_temperature_single_site():
    s = glauber_sampler(1, 0.0, [1.0], [0.5, 1.0], 100_000, seed=11)
    z = np.abs(s.q_mean[:, 0] - np.exp(-s.times)) / s.q_se[:, 0]
    assert np.all(z <= 3)


def test_sampler_bit_exact_rerun():
    a = glauber_sampler(4, M05, [1, -1, 1, 1], [0.3, 1.0], 5000, seed=5, chunk=1500)
    b = glauber_sampler(4, M05, [1, -1, 1, 1], [0.3, 1.0], 5000, seed=5, chunk=1500)
    for x, y in ((a.q_mean, b.q_mean), (a.q_se, b.q_se), (a.r_mean, b.r_mean), (a.r_se, b.r_se)):
        assert x.tobytes() == y.tobytes()


def test_sampler_time_zero():
    s = glauber_sampler(3, M05, [1, -1, 1], [0.0], 100, seed=1)
    assert np.array_equal(s.q_mean[0], [1, -1, 1])
    assert np.all(s.q_se[0] == 0)


def test_sampler_validation():
    with pytest.raises(DomainError):
        glauber_sampler(2, M05, [1, 0.5], [1.0], 10, seed=0)
    with pytest.raises(DomainError):
        glauber_sampler(2, M05, [1, 1], [1.0], 1, seed=0)


@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.floats(0, 5))
def test_prop_master_marginals_bounded(q0, t):
    st_ = master_equation(3, M05, q0, t)
    assert abs(st_.p.sum() - 1) <= 1e-12
    assert np.all(np.abs(st_.magnetization()) <= 1 + 1e-12)
    r = st_.correlation()
    assert np.all(np.abs(r) <= 1 + 1e-12)
    assert np.allclose(np.diag(r), 1.0, atol=1e-12)


@given(st.floats(0.0, 10.0))
def test_prop_jacobi_semigroup(t):
    jac = FiniteJacobi(couplings(7, M07))
    assert np.allclose(jac.propagator(t) @ jac.propagator(1.0), jac.propagator(t + 1.0), atol=1e-13)
