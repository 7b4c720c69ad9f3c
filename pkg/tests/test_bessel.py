import math

import pytest
from hypothesis import given, strategies as st
from scipy.special import ive

from qising.bessel import ASYMPTOTIC_THRESHOLD, bessel_i, bessel_ive


def test_values_at_zero():
    assert bessel_ive(0, 0.0) == 1.0
    assert bessel_ive(3, 0.0) == 0.0


def test_frozen_value():
    # I_0(1)
    assert bessel_i(0, 1.0) == pytest.approx(1.2660658777520082, rel=1e-15)


def test_negative_order_symmetry():
    assert bessel_ive(-4, 7.5) == bessel_ive(4, 7.5)


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        bessel_ive(0, -1.0)


@pytest.mark.parametrize("nu", [0, 1, 5, 12])
@pytest.mark.parametrize("x", [ASYMPTOTIC_THRESHOLD * (1 - 1e-12), ASYMPTOTIC_THRESHOLD])
def test_continuous_across_threshold(nu, x):
    assert bessel_ive(nu, x) == pytest.approx(ive(nu, x), rel=1e-13)


@given(nu=st.integers(0, 40), x=st.floats(0.0, 500.0))
def test_prop_matches_scipy(nu, x):
    ref = ive(nu, x)
    assert abs(bessel_ive(nu, x) - ref) <= 1e-12 * ref + 1e-300


@given(nu=st.integers(1, 30), x=st.floats(0.1, 200.0))
def test_prop_recurrence(nu, x):
    # I_{nu-1} - I_{nu+1} = (2 nu / x) I_nu
    lhs = bessel_ive(nu - 1, x) - bessel_ive(nu + 1, x)
    rhs = 2 * nu / x * bessel_ive(nu, x)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(rhs), bessel_ive(nu - 1, x)) + 1e-300


def test_large_argument_leading_order():
    x = 1e4
    assert bessel_ive(0, x) * math.sqrt(2 * math.pi * x) == pytest.approx(1 + 1 / (8 * x), rel=1e-8)
