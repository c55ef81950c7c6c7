import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bhgap.params import DomainError, PoleError
from bhgap.specfun import (
    gamma,
    gamma2,
    gamma2_diag_scaled,
    gamma_upper,
    gamma_upper_scaled,
)

mp.mp.dps = 30


def mp_gup(a, z):
    return complex(mp.gammainc(mp.mpf(a), mp.mpmathify(z), mp.inf))


def mp_gamma2(a, x, y):
    f = lambda u: mp.e ** (-u) * u ** mp.mpf(a) / (u + y)
    return complex(mp.quad(f, [x, x + 1, x + 10, x + 80]))


def relerr(got, want):
    return abs(complex(got) - complex(want)) / max(abs(complex(want)), 1e-300)


def test_gamma_classics():
    assert gamma(1.0) == 1.0
    assert relerr(gamma(0.5), math.sqrt(math.pi)) < 1e-15
    assert gamma(5.0) == 24.0


def test_gamma_pole():
    for a in (0.0, -1.0, -4.0):
        with pytest.raises(PoleError):
            gamma(a)


@pytest.mark.parametrize("a", [-6.5, -2.0, -0.5, 0.0, 0.5, 1.0, 3.7, 12.0, 20.0])
@pytest.mark.parametrize("z", [1e-6, 1e-3, 0.3, 1.0, 4.5, 20.0, 100.0])
def test_gamma_upper_real_grid(a, z):
    got = gamma_upper(a, z)
    want = mp_gup(a, z)
    assert relerr(got.value, want) < 1e-12


def test_gamma_upper_exponential_case():
    for x in (0.1, 1.0, 7.0):
        assert relerr(gamma_upper(1.0, x).value, math.exp(-x)) < 1e-14


def test_gamma_upper_zero_limit():
    assert relerr(gamma_upper(2.5, 0.0).value, math.gamma(2.5)) < 1e-14
    with pytest.raises(DomainError):
        gamma_upper(-0.5, 0.0)


def test_gamma_upper_branch_cut_rejected():
    with pytest.raises(DomainError):
        gamma_upper(1.0, -2.0)


def test_gamma_upper_negative_order_quadrature_oracle():
    # direct adaptive quadrature of int_1^inf u^-1.5 e^-u du
    want = mp.quad(lambda u: u ** mp.mpf(-1.5) * mp.e ** (-u), [1, 10, 80])
    assert relerr(gamma_upper(-0.5, 1.0).value, complex(want)) < 1e-12


@pytest.mark.parametrize("z", [
    complex(3.0, 1.0), complex(0.7, -2.0), complex(-2.0, 0.5),
    complex(-8.0, 2.0), complex(-20.0, 1.0), complex(-60.0, 4.0),
])
@pytest.mark.parametrize("a", [-3.5, -1.0, 0.0, 1.5, 6.0])
def test_gamma_upper_complex_talbot_region(a, z):
    got = gamma_upper(a, z)
    want = mp_gup(a, z)
    assert relerr(got.value, want) < 1e-10


@pytest.mark.parametrize("z", [complex(5.0, 0.0), complex(2.0, 3.0), complex(-15.0, 1.5), complex(-40.0, 2.5)])
@pytest.mark.parametrize("a", [-4.5, 0.5, 3.0])
def test_gamma_upper_scaled(a, z):
    want = complex(mp.e ** mp.mpmathify(z) * mp.gammainc(mp.mpf(a), mp.mpmathify(z), mp.inf))
    assert relerr(gamma_upper_scaled(a, z).value, want) < 1e-10


@given(
    a=st.floats(-5.0, 15.0),
    z=st.floats(0.05, 60.0),
)
@settings(max_examples=60, deadline=None)
def test_gamma_upper_recurrence_real(a, z):
    # Gamma(a+1, z) = a Gamma(a, z) + z^a e^-z
    lhs = gamma_upper(a + 1.0, z).value
    rhs = a * gamma_upper(a, z).value + z ** a * math.exp(-z)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1e-12)


@pytest.mark.parametrize("z", [complex(1.5, 2.0), complex(-4.0, 1.0)])
def test_gamma_upper_recurrence_complex(z):
    import cmath
    for a in (-1.3, 0.7, 2.0):
        lhs = gamma_upper(a + 1.0, z).value
        rhs = a * gamma_upper(a, z).value + cmath.exp(a * cmath.log(z) - z)
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


def test_gamma2_reduces_to_gamma_upper():
    for a in (-0.5, 0.0, 1.5):
        for x in (0.1, 1.0, 5.0):
            assert relerr(gamma2(a, x, 0.0).value, gamma_upper(a, x).value) < 1e-11


def test_gamma2_x_zero_closed_form():
    # Gamma2(a; 0, y) = Gamma(1+a) y^a e^{+y} Gamma(-a, y)
    for a in (-0.5, 0.25, 0.5, 1.5):
        for y in (0.5, 2.0):
            want = math.gamma(1 + a) * y ** a * math.exp(y) * mp_gup(-a, y).real
            assert relerr(gamma2(a, 0.0, y).value, want) < 1e-10


def test_gamma2_quadrature_oracle():
    got = gamma2(0.5, 1.0, 2.0)
    want = mp_gamma2(0.5, 1.0, 2.0)
    assert relerr(got.value, want) < 1e-12
    assert got.est_abs_error < 1e-10 * abs(want) + 1e-14


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.5])
@pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("y", [0.5, 2.0])
def test_gamma2_shift_identity(a, x, y):
    lhs = gamma2(a + 1.0, x, y).value + y * gamma2(a, x, y).value
    rhs = gamma_upper(a + 1.0, x).value
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_gamma2_x_derivative():
    a, x, y, h = 0.5, 1.0, 2.0, 1e-5
    fd = (gamma2(a, x + h, y).value - gamma2(a, x - h, y).value) / (2 * h)
    want = -x ** a * math.exp(-x) / (x + y)
    assert relerr(fd, want) < 1e-6


def test_gamma2_y_derivative():
    a, x, y, h = 0.5, 1.0, 2.0, 1e-5
    fd = (gamma2(a, x, y + h).value - gamma2(a, x, y - h).value) / (2 * h)
    want = ((a + y) / y * gamma2(a, x, y).value
            - a / y * gamma_upper(a, x).value
            - x ** a * math.exp(-x) / (x + y))
    assert relerr(fd, want) < 1e-6


def test_gamma2_domain_errors():
    with pytest.raises(DomainError):
        gamma2(0.5, 1.0, -3.0)  # pole on the path
    with pytest.raises(DomainError):
        gamma2(-1.5, 0.0, 1.0)  # non-integrable at the origin


def test_gamma2_inf_sentinel():
    assert gamma2(0.5, math.inf, 1.0).value == 0.0


def test_gamma2_complex_y():
    a, x = 0.5, 1.0
    y = complex(-0.3, 1.7)
    want = mp_gamma2(a, x, y)
    assert relerr(gamma2(a, x, y).value, want) < 1e-11


@pytest.mark.parametrize("z", [complex(4.0, 0.5), complex(-6.0, 1.0), complex(-35.0, 3.0)])
def test_gamma2_diag_scaled(z):
    a = 0.75
    f = lambda tau: mp.e ** (-tau) * (z + tau) ** mp.mpf(a) / (2 * z + tau)
    want = complex(mp.quad(f, [0, abs(z.real), 2 * abs(z.real) + 5, 2 * abs(z.real) + 80]))
    assert relerr(gamma2_diag_scaled(a, z).value, want) < 1e-10


def test_error_estimates_are_finite_and_positive():
    r = gamma_upper(0.5, 2.0)
    assert r.est_abs_error >= 0.0 and math.isfinite(r.est_abs_error)
    r = gamma2(0.5, 1.0, 2.0)
    assert r.est_abs_error >= 0.0 and math.isfinite(r.est_abs_error)
