import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bhgap.params import DomainError, SingularMatrixError
from bhgap.plinalg import Precision, det, pfaffian, solve


def random_skew(n, rng, iscomplex=False):
    a = rng.standard_normal((n, n))
    if iscomplex:
        a = a + 1j * rng.standard_normal((n, n))
    return a - a.T


def test_det_empty_is_one():
    assert det(np.zeros((0, 0))) == 1.0


def test_det_diag():
    assert abs(det(np.diag([2.0, 3.0])) - 6.0) < 1e-14


def test_det_undeformed_moment_2x2():
    # M_jk = Gamma(j+1)Gamma(k+1)/(j+k+1) at a=b=0: det = 1*(1/3) - (1/2)^2 = 1/12
    m = np.array([[1.0, 0.5], [0.5, 1.0 / 3.0]])
    assert abs(det(m) - 1.0 / 12.0) < 1e-15
    # extended mode is exact up to the float64 rounding of the stored 1/3
    assert abs(det(m, Precision.EXTENDED) - 1.0 / 12.0) < 5e-17


def test_pfaffian_2x2():
    c = 3.7
    assert abs(pfaffian(np.array([[0.0, c], [-c, 0.0]])) - c) < 1e-14


def test_pfaffian_block_4x4():
    a, b = 2.5, -1.25
    m = np.zeros((4, 4))
    m[0, 1], m[1, 0] = a, -a
    m[2, 3], m[3, 2] = b, -b
    assert abs(pfaffian(m) - a * b) < 1e-14


def test_pfaffian_rejects_odd_and_asym():
    with pytest.raises(DomainError):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(DomainError):
        pfaffian(np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.mark.parametrize("precision", [Precision.STANDARD, Precision.EXTENDED])
@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_pf_squared_is_det(n, precision):
    rng = np.random.default_rng(1234 + n)
    m = random_skew(n, rng)
    pf = pfaffian(m, precision)
    d = det(m, precision)
    assert abs(pf * pf - d) <= 1e-11 * abs(d)


def test_pf_squared_is_det_complex():
    rng = np.random.default_rng(7)
    m = random_skew(6, rng, iscomplex=True)
    pf = pfaffian(m)
    d = det(m)
    assert abs(pf * pf - d) <= 1e-12 * abs(d)


def test_pfaffian_sign_tracked():
    # canonical 2x2 blocks with known sign, shuffled by a similarity permutation
    rng = np.random.default_rng(5)
    m = np.zeros((6, 6))
    vals = [1.0, -2.0, 3.0]
    for i, v in enumerate(vals):
        m[2 * i, 2 * i + 1], m[2 * i + 1, 2 * i] = v, -v
    perm = rng.permutation(6)
    p = np.eye(6)[perm]
    sign = np.linalg.det(p)
    got = pfaffian(p @ m @ p.T)
    assert abs(got - sign * np.prod(vals)) < 1e-12


@given(st.integers(2, 5).map(lambda k: 2 * k))
@settings(max_examples=20, deadline=None)
def test_det_multiplicative(n):
    rng = np.random.default_rng(n)
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    lhs = det(a @ b)
    rhs = det(a) * det(b)
    assert abs(lhs - rhs) <= 1e-11 * max(abs(lhs), abs(rhs))


def test_solve_identity_and_scalar():
    rhs = np.array([1.0, -2.0, 3.0])
    assert np.allclose(solve(np.eye(3), rhs), rhs)
    assert np.allclose(solve(np.array([[4.0]]), np.array([2.0])), [0.5])


def test_solve_monic_p2_vs_bordered_determinant():
    # undeformed a=b=0 moments; monic p2 coefficients from the linear system
    # must match the bordered-determinant cofactor expansion
    M = np.array([[math.gamma(j + 1) * math.gamma(k + 1) / (j + k + 1)
                   for k in range(3)] for j in range(3)])
    c = solve(M[:2, :2].T, -M[2, :2])
    z2 = np.linalg.det(M[:2, :2])
    cof = []
    for j in range(3):
        rows = [r for r in range(3) if r != j]
        cof.append((-1) ** (j + 2) * np.linalg.det(M[np.ix_(rows, [0, 1])]) / z2)
    assert np.allclose(np.append(c, 1.0), cof, rtol=1e-12)


def test_solve_residual_contract():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((6, 6))
    b = rng.standard_normal(6)
    x = solve(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)
    xe = solve(a, b, Precision.EXTENDED)
    assert np.linalg.norm(a @ xe - b) <= 1e-12 * np.linalg.norm(b)


def test_solve_singular_raises_with_cond():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError):
        solve(a, np.array([1.0, 1.0]))


def test_complex_solve_and_det():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    b = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    x = solve(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-11 * np.linalg.norm(b)
    assert isinstance(det(a), complex)


def test_extended_mode_beats_float_on_vandermonde():
    # nodes k/8 are exact in binary, so the reference product is exact too
    from fractions import Fraction

    n = 9
    nodes = [Fraction(k, 8) for k in range(n)]
    v = np.vander([float(x) for x in nodes], increasing=True)
    exact = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            exact *= nodes[j] - nodes[i]
    exact = float(exact)
    err_dd = abs(det(v, Precision.EXTENDED) - exact) / abs(exact)
    err_f = abs(det(v) - exact) / abs(exact)
    assert err_dd < 1e-14
    assert err_dd <= err_f
