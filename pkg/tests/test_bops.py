import math

import mpmath as mp
import numpy as np
import pytest

from bhgap.bimoments import alpha_moment, bimoment
from bhgap.bops import (
    assoc1,
    build_state,
    eval_bundle,
    inner_product,
    intertwined,
    poly_coeffs,
    recurrence_coeffs,
    stieltjes_f1,
    undeformed_reference,
    zdet,
)
from bhgap.params import INF, DeformPoint, DomainError, ModelParams

mp.mp.dps = 25

P = ModelParams(m=2, a=0.0, b=1.0, xi=1.0, psi=1.0)
D = DeformPoint(1.0, 1.0)
P0 = ModelParams(m=2, a=0.0, b=0.0, xi=0.0, psi=0.0)
DINF = DeformPoint(INF, INF)


def coeff_arrays(p, d, n):
    return poly_coeffs(p, d, n, "x"), poly_coeffs(p, d, n, "y")


def test_undeformed_n0_basics():
    st = build_state(P0, DINF, 0)
    assert abs(st.S_triple[1] - 1.0) < 1e-14
    assert abs(st.pi_triple[1] - 1.0) < 1e-13
    assert abs(st.eta_triple[1] - 1.0) < 1e-13
    assert abs(st.Xnn - 0.5) < 1e-13


def test_undeformed_pi_eta_product():
    for a, b in [(-0.5, 0.0), (0.0, 0.0), (1.5, 0.3)]:
        p = ModelParams(m=2, a=a, b=b, xi=0.0, psi=0.0)
        for n in range(4):
            st = build_state(p, DINF, n)
            want = 2 * n + a + b + 1
            assert abs(st.pi_triple[1] * st.eta_triple[1] - want) < 1e-10 * want


def test_undeformed_s_ratio():
    st = build_state(P0, DINF, 0)
    assert abs((st.S_triple[2] / st.S_triple[1]) ** 2 - 12.0) < 1e-10


def test_undeformed_closed_forms_match():
    for a, b in [(-0.5, 0.0), (0.0, 0.0), (1.5, 0.3)]:
        ref = undeformed_reference(5, a, b)
        p = ModelParams(m=2, a=a, b=b, xi=0.0, psi=0.0)
        for n in range(6):
            st = build_state(p, DINF, n)
            assert abs(st.pi_triple[1] - ref["pi"][n]) <= 1e-9 * abs(ref["pi"][n])
            assert abs(st.eta_triple[1] - ref["eta"][n]) <= 1e-9 * abs(ref["eta"][n])
            assert abs(st.Xnn - ref["X"][n]) <= 1e-9 * abs(ref["X"][n])
            assert abs(st.Ynn - ref["Y"][n]) <= 1e-9 * abs(ref["Y"][n])
            assert abs(st.S_triple[1] - ref["S"][n]) <= 1e-9 * abs(ref["S"][n])


def test_orthonormality():
    for j in range(6):
        cj = poly_coeffs(P, D, j, "x")
        for k in range(6):
            ck = poly_coeffs(P, D, k, "y")
            ip = inner_product(P, D, cj, ck)
            assert abs(ip - (1.0 if j == k else 0.0)) <= 1e-9


def test_xy_constraint_on_state():
    st = build_state(P, D, 2)
    assert abs(st.Xnn + st.Ynn - st.pi_triple[1] * st.eta_triple[1]) < 1e-11


def test_rank_one_operator_identity():
    # (X + Y^T)_{jk} = pi_j eta_k via moment bilinears
    for j in range(4):
        cj = poly_coeffs(P, D, j, "x")
        stj = build_state(P, D, j)
        for k in range(4):
            ck = poly_coeffs(P, D, k, "y")
            stk = build_state(P, D, k)
            xjk = inner_product(P, D, cj, ck, xshift=1)
            ykj = inner_product(P, D, cj, ck, yshift=1)
            want = stj.pi_triple[1] * stk.eta_triple[1]
            assert abs(xjk + ykj - want) <= 1e-9 * max(abs(want), 1.0)


def test_recurrence_coefficient_formulas():
    st = build_state(P, D, 1)
    (r2, r1, r0, rm1), (s2, s1, s0, sm1) = recurrence_coeffs(st)
    st2 = build_state(P, D, 2)
    # r_{n,2} = S_{n+1}/(S_{n+2} pi_{n+1})
    assert abs(r2 - st2.S_triple[1] / (st2.S_triple[2] * st.pi_triple[2])) < 1e-11
    # s_{n,-1} = (pi_n/eta_n) r_{n,-1}
    assert abs(sm1 - st.pi_triple[1] / st.eta_triple[1] * rm1) < 1e-13


@pytest.mark.parametrize("x", [0.3, 1.7])
def test_four_term_recurrence_pointwise(x):
    for n in range(1, 5):
        st = build_state(P, D, n)
        (r2, r1, r0, rm1), _ = recurrence_coeffs(st)
        pc = [poly_coeffs(P, D, n + d, "x") for d in (-1, 0, 1, 2)]
        vals = [np.polynomial.polynomial.polyval(x, c) for c in pc]
        lhs = x * (vals[2] / st.pi_triple[2] - vals[1] / st.pi_triple[1])
        rhs = r2 * vals[3] + r1 * vals[2] + r0 * vals[1] + rm1 * vals[0]
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-9 * scale


def test_q_recurrence_pointwise():
    y = 0.9
    for n in range(1, 4):
        st = build_state(P, D, n)
        _, (s2, s1, s0, sm1) = recurrence_coeffs(st)
        qc = [poly_coeffs(P, D, n + d, "y") for d in (-1, 0, 1, 2)]
        vals = [np.polynomial.polynomial.polyval(y, c) for c in qc]
        lhs = y * (vals[2] / st.eta_triple[2] - vals[1] / st.eta_triple[1])
        rhs = s2 * vals[3] + s1 * vals[2] + s0 * vals[1] + sm1 * vals[0]
        assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), 1.0)


def test_second_order_difference_equation():
    # (x - X_nn) P_n - (S_n/S_n+1) P_n+1 + (S_n-1/S_n) P_n-1 + pi_n hatP_{n-1} = 0
    x = 1.234
    for n in range(1, 5):
        st = build_state(P, D, n)
        stm = build_state(P, D, n - 1)
        hat_prev = intertwined(stm, "hatP", x)
        val = ((x - st.Xnn) * st.p_polys[1](x)
               - st.S_triple[1] / st.S_triple[2] * st.p_polys[2](x)
               + (st.S_triple[0] / st.S_triple[1] if n else 0.0) * (st.p_polys[0](x) if n else 0.0)
               + st.pi_triple[1] * hat_prev)
        assert abs(val) <= 1e-9 * max(abs(st.p_polys[2](x)), 1.0)


def test_subleading_coefficient_sum():
    # S_{n+1,n}/S_{n+1} = -sum_{l<=n} X_ll
    for n in range(3):
        c = poly_coeffs(P, D, n + 1, "x")
        got = c[-2] / c[-1]
        want = -sum(build_state(P, D, l).Xnn for l in range(n + 1))
        assert abs(got - want) <= 1e-9 * max(abs(want), 1.0)


def test_stieltjes_f1_closed_form_at_a0():
    # xi = 0, a = 0: f1(-t) = -e^t Gamma(0, t)
    p = ModelParams(m=2, a=0.0, b=0.0, xi=0.0, psi=0.0)
    t = 1.3
    want = -math.exp(t) * float(mp.gammainc(0, t, mp.inf))
    assert abs(stieltjes_f1(-t, p, D) - want) <= 1e-12 * abs(want)


def test_stieltjes_f1_deformed_vs_quadrature():
    p = ModelParams(m=2, a=0.5, b=0.0, xi=1.0, psi=0.0)
    d = DeformPoint(1.0, 1.0)
    z = -2.0
    f = lambda x: x ** mp.mpf(p.a) * mp.e ** (-x) / (z - x)
    want = complex(mp.quad(f, [0, d.s, 50]) - p.xi * mp.quad(f, [d.s, 50])).real
    assert abs(stieltjes_f1(z, p, d) - want) <= 1e-10 * abs(want)


def test_stieltjes_rejects_support():
    with pytest.raises(DomainError):
        stieltjes_f1(0.5, P, D)


def test_assoc1_constant_poly():
    st = build_state(P, D, 0)
    z = -1.1
    got = assoc1(st.p_polys[1], z, P, D, "x")
    want = st.p_polys[1].coeffs[0] * stieltjes_f1(z, P, D)
    assert abs(got - want) <= 1e-13 * abs(want)


def test_assoc1_vs_quadrature():
    p0 = ModelParams(m=2, a=0.0, b=0.0, xi=0.0, psi=0.0)
    st = build_state(p0, DINF, 2)
    z = -1.0
    got = assoc1(st.p_polys[1], z, p0, DINF, "x")
    c = st.p_polys[1].coeffs
    f = lambda x: (c[0] + c[1] * x + c[2] * x * x) * mp.e ** (-x) / (z - x)
    want = complex(mp.quad(f, [0, 50])).real
    assert abs(got - want) <= 1e-11 * abs(want)


def test_assoc1_large_z_asymptote():
    st = build_state(P, D, 2)
    z = -1e4
    got = assoc1(st.p_polys[1], z, P, D, "x") * z
    assert abs(got - st.pi_triple[1]) <= 1e-3 * abs(st.pi_triple[1])


def test_intertwined_sum_forms():
    st = build_state(P, D, 2)
    for z in (0.4, 2.2):
        hat_sum = -sum(build_state(P, D, l).eta_triple[1]
                       * poly_value(P, D, l, z, "x") for l in range(3))
        assert abs(intertwined(st, "hatP", z) - hat_sum) <= 1e-10 * max(abs(hat_sum), 1.0)
        chk_sum = -sum(build_state(P, D, l).pi_triple[1]
                       * poly_value(P, D, l, z, "y") for l in range(3))
        assert abs(intertwined(st, "checkQ", z) - chk_sum) <= 1e-10 * max(abs(chk_sum), 1.0)


def poly_value(p, d, n, z, species):
    c = poly_coeffs(p, d, n, species)
    return np.polynomial.polynomial.polyval(z, c)


def test_intertwined_assoc_sum_form():
    # the Cauchy transform of hatP_n is -sum eta_l P1_l and coincides with the
    # three-term substitution value (unit included)
    st = build_state(P, D, 2)
    z = -1.3
    hat1_sum = -sum(build_state(P, D, l).eta_triple[1]
                    * assoc1(poly_coeffs(P, D, l, "x"), z, P, D, "x") for l in range(3))
    got = intertwined(st, "hatP1", z)
    assert abs(got - hat1_sum) <= 1e-10 * max(abs(hat1_sum), 1.0)


def test_checkq0_single_term():
    st = build_state(P, D, 0)
    y = 0.7
    got = intertwined(st, "checkQ", y)
    want = -st.pi_triple[1] * st.q_polys[1](y)
    assert abs(got - want) <= 1e-11 * max(abs(want), 1.0)


def test_undeformed_a_b_halfint_state():
    p = ModelParams(m=2, a=-0.5, b=1.5, xi=0.0, psi=0.0)
    st = build_state(p, DINF, 3)
    ref = undeformed_reference(3, p.a, p.b)
    assert abs(st.pi_triple[1] * st.eta_triple[1] - ref["pi_eta"][3]) < 1e-9 * ref["pi_eta"][3]


def test_zdet_positive_region():
    assert zdet(P, D, 0) == 1.0
    assert zdet(P, D, 3) > 0


def test_eval_bundle_contents():
    st = build_state(P, D, 2)
    eb = eval_bundle(st)
    assert eb.p[1] == pytest.approx(st.p_polys[1](D.s))
    assert eb.q1[1] == pytest.approx(assoc1(st.q_polys[1], -D.s, P, D, "y"))
    assert eb.X == st.Xnn and eb.Y == st.Ynn
