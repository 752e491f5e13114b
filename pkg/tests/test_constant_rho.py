import math
from fractions import Fraction

import numpy as np
import pytest

from dymlab import constant_rho as cr
from dymlab.errors import DegenerateInputError, InvalidInputError

PHI = (1 + math.sqrt(5)) / 2


def test_critical_values():
    assert cr.rho_crit(1.0) == pytest.approx(1 / 3, rel=1e-15)
    assert cr.w_infinity(1.0, 0.7) == pytest.approx(1.9398109951577411, abs=1e-13)
    assert cr.w_infinity(1.0, cr.rho_crit(1.0)) == pytest.approx(math.pi, abs=1e-6)
    assert cr.p_infinity(1.0, 0.2) == pytest.approx(math.log(PHI), abs=1e-14)
    cc = cr.critical_constants(2.0, 0.5)
    assert math.pi / 2 < cc.W_inf <= math.pi and cc.P_inf is None
    cc = cr.critical_constants(2.0, 0.1)
    assert cc.W_inf is None and cc.P_inf > 0


def test_w_rhs_values():
    b = math.sqrt(1 / 0.09 - 1)
    assert cr.w_ode_delta0_rhs(0.0, 1.0, 0.3) == pytest.approx(0.3 * (3 + math.sqrt(1 + b * b)))
    assert abs(cr.w_ode_delta0_rhs(cr.w_infinity(1.0, 0.7), 1.0, 0.7)) < 1e-14
    W = np.linspace(0, 2 * math.pi, 2001)
    rho0 = 0.2
    b = cr.beta_of(1.0, rho0)
    assert np.min(cr.w_ode_delta0_rhs(W, 1.0, rho0)) == pytest.approx(rho0 * (math.sqrt(1 + b * b) - 3), rel=1e-6)


def test_rho1_delta0_family():
    s = np.array([0.0, 5.0, 10.0])
    fam = cr.closed_form_rho1_delta0(1.0, 0.0, s, c0=1.0)
    assert fam.z[0] == pytest.approx(1.0)
    assert fam.r[0] == pytest.approx(8.0 / 2.0)
    assert np.angle(fam.z[-1]) == pytest.approx(-math.pi / 4, abs=1e-8)
    assert fam.r[-1] < 1e-12
    with pytest.raises(InvalidInputError):
        cr.closed_form_rho1_delta0(1.0, 2.0, s)


def test_s1xs2():
    sol = cr.s1xs2_solution_delta0(1.0, 8.0, np.linspace(0, 10, 11))
    assert (sol.radius_s1, sol.radius_s2) == pytest.approx((1 / 9, 1 / 27), rel=1e-14)
    np.testing.assert_allclose(np.abs(sol.sample.z), 1 / 3, rtol=1e-14)
    np.testing.assert_allclose(sol.sample.r, 1 / 27, rtol=1e-14)


def test_period_and_f():
    lam = 1.0
    fs = []
    for rho0 in (0.2, 0.1, 0.05):
        pd = cr.period_and_f_delta0(lam, rho0)
        lo, hi = pd.bracket
        assert lo <= pd.T <= hi
        assert abs(pd.int_sin) < 1e-10
        fs.append(abs(pd.f))
    assert fs[0] > fs[1] > fs[2]
    with pytest.raises(InvalidInputError):
        cr.period_and_f_delta0(lam, 0.5)


def test_find_periodic_delta0_contract():
    lam = 1.0
    rho = cr.find_periodic_delta0(lam, -1, 4, (0.2, 0.32))
    pd = cr.period_and_f_delta0(lam, rho)
    assert pd.f == pytest.approx(-0.25, abs=1e-10)
    assert cr.delta0_closure_error(lam, rho, 4, pd.T) < 1e-5
    pert = rho * (1 + 1e-3)
    pdp = cr.period_and_f_delta0(lam, pert)
    assert cr.delta0_closure_error(lam, pert, 4, pdp.T) > 1e-4


def test_convergents():
    assert cr.convergents(math.pi, 120) == [Fraction(3), Fraction(22, 7), Fraction(333, 106), Fraction(355, 113)]
    assert all(f.denominator == 1 for f in cr.convergents(-0.3, 1))


def test_scan_knob_qmax_one():
    assert cr.scan_periodic_delta0(1.0, 0.02, 0.3, qmax=1, n_grid=6) == []


def test_desingularized_field():
    b = cr.beta_of(1.0, 0.2)
    for W in (0.3, 1.0, 2.5):
        np.testing.assert_allclose(cr.desingularized_field(0.0, W, b), [0.0, 2 * math.cos(W)], atol=1e-15)
    np.testing.assert_allclose(cr.desingularized_jacobian(0.0, math.pi / 2, b), [[2, 0], [b, -2]], atol=1e-12)
    np.testing.assert_allclose(cr.desingularized_jacobian(0.0, 1.5 * math.pi, b), [[-2, 0], [b, 2]], atol=1e-12)


def test_fixed_point_and_pcrit():
    assert cr.fixed_point_residual_deltapos(1.0, 0.2) < 1e-12
    for rho0 in (0.1, 0.2, 0.3):
        pc = cr.p_crit(1.0, rho0)
        assert pc.value > cr.p_infinity(1.0, rho0)
        assert abs(pc.value - pc.value_half) < 1e-4


def test_f1_f2_limits():
    lam, rho0 = 1.0, 0.2
    Pinf = cr.p_infinity(lam, rho0)
    Pc = cr.p_crit(lam, rho0).value
    near = cr.f1_f2_deltapos(lam, rho0, Pinf * (1 + 1e-5), Pc)
    T = cr.linearized_period(lam, rho0)
    assert near.T == pytest.approx(T, rel=1e-4)
    assert near.f1 == pytest.approx(-lam * rho0 * T * math.tanh(Pinf / 2) / (2 * math.pi), rel=1e-4)
    assert near.f2 == pytest.approx(-lam * rho0 * T / math.tanh(Pinf / 2) / (2 * math.pi), rel=1e-4)
    bounded = cr.f1_f2_deltapos(lam, rho0, 0.3, Pc)
    assert bounded.kind == "bounded" and bounded.closure < 1e-8 and bounded.winding in (1, -1)
    gaps = [abs(cr.f1_f2_deltapos(lam, rho0, P, Pc).f2 - cr.f1_f2_deltapos(lam, rho0, P, Pc).f1)
            for P in (2.0, 4.0)]
    assert gaps[1] < gaps[0]
    with pytest.raises(DegenerateInputError):
        cr.f1_f2_deltapos(lam, rho0, Pinf, Pc)


def test_rational_fixed_point():
    rf = cr.rational_fixed_point(1.0, 1, 4)
    assert rf.rho0 == pytest.approx(2 / math.sqrt(45), rel=1e-14)
    assert 1 / math.tanh(rf.P0) == pytest.approx(1.25, rel=1e-14)
    assert math.cosh(rf.P0 / 2) ** 2 == pytest.approx(4 / 3, rel=1e-14)
    t = np.array([0.0, 2 * math.pi])
    f = rf.fields_t(t)
    assert abs(f.z[1] - f.z[0]) < 1e-12 and abs(f.c[1] - f.c[0]) < 1e-12
    assert abs(rf.fields_t(np.array([math.pi / 2])).h[0] - f.h[0]) < 1e-12  # period 2 pi / 4
    rep = rf.report()
    assert not rep["reference_matches"]
    with pytest.raises(InvalidInputError):
        cr.rational_fixed_point(1.0, 2, 4)


def test_rho1_deltapos():
    s = np.linspace(-1, 1, 21)
    out = cr.closed_form_rho1_deltapos(1.0, 0.5, 0.0, s, fields=False)
    np.testing.assert_allclose(out.P, out.P[::-1], atol=1e-13)
    assert out.P[10] == pytest.approx(0.5) and out.P.min() == out.P[10]
    np.testing.assert_allclose(out.P, 0.5 * np.arccosh(math.cosh(1.0) * np.cosh(4 * s)), atol=1e-13)
    assert out.r[10] == pytest.approx(8 * math.tanh(0.5) / math.cosh(0.5))


def test_singular_branch():
    for sign in (1, -1):
        rep = cr.singular_branch_rho_gt1(1.0, 1.2, sign)
        assert math.isfinite(rep.s_singular)
        assert rep.min_W_rate > 0
        assert rep.sqrt_at_end < 1e-6


def test_orbit_classification():
    assert cr.classify_delta0(1.0, 1.2, 0.0).tag == "singular"
    assert cr.classify_delta0(1.0, 0.2, 0.0).tag == "drift-periodic"
    assert cr.classify_delta0(1.0, 0.7, cr.w_infinity(1.0, 0.7)).tag == "constant-fixed-point"
    assert cr.classify_delta0(1.0, 0.7, 0.0).tag == "separatrix-stable"
