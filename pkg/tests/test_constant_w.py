import math

import numpy as np
import pytest

from dymlab import constant_w as cw
from dymlab.constant_rho import rho_crit
from dymlab.errors import InvalidInputError, SingularStateError


def test_params():
    p = cw.ConstantWParams.make(1.0, math.pi)
    assert p.alpha == pytest.approx(9.0) and abs(p.beta) < 1e-15
    q = cw.ConstantWParams.make(2.0, 2.0, gap=True)
    assert q.alpha > 1 and 0 <= q.beta <= 2.0 and q.mu == pytest.approx(-math.tan(2.0))
    with pytest.raises(InvalidInputError):
        cw.ConstantWParams.make(1.0, 1.0)


def test_x_rhs():
    assert cw.x_rhs_delta0(2.0, 0.0, 0.4, 2.0) == (0.0, 0.0)
    assert cw.x_rhs_delta0(5.0, 0.7, 0.0, 2.0) == pytest.approx((0.7, 6.0))
    with pytest.raises(SingularStateError):
        cw.x_rhs_delta0(0.0, 1.0, 0.2, 2.0)


def test_normal_flux_spot_checks(rng):
    beta, alpha = math.sqrt(7 / 8), 2.0
    for _ in range(5):
        x = alpha + rng.uniform(0.1, 4)
        nu = rng.uniform(-3, 3)
        y = nu * (x - alpha)
        F = np.array(cw.x_rhs_delta0(x, y, beta, alpha))
        assert F @ np.array([nu, -1.0]) == pytest.approx(-float(cw.normal_flux(x, nu, beta, alpha)) * -1, rel=1e-12)


def test_saddle():
    sd = cw.saddle_data(0.0, 9.0)
    assert (sd.mu_plus, sd.mu_minus) == pytest.approx((math.sqrt(2), -math.sqrt(2)))
    b = math.sqrt(7 / 8)
    sd = cw.saddle_data(b, 2.0)
    r = math.sqrt(7 / 16)
    assert sd.mu_plus == pytest.approx(-r + math.sqrt(7 / 16 + 2), abs=1e-15)
    assert sd.mu_minus == pytest.approx(-r - math.sqrt(7 / 16 + 2), abs=1e-15)
    assert sd.mu_minus < 0 < sd.mu_plus < sd.nu_plus


def test_classification():
    b, a = math.sqrt(7 / 8), 2.0
    assert cw.classify_orbit_delta0(a, 0.0, b, a).tag == "constant-fixed-point"
    assert cw.classify_orbit_delta0(3.0, 0.0, b, a).tag == "global-bounded"
    assert cw.classify_orbit_delta0(3.0, -6.0, b, a).tag == "singular"


def test_region_invariance(rng):
    b, a = math.sqrt(7 / 8), 2.0
    assert all(cw.region_invariance_D_plus(b, a, cw.sample_D_plus(a, 5, rng)))


def test_w0pi_delta0_cases():
    lam = 1.0
    rc = rho_crit(lam)
    s = np.linspace(-5, 5, 101)
    out = cw.closed_form_W0pi_delta0(lam, rc, 0.0, s)
    np.testing.assert_allclose(out.rho, rc, rtol=1e-12)
    # boundary case: r0 U0 = rho0 gap / sqrt 2 with the sign that approaches rho_crit forward
    rho0, n2 = 0.2, 2.0
    r0 = 8 * lam * rho0 ** 3 / n2
    gap = 1 - rho0 ** 2 / rc ** 2
    U0 = rho0 * gap / (math.sqrt(2) * r0)
    sgn = None
    for sign in (1, -1):
        o = cw.closed_form_W0pi_delta0(lam, rho0, sign * U0, np.array([-10.0, -5.0, 10.0]), fields=False)
        if abs(o.rho[2] - rc) < 1e-6:
            sgn = sign
            assert o.rho[0] < 1e-3 and o.rho[0] < o.rho[1]
    assert sgn is not None
    inner = cw.closed_form_W0pi_delta0(lam, 0.25, 0.0, np.array([10.0, 12.0]))
    rate = math.log(inner.sample.r[0] / inner.sample.r[1]) / 2
    assert rate == pytest.approx(3 / math.sqrt(2), rel=1e-6)


def test_deltapos_fixed_point_and_chart(rng):
    lam, P0 = 1.0, 0.8
    a = cw.ConstantWParams.make(lam, math.pi, gap=True).alpha
    xeq = 1 + 4 * lam ** 2 * (1 + 1 / math.tanh(P0) ** 2)
    d = cw.x_rhs_deltapos(xeq, 0.0, P0, 0.0, a)
    assert abs(d[1]) < 1e-12 and d[2] == 0
    p = cw.ConstantWParams.make(lam, 2.4, gap=True)
    for _ in range(5):
        x, y, P = rng.uniform(1, 20), rng.uniform(-3, 3), rng.uniform(0.2, 2)
        dx, dy, dP = cw.x_rhs_deltapos(x, y, P, p.beta, p.alpha)
        Q, z = cw.q_zeta(x, y, P, p.alpha)
        sh, ch = math.sinh(P), math.cosh(P)
        dQ = 0.5 * dy * sh + 0.5 * y * ch * dP
        dxc = -2 * (p.alpha - 1) * ch / sh ** 3 * dP
        dz = (dx - dxc) * sh + (x - cw.x_crit(P, p.alpha)) * ch * dP
        got = cw.q_zeta_rhs(Q, z, P, p.beta, p.alpha)
        assert got[0] == pytest.approx(dQ, rel=1e-10, abs=1e-10)
        assert got[1] == pytest.approx(dz, rel=1e-10, abs=1e-10)


def test_blowup_threshold_and_L():
    lam, W0, P0 = 1.0, math.pi - 0.4, 1.0
    th = cw.blowup_bound_deltapos(lam, W0, P0)
    a_pi = cw.ConstantWParams.make(lam, math.pi, gap=True).alpha
    assert cw.blowup_bound_deltapos(lam, math.pi, P0) == pytest.approx((2 * a_pi - 1) ** -0.5, rel=1e-12)
    tr = cw.run_x_deltapos(lam, W0, 1.1 * th, P0, 50.0)
    assert tr.termination == "event-stop" and tr.message == "x->0"
    p = cw.ConstantWParams.make(lam, W0, gap=True)
    s = np.linspace(0, 0.95 * tr.s_final, 60)
    u = tr(s)
    L = cw.L_value(u[:, 0], u[:, 1], u[:, 2], p.beta, p.alpha)
    assert np.all(np.diff(np.exp(-math.sqrt(2) * s) * L) <= 1e-12)


def test_comparison_solution(rng):
    for mu in (0.5, 1.0, 2.0):
        Q0, z0 = rng.uniform(-1, 1, 2)
        cs = cw.comparison_solution(Q0, z0, mu, 3.0, 0.7)
        assert cs.zeta(0.0) == pytest.approx(z0, abs=1e-13)
        assert cs.Q(0.0) == pytest.approx(Q0, abs=1e-13)
        h = 1e-5
        dQ = (cs.Q(h) - cs.Q(-h)) / (2 * h)
        assert dQ == pytest.approx(cs.zeta(0.0), abs=1e-7)
    cs = cw.comparison_solution(0.0, 0.3, 0.5, 3.0, 0.7)
    if cs.c2 <= 0:
        assert np.all(cs.zeta(np.linspace(-20, 0, 201)) >= 0)
    with pytest.raises(InvalidInputError):
        cw.global_bound_deltapos(1.0, math.pi - math.atan(1.5), 1.0)
