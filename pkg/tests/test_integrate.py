import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dymlab.errors import SingularStateError
from dymlab.integrate import EventSpec, IntegratorConfig, integrate, integrate_two_sided, refine_event


def oscillator(s, y):
    return np.array([y[1], -y[0]])


def test_harmonic_oscillator_long_run():
    tr = integrate(oscillator, [1.0, 0.0], (0.0, 100.0))
    assert tr.termination == "reached-end"
    assert tr.s_final == 100.0
    np.testing.assert_allclose(tr.y_final, [math.cos(100), -math.sin(100)], atol=1e-8)


def test_dense_output_between_steps():
    tr = integrate(oscillator, [1.0, 0.0], (0.0, 10.0))
    q = np.linspace(0, 10, 777)
    np.testing.assert_allclose(tr(q)[:, 0], np.cos(q), atol=1e-9)
    assert tr(3.3)[1] == pytest.approx(-math.sin(3.3), abs=1e-9)


def test_against_dop853_on_a_nonlinear_system():
    def lorenzish(s, y):
        return np.array([np.sin(y[1]) - 0.3 * y[0], y[0] * np.cos(s) + 0.1 * y[2], -y[1] * y[0] * 0.2])

    y0 = [0.4, -0.2, 1.0]
    tr = integrate(lorenzish, y0, (0.0, 20.0), IntegratorConfig(rtol=1e-11, atol=1e-13))
    ref = solve_ivp(lorenzish, (0, 20), y0, method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True)
    q = np.linspace(0, 20, 101)
    assert np.max(np.abs(tr(q) - ref.sol(q).T)) < 1e-8


def test_backward_and_two_sided():
    tr = integrate(oscillator, [1.0, 0.0], (0.0, -5.0))
    np.testing.assert_allclose(tr.y_final, [math.cos(5), math.sin(5)], atol=1e-9)
    both = integrate_two_sided(oscillator, [1.0, 0.0], 0.0, (-3.0, 4.0))
    assert both.span == (-3.0, 4.0)
    assert np.all(np.diff(both.s) > 0)
    np.testing.assert_allclose(both(np.array([-3.0, 0.0, 4.0]))[:, 0], np.cos([-3, 0, 4]), atol=1e-9)
    assert both.terminations == ("reached-end", "reached-end")


def test_rk4_fourth_order():
    errs = []
    for h in (0.1, 0.05):
        tr = integrate(oscillator, [1.0, 0.0], (0.0, 2.0), IntegratorConfig(method="rk4", h=h))
        errs.append(abs(tr.y_final[0] - math.cos(2.0)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)


def test_blowup_detected():
    tr = integrate(lambda s, y: y * y, [1.0], (0.0, 2.0), IntegratorConfig(blowup_norm=1e6))
    assert tr.termination == "blow-up"
    assert tr.s_final == pytest.approx(1.0, abs=1e-5)


def test_singular_state_from_rhs():
    def f(s, y):
        if y[0] <= 0:
            raise SingularStateError("negative")
        return np.array([-0.5 / y[0]])

    tr = integrate(f, [1.0], (0.0, 3.0))
    assert tr.termination in ("singular-state", "step-underflow")
    assert tr.s_final == pytest.approx(1.0, abs=1e-3)


def test_stop_event_and_first_root_skipped():
    ev = EventSpec(lambda s, y: y[0], "falling", "stop", "zero")
    tr = integrate(oscillator, [0.0, 1.0], (0.0, 10.0), events=[ev])
    assert tr.termination == "event-stop"
    assert tr.message == "zero"
    assert tr.s_final == pytest.approx(math.pi, abs=1e-10)


def test_recorded_events_and_refine():
    ev = EventSpec(lambda s, y: y[0], "any", "record", "zero")
    tr = integrate(oscillator, [1.0, 0.0], (0.0, 10.0), events=[ev])
    got = [e.s for e in tr.events]
    np.testing.assert_allclose(got, [math.pi / 2, 3 * math.pi / 2, 5 * math.pi / 2], atol=1e-10)
    again = refine_event(tr, lambda s, y: y[0], "rising")
    np.testing.assert_allclose([e.s for e in again], [3 * math.pi / 2], atol=1e-10)


def test_invalid_config():
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=-1)
    with pytest.raises(ValueError):
        integrate(oscillator, [1.0, 0.0], (1.0, 1.0))
