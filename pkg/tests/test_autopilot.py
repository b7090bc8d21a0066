import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asvkit.autopilot import (DEFAULT_PID, HeadingPID, PidGains, TransferFunction, closed_loop,
                              feedback, heading_pid_step, is_stable, nomoto_paper, open_loop, pid_transfer,
                              place_pid, poles, root_locus, series, step_response)


def tf(num, den):
    return TransferFunction(tuple(num), tuple(den))


# --- transfer functions -------------------------------------------------------

def test_transfer_function_invariants():
    with pytest.raises(ValueError):
        tf([1], [0, 0])
    with pytest.raises(ValueError):
        tf([1, 0, 0], [1, 1])
    assert tf([0, 1], [0, 2, 1]).den == (2.0, 1.0)


def test_nomoto_coefficients():
    g = nomoto_paper()
    assert g.num == (1.9103, 5.799)
    assert g.den == (0.3037, 0.7488, -1.0)
    assert g(0.0) == pytest.approx(-5.799)


def test_nomoto_poles_and_zero():
    p = sorted(poles(nomoto_paper()).real)
    assert p[0] == pytest.approx(-3.4265, abs=5e-4)
    assert p[1] == pytest.approx(0.9610, abs=5e-4)
    assert sum(r > 0 for r in p) == 1
    assert nomoto_paper().zeros()[0].real == pytest.approx(-3.0356, abs=5e-4)
    assert not is_stable(nomoto_paper())


@pytest.mark.parametrize("den,expected", [([1, 2, 1], [-1, -1]), ([1, 0, 1], [-1j, 1j]),
                                          ([1, 3, 2], [-2, -1]), ([2, 4], [-2]),
                                          ([1, 6, 11, 6], [-3, -2, -1])])
def test_poles_examples(den, expected):
    got = sorted(poles(tf([1], den)), key=lambda z: (z.real, z.imag))
    np.testing.assert_allclose(got, expected, atol=1e-9)


def test_poles_degree_zero_rejected():
    with pytest.raises(ValueError):
        poles(tf([1], [3]))


@pytest.mark.parametrize("den,stable", [([1, 3, 2], True), ([1, 0, 1], False), ([1, -1], False)])
def test_is_stable(den, stable):
    assert is_stable(tf([1], den)) is stable


def test_closed_loop_examples():
    assert closed_loop(tf([1], [1, 1]), PidGains(1, 0, 0)) == tf([1], [1, 2])
    zero = closed_loop(nomoto_paper(), PidGains(0, 0, 0, 0.1))
    assert zero.num == (0.0,)
    assert zero(1.3) == 0


def test_feedback_rejects_cancellation():
    with pytest.raises(ValueError):
        feedback(tf([-1], [1]))


def test_pid_transfer_matches_definition():
    g = PidGains(1.3, 0.7, 0.2, 0.05)
    c = pid_transfer(g)
    for s in (0.3 + 1j, 2.0, -0.5 + 3j):
        assert c(s) == pytest.approx(g.kp + g.ki / s + g.kd * s / (g.tf_derivative * s + 1))


def test_unfiltered_derivative_loop():
    g = PidGains(1.0, 0.5, 0.2)
    with pytest.raises(ValueError, match="improper"):
        pid_transfer(g)
    cl = closed_loop(tf([1], [1, 1, 0]), g)
    # L = (0.2 s^2 + s + 0.5) / (s^3 + s^2), so 1 + L has s^3 + 1.2 s^2 + s + 0.5 on top
    assert cl == tf([0.2, 1.0, 0.5], [1.0, 1.2, 1.0, 0.5])


def test_closed_loop_against_scipy():
    from scipy import signal

    loop = series(pid_transfer(DEFAULT_PID), nomoto_paper())
    cl = closed_loop(nomoto_paper(), DEFAULT_PID)
    ref = signal.TransferFunction(loop.num, np.polyadd(loop.den, loop.num))
    np.testing.assert_allclose(sorted(poles(cl), key=lambda z: (z.real, z.imag)),
                               sorted(ref.poles, key=lambda z: (z.real, z.imag)), rtol=1e-9)


def test_default_gains_come_from_placement():
    g = place_pid(nomoto_paper(), [-1.5 + 1j, -1.5 - 1j, -4])
    assert (g.kp, g.ki, g.kd) == pytest.approx((DEFAULT_PID.kp, DEFAULT_PID.ki, DEFAULT_PID.kd), abs=1e-4)
    unfiltered = closed_loop(nomoto_paper(), g)
    got = sorted(poles(unfiltered), key=lambda z: (z.real, z.imag))
    np.testing.assert_allclose(got, [-4, -1.5 - 1j, -1.5 + 1j], atol=1e-9)


def test_default_closed_loop_properties():
    cl = closed_loop(nomoto_paper(), DEFAULT_PID)
    assert is_stable(cl)
    assert max(poles(cl).real) <= -0.1
    r = step_response(cl, 20.0, 0.01)
    assert r.overshoot_pct <= 25.0
    assert r.settling_time <= 20.0
    assert r.final_value == pytest.approx(1.0)


# --- root locus ---------------------------------------------------------------

def test_root_locus_examples():
    (k, p), = root_locus(tf([1], [1, 1]), [1.0])
    assert k == 1.0 and p == pytest.approx([-2])
    for k, p in root_locus(tf([1], [1, 0, 0]), [0.5, 2.0, 9.0]):
        np.testing.assert_allclose(p, [-1j * math.sqrt(k), 1j * math.sqrt(k)], atol=1e-9)


def test_root_locus_stabilized_range_exists():
    loop = open_loop(nomoto_paper(), DEFAULT_PID)
    locus = root_locus(loop, np.logspace(-2, 2, 81))
    stable = [k for k, p in locus if np.all(p.real < 0)]
    assert stable and 1.0 >= min(stable)


def test_root_locus_rejects_bad_gains():
    with pytest.raises(ValueError):
        root_locus(tf([1], [1, 1]), [0.0, 1.0])
    with pytest.raises(ValueError):
        root_locus(tf([1], [1, 1]), [2.0, 1.0])


# --- step response ------------------------------------------------------------

def test_step_first_order():
    r = step_response(tf([1], [1, 1]), 5.0, 0.01)
    assert r.y[100] == pytest.approx(1 - math.exp(-1), abs=1e-8)
    np.testing.assert_allclose(r.y, 1 - np.exp(-r.t), atol=1e-8)
    assert r.rise_time == pytest.approx(math.log(9), abs=0.011)
    assert r.overshoot_pct == 0.0


def test_step_pure_gain():
    r = step_response(tf([1], [1]), 1.0, 0.1)
    np.testing.assert_array_equal(r.y, np.ones_like(r.t))
    assert np.all(np.diff(r.t) > 0)


def test_step_open_loop_diverges():
    r = step_response(nomoto_paper(), 5.0, 0.01)
    assert not r.stable and math.isnan(r.overshoot_pct)
    # y = A exp(0.961 t) + B exp(-3.43 t) + G(0); the fast mode is gone by t = 4
    g0 = nomoto_paper()(0.0).real
    growth = math.log((r.y[-1] - g0) / (r.y[-101] - g0)) / 1.0
    assert growth == pytest.approx(0.961, abs=0.01)


def test_step_second_order_overshoot():
    zeta, wn = 0.3, 2.0
    r = step_response(tf([wn**2], [1, 2 * zeta * wn, wn**2]), 20.0, 0.001)
    assert r.overshoot_pct == pytest.approx(100 * math.exp(-zeta * math.pi / math.sqrt(1 - zeta**2)), abs=0.05)


def test_step_arguments():
    with pytest.raises(ValueError):
        step_response(tf([1], [1, 1]), 1.0, 0.0)
    with pytest.raises(ValueError):
        step_response(tf([1], [1, 1]), 0.01, 0.1)


# --- discrete heading PID -----------------------------------------------------

def test_pid_zero_error():
    c = HeadingPID(PidGains(2, 1, 1, 0.1))
    assert c.step(0.3, 0.3, 0.01) == 0.0


def test_pid_pure_p():
    c = HeadingPID(PidGains(2.5, 0, 0))
    assert [c.step(0.4, 0.1, 0.01) for _ in range(5)] == [pytest.approx(0.75)] * 5


def test_pid_wraps_error():
    c = HeadingPID(PidGains(1, 0, 0))
    u = heading_pid_step(math.radians(179), math.radians(-179), c, 0.01)
    assert u == pytest.approx(math.radians(-2))


def test_pid_derivative_on_measurement_has_no_setpoint_kick():
    c = HeadingPID(PidGains(0, 0, 5, 0.05))
    c.step(0.0, 0.0, 0.01)
    assert c.step(1.0, 0.0, 0.01) == 0.0


def test_pid_derivative_ignores_wrap_jump():
    c = HeadingPID(PidGains(0, 0, 1, 0.0))
    c.step(0.0, math.pi - 0.001, 0.01)
    # crossing +-pi is a 0.002 rad move, not a 2 pi jump
    assert abs(c.step(0.0, -math.pi + 0.001, 0.01)) < 0.5


def test_pid_anti_windup():
    c = HeadingPID(PidGains(1, 5, 0), output_limit=1.0)
    for _ in range(1000):
        assert c.step(2.0, 0.0, 0.01) == 1.0
    # the integrator stopped charging while saturated, so recovery is immediate
    assert c.integral <= 1.0
    assert c.step(0.0, 0.0, 0.01) <= 1.0
    assert c.step(-0.5, 0.0, 0.01) < 0


def test_pid_reset():
    c = HeadingPID(PidGains(1, 1, 1, 0.1))
    c.step(1.0, 0.0, 0.1)
    c.step(1.0, 0.2, 0.1)
    c.reset()
    assert (c.integral, c.deriv, c.prev_meas) == (0.0, 0.0, None)


def test_pid_rejects_bad_arguments():
    with pytest.raises(ValueError):
        HeadingPID(PidGains(1, 0, 0), output_limit=0)
    with pytest.raises(ValueError):
        HeadingPID(PidGains(1, 0, 0)).step(0, 0, 0.0)
    with pytest.raises(ValueError):
        PidGains(1, 0, 0, -0.1)
    with pytest.raises(ValueError):
        PidGains(math.nan, 0, 0)


gains = st.floats(-100, 100, allow_nan=False)


@settings(max_examples=100)
@given(gains, gains, gains, st.floats(0, 1), st.floats(0.1, 50),
       st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=1, max_size=40))
def test_pid_output_saturated_and_error_bounded(kp, ki, kd, tfd, limit, history):
    c = HeadingPID(PidGains(kp, ki, kd, tfd), output_limit=limit)
    for ref, meas in history:
        from asvkit.rigid_body import wrap_angle
        assert abs(wrap_angle(ref - meas)) <= math.pi
        assert abs(c.step(ref, meas, 0.01)) <= limit
