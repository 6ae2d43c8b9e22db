import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfalos.guidance import (
    GuidanceParams,
    GuidanceState,
    adaptation_rate,
    alos_step,
    desired_speed,
    ilos_step,
    los_heading,
    radius_offset,
    straight_vfalos_step,
    tlos_delta,
    vector_field_radius,
    vfalos_step,
)
from vfalos.vessel import ConfigError

P = GuidanceParams()
DT = 0.1
err = st.floats(-1e4, 1e4, allow_nan=False)


def test_los_heading_examples():
    d = 4.0
    assert los_heading(0.0, 0.0, d) == 0.0
    assert los_heading(0.0, d, d) == pytest.approx(-math.pi / 4, abs=1e-15)
    # arctan(-sqrt 3) = -pi/3
    assert los_heading(math.pi / 2, -d * math.sqrt(3), d) == pytest.approx(
        math.pi / 2 + math.pi / 3, rel=1e-12
    )


def test_alos_rate_examples():
    _, s = alos_step(0.1, 0.0, GuidanceState("alos", beta_hat=0.05), P, DT)
    assert s.beta_hat == 0.05
    assert adaptation_rate(1e12, 3.0, 0.2) == pytest.approx(0.2 * 3.0, rel=1e-12)
    assert adaptation_rate(2.0, 2.0, 0.1) == pytest.approx(0.1 * 4 / math.sqrt(8), rel=1e-12)
    assert adaptation_rate(2.0, 2.0, 0.1) == pytest.approx(0.141421, abs=5e-7)


def test_alos_step_heading_and_euler_update():
    p = P.with_(lookahead_delta=2.0, adaptation_gain_gamma=0.1)
    psi_d, s = alos_step(0.3, 2.0, GuidanceState("alos", beta_hat=0.02), p, 0.5)
    assert psi_d == pytest.approx(0.3 - 0.02 - math.pi / 4, rel=1e-12)
    assert s.beta_hat == pytest.approx(0.02 + 0.5 * 0.4 / math.sqrt(8), rel=1e-12)


def test_beta_hat_is_clamped():
    p = P.with_(beta_max=0.1, adaptation_gain_gamma=10.0)
    _, s = alos_step(0.0, 100.0, GuidanceState("alos", beta_hat=0.09), p, 1.0)
    assert s.beta_hat == 0.1


@given(err, st.floats(0.1, 100), st.floats(1e-3, 10))
def test_adaptation_rate_bounded(e, delta, gain):
    assert abs(adaptation_rate(e, delta, gain)) <= gain * delta * (1 + 1e-15)


@given(st.floats(-math.pi, math.pi), err, st.floats(-0.5, 0.5))
def test_heading_correction_below_right_angle(gamma_p, y_e, bh):
    psi_d, _ = alos_step(gamma_p, y_e, GuidanceState("alos", beta_hat=bh), P, DT)
    diff = math.remainder(psi_d - (gamma_p - bh), 2 * math.pi)
    assert abs(diff) < math.pi / 2


@given(st.floats(1e-3, 1e3), st.floats(0.01, 100))
def test_los_steers_back_toward_path(y_e, scale):
    # positive y_e: desired heading rotated negatively from the tangent, and vice versa
    delta = 5.0
    right = los_heading(0.0, y_e, delta)
    left = los_heading(0.0, -y_e, delta)
    assert right < 0 < left
    assert math.copysign(1, los_heading(0.0, y_e * scale, delta * scale)) == math.copysign(1, right)


def test_vector_field_radius_examples():
    p = P.with_(vf_k=1.0, vf_r_min=10.0)
    expected = math.atan(10.0) * (2 / math.pi) * 10.0
    assert vector_field_radius(10.0, p) == pytest.approx(expected, rel=1e-12)
    assert vector_field_radius(10.0, p) == pytest.approx(9.3655, abs=5e-5)
    assert 1e6 - vector_field_radius(1e6, p) < 1e-5
    with pytest.raises(ValueError):
        vector_field_radius(9.0, p)


@given(st.floats(8.0, 1e5), st.floats(1e-3, 1e-2))
def test_vector_field_radius_monotone_and_inside(r, bump):
    r2 = r * (1 + bump)
    rv, rv2 = vector_field_radius(r, P), vector_field_radius(r2, P)
    assert rv < r
    assert rv2 > rv
    assert radius_offset(r2, P) < radius_offset(r, P)
    assert radius_offset(r, P) == pytest.approx(r - rv, rel=1e-9, abs=1e-9)


def test_vfalos_examples():
    p = P.with_(lookahead_delta=3.0)
    r = 20.0
    rv = vector_field_radius(r, p)
    psi_d, s = vfalos_step(0.7, rv, r, GuidanceState(), p, DT)
    assert psi_d == pytest.approx(0.7 - math.pi / 2, rel=1e-12)
    assert s.beta_hat == 0.0
    psi_d, _ = vfalos_step(0.0, rv + 3.0, r, GuidanceState(), p, DT)
    assert psi_d == pytest.approx(-math.pi / 2 - math.pi / 4, rel=1e-12)


def test_vfalos_clockwise_mirrors_counterclockwise():
    r = 20.0
    rv = vector_field_radius(r, P)
    psi_ccw, s_ccw = vfalos_step(0.4, rv + 1.5, r, GuidanceState(), P, DT, "ccw")
    psi_cw, s_cw = vfalos_step(0.4, rv + 1.5, r, GuidanceState(), P, DT, "cw")
    assert psi_ccw == pytest.approx(0.4 - math.pi / 2 - math.atan(1.5 / P.lookahead_delta))
    assert psi_cw == pytest.approx(0.4 + math.pi / 2 + math.atan(1.5 / P.lookahead_delta))
    assert s_cw.beta_hat == pytest.approx(-s_ccw.beta_hat)


@pytest.mark.parametrize("direction", ["ccw", "cw"])
def test_vfalos_equals_unified_form(direction):
    r, d, gamma_c = 25.0, 27.3, 1.1
    sign = 1 if direction == "ccw" else -1
    gamma_p = gamma_c - sign * math.pi / 2
    y_e = sign * (d - r)
    st0 = GuidanceState(beta_hat=0.07)
    a = vfalos_step(gamma_c, d, r, st0, P, DT, direction)
    b = straight_vfalos_step(gamma_p, y_e, sign * radius_offset(r, P), st0, P, DT)
    assert math.cos(a[0] - b[0]) == pytest.approx(1.0, abs=1e-14)
    assert a[1].beta_hat == pytest.approx(b[1].beta_hat, rel=1e-12)


def test_straight_vfalos_examples():
    st0 = GuidanceState(beta_hat=0.1)
    assert straight_vfalos_step(0.2, 1.3, 0.0, st0, P, DT) == alos_step(0.2, 1.3, st0, P, DT)
    psi_d, _ = straight_vfalos_step(0.2, -0.5, 0.5, st0, P, DT)
    assert psi_d == pytest.approx(0.2 - 0.1)
    p = P.with_(lookahead_delta=2.0)
    psi_d, _ = straight_vfalos_step(0.0, 1.0, 1.0, GuidanceState(), p, DT)
    assert psi_d == pytest.approx(-math.pi / 4)


def test_ilos_examples():
    psi_d, s = ilos_step(0.4, 0.0, GuidanceState("vfilos"), P, DT)
    assert psi_d == 0.4 and s.integral_state == 0.0
    s = GuidanceState("vfilos")
    prev = s.integral_state
    for _ in range(50):
        _, s = ilos_step(0.0, 2.0, s, P, DT)
        assert s.integral_state > prev
        prev = s.integral_state


def test_ilos_anti_windup():
    p = P.with_(integral_limit=0.5)
    s = GuidanceState("vfilos")
    for _ in range(1000):
        _, s = ilos_step(0.0, 50.0, s, p, 1.0)
        assert abs(s.integral_state) <= 0.5


def test_tlos_delta():
    assert tlos_delta(0.0, P) == P.delta_max
    assert tlos_delta(1e6, P) == pytest.approx(P.delta_min)


@given(st.floats(0, 1e3), st.floats(0, 1e3))
def test_tlos_delta_monotone(a, b):
    lo, hi = sorted((a, b))
    assert tlos_delta(lo, P) >= tlos_delta(hi, P)
    assert P.delta_min <= tlos_delta(hi, P) <= P.delta_max


def test_desired_speed_examples():
    p = P
    assert desired_speed(0.0, 0.0, p) == p.u_max + p.u_min
    assert desired_speed(p.y_max, 0.0, p) == p.u_min
    assert desired_speed(-p.y_max / 2, p.chi_max / 2, p) == pytest.approx(p.u_min, abs=1e-12)


def test_desired_speed_wraps_course_error():
    assert desired_speed(0.0, 2 * math.pi + 0.1, P) == pytest.approx(desired_speed(0.0, 0.1, P))


@given(err, st.floats(-10, 10), st.floats(0, 5), st.floats(0, 1))
def test_desired_speed_bounds_and_monotone(y, chi, dy, dchi):
    u = desired_speed(y, chi, P)
    assert P.u_min <= u <= P.u_min + P.u_max
    chi_w = math.remainder(chi, 2 * math.pi)
    worse_chi = math.copysign(min(abs(chi_w) + dchi, math.pi), chi_w or 1.0)
    assert desired_speed(abs(y) + dy, chi_w, P) <= u + 1e-12
    assert desired_speed(y, worse_chi, P) <= u + 1e-12


def test_params_validation():
    with pytest.raises(ConfigError):
        GuidanceParams(lookahead_delta=0.0)
    with pytest.raises(ConfigError):
        GuidanceParams(delta_min=5.0, delta_max=4.0)
    with pytest.raises(ConfigError):
        GuidanceState("pure-pursuit")
