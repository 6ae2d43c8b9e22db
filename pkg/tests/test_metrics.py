import math

import numpy as np
import pytest

from vfalos.metrics import MetricParams, compute_metrics, convergence_time
from vfalos.sim import SimLog


def make_log(t, ye, segment=None):
    cols = {"t": t, "y_e": ye}
    if segment is not None:
        cols["segment"] = segment
    return SimLog(cols)


def test_zero_error_gives_zero_metrics():
    t = np.arange(0, 10.01, 0.01)
    m = compute_metrics(make_log(t, np.zeros_like(t), np.zeros_like(t)))
    assert m.rms_cross_track == 0 and m.max_abs_cross_track == 0
    assert m.iae == 0 and m.overshoot_after_turns == 0
    assert m.convergence_time == 0.0


def test_constant_error_integrals():
    t = np.linspace(0, 10, 1001)
    m = compute_metrics(make_log(t, np.full_like(t, 3.0)))
    assert m.rms_cross_track == pytest.approx(3.0, rel=1e-12)
    assert m.iae == pytest.approx(30.0, rel=1e-12)
    assert not m.converged and math.isnan(m.convergence_time)


def test_overshoot_is_first_post_switch_peak():
    t = np.arange(0, 60.0, 0.001)
    t_sw, sigma, omega, amp = 5.0, 0.3, 1.2, 4.0
    tau = np.clip(t - t_sw, 0, None)
    ye = np.where(t >= t_sw, amp * np.exp(-sigma * tau) * np.sin(omega * tau), 0.0)
    seg = (t >= t_sw).astype(float)
    # analytic first maximum of A e^{-s t} sin(w t): tan(w t*) = w / s
    t_peak = math.atan2(omega, sigma) / omega
    peak = amp * math.exp(-sigma * t_peak) * math.sin(omega * t_peak)
    m = compute_metrics(make_log(t, ye, seg), MetricParams(overshoot_window=20.0))
    assert m.overshoot_after_turns == pytest.approx(peak, rel=1e-5)


def test_convergence_needs_dwell():
    t = np.arange(0, 20.0, 0.1)
    a = np.where(t < 3, 2.0, 0.1)
    a[(t > 5) & (t < 6)] = 1.0  # brief excursion resets the dwell window
    assert convergence_time(t, a, 0.5, 5.0) == pytest.approx(6.0, abs=0.1)
    assert math.isnan(convergence_time(t, a, 0.05, 5.0))


def test_decay_rate_reported():
    t = np.arange(0, 30, 0.01)
    m = compute_metrics(make_log(t, 2.0 * np.exp(-0.5 * t)))
    assert m.decay_rate == pytest.approx(0.5, rel=1e-3)
    assert all(
        v >= 0
        for k, v in m.as_row().items()
        if k not in ("convergence_time", "decay_rate", "decay_fit_r2", "converged")
    )
