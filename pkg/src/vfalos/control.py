"""Inner-loop heading and surge-speed PID controllers."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .angles import wrap
from .vessel import ConfigError


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    output_limit: float = 1.0
    integral_limit: float = 1.0

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            if getattr(self, name) < 0:
                raise ConfigError(f"PID gain {name} must be >= 0")
        if not (self.output_limit > 0 and self.integral_limit > 0):
            raise ConfigError("PID output_limit and integral_limit must be > 0")


@dataclass(frozen=True)
class ControllerState:
    heading_integral: float = 0.0
    speed_integral: float = 0.0
    prev_heading_error: float = 0.0
    prev_speed_error: float = 0.0


def _sat(x: float, lim: float) -> float:
    return min(max(x, -lim), lim)


def heading_control(psi_d, psi, yaw_rate_r, state: ControllerState, gains: PidGains, dt: float):
    """PID on the wrapped heading error, with derivative action on the measured yaw rate."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    e = wrap(psi_d - psi)
    integral = _sat(state.heading_integral + e * dt, gains.integral_limit)
    tau_r = _sat(gains.kp * e + gains.ki * integral - gains.kd * yaw_rate_r, gains.output_limit)
    return tau_r, replace(state, heading_integral=integral, prev_heading_error=e)


def speed_control(
    u_d, u, state: ControllerState, gains: PidGains, dt: float, allow_reverse: bool = False
):
    """PI surge-speed loop. Without ``allow_reverse`` the output is kept >= 0."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    e = u_d - u
    integral = _sat(state.speed_integral + e * dt, gains.integral_limit)
    deriv = (e - state.prev_speed_error) / dt if gains.kd else 0.0
    tau_u = _sat(gains.kp * e + gains.ki * integral + gains.kd * deriv, gains.output_limit)
    if not allow_reverse and tau_u < 0.0:
        tau_u = 0.0
    return tau_u, replace(state, speed_integral=integral, prev_speed_error=e)
