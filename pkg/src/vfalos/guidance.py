"""Line-of-sight guidance laws.

The family implemented here:

* ``los``     plain LOS with a fixed lookahead and no drift compensation;
* ``alos``    adaptive LOS that estimates the sideslip angle online;
* ``vfalos``  adaptive LOS on a vector field: on arcs the radial error is
              measured against a shrunken field radius ``r_v`` instead of the
              path radius, which damps the overshoot when leaving a turn;
* ``vfilos``  integral LOS with the same vector-field radius (baseline);
* ``tlos``    LOS with a cross-track dependent lookahead distance (baseline).

The two baselines are standard textbook forms, not reproductions of any
particular published implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .angles import wrap
from .path import Arc, PathSegment, ProjectionResult
from .vessel import ConfigError

LAWS = ("los", "alos", "vfalos", "vfilos", "tlos")


@dataclass(frozen=True)
class GuidanceParams:
    lookahead_delta: float = 6.0
    adaptation_gain_gamma: float = 0.05
    vf_k: float = 1.0
    vf_r_min: float = 8.0
    y_max: float = 15.0
    chi_max: float = math.pi / 2
    u_max: float = 1.0
    u_min: float = 0.5
    delta_min: float = 3.0
    delta_max: float = 12.0
    delta_decay: float = 0.2
    integral_gain: float = 0.2
    integral_limit: float = 30.0
    beta_max: float = math.pi / 4
    radius_source: str = "segment"
    radius_lookahead: float = 2.0

    def __post_init__(self):
        positive = (
            "lookahead_delta",
            "adaptation_gain_gamma",
            "vf_k",
            "vf_r_min",
            "y_max",
            "chi_max",
            "u_max",
            "delta_min",
            "delta_max",
            "delta_decay",
            "integral_gain",
            "integral_limit",
            "beta_max",
            "radius_lookahead",
        )
        for name in positive:
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"guidance.{name} must be a finite number > 0, got {val!r}")
        if not self.u_min >= 0.0:
            raise ConfigError("guidance.u_min must be >= 0")
        if not self.delta_min < self.delta_max:
            raise ConfigError("guidance.delta_min must be < guidance.delta_max")
        if self.radius_source not in ("segment", "estimate"):
            raise ConfigError("guidance.radius_source must be 'segment' or 'estimate'")

    def with_(self, **changes) -> "GuidanceParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class GuidanceState:
    law: str = "vfalos"
    beta_hat: float = 0.0
    integral_state: float = 0.0

    def __post_init__(self):
        if self.law not in LAWS:
            raise ConfigError(f"unknown guidance law {self.law!r}; expected one of {', '.join(LAWS)}")


@dataclass(frozen=True)
class GuidanceCommand:
    psi_d: float
    u_d: float
    chi_d: float
    field_error: float  # signed error the law drives to zero (y_e, or +-(d - r_v) on arcs)
    r_v: float  # vector-field radius in use (inf on straight stretches)


def los_heading(gamma_p: float, y_e: float, delta: float, beta: float = 0.0) -> float:
    return wrap(gamma_p - math.atan(y_e / delta) - beta)


def adaptation_rate(error: float, delta: float, gain: float) -> float:
    """Sideslip-estimate derivative; its magnitude never exceeds ``gain * delta``."""
    return gain * delta * error / math.sqrt(delta * delta + error * error)


def _clamp(x: float, lim: float) -> float:
    return min(max(x, -lim), lim)


def alos_step(gamma_p, y_e, state: GuidanceState, params: GuidanceParams, dt: float):
    if dt <= 0:
        raise ValueError("dt must be > 0")
    delta = params.lookahead_delta
    psi_d = wrap(gamma_p - state.beta_hat - math.atan(y_e / delta))
    rate = adaptation_rate(y_e, delta, params.adaptation_gain_gamma)
    beta_hat = _clamp(state.beta_hat + dt * rate, params.beta_max)
    return psi_d, replace(state, beta_hat=beta_hat)


def vector_field_radius(r: float, params: GuidanceParams) -> float:
    """Effective field radius r_v < r for a path of radius ``r``."""
    r_min = params.vf_r_min
    if r < r_min:
        raise ValueError(f"path radius {r} is below vf_r_min={r_min}")
    if math.isinf(r):
        return math.inf
    return math.atan(params.vf_k * r) * (2.0 / math.pi) * r_min + (r - r_min)


def radius_offset(r: float, params: GuidanceParams) -> float:
    """r - r_v, computed without cancellation; tends to 0 as r grows."""
    if math.isinf(r):
        return 0.0
    if r < params.vf_r_min:
        raise ValueError(f"path radius {r} is below vf_r_min={params.vf_r_min}")
    # 1 - (2/pi) atan(x) == (2/pi) atan(1/x) for x > 0
    return params.vf_r_min * (2.0 / math.pi) * math.atan(1.0 / (params.vf_k * r))


def vfalos_step(
    gamma_c, d, r, state: GuidanceState, params: GuidanceParams, dt: float, direction: str = "ccw"
):
    """Vector-field adaptive LOS on a circular arc centred where ``gamma_c``/``d`` are measured."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if not d >= 0 or math.isnan(gamma_c):
        raise ValueError("arc geometry undefined (distance to centre / azimuth)")
    sign = 1 if direction == "ccw" else -1
    r_v = vector_field_radius(r, params)
    err = sign * (d - r_v)
    delta = params.lookahead_delta
    psi_d = wrap(gamma_c - sign * math.pi / 2 - state.beta_hat - math.atan(err / delta))
    rate = adaptation_rate(err, delta, params.adaptation_gain_gamma)
    beta_hat = _clamp(state.beta_hat + dt * rate, params.beta_max)
    return psi_d, replace(state, beta_hat=beta_hat)


def straight_vfalos_step(gamma_p, y_e, r_minus_rv, state: GuidanceState, params, dt):
    """Unified VFALOS in path-tangent form: error ``y_e + (r - r_v)``.

    ``r_minus_rv`` carries the sign of the arc orientation; it is exactly 0 on
    straight segments, where the law is the adaptive LOS law.
    """
    if r_minus_rv:
        y_e = y_e + r_minus_rv
    return alos_step(gamma_p, y_e, state, params, dt)


def ilos_step(gamma_p, y_e, state: GuidanceState, params: GuidanceParams, dt: float):
    """Integral LOS: the lookahead aims at ``y_e + sigma * y_int``."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    delta = params.lookahead_delta
    sigma = params.integral_gain
    y_int = state.integral_state
    aim = y_e + sigma * y_int
    psi_d = wrap(gamma_p - math.atan(aim / delta))
    y_int_dot = delta * y_e / (aim * aim + delta * delta)
    y_int = _clamp(y_int + dt * y_int_dot, params.integral_limit)
    return psi_d, replace(state, integral_state=y_int)


def tlos_delta(y_e: float, params: GuidanceParams) -> float:
    span = params.delta_max - params.delta_min
    return span * math.exp(-params.delta_decay * abs(y_e)) + params.delta_min


def desired_speed(y_e: float, chi_err: float, params: GuidanceParams) -> float:
    """Slow down when far from the path or when the course is badly off."""
    chi_err = wrap(chi_err)
    u = params.u_max * (1.0 - abs(y_e) / params.y_max - abs(chi_err) / params.chi_max)
    return max(u + params.u_min, params.u_min)


def guidance_step(
    law: str,
    seg: PathSegment,
    proj: ProjectionResult,
    r: float,
    course: float,
    state: GuidanceState,
    params: GuidanceParams,
    dt: float,
    r_sign: int = 1,
) -> tuple[GuidanceCommand, GuidanceState]:
    """One guidance tick for ``law`` on the active segment.

    ``r`` is the radius to use for the vector field (inf on lines);
    ``r_sign`` is +1/-1 for ccw/cw curvature when ``r`` was estimated rather
    than read from an :class:`Arc`.
    """
    gamma_p, y_e = proj.tangent_gamma_p, proj.cross_track_ye
    r_v = r if isinstance(seg, Arc) else math.inf
    err = y_e
    if law == "los":
        psi_d = los_heading(gamma_p, y_e, params.lookahead_delta)
    elif law == "tlos":
        psi_d = los_heading(gamma_p, y_e, tlos_delta(y_e, params))
    elif law == "alos":
        psi_d, state = alos_step(gamma_p, y_e, state, params, dt)
    elif law in ("vfalos", "vfilos"):
        off = 0.0
        if not math.isinf(r) and r >= params.vf_r_min:
            off = radius_offset(r, params)
            r_v = r - off
        elif not math.isinf(r):
            r_v = r  # too tight for the field: plain LOS on the arc error
        err = y_e + r_sign * off
        if law == "vfalos":
            psi_d, state = straight_vfalos_step(gamma_p, y_e, r_sign * off, state, params, dt)
        else:
            psi_d, state = ilos_step(gamma_p, err, state, params, dt)
    else:
        raise ConfigError(f"unknown guidance law {law!r}")
    chi_d = wrap(psi_d + state.beta_hat)
    u_d = desired_speed(y_e, wrap(course - chi_d), params)
    return GuidanceCommand(psi_d, u_d, chi_d, err, r_v), state
