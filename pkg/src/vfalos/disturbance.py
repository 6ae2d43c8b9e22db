"""Environmental disturbances: ocean currents and external forces.

Currents act kinematically, i.e. they are added to the NED position rates
and show up as a sideslip between heading and course over ground.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .angles import wrap
from .vessel import ConfigError, VesselState, kinematics_rates


class UndefinedCourse(ArithmeticError):
    pass


@dataclass(frozen=True)
class NoDisturbance:
    kind = "none"


@dataclass(frozen=True)
class ConstantCurrent:
    v_north: float = 0.0
    v_east: float = 0.0
    kind = "constant_current"


@dataclass(frozen=True)
class Sinusoid:
    amplitude: float
    period: float
    phase: float = 0.0
    axis: str = "east"  # "north" or "east"

    def __post_init__(self):
        if self.amplitude < 0:
            raise ConfigError("disturbance amplitude must be >= 0")
        if not self.period > 0:
            raise ConfigError("disturbance period must be > 0")
        if self.axis not in ("north", "east"):
            raise ConfigError("disturbance axis must be 'north' or 'east'")


@dataclass(frozen=True)
class TimeVaryingCurrent:
    base: ConstantCurrent = field(default_factory=ConstantCurrent)
    components: tuple = ()
    kind = "time_varying"


@dataclass(frozen=True)
class ConstantForce:
    """Force in the NED frame, entering the dynamics rather than the kinematics."""

    f_north: float = 0.0
    f_east: float = 0.0
    kind = "constant_force"


DisturbanceModel = NoDisturbance | ConstantCurrent | TimeVaryingCurrent | ConstantForce


def current_at(model, t: float) -> tuple[float, float]:
    """Current velocity (north, east) in m/s at time ``t``."""
    if isinstance(model, ConstantCurrent):
        return model.v_north, model.v_east
    if isinstance(model, TimeVaryingCurrent):
        vn, ve = model.base.v_north, model.base.v_east
        for c in model.components:
            val = c.amplitude * math.sin(2.0 * math.pi * t / c.period + c.phase)
            if c.axis == "north":
                vn += val
            else:
                ve += val
        return vn, ve
    return 0.0, 0.0


def force_at(model, t: float) -> tuple[float, float]:
    if isinstance(model, ConstantForce):
        return model.f_north, model.f_east
    return 0.0, 0.0


def effective_sideslip(state: VesselState, current=(0.0, 0.0)) -> float:
    """Angle from heading to course over ground, current included."""
    n_dot, e_dot, _ = kinematics_rates(state)
    n_dot += current[0]
    e_dot += current[1]
    if n_dot == 0.0 and e_dot == 0.0:
        raise UndefinedCourse("ground speed is zero, course is undefined")
    return wrap(math.atan2(e_dot, n_dot) - state.yaw)


def from_dict(spec: dict | None):
    """Build a disturbance model from its config-file form."""
    if not spec:
        return NoDisturbance()
    kind = spec.get("type", "none")
    if kind == "none":
        return NoDisturbance()
    if kind == "constant_current":
        return ConstantCurrent(float(spec.get("v_north", 0.0)), float(spec.get("v_east", 0.0)))
    if kind == "time_varying":
        base = ConstantCurrent(float(spec.get("v_north", 0.0)), float(spec.get("v_east", 0.0)))
        comps = tuple(
            Sinusoid(
                float(c["amplitude"]),
                float(c["period"]),
                float(c.get("phase", 0.0)),
                c.get("axis", "east"),
            )
            for c in spec.get("components", [])
        )
        return TimeVaryingCurrent(base, comps)
    if kind == "constant_force":
        return ConstantForce(float(spec.get("f_north", 0.0)), float(spec.get("f_east", 0.0)))
    raise ConfigError(
        f"unknown disturbance type {kind!r}; expected none, constant_current, time_varying or constant_force"
    )
