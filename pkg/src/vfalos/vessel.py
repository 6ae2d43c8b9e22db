"""3-DOF surface vessel: kinematics, rigid-body dynamics and differential thrust.

Frames follow the NED convention: ``north``/``east`` are inertial positions,
``yaw`` is measured from north towards east, and (u, v, r) are the body-frame
surge, sway and yaw-rate velocities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .angles import wrap


class ConfigError(ValueError):
    """Raised for invalid user-supplied parameters."""


@dataclass(frozen=True)
class VesselState:
    north: float = 0.0
    east: float = 0.0
    yaw: float = 0.0
    surge_u: float = 0.0
    sway_v: float = 0.0
    yaw_rate_r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", wrap(self.yaw))

    def speed(self) -> float:
        return math.hypot(self.surge_u, self.sway_v)

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.north, self.east, self.yaw, self.surge_u, self.sway_v, self.yaw_rate_r]
        )

    @classmethod
    def from_array(cls, x) -> "VesselState":
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class VesselParams:
    """Physical parameters of a twin-propeller surface vessel.

    ``mass_matrix`` is the total inertia M = M_RB + M_A. Damping is diagonal,
    ``D(nu) = diag(linear_damping) + diag(quadratic_damping) * |nu|``. The
    Coriolis matrix is built from the diagonal of M so it is skew-symmetric.
    """

    mass_matrix: np.ndarray = field(
        default_factory=lambda: np.diag([55.0, 70.0, 9.0])
    )
    linear_damping: tuple = (12.0, 40.0, 6.0)
    quadratic_damping: tuple = (6.0, 30.0, 3.0)
    thruster_separation_a: float = 0.8
    thrust_limit: float = 60.0

    def __post_init__(self):
        m = np.array(self.mass_matrix, dtype=float)
        if m.shape != (3, 3):
            raise ConfigError(f"mass_matrix must be 3x3, got shape {m.shape}")
        if not np.allclose(m, m.T):
            raise ConfigError("mass_matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(m)) <= 0.0:
            raise ConfigError("mass_matrix must be positive definite")
        m.setflags(write=False)
        object.__setattr__(self, "mass_matrix", m)
        for name in ("linear_damping", "quadratic_damping"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != 3 or min(vals) < 0.0:
                raise ConfigError(f"{name} must be three non-negative numbers")
            object.__setattr__(self, name, vals)
        if not self.thruster_separation_a > 0.0:
            raise ConfigError("thruster_separation_a must be > 0")
        if not self.thrust_limit > 0.0:
            raise ConfigError("thrust_limit must be > 0")
        object.__setattr__(self, "_m_inv", np.linalg.inv(m))

    @property
    def m_inv(self) -> np.ndarray:
        return self._m_inv

    def with_(self, **changes) -> "VesselParams":
        return replace(self, **changes)


class ThrustCommand(NamedTuple):
    tau_u: float
    tau_r: float


class Allocation(NamedTuple):
    f1: float
    f2: float
    saturated: bool


def kinematics_rates(state: VesselState) -> tuple[float, float, float]:
    """Body velocities rotated into NED: (north_dot, east_dot, yaw_dot)."""
    c, s = math.cos(state.yaw), math.sin(state.yaw)
    u, v = state.surge_u, state.sway_v
    return u * c - v * s, u * s + v * c, state.yaw_rate_r


def coriolis_matrix(nu, params: VesselParams) -> np.ndarray:
    m = params.mass_matrix
    u, v, _ = nu
    m11, m22 = m[0, 0], m[1, 1]
    # m23 couples sway and yaw when the centre of gravity is off the origin
    m23 = 0.5 * (m[1, 2] + m[2, 1])
    r = nu[2]
    c13 = -m22 * v - m23 * r
    c23 = m11 * u
    return np.array([[0.0, 0.0, c13], [0.0, 0.0, c23], [-c13, -c23, 0.0]])


def damping_matrix(nu, params: VesselParams) -> np.ndarray:
    lin = np.asarray(params.linear_damping)
    quad = np.asarray(params.quadratic_damping)
    return np.diag(lin + quad * np.abs(np.asarray(nu, dtype=float)))


def dynamics_rates(
    state: VesselState, thrust: ThrustCommand, params: VesselParams, force_ned=(0.0, 0.0)
) -> tuple[float, float, float]:
    """Solve M nu_dot = tau - C(nu) nu - D(nu) nu for the body accelerations.

    Sway is unactuated: the applied generalized force is [tau_u, 0, tau_r].
    ``force_ned`` is an optional external force in the inertial frame.
    """
    nu = np.array([state.surge_u, state.sway_v, state.yaw_rate_r])
    tau = np.array([thrust.tau_u, 0.0, thrust.tau_r])
    if force_ned[0] or force_ned[1]:
        c, s = math.cos(state.yaw), math.sin(state.yaw)
        fn, fe = force_ned
        tau[0] += c * fn + s * fe
        tau[1] += -s * fn + c * fe
    rhs = tau - coriolis_matrix(nu, params) @ nu - damping_matrix(nu, params) @ nu
    acc = params.m_inv @ rhs
    return float(acc[0]), float(acc[1]), float(acc[2])


def thrust_matrix(a: float) -> np.ndarray:
    """Map from propeller forces (f1, f2) to (tau_u, tau_r)."""
    return np.array([[1.0, 1.0], [a / 2.0, -a / 2.0]])


def allocate_thrust(thrust: ThrustCommand, params: VesselParams) -> Allocation:
    """Split (tau_u, tau_r) over the two propellers, saturating each one."""
    a = params.thruster_separation_a
    f1 = thrust.tau_u / 2.0 + thrust.tau_r / a
    f2 = thrust.tau_u / 2.0 - thrust.tau_r / a
    lim = params.thrust_limit
    f1s = min(max(f1, -lim), lim)
    f2s = min(max(f2, -lim), lim)
    return Allocation(f1s, f2s, f1s != f1 or f2s != f2)


def body_thrust(f1: float, f2: float, a: float) -> ThrustCommand:
    return ThrustCommand(f1 + f2, a / 2.0 * (f1 - f2))


def propeller_to_body(u1: float, u2: float, a: float) -> tuple[float, float]:
    """Surge speed and yaw rate produced by left/right propeller speeds."""
    if a <= 0.0:
        raise ValueError("propeller separation must be > 0")
    return (u1 + u2) / 2.0, (u1 - u2) / a
