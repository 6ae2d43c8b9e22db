"""Closed-loop fixed-step simulation and the trajectory log."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import disturbance as dist
from .angles import wrap
from .config import Scenario
from .control import ControllerState, heading_control, speed_control
from .guidance import GuidanceState, guidance_step
from .path import Arc, DegenerateProjection, advance_segment, estimate_radius, project
from .vessel import ThrustCommand, VesselParams, VesselState, allocate_thrust, body_thrust

SIM_COLUMNS = (
    "t",
    "north",
    "east",
    "yaw",
    "surge_u",
    "sway_v",
    "yaw_rate_r",
    "y_e",
    "d",
    "beta",
    "beta_hat",
    "psi_d",
    "u_d",
    "tau_u",
    "tau_r",
    "f1",
    "f2",
    "segment",
    "V",
)


class SimulationDiverged(RuntimeError):
    def __init__(self, quantity: str, t: float, value: float):
        super().__init__(f"non-finite {quantity} = {value!r} at t = {t:.6g} s")
        self.quantity = quantity
        self.t = t
        self.value = value


class SimLog:
    """Column store of a time-indexed run: ``log["y_e"]`` is a numpy array."""

    def __init__(self, columns: dict, meta: dict | None = None):
        self.columns = {k: np.asarray(v, dtype=float) for k, v in columns.items()}
        self.meta = dict(meta or {})
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths {sorted(lengths)}")

    def __getitem__(self, key: str) -> np.ndarray:
        return self.columns[key]

    def __contains__(self, key: str) -> bool:
        return key in self.columns

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    @property
    def names(self) -> tuple:
        return tuple(self.columns)

    def to_csv(self, dest=None) -> str:
        """Serialize with ``repr`` floats, which round-trip exactly."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        cols = [self.columns[n] for n in self.names]
        int_cols = {i for i, n in enumerate(self.names) if n == "segment"}
        for row in zip(*cols):
            w.writerow(
                str(int(v)) if i in int_cols else repr(float(v)) for i, v in enumerate(row)
            )
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "SimLog":
        with open(source, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        cols = {name: [float(r[i]) for r in body] for i, name in enumerate(header)}
        return cls(cols)


class _Plant:
    """Scalar-arithmetic right-hand side of the 6-state vessel model.

    Equivalent to ``kinematics_rates`` + ``dynamics_rates`` but without
    per-call numpy overhead, which dominates at 3x3 sizes.
    """

    def __init__(self, params: VesselParams):
        m = params.mass_matrix
        self.minv = tuple(tuple(float(x) for x in row) for row in params.m_inv)
        self.m11 = float(m[0, 0])
        self.m22 = float(m[1, 1])
        self.m23 = 0.5 * float(m[1, 2] + m[2, 1])
        self.dl = params.linear_damping
        self.dq = params.quadratic_damping

    def rates(self, x, tau_u, tau_r, current, force):
        n, e, psi, u, v, r = x
        c, s = math.cos(psi), math.sin(psi)
        n_dot = u * c - v * s + current[0]
        e_dot = u * s + v * c + current[1]
        c13 = -self.m22 * v - self.m23 * r
        c23 = self.m11 * u
        dl, dq = self.dl, self.dq
        f0 = tau_u - c13 * r - (dl[0] + dq[0] * abs(u)) * u
        f1 = -c23 * r - (dl[1] + dq[1] * abs(v)) * v
        f2 = tau_r + c13 * u + c23 * v - (dl[2] + dq[2] * abs(r)) * r
        if force[0] or force[1]:
            f0 += c * force[0] + s * force[1]
            f1 += -s * force[0] + c * force[1]
        mi = self.minv
        return (
            n_dot,
            e_dot,
            r,
            mi[0][0] * f0 + mi[0][1] * f1 + mi[0][2] * f2,
            mi[1][0] * f0 + mi[1][1] * f1 + mi[1][2] * f2,
            mi[2][0] * f0 + mi[2][1] * f1 + mi[2][2] * f2,
        )


def rk4_step(rates, x, t: float, dt: float):
    """Classic fourth-order Runge-Kutta step for ``x' = rates(t, x)``."""
    k1 = rates(t, x)
    k2 = rates(t + dt / 2, tuple(xi + dt / 2 * ki for xi, ki in zip(x, k1)))
    k3 = rates(t + dt / 2, tuple(xi + dt / 2 * ki for xi, ki in zip(x, k2)))
    k4 = rates(t + dt, tuple(xi + dt * ki for xi, ki in zip(x, k3)))
    return tuple(
        xi + dt / 6 * (a + 2 * b + 2 * c + d) for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
    )


def plant_step(
    state: VesselState, thrust: ThrustCommand, params: VesselParams, dt: float, t=0.0, model=None
) -> VesselState:
    """Advance the vessel by one RK4 step with the thrust held constant."""
    model = model if model is not None else dist.NoDisturbance()
    plant = _Plant(params)

    def rhs(tt, x):
        return plant.rates(x, thrust.tau_u, thrust.tau_r, dist.current_at(model, tt), dist.force_at(model, tt))

    return VesselState.from_array(rk4_step(rhs, tuple(state.as_array()), t, dt))


def lyapunov_value(field_err: float, beta_err: float, U: float, gamma: float) -> float:
    """0.5 e^2 + U/(2 gamma) * beta_err^2 with e = d - r_v (or y_e + r - r_v)."""
    if not U > 0 or not gamma > 0:
        raise ValueError("lyapunov_value needs U > 0 and gamma > 0")
    return 0.5 * field_err * field_err + U / (2.0 * gamma) * beta_err * beta_err


def _check_finite(x, t):
    for name, val in zip(("north", "east", "yaw", "surge_u", "sway_v", "yaw_rate_r"), x):
        if not math.isfinite(val):
            raise SimulationDiverged(name, t, val)


def run_scenario(sc: Scenario) -> SimLog:
    """Simulate the closed loop guidance -> PID -> allocation -> vessel.

    Guidance and control run once per step on the state at the start of the
    step; the plant is then integrated with RK4 over ``dt`` holding the thrust.
    """
    dt = sc.sim.dt
    steps = sc.sim.steps
    plant = _Plant(sc.vessel)
    path = sc.path
    gp = sc.guidance
    a = sc.vessel.thruster_separation_a

    x = tuple(sc.sim.initial_state.as_array())
    _check_finite(x, 0.0)
    seg_i = 0
    gstate = GuidanceState(sc.law)
    cstate = ControllerState()
    rows = {name: np.empty(steps + 1) for name in SIM_COLUMNS}

    for k in range(steps + 1):
        t = k * dt
        pos = (x[0], x[1])
        seg_i, _ = advance_segment(path, pos, seg_i)
        seg = path[seg_i]
        try:
            proj = project(path, pos, seg_i)
        except DegenerateProjection as exc:
            raise SimulationDiverged("arc projection (vessel at arc centre)", t, math.nan) from exc

        current = dist.current_at(sc.disturbance, t)
        force = dist.force_at(sc.disturbance, t)
        state = VesselState.from_array(x)
        n_dot = x[3] * math.cos(x[2]) - x[4] * math.sin(x[2]) + current[0]
        e_dot = x[3] * math.sin(x[2]) + x[4] * math.cos(x[2]) + current[1]
        ground_speed = math.hypot(n_dot, e_dot)
        course = math.atan2(e_dot, n_dot) if ground_speed > 0 else x[2]
        beta = wrap(course - x[2]) if ground_speed > 0 else 0.0

        if gp.radius_source == "estimate":
            tr = estimate_radius(path, proj, gp.radius_lookahead)
            r, r_sign = tr.radius, -tr.direction
        elif isinstance(seg, Arc):
            r, r_sign = seg.radius_r, seg.sign
        else:
            r, r_sign = math.inf, 1

        cmd, gstate = guidance_step(sc.law, seg, proj, r, course, gstate, gp, dt, r_sign)
        tau_r, cstate = heading_control(cmd.psi_d, x[2], x[5], cstate, sc.heading_gains, dt)
        tau_u, cstate = speed_control(cmd.u_d, x[3], cstate, sc.speed_gains, dt, sc.allow_reverse)
        alloc = allocate_thrust(ThrustCommand(tau_u, tau_r), sc.vessel)
        applied = body_thrust(alloc.f1, alloc.f2, a)

        beta_err = beta - gstate.beta_hat
        V = 0.5 * cmd.field_error**2
        if ground_speed > 0:
            V = lyapunov_value(cmd.field_error, beta_err, ground_speed, gp.adaptation_gain_gamma)

        for name, val in (
            ("t", t),
            ("north", x[0]),
            ("east", x[1]),
            ("yaw", state.yaw),
            ("surge_u", x[3]),
            ("sway_v", x[4]),
            ("yaw_rate_r", x[5]),
            ("y_e", proj.cross_track_ye),
            ("d", proj.dist_to_center_d),
            ("beta", beta),
            ("beta_hat", gstate.beta_hat),
            ("psi_d", cmd.psi_d),
            ("u_d", cmd.u_d),
            ("tau_u", applied.tau_u),
            ("tau_r", applied.tau_r),
            ("f1", alloc.f1),
            ("f2", alloc.f2),
            ("segment", seg_i),
            ("V", V),
        ):
            rows[name][k] = val

        if k == steps:
            break

        def rhs(tt, xx, tu=applied.tau_u, tr_=applied.tau_r):
            cur = current if tt == t else dist.current_at(sc.disturbance, tt)
            return plant.rates(xx, tu, tr_, cur, force)

        x = rk4_step(rhs, x, t, dt)
        t_next = (k + 1) * dt
        _check_finite(x, t_next)
        x = (x[0], x[1], wrap(x[2]), x[3], x[4], x[5])

    meta = {"law": sc.law, "dt": dt, "duration": sc.sim.duration}
    return SimLog(rows, meta)


@dataclass(frozen=True)
class PlantOnlyResult:
    states: np.ndarray
    times: np.ndarray


def simulate_plant(
    initial: VesselState,
    thrust_fn,
    params: VesselParams,
    dt: float,
    duration: float,
    model=None,
) -> PlantOnlyResult:
    """Open-loop plant run with ``thrust_fn(t) -> ThrustCommand`` (yaw left unwrapped)."""
    model = model if model is not None else dist.NoDisturbance()
    plant = _Plant(params)
    steps = int(round(duration / dt))
    x = tuple(initial.as_array())
    out = np.empty((steps + 1, 6))
    out[0] = x
    for k in range(steps):
        t = k * dt
        th = thrust_fn(t)

        def rhs(tt, xx, th=th):
            return plant.rates(xx, th.tau_u, th.tau_r, dist.current_at(model, tt), dist.force_at(model, tt))

        x = rk4_step(rhs, x, t, dt)
        _check_finite(x, t + dt)
        out[k + 1] = x
    return PlantOnlyResult(out, dt * np.arange(steps + 1))
