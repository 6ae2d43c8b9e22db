"""Numerical check of the closed-loop stability claim on the nominal system.

The nominal system is the reduced cross-track model obtained by substituting
the VFALOS heading into ``y_e' = U sin(chi - gamma_p)``, linearized in the
estimation error ``beta_err = beta - beta_hat``. With ``e = y_e + r - r_v``::

    y_e'      = U (beta_err * delta - e) / sqrt(delta^2 + e^2)
    beta_hat' = gamma * delta * e / sqrt(delta^2 + e^2)

and the Lyapunov candidate ``V = e^2/2 + U/(2 gamma) beta_err^2`` satisfies
``V' = -U e^2 / sqrt(delta^2 + e^2)`` along solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .guidance import GuidanceParams, radius_offset
from .sim import SimLog, lyapunov_value, rk4_step
from .vessel import ConfigError


class InsufficientData(ValueError):
    pass


MIN_FIT_SAMPLES = 50


@dataclass(frozen=True)
class NominalParams:
    """Inputs of the nominal closed loop.

    ``radius`` is the path radius (``inf`` for a straight line). ``gain`` may
    be negative to reproduce a destabilized loop; the Lyapunov weight always
    uses ``abs(gain)``.
    """

    speed: float = 1.0
    lookahead: float = 5.0
    gain: float = 0.05
    beta: float = 0.0
    radius: float = math.inf
    vf_k: float = 1.0
    vf_r_min: float = 8.0

    def __post_init__(self):
        if not self.speed > 0:
            raise ConfigError("nominal speed must be > 0")
        if not self.lookahead > 0:
            raise ConfigError("nominal lookahead must be > 0")
        if self.gain == 0 or not math.isfinite(self.gain):
            raise ConfigError("nominal adaptation gain must be finite and nonzero")

    @property
    def offset(self) -> float:
        """r - r_v for this path (0 on straight lines)."""
        if math.isinf(self.radius):
            return 0.0
        gp = GuidanceParams(vf_k=self.vf_k, vf_r_min=self.vf_r_min)
        return radius_offset(self.radius, gp)

    @property
    def r_v(self) -> float:
        return self.radius - self.offset


def nominal_rates(y_e: float, beta_hat: float, p: NominalParams, offset: float | None = None):
    """(y_e', beta_hat') of the nominal closed loop."""
    off = p.offset if offset is None else offset
    e = y_e + off
    root = math.sqrt(p.lookahead**2 + e * e)
    beta_err = p.beta - beta_hat
    y_dot = (beta_err * p.lookahead * p.speed - e * p.speed) / root
    bh_dot = p.gain * p.lookahead * e / root
    return y_dot, bh_dot


def nominal_system_step(y_e: float, beta_hat: float, p: NominalParams, dt: float, offset=None):
    """One RK4 step of the nominal system; returns ``(y_e, beta_hat)``."""
    off = p.offset if offset is None else offset
    return rk4_step(lambda _t, x: nominal_rates(x[0], x[1], p, off), (y_e, beta_hat), 0.0, dt)


def run_nominal(p: NominalParams, y_e0: float, duration: float, dt: float, beta_hat0: float = 0.0) -> SimLog:
    """Integrate the nominal system and log y_e, d, beta, beta_hat and V."""
    if not dt > 0:
        raise ConfigError("dt must be > 0")
    steps = int(round(duration / dt))
    off = p.offset
    y = np.empty(steps + 1)
    bh = np.empty(steps + 1)
    y[0], bh[0] = y_e0, beta_hat0
    for k in range(steps):
        y[k + 1], bh[k + 1] = nominal_system_step(y[k], bh[k], p, dt, off)
    t = dt * np.arange(steps + 1)
    e = y + off
    beta_err = p.beta - bh
    V = 0.5 * e**2 + p.speed / (2.0 * abs(p.gain)) * beta_err**2
    d = y + p.radius if not math.isinf(p.radius) else np.full_like(y, math.nan)
    cols = {
        "t": t,
        "y_e": y,
        "d": d,
        "beta": np.full_like(y, p.beta),
        "beta_hat": bh,
        "V": V,
    }
    return SimLog(cols, {"kind": "nominal", "dt": dt})


@dataclass(frozen=True)
class EnvelopeFit:
    rate: float  # lambda, 1/s
    log_c: float
    r_squared: float
    c_bound: float  # smallest C with |e(t)| <= C exp(-lambda t) on the fitted samples
    samples: int


@dataclass(frozen=True)
class StabilityReport:
    decrease_fraction: float
    steps_checked: int
    envelope: EnvelopeFit | None
    final_field_error: float
    final_cross_track: float
    final_beta_error: float
    min_decrease_fraction: float
    min_r_squared: float

    @property
    def lyapunov_ok(self) -> bool:
        return self.decrease_fraction >= self.min_decrease_fraction

    @property
    def envelope_ok(self) -> bool:
        # no envelope means the error never left the fit floor: nothing to decay
        if self.envelope is None:
            return True
        return self.envelope.rate > 0 and self.envelope.r_squared >= self.min_r_squared

    @property
    def passed(self) -> bool:
        return self.lyapunov_ok and self.envelope_ok

    def summary(self) -> str:
        env = self.envelope
        lines = [
            f"Lyapunov non-increasing steps : {self.decrease_fraction:.4%} of {self.steps_checked}"
            f" (need >= {self.min_decrease_fraction:.2%})  {'PASS' if self.lyapunov_ok else 'FAIL'}",
        ]
        if env is None:
            lines.append("exponential envelope         : no transient above fit floor  PASS")
        else:
            lines.append(
                f"exponential envelope         : lambda = {env.rate:.6g} 1/s, R^2 = {env.r_squared:.4f},"
                f" C = {env.c_bound:.4g} ({env.samples} samples)  {'PASS' if self.envelope_ok else 'FAIL'}"
            )
        lines += [
            f"final |d - r_v|              : {self.final_field_error:.3e} m",
            f"final |y_e|                  : {self.final_cross_track:.3e} m",
            f"final |beta - beta_hat|      : {self.final_beta_error:.3e} rad",
        ]
        return "\n".join(lines)


def fit_envelope(t, err, floor: float = 1e-3) -> EnvelopeFit | None:
    """Least-squares fit of log|err| decay, applied to its upper envelope.

    The envelope at ``t_k`` is ``max_{j >= k} |err_j|``, which bounds the
    signal from above and removes the log-singular zero crossings of an
    oscillatory decay. Only samples with envelope above ``floor`` are used.
    """
    t = np.asarray(t, dtype=float)
    env = np.maximum.accumulate(np.abs(np.asarray(err, dtype=float))[::-1])[::-1]
    mask = env > floor
    n = int(mask.sum())
    if n < 2:
        return None
    tt, yy = t[mask], np.log(env[mask])
    A = np.column_stack([np.ones_like(tt), tt])
    (c0, c1), *_ = np.linalg.lstsq(A, yy, rcond=None)
    pred = c0 + c1 * tt
    ss_res = float(np.sum((yy - pred) ** 2))
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    rate = -float(c1)
    c_bound = float(np.max(np.abs(err)[mask] * np.exp(rate * tt)))
    return EnvelopeFit(rate, float(c0), r2, c_bound, n)


def verify_stability(
    log: SimLog,
    p: NominalParams,
    min_decrease_fraction: float = 0.99,
    min_r_squared: float = 0.9,
    rel_tol: float = 1e-9,
    eq_tol: float = 1e-12,
) -> StabilityReport:
    """Check Lyapunov decrease and fit an exponential envelope to ``d - r_v``."""
    n = len(log)
    if n < MIN_FIT_SAMPLES:
        raise InsufficientData(f"log has {n} samples; at least {MIN_FIT_SAMPLES} are needed")
    t = log["t"]
    e = log["y_e"] + p.offset
    beta_err = log["beta"] - log["beta_hat"]
    w = abs(p.gain)
    V = np.array([lyapunov_value(ei, bi, p.speed, w) for ei, bi in zip(e, beta_err)])
    dV = np.diff(V)
    # steps starting at the equilibrium carry no information
    active = V[:-1] > eq_tol
    ok = dV[active] <= rel_tol * V[:-1][active] + eq_tol
    checked = int(active.sum())
    frac = float(ok.mean()) if checked else 1.0
    return StabilityReport(
        decrease_fraction=frac,
        steps_checked=checked,
        envelope=fit_envelope(t, e),
        final_field_error=float(abs(e[-1])),
        final_cross_track=float(abs(log["y_e"][-1])),
        final_beta_error=float(abs(beta_err[-1])),
        min_decrease_fraction=min_decrease_fraction,
        min_r_squared=min_r_squared,
    )


def nominal_from_config(cfg: dict) -> tuple[NominalParams, dict]:
    """Nominal-system parameters from the ``stability`` (and ``guidance``) sections."""
    st = cfg.get("stability") or {}
    g = cfg["guidance"]
    gain = st.get("adaptation_gain")
    try:
        radius = st.get("radius")
        p = NominalParams(
            speed=float(st.get("speed", 1.0)),
            lookahead=float(st.get("lookahead") or g["lookahead_delta"]),
            gain=float(gain if gain is not None else g["adaptation_gain_gamma"]),
            beta=float(st.get("beta", 0.0)),
            radius=math.inf if radius is None else float(radius),
            vf_k=float(g["vf_k"]),
            vf_r_min=float(g["vf_r_min"]),
        )
        if not math.isinf(p.radius):
            p.offset  # validates radius >= vf_r_min
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"stability section invalid: {exc}") from exc
    run = {
        "y_e0": float(st.get("y_e0", 10.0)),
        "beta_hat0": float(st.get("beta_hat0", 0.0)),
        "dt": float(st.get("dt", 0.01)),
        "duration": float(st.get("duration", 300.0)),
        "min_decrease_fraction": float(st.get("decrease_fraction", 0.99)),
        "min_r_squared": float(st.get("min_r_squared", 0.9)),
    }
    return p, run
