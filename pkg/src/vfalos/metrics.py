"""Scalar tracking metrics derived from a simulation log."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .stability import fit_envelope


@dataclass(frozen=True)
class MetricParams:
    convergence_eps: float = 0.5
    convergence_dwell: float = 5.0
    overshoot_window: float = 20.0
    # "turn_exit": only switches leaving an arc; "all": every switch
    overshoot_after: str = "all"
    steady_window: float = 30.0


@dataclass(frozen=True)
class Metrics:
    rms_cross_track: float
    max_abs_cross_track: float
    overshoot_after_turns: float
    convergence_time: float  # nan when not converged
    converged: bool
    iae: float
    steady_state_abs_ye: float
    decay_rate: float  # nan without a transient to fit
    decay_fit_r2: float

    def as_row(self) -> dict:
        return asdict(self)


def _integrate(y, t) -> float:
    if len(t) < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def convergence_time(t, abs_ye, eps: float, dwell: float) -> float:
    """First time after which |y_e| < eps holds for at least ``dwell`` seconds.

    Returns nan if this never happens within the log.
    """
    below = abs_ye < eps
    n = len(t)
    k = 0
    while k < n:
        if not below[k]:
            k += 1
            continue
        j = k
        while j + 1 < n and below[j + 1]:
            j += 1
        # a run that reaches the end of the log counts only if it lasts `dwell`
        if t[j] - t[k] >= dwell - 1e-12:
            return float(t[k])
        k = j + 1
    return math.nan


def switch_indices(segment, after_arc=None) -> list[int]:
    seg = np.asarray(segment)
    idx = np.nonzero(np.diff(seg) != 0)[0] + 1
    if after_arc is None:
        return [int(i) for i in idx]
    return [int(i) for i in idx if after_arc(int(seg[i - 1]))]


def compute_metrics(log, params: MetricParams = MetricParams(), path=None) -> Metrics:
    """Tracking metrics of ``log``.

    ``path`` is needed only for ``overshoot_after="turn_exit"``, to know which
    segments are arcs.
    """
    t = log["t"]
    ye = log["y_e"]
    a = np.abs(ye)
    if len(t) == 0:
        raise ValueError("empty log")

    if params.overshoot_after == "turn_exit" and path is not None and "segment" in log:
        from .path import Arc

        switches = switch_indices(log["segment"], lambda i: isinstance(path[i], Arc))
    elif "segment" in log:
        switches = switch_indices(log["segment"])
    else:
        switches = []
    overshoot = 0.0
    for i in switches:
        window = (t >= t[i]) & (t <= t[i] + params.overshoot_window)
        overshoot = max(overshoot, float(a[window].max()))

    conv = convergence_time(t, a, params.convergence_eps, params.convergence_dwell)
    steady = a[t >= t[-1] - params.steady_window]
    fit = fit_envelope(t, ye) if len(t) >= 2 else None
    return Metrics(
        rms_cross_track=float(np.sqrt(np.mean(ye**2))),
        max_abs_cross_track=float(a.max()),
        overshoot_after_turns=overshoot,
        convergence_time=conv,
        converged=not math.isnan(conv),
        iae=_integrate(a, t),
        steady_state_abs_ye=float(steady.mean()),
        decay_rate=fit.rate if fit else math.nan,
        decay_fit_r2=fit.r_squared if fit else math.nan,
    )
