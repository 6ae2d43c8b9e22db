"""Scenario configuration: JSON file <-> typed parameter objects.

A scenario file has the sections ``vessel``, ``path``, ``guidance``,
``control``, ``disturbance``, ``sim`` and (optionally) ``stability``. Any key
left out falls back to the packaged default scenario. Individual values can be
overridden with dotted keys, e.g. ``guidance.lookahead_delta=4``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path as FsPath
from typing import Any

import numpy as np

from . import disturbance as dist
from .control import PidGains
from .guidance import LAWS, GuidanceParams
from .path import Arc, Line, Path, PathError, fillet_polyline, lawnmower
from .vessel import ConfigError, VesselParams, VesselState


def default_config() -> dict:
    text = resources.files("vfalos").joinpath("data/default_scenario.json").read_text()
    return json.loads(text)


def _merge(base: dict, update: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in update.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and not (prefix == "" and key in _FREEFORM):
            out[key] = _merge(out[key], val, f"{prefix}{key}.")
        else:
            out[key] = copy.deepcopy(val)
    return out


# sections whose content is replaced wholesale rather than merged key by key
_FREEFORM = ("path", "disturbance")


def load_config(path=None, overrides=()) -> dict:
    """Read a scenario file (or the defaults), then apply ``key=value`` overrides."""
    cfg = default_config()
    if path is not None:
        p = FsPath(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            user = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{p}: top level must be a JSON object")
        cfg = _merge(cfg, user)
    for item in overrides:
        apply_override(cfg, item)
    return cfg


def flat_keys(cfg: dict, prefix: str = "") -> list[str]:
    keys = []
    for key, val in cfg.items():
        full = f"{prefix}{key}"
        if isinstance(val, dict):
            keys.extend(flat_keys(val, full + "."))
        else:
            keys.append(full)
    return keys


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, item: str) -> None:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    valid = flat_keys(cfg)
    if key not in valid:
        raise ConfigError(
            f"unknown config key {key!r}; valid keys are:\n  " + "\n  ".join(sorted(valid))
        )
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = _parse_value(raw)


def set_value(cfg: dict, key: str, value) -> dict:
    """Copy of ``cfg`` with ``key`` replaced; the key must already exist."""
    out = copy.deepcopy(cfg)
    apply_override(out, f"{key}={json.dumps(value)}")
    return out


def build_vessel(sec: dict) -> VesselParams:
    try:
        return VesselParams(
            mass_matrix=np.array(sec["mass_matrix"], dtype=float),
            linear_damping=tuple(sec["linear_damping"]),
            quadratic_damping=tuple(sec["quadratic_damping"]),
            thruster_separation_a=float(sec["thruster_separation_a"]),
            thrust_limit=float(sec["thrust_limit"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"vessel section invalid: {exc}") from exc


def _segment(spec: dict):
    kind = spec.get("type")
    if kind == "line":
        return Line(tuple(spec["start"]), tuple(spec["end"]))
    if kind == "arc":
        return Arc(
            tuple(spec["center"]),
            float(spec["radius"]),
            float(spec["start_angle"]),
            float(spec["end_angle"]),
            spec.get("direction", "ccw"),
        )
    raise ConfigError(f"unknown segment type {kind!r}")


def build_path(sec: dict) -> Path:
    kind = sec.get("type", "waypoints")
    sw = float(sec.get("switching_radius", 2.0))
    try:
        if kind == "lawnmower":
            return lawnmower(
                float(sec["leg_length"]),
                float(sec["turn_radius"]),
                int(sec.get("legs", 3)),
                tuple(sec.get("origin", (0.0, 0.0))),
                float(sec.get("heading", 0.0)),
                sec.get("first_turn", "cw"),
                sw,
            )
        if kind == "waypoints":
            return fillet_polyline(sec["waypoints"], sec.get("corner_radii"), sw)
        if kind == "segments":
            return Path(tuple(_segment(s) for s in sec["segments"]), sw)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"path section invalid: missing or bad field {exc}") from exc
    except PathError as exc:
        raise ConfigError(f"path section invalid: {exc}") from exc
    raise ConfigError(f"unknown path type {kind!r}; expected lawnmower, waypoints or segments")


def build_guidance(sec: dict) -> tuple[str, GuidanceParams]:
    sec = dict(sec)
    law = sec.pop("law", "vfalos")
    if law not in LAWS:
        raise ConfigError(f"unknown guidance law {law!r}; expected one of {', '.join(LAWS)}")
    try:
        return law, GuidanceParams(**sec)
    except TypeError as exc:
        raise ConfigError(f"guidance section invalid: {exc}") from exc


def build_gains(sec: dict) -> PidGains:
    try:
        return PidGains(**sec)
    except TypeError as exc:
        raise ConfigError(f"control gains invalid: {exc}") from exc


@dataclass(frozen=True)
class SimSettings:
    dt: float
    duration: float
    seed: int
    initial_state: VesselState
    convergence_eps: float = 0.5
    convergence_dwell: float = 5.0
    overshoot_window: float = 20.0
    overshoot_after: str = "turn_exit"
    steady_window: float = 30.0

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


def build_sim(sec: dict) -> SimSettings:
    sec = dict(sec)
    try:
        init = VesselState(**sec.pop("initial_state", {}))
        settings = SimSettings(initial_state=init, **sec)
    except TypeError as exc:
        raise ConfigError(f"sim section invalid: {exc}") from exc
    if not (math.isfinite(settings.dt) and settings.dt > 0):
        raise ConfigError("sim.dt must be > 0")
    if not settings.duration >= 0:
        raise ConfigError("sim.duration must be >= 0")
    if 0 < settings.duration < settings.dt:
        raise ConfigError("sim.dt must not exceed sim.duration")
    if settings.overshoot_after not in ("turn_exit", "all"):
        raise ConfigError("sim.overshoot_after must be 'turn_exit' or 'all'")
    return settings


@dataclass(frozen=True)
class Scenario:
    """Fully validated scenario, ready for :func:`vfalos.sim.run_scenario`."""

    vessel: VesselParams
    path: Path
    law: str
    guidance: GuidanceParams
    heading_gains: PidGains
    speed_gains: PidGains
    allow_reverse: bool
    disturbance: Any
    sim: SimSettings
    raw: dict


def build_scenario(cfg: dict) -> Scenario:
    law, gparams = build_guidance(cfg["guidance"])
    ctrl = cfg["control"]
    return Scenario(
        vessel=build_vessel(cfg["vessel"]),
        path=build_path(cfg["path"]),
        law=law,
        guidance=gparams,
        heading_gains=build_gains(ctrl["heading"]),
        speed_gains=build_gains(ctrl["speed"]),
        allow_reverse=bool(ctrl.get("allow_reverse", False)),
        disturbance=dist.from_dict(cfg.get("disturbance")),
        sim=build_sim(cfg["sim"]),
        raw=cfg,
    )
