"""Angle helpers shared across the package."""

import math

import numpy as np


def wrap(angle):
    """Wrap an angle (scalar or array) to the half-open interval (-pi, pi]."""
    if np.ndim(angle) == 0:
        if -math.pi < angle <= math.pi:
            return float(angle)
        a = math.fmod(float(angle) + math.pi, 2.0 * math.pi)
        if a <= 0.0:
            a += 2.0 * math.pi
        a -= math.pi
        return a if a > -math.pi else math.pi
    x = np.asarray(angle, dtype=float)
    a = np.mod(x + np.pi, 2.0 * np.pi)
    a = np.where(a <= 0.0, a + 2.0 * np.pi, a) - np.pi
    return np.where((x > -np.pi) & (x <= np.pi), x, a)
