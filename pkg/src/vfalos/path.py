"""Desired-path geometry: line and arc segments, projection, cross-track error.

Points are ``(north, east)`` tuples. Tangent and azimuth angles are measured
from north towards east, like vessel yaw. An arc that is followed with
decreasing azimuth (left turn on a north-up map) is ``"ccw"``; its path
tangent is ``azimuth - pi/2``. A ``"cw"`` arc has tangent ``azimuth + pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

from .angles import wrap

TWO_PI = 2.0 * math.pi


class PathError(ValueError):
    """Invalid path construction."""


class DegenerateProjection(ArithmeticError):
    """Position coincides with an arc centre, so the azimuth is undefined."""


@dataclass(frozen=True)
class Line:
    start: tuple
    end: tuple

    def __post_init__(self):
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", (float(self.end[0]), float(self.end[1])))
        if self.start == self.end:
            raise PathError("line segment start and end coincide")

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    @property
    def heading(self) -> float:
        return math.atan2(self.end[1] - self.start[1], self.end[0] - self.start[0])

    def start_tangent(self) -> float:
        return self.heading

    def end_tangent(self) -> float:
        return self.heading

    def point_at(self, s: float) -> tuple:
        f = s / self.length
        return (
            self.start[0] + f * (self.end[0] - self.start[0]),
            self.start[1] + f * (self.end[1] - self.start[1]),
        )

    def tangent_at(self, s: float) -> float:
        return self.heading


@dataclass(frozen=True)
class Arc:
    center: tuple
    radius_r: float
    start_angle: float
    end_angle: float
    direction: str = "ccw"

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.radius_r > 0.0:
            raise PathError("arc radius must be > 0")
        if self.direction not in ("cw", "ccw"):
            raise PathError(f"arc direction must be 'cw' or 'ccw', got {self.direction!r}")

    @property
    def sign(self) -> int:
        """+1 for ccw (cross-track error = d - r), -1 for cw."""
        return 1 if self.direction == "ccw" else -1

    @property
    def extent(self) -> float:
        """Swept angle in the direction of travel, in (0, 2*pi]."""
        if self.direction == "ccw":
            sweep = (self.start_angle - self.end_angle) % TWO_PI
        else:
            sweep = (self.end_angle - self.start_angle) % TWO_PI
        return sweep if sweep > 1e-12 else TWO_PI

    @property
    def length(self) -> float:
        return self.radius_r * self.extent

    def _point(self, azimuth: float) -> tuple:
        return (
            self.center[0] + self.radius_r * math.cos(azimuth),
            self.center[1] + self.radius_r * math.sin(azimuth),
        )

    @property
    def start(self) -> tuple:
        return self._point(self.start_angle)

    @property
    def end(self) -> tuple:
        return self._point(self.end_angle)

    def tangent_of_azimuth(self, azimuth: float) -> float:
        return wrap(azimuth - self.sign * math.pi / 2.0)

    def start_tangent(self) -> float:
        return self.tangent_of_azimuth(self.start_angle)

    def end_tangent(self) -> float:
        return self.tangent_of_azimuth(self.end_angle)

    def azimuth_at(self, s: float) -> float:
        return self.start_angle - self.sign * s / self.radius_r

    def point_at(self, s: float) -> tuple:
        return self._point(self.azimuth_at(s))

    def tangent_at(self, s: float) -> float:
        return self.tangent_of_azimuth(self.azimuth_at(s))

    def progress(self, azimuth: float) -> float:
        """Angle travelled from the start to ``azimuth``, in [0, 2*pi)."""
        return (self.sign * (self.start_angle - azimuth)) % TWO_PI


PathSegment = Union[Line, Arc]


@dataclass(frozen=True)
class Path:
    segments: tuple
    switching_radius: float = 2.0
    continuity_tol: float = 1e-6

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise PathError("path needs at least one segment")
        if not self.switching_radius > 0.0:
            raise PathError("switching_radius must be > 0")
        for i in range(len(segs) - 1):
            gap = math.dist(segs[i].end, segs[i + 1].start)
            if gap > self.continuity_tol:
                raise PathError(f"segments {i} and {i + 1} are discontinuous (gap {gap:.3g} m)")
        object.__setattr__(self, "segments", segs)

    def __len__(self) -> int:
        return len(self.segments)

    def __getitem__(self, i: int) -> PathSegment:
        return self.segments[i]

    @property
    def length(self) -> float:
        return sum(seg.length for seg in self.segments)


class ProjectionResult(NamedTuple):
    point_p: tuple
    tangent_gamma_p: float
    cross_track_ye: float
    dist_to_center_d: float  # nan on lines
    azimuth_gamma_c: float  # nan on lines
    segment_index: int
    along_track: float  # arc length from segment start to point_p


class TurnRadius(NamedTuple):
    radius: float  # math.inf for a straight stretch
    direction: int  # +1 heading increasing, -1 decreasing, 0 straight

    @property
    def straight(self) -> bool:
        return math.isinf(self.radius)


def cross_track_error(pos, point_p, gamma_p: float) -> float:
    """Signed lateral offset of ``pos`` from the path tangent line through ``point_p``.

    Positive when the vehicle lies to the right of the tangent direction in
    the NED plane (east of a northbound path).
    """
    return -(pos[0] - point_p[0]) * math.sin(gamma_p) + (pos[1] - point_p[1]) * math.cos(gamma_p)


def _project_line(seg: Line, pos) -> tuple:
    dn, de = seg.end[0] - seg.start[0], seg.end[1] - seg.start[1]
    L2 = dn * dn + de * de
    t = ((pos[0] - seg.start[0]) * dn + (pos[1] - seg.start[1]) * de) / L2
    t = min(max(t, 0.0), 1.0)
    p = (seg.start[0] + t * dn, seg.start[1] + t * de)
    return p, seg.heading, t * math.sqrt(L2)


def project(path: Path, pos, active_segment: int) -> ProjectionResult:
    """Closest point on the active segment and the associated path errors."""
    seg = path.segments[active_segment]
    if isinstance(seg, Line):
        p, gamma_p, s = _project_line(seg, pos)
        ye = cross_track_error(pos, p, gamma_p)
        return ProjectionResult(p, gamma_p, ye, math.nan, math.nan, active_segment, s)
    dn, de = pos[0] - seg.center[0], pos[1] - seg.center[1]
    d = math.hypot(dn, de)
    if d == 0.0:
        raise DegenerateProjection("position is exactly at the arc centre")
    gamma_c = math.atan2(de, dn)
    p = seg._point(gamma_c)
    gamma_p = seg.tangent_of_azimuth(gamma_c)
    ye = cross_track_error(pos, p, gamma_p)
    s = seg.progress(gamma_c) * seg.radius_r
    return ProjectionResult(p, gamma_p, ye, d, gamma_c, active_segment, s)


def _passed_end(seg: PathSegment, pos) -> bool:
    if isinstance(seg, Line):
        dn, de = seg.end[0] - seg.start[0], seg.end[1] - seg.start[1]
        return (pos[0] - seg.end[0]) * dn + (pos[1] - seg.end[1]) * de >= 0.0
    if seg.extent >= TWO_PI:
        return False
    dn, de = pos[0] - seg.center[0], pos[1] - seg.center[1]
    if dn == 0.0 and de == 0.0:
        return False
    prog = seg.progress(math.atan2(de, dn))
    # the unswept gap is split between "not started" and "overrun"
    return seg.extent <= prog < seg.extent + 0.5 * (TWO_PI - seg.extent)


def advance_segment(path: Path, pos, active_segment: int) -> tuple[int, bool]:
    """Waypoint switching. Returns ``(segment_index, path_complete)``.

    The active segment is left when the vehicle enters the acceptance circle
    around its endpoint, or when it has passed the endpoint along the segment
    (so a wide overshoot cannot stall progress).
    """
    seg = path.segments[active_segment]
    reached = math.dist(pos, seg.end) <= path.switching_radius or _passed_end(seg, pos)
    if not reached:
        return active_segment, False
    if active_segment + 1 < len(path.segments):
        return active_segment + 1, False
    return active_segment, True


def turn_radius(p, p_next, gamma_p: float, gamma_p_next: float) -> TurnRadius:
    """Radius of the circle through two path points with the given tangents."""
    dgamma = wrap(gamma_p_next - gamma_p)
    if dgamma == 0.0:
        return TurnRadius(math.inf, 0)
    r = math.dist(p, p_next) / (2.0 * math.sin(dgamma / 2.0))
    return TurnRadius(abs(r), 1 if r > 0 else -1)


def locate(path: Path, segment: int, s: float) -> tuple[int, float]:
    """Walk ``s`` metres forward from the start of ``segment`` (clamped at the path end)."""
    while s > path.segments[segment].length and segment + 1 < len(path.segments):
        s -= path.segments[segment].length
        segment += 1
    return segment, min(s, path.segments[segment].length)


def estimate_radius(path: Path, proj: ProjectionResult, lookahead: float) -> TurnRadius:
    """Local path radius from the projection point and a point ``lookahead`` metres ahead.

    The pair is chosen by arc length along the path; ``lookahead`` is the
    tuning knob for which "next point" is used.
    """
    seg_i, s = locate(path, proj.segment_index, proj.along_track + lookahead)
    seg = path.segments[seg_i]
    p_next = seg.point_at(s)
    return turn_radius(proj.point_p, p_next, proj.tangent_gamma_p, seg.tangent_at(s))


def fillet_polyline(waypoints: Sequence, radii=None, switching_radius: float = 2.0) -> Path:
    """Polyline through ``waypoints`` with interior corners rounded by circular arcs.

    ``radii`` gives one fillet radius per interior waypoint (0 or None keeps a
    sharp corner).
    """
    pts = [(float(p[0]), float(p[1])) for p in waypoints]
    if len(pts) < 2:
        raise PathError("need at least two waypoints")
    n_inner = len(pts) - 2
    radii = list(radii) if radii is not None else [0.0] * n_inner
    if len(radii) != n_inner:
        raise PathError(f"expected {n_inner} corner radii, got {len(radii)}")

    segments: list = []
    cursor = pts[0]
    for i in range(1, len(pts) - 1):
        prev, w, nxt = pts[i - 1], pts[i], pts[i + 1]
        h_in = math.atan2(w[1] - prev[1], w[0] - prev[0])
        h_out = math.atan2(nxt[1] - w[1], nxt[0] - w[0])
        theta = wrap(h_out - h_in)
        R = radii[i - 1] or 0.0
        if R <= 0.0 or abs(theta) < 1e-12:
            if math.dist(cursor, w) > 0.0:
                segments.append(Line(cursor, w))
            cursor = w
            continue
        if abs(theta) >= math.pi - 1e-9:
            raise PathError(f"cannot fillet a reversal at waypoint {i}")
        t = R * math.tan(abs(theta) / 2.0)
        if t > math.dist(cursor, w) + 1e-9 or t > math.dist(w, nxt) + 1e-9:
            raise PathError(f"corner radius {R} too large at waypoint {i}")
        p1 = (w[0] - t * math.cos(h_in), w[1] - t * math.sin(h_in))
        p2 = (w[0] + t * math.cos(h_out), w[1] + t * math.sin(h_out))
        turn = 1 if theta > 0 else -1  # +1: heading increases (cw)
        normal = h_in + turn * math.pi / 2.0
        c = (p1[0] + R * math.cos(normal), p1[1] + R * math.sin(normal))
        if math.dist(cursor, p1) > 1e-9:
            segments.append(Line(cursor, p1))
        segments.append(
            Arc(
                c,
                R,
                math.atan2(p1[1] - c[1], p1[0] - c[0]),
                math.atan2(p2[1] - c[1], p2[0] - c[0]),
                "cw" if turn > 0 else "ccw",
            )
        )
        cursor = p2
    if math.dist(cursor, pts[-1]) > 0.0:
        segments.append(Line(cursor, pts[-1]))
    return Path(tuple(segments), switching_radius)


def lawnmower(
    leg_length: float,
    turn_radius_m: float,
    legs: int = 3,
    origin=(0.0, 0.0),
    heading: float = 0.0,
    first_turn: str = "cw",
    switching_radius: float = 2.0,
) -> Path:
    """Back-and-forth survey pattern joined by semicircular turns."""
    if legs < 1:
        raise PathError("lawnmower needs at least one leg")
    segments: list = []
    start = (float(origin[0]), float(origin[1]))
    h = heading
    turn = 1 if first_turn == "cw" else -1
    for leg in range(legs):
        end = (start[0] + leg_length * math.cos(h), start[1] + leg_length * math.sin(h))
        segments.append(Line(start, end))
        if leg == legs - 1:
            break
        normal = h + turn * math.pi / 2.0
        c = (end[0] + turn_radius_m * math.cos(normal), end[1] + turn_radius_m * math.sin(normal))
        a0 = math.atan2(end[1] - c[1], end[0] - c[0])
        a1 = a0 + math.pi
        segments.append(Arc(c, turn_radius_m, a0, a1, "cw" if turn > 0 else "ccw"))
        start = (c[0] + turn_radius_m * math.cos(a1), c[1] + turn_radius_m * math.sin(a1))
        h = wrap(h + math.pi)
        turn = -turn
    return Path(tuple(segments), switching_radius)
