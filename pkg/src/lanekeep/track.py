"""Parametric closed test track and the path queries used by the controller.

The track is the six-piece loop made of one large half circle, two straights
of length ``L`` joined by two quarter circles and a short top straight.  The
pieces follow the order ``r12, r23, r34, r45, r56, r61``; in that order the
loop is driven clockwise.  A counterclockwise loop is obtained by mirroring
the whole path about the symmetry axis ``x = x_c``, which keeps the start on
the large arc.

Sign conventions: heading is counterclockwise positive, curvature is
``dpsi/ds`` (negative on a clockwise turn), lateral error and lookahead
heading error are positive to the left of the direction of travel.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

TWO_PI = 2.0 * math.pi

Lane = Literal["centerline", "inner_lane", "outer_lane"]
Direction = Literal["clockwise", "counterclockwise"]


# intersections this close (m) to a section end are snapped onto it
_JOIN_TOL = 1e-12


class TrackError(ValueError):
    """Invalid track parameters."""


class OffTrackError(RuntimeError):
    """Pose is farther from the path than the capture radius."""


class NoLookaheadError(RuntimeError):
    """The lookahead circle does not cut the path ahead of the vehicle."""


def wrap_angle(angle: float) -> float:
    """Wrap an angle to ``(-pi, pi]``."""
    a = math.remainder(angle, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    return a


@dataclass(frozen=True)
class TrackParams:
    """Geometric parameters of the test track (all in metres)."""

    x_c: float = 1.5
    m: float = 0.25
    w: float = 0.37
    L: float = 2.0
    R_c: float = 1.04
    r_c: float = 0.65

    def __post_init__(self):
        for name in ("x_c", "m", "w", "L", "R_c", "r_c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise TrackError(f"{name} > 0 violated ({name}={value!r})")
        if not self.r_c < self.R_c:
            raise TrackError(f"r_c < R_c violated (r_c={self.r_c}, R_c={self.R_c})")
        if not self.w < 2.0 * self.r_c:
            raise TrackError(f"w < 2*r_c violated (w={self.w}, r_c={self.r_c})")

    @property
    def R_i(self) -> float:
        return self.R_c - self.w / 2

    @property
    def R_e(self) -> float:
        return self.R_c + self.w / 2

    @property
    def r_i(self) -> float:
        return self.r_c - self.w / 2

    @property
    def r_e(self) -> float:
        return self.r_c + self.w / 2


@dataclass(frozen=True)
class PoseG:
    """Global pose of the rear axle midpoint."""

    x: float
    y: float
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(self.psi))


@dataclass(frozen=True)
class PathPoint:
    s: float
    x: float
    y: float
    psi: float
    kappa: float

    @property
    def rho(self) -> float:
        """Radius of curvature, infinite on straights."""
        return math.inf if self.kappa == 0.0 else 1.0 / self.kappa


@dataclass(frozen=True)
class LocalError:
    """Vehicle pose expressed in path coordinates."""

    s: float
    e_y: float
    e_psi: float


@dataclass(frozen=True)
class Segment:
    kind = "segment"
    s_start: float
    start: tuple[float, float]
    end: tuple[float, float]

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def s_end(self) -> float:
        return self.s_start + self.length

    @property
    def curvature(self) -> float:
        return 0.0

    def _tangent(self):
        ln = self.length
        return (self.end[0] - self.start[0]) / ln, (self.end[1] - self.start[1]) / ln

    def evaluate(self, u: float) -> tuple[float, float, float]:
        tx, ty = self._tangent()
        return self.start[0] + u * tx, self.start[1] + u * ty, math.atan2(ty, tx)

    def closest(self, x: float, y: float) -> float:
        tx, ty = self._tangent()
        u = (x - self.start[0]) * tx + (y - self.start[1]) * ty
        return min(max(u, 0.0), self.length)

    def circle_hits(self, cx: float, cy: float, radius: float) -> list[float]:
        tx, ty = self._tangent()
        px, py = self.start[0] - cx, self.start[1] - cy
        b = px * tx + py * ty
        c = px * px + py * py - radius * radius
        disc = b * b - c
        if disc < 0.0:
            return []
        root = math.sqrt(disc)
        ln = self.length
        # endpoints shared with the neighbouring section are kept despite roundoff
        return [min(max(u, 0.0), ln) for u in (-b - root, -b + root)
                if -_JOIN_TOL <= u <= ln + _JOIN_TOL]

    def mirrored(self, axis_x: float, s_start: float) -> "Segment":
        return Segment(s_start, (2 * axis_x - self.start[0], self.start[1]),
                       (2 * axis_x - self.end[0], self.end[1]))


@dataclass(frozen=True)
class Arc:
    """Circular arc starting at polar angle ``theta0`` and sweeping ``sweep``
    radians in direction ``turn`` (+1 counterclockwise, -1 clockwise)."""

    kind = "arc"
    s_start: float
    center: tuple[float, float]
    radius: float
    theta0: float
    sweep: float
    turn: int

    @property
    def length(self) -> float:
        return self.radius * self.sweep

    @property
    def s_end(self) -> float:
        return self.s_start + self.length

    @property
    def curvature(self) -> float:
        return self.turn / self.radius

    def evaluate(self, u: float) -> tuple[float, float, float]:
        theta = self.theta0 + self.turn * u / self.radius
        x = self.center[0] + self.radius * math.cos(theta)
        y = self.center[1] + self.radius * math.sin(theta)
        return x, y, theta + self.turn * math.pi / 2

    def _offset(self, theta: float) -> float:
        # angular progress from theta0 along the sweep direction, in [0, 2pi)
        return (self.turn * (theta - self.theta0)) % TWO_PI

    def closest(self, x: float, y: float) -> float:
        theta = math.atan2(y - self.center[1], x - self.center[0])
        off = self._offset(theta)
        if off <= self.sweep:
            return self.radius * off
        # outside the sweep: nearer end by angle
        return self.length if off - self.sweep < TWO_PI - off else 0.0

    def circle_hits(self, cx: float, cy: float, radius: float) -> list[float]:
        dx, dy = cx - self.center[0], cy - self.center[1]
        d = math.hypot(dx, dy)
        R = self.radius
        if d == 0.0 or d > R + radius or d < abs(R - radius):
            return []
        cos_half = (R * R + d * d - radius * radius) / (2.0 * R * d)
        half = math.acos(min(1.0, max(-1.0, cos_half)))
        base = math.atan2(dy, dx)
        hits = []
        for theta in (base - half, base + half):
            off = self._offset(theta)
            if off <= self.sweep:
                hits.append(R * off)
            elif R * (off - self.sweep) <= _JOIN_TOL:
                hits.append(self.length)
            elif R * (TWO_PI - off) <= _JOIN_TOL:
                hits.append(0.0)
        return hits

    def mirrored(self, axis_x: float, s_start: float) -> "Arc":
        return Arc(s_start, (2 * axis_x - self.center[0], self.center[1]),
                   self.radius, math.pi - self.theta0, self.sweep, -self.turn)


Section = Union[Segment, Arc]


@dataclass(frozen=True)
class TrackPath:
    """Closed, arc-length parameterised centreline made of arcs and segments."""

    sections: tuple[Section, ...]
    closed: bool = True
    _starts: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_starts", tuple(sec.s_start for sec in self.sections))

    @property
    def total_length(self) -> float:
        return self.sections[-1].s_end

    def section_index(self, s: float) -> int:
        """Index of the section containing ``s`` (already wrapped)."""
        return max(0, bisect.bisect_right(self._starts, s) - 1)

    def wrap_s(self, s: float) -> float:
        total = self.total_length
        s = s % total
        return 0.0 if s >= total else s

    def polyline(self, spacing: float = 0.01) -> np.ndarray:
        """Sample ``(s, x, y, psi, kappa)`` rows every ``spacing`` metres."""
        n = max(2, int(math.ceil(self.total_length / spacing)))
        rows = []
        for s in np.linspace(0.0, self.total_length, n + 1):
            p = point_at(self, float(s))
            rows.append((float(s), p.x, p.y, p.psi, p.kappa))
        return np.array(rows)


def build_test_track(params: TrackParams = TrackParams(), lane: Lane = "centerline",
                     direction: Direction = "clockwise") -> TrackPath:
    """Build the six-piece closed test track.

    Parameters
    ----------
    params:
        Track dimensions.
    lane:
        ``"centerline"`` uses ``R_c, r_c``; ``"inner_lane"`` and
        ``"outer_lane"`` substitute ``R_i, r_i`` and ``R_e, r_e`` into the
        same parametric pieces.
    direction:
        ``"clockwise"`` follows the piece order r12 ... r61.  The
        counterclockwise loop is the mirror image about ``x = x_c``.
    """
    if not isinstance(params, TrackParams):
        raise TrackError("params must be a TrackParams instance")
    if lane == "centerline":
        R, r = params.R_c, params.r_c
    elif lane == "inner_lane":
        R, r = params.R_i, params.r_i
    elif lane == "outer_lane":
        R, r = params.R_e, params.r_e
    else:
        raise TrackError(f"unknown lane {lane!r}")
    if direction not in ("clockwise", "counterclockwise"):
        raise TrackError(f"unknown direction {direction!r}")

    xc, y0, L = params.x_c, params.m + params.R_c, params.L
    pi = math.pi
    pieces = [
        lambda s: Arc(s, (xc, y0), R, 0.0, pi, -1),
        lambda s: Segment(s, (xc - R, y0), (xc - R, y0 + L)),
        lambda s: Arc(s, (xc - R + r, y0 + L), r, -pi, pi / 2, -1),
        lambda s: Segment(s, (xc - R + r, y0 + L + r), (xc + R - r, y0 + L + r)),
        lambda s: Arc(s, (xc + R - r, y0 + L), r, -3 * pi / 2, pi / 2, -1),
        lambda s: Segment(s, (xc + R, y0 + L), (xc + R, y0)),
    ]
    sections: list[Section] = []
    s = 0.0
    for make in pieces:
        sec = make(s)
        if direction == "counterclockwise":
            sec = sec.mirrored(xc, s)
        sections.append(sec)
        s = sec.s_end
    return TrackPath(tuple(sections))


def point_at(track: TrackPath, s: float) -> PathPoint:
    """Evaluate position, heading and curvature at arc length ``s`` (wrapped)."""
    s = track.wrap_s(s)
    sec = track.sections[track.section_index(s)]
    x, y, psi = sec.evaluate(s - sec.s_start)
    return PathPoint(s, x, y, wrap_angle(psi), sec.curvature)


def project(track: TrackPath, pose: PoseG, capture_radius: float = 1.0) -> LocalError:
    """Closest-point projection of ``pose`` onto the path.

    Raises
    ------
    OffTrackError
        If the closest path point is farther than ``capture_radius``.
    """
    best = None
    for sec in track.sections:
        u = sec.closest(pose.x, pose.y)
        fx, fy, heading = sec.evaluate(u)
        dist2 = (pose.x - fx) ** 2 + (pose.y - fy) ** 2
        if best is None or dist2 < best[0]:
            best = (dist2, sec.s_start + u, fx, fy, heading)
    dist2, s, fx, fy, heading = best
    if dist2 > capture_radius * capture_radius:
        raise OffTrackError(
            f"pose ({pose.x:.3f}, {pose.y:.3f}) is {math.sqrt(dist2):.3f} m from the path")
    c, sn = math.cos(heading), math.sin(heading)
    e_y = c * (pose.y - fy) - sn * (pose.x - fx)
    return LocalError(track.wrap_s(s), e_y, wrap_angle(pose.psi - heading))


def lookahead_point(track: TrackPath, rear: PoseG, lookahead: float, s_hint: float) -> PathPoint:
    """Furthest-forward intersection of the lookahead circle with the path.

    Progress is measured along the path from ``s_hint``; only intersections
    within half a track length ahead of the hint are eligible.
    """
    total = track.total_length
    hits = []
    for sec in track.sections:
        for u in sec.circle_hits(rear.x, rear.y, lookahead):
            hits.append((sec, u))
    if len(hits) < 2:
        raise NoLookaheadError(
            f"lookahead circle of radius {lookahead} cuts the path {len(hits)} time(s)")
    best = None
    for sec, u in hits:
        progress = (sec.s_start + u - s_hint) % total
        if progress <= total / 2 and (best is None or progress > best[0]):
            best = (progress, sec, u)
    if best is None:
        raise NoLookaheadError("no lookahead intersection ahead of the vehicle")
    _, sec, u = best
    x, y, psi = sec.evaluate(u)
    return PathPoint(track.wrap_s(sec.s_start + u), x, y, wrap_angle(psi), sec.curvature)


def lhe_global(track: TrackPath, rear: PoseG, lookahead: float, s_hint: float) -> float:
    """Lookahead heading error from global pose; positive when the point is to the left."""
    p = lookahead_point(track, rear, lookahead, s_hint)
    return wrap_angle(math.atan2(p.y - rear.y, p.x - rear.x) - rear.psi)


def lle_straight(e_y: float, e_psi: float, lookahead: float) -> float:
    """Lookahead lateral error on a straight path.

    The arguments are the path's offset and heading as seen from the vehicle,
    which is the opposite sign of what :func:`project` reports.  For a pose
    with projected errors ``(e_y, e_psi)`` the heading error is therefore
    ``arcsin(lle_straight(-e_y, -e_psi, L_d) / L_d)``.
    """
    if abs(e_y) > lookahead:
        raise ValueError(f"|e_y| = {abs(e_y)} exceeds the lookahead distance {lookahead}")
    return e_y * math.cos(e_psi) + math.sqrt(lookahead * lookahead - e_y * e_y) * math.sin(e_psi)
