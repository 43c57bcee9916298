"""Exact 2-D primitives: disks, tangent constructions, angular-interval arithmetic.

All functions here are pure and operate on immutable values.  Angles are
radians on [0, 2*pi).  Two tolerances are used throughout the package:
``EPS_GEOM`` for numeric residuals of geometric constructions and
``EPS_POS`` for protocol-level position tests (line membership, alignment).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

TAU = 2.0 * math.pi

EPS_GEOM = 1e-9     # tangency / intersection residual tolerance
EPS_POS = 1e-6      # protocol line-membership and alignment tolerance
EPS_ARC = 1e-9      # minimum surviving arc measure that counts as visible
EPS_SLIVER = 1e-12  # angular intervals below this measure are dropped


class GeometryError(ValueError):
    """Degenerate input to a geometric construction."""


class ConcentricDisks(GeometryError):
    pass


class ContainedDisk(GeometryError):
    pass


class OverlappingDisks(GeometryError):
    pass


class Point(NamedTuple):
    x: float
    y: float

    def __add__(self, other):
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point(self.x - other[0], self.y - other[1])

    def scaled(self, k: float) -> "Point":
        return Point(self.x * k, self.y * k)

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1]

    def cross(self, other) -> float:
        return self.x * other[1] - self.y * other[0]

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def unit(self) -> "Point":
        n = self.norm()
        if n <= 0.0:
            raise GeometryError("cannot normalize zero vector")
        return Point(self.x / n, self.y / n)

    def perp(self) -> "Point":
        """Rotate by +90 degrees."""
        return Point(-self.y, self.x)


class Disk(NamedTuple):
    center: Point
    radius: float


class DirectedLine(NamedTuple):
    """Line through ``point`` with unit ``direction``; left side is positive."""

    point: Point
    direction: Point

    def signed_distance(self, p: Point) -> float:
        return self.direction.cross(p - self.point)


class TangentLine(NamedTuple):
    line: DirectedLine
    touch_a: Point  # on the first disk
    touch_b: Point  # on the second disk


class HalfPlane(NamedTuple):
    """Constraint n . p >= c.  ``n`` is a unit normal."""

    nx: float
    ny: float
    c: float

    def value(self, p) -> float:
        return self.nx * p[0] + self.ny * p[1] - self.c


def _common_tangents(a: Disk, b: Disk, lam: float, internal: bool):
    """Shared construction: unit normals n with n . (b-a) = lam * |b-a|."""
    delta = b.center - a.center
    d = delta.norm()
    u = Point(delta.x / d, delta.y / d)
    v = u.perp()
    mu = math.sqrt(max(0.0, 1.0 - lam * lam))
    out = []
    sb = -1.0 if internal else 1.0
    for sign in (1.0, -1.0):
        n = Point(lam * u.x + sign * mu * v.x, lam * u.y + sign * mu * v.y)
        # both touch offsets point from center toward the line foot
        ta = a.center - n.scaled(a.radius)
        tb = b.center - n.scaled(sb * b.radius)
        direction = Point(n.y, -n.x)
        if direction.dot(delta) < 0.0:
            direction = Point(-direction.x, -direction.y)
        out.append(TangentLine(DirectedLine(ta, direction), ta, tb))
    return tuple(out)


def direct_tangents(a: Disk, b: Disk) -> tuple[TangentLine, TangentLine]:
    """Two external tangent lines touching both circles on the same side.

    Raises ConcentricDisks / ContainedDisk when the construction degenerates.
    """
    delta = b.center - a.center
    d = delta.norm()
    if d <= EPS_GEOM:
        raise ConcentricDisks(f"disks are concentric (center distance {d})")
    if d <= abs(a.radius - b.radius) + EPS_GEOM:
        raise ContainedDisk("one disk contains the other; no direct tangents")
    lam = (b.radius - a.radius) / d
    return _common_tangents(a, b, lam, internal=False)


def transverse_tangents(a: Disk, b: Disk) -> tuple[TangentLine, TangentLine]:
    """Two internal tangent lines crossing between disjoint disks."""
    delta = b.center - a.center
    d = delta.norm()
    if d <= a.radius + b.radius + EPS_GEOM:
        raise OverlappingDisks(
            f"disks too close for transverse tangents (distance {d})")
    lam = -(a.radius + b.radius) / d
    return _common_tangents(a, b, lam, internal=True)


def tangent_halfplane(line: TangentLine, disk: Disk) -> HalfPlane:
    """Half-plane bounded by the tangent line with ``disk`` on the inside."""
    d = line.line.direction
    n = Point(-d.y, d.x)  # left normal
    c = n.dot(line.line.point)
    if n.dot(disk.center) - c < 0.0:
        n = Point(-n.x, -n.y)
        c = -c
    return HalfPlane(n.x, n.y, c)


def circle_halfplane_cut_angles(disk: Disk, plane: HalfPlane) -> list[float]:
    """Angles where the plane's boundary line crosses the circle."""
    t = plane.value(disk.center)
    if abs(t) >= disk.radius:
        return []
    foot = Point(disk.center.x - t * plane.nx, disk.center.y - t * plane.ny)
    h = math.sqrt(max(0.0, disk.radius * disk.radius - t * t))
    along = Point(-plane.ny, plane.nx)
    out = []
    for s in (1.0, -1.0):
        p = Point(foot.x + s * h * along.x, foot.y + s * h * along.y)
        out.append(math.atan2(p.y - disk.center.y, p.x - disk.center.x) % TAU)
    return out


@dataclass(frozen=True)
class BadRegion:
    """Region of the plane that shadows the observer's camera.

    ``kind`` is "type1" (single obstruction, bounded by the two direct
    tangents from the camera to the obstruction plus a near gate at the
    tangency chord) or "type2" (a left/right obstruction pair, the complement
    of the open wedge of the transverse tangents that holds the camera).
    Membership at an exact boundary counts as inside, so ties trim more.
    """

    kind: str
    boundary: tuple[DirectedLine, DirectedLine]
    planes: tuple[HalfPlane, ...]

    def contains(self, p) -> bool:
        if self.kind == "type1":
            return all(h.value(p) >= 0.0 for h in self.planes)
        return self.planes[0].value(p) * self.planes[1].value(p) >= 0.0

    def cut_angles(self, disk: Disk) -> list[float]:
        angles = []
        for h in self.planes:
            angles.extend(circle_halfplane_cut_angles(disk, h))
        return angles


def type1_region(camera: Disk, obstruction: Disk) -> BadRegion:
    """Shadow of a single obstruction body as seen by the camera disk."""
    t1, t2 = direct_tangents(camera, obstruction)
    planes = [tangent_halfplane(t1, obstruction),
              tangent_halfplane(t2, obstruction)]
    # near gate: beyond the chord of the two tangency points on the body
    u = (obstruction.center - camera.center).unit()
    gate = HalfPlane(u.x, u.y, u.dot(t1.touch_b))
    planes.append(gate)
    return BadRegion("type1", (t1.line, t2.line), tuple(planes))


def type2_region(left: Disk, right: Disk) -> BadRegion:
    """Joint shadow of an obstruction pair: the two transverse-tangent sectors
    that contain the bodies.

    From a point in either sector one body partially eclipses the other, so
    the gap between them is closed; from the two empty sectors the gap is an
    open corridor.  Membership is the product-sign test against the tangent
    lines, which makes a touching pair (a single common tangent, gap closed
    from everywhere) degenerate to the whole plane.
    """
    d = (right.center - left.center).norm()
    if d <= left.radius + right.radius + EPS_GEOM:
        u = (right.center - left.center).unit()
        touch = left.center + u.scaled(left.radius)
        line = DirectedLine(touch, u.perp())
        h = HalfPlane(u.x, u.y, u.dot(touch))
        # duplicated plane: s * s >= 0 holds everywhere
        return BadRegion("type2", (line, line), (h, h))
    t1, t2 = transverse_tangents(left, right)
    planes = []
    for t in (t1, t2):
        dvec = t.line.direction
        n = Point(-dvec.y, dvec.x)
        planes.append(HalfPlane(n.x, n.y, n.dot(t.line.point)))
    # orient so the disk-bearing sectors have positive product
    if planes[0].value(left.center) * planes[1].value(left.center) < 0.0:
        h = planes[0]
        planes[0] = HalfPlane(-h.nx, -h.ny, -h.c)
    return BadRegion("type2", (t1.line, t2.line), tuple(planes))


def _normalize_intervals(raw) -> tuple[tuple[float, float], ...]:
    """Split wrapping intervals at 0, sort, drop slivers."""
    pieces = []
    for start, end in raw:
        length = end - start
        if length <= EPS_SLIVER:
            continue
        if length >= TAU - EPS_SLIVER:
            return ((0.0, TAU),)
        s = start % TAU
        e = s + length
        if e <= TAU:
            pieces.append((s, e))
        else:
            pieces.append((s, TAU))
            pieces.append((0.0, e - TAU))
    pieces = [p for p in pieces if p[1] - p[0] > EPS_SLIVER]
    pieces.sort()
    return tuple(pieces)


@dataclass(frozen=True)
class ArcSet:
    """Disjoint angular intervals on a circle, normalized to [0, 2*pi)."""

    circle: Disk
    intervals: tuple[tuple[float, float], ...]

    @classmethod
    def full(cls, circle: Disk) -> "ArcSet":
        return cls(circle, ((0.0, TAU),))

    @classmethod
    def empty(cls, circle: Disk) -> "ArcSet":
        return cls(circle, ())

    @classmethod
    def from_span(cls, circle: Disk, start: float, end: float) -> "ArcSet":
        """Arc running counterclockwise from ``start`` to ``end``."""
        length = (end - start) % TAU
        if length == 0.0:
            length = TAU
        return cls(circle, _normalize_intervals([(start, start + length)]))

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def point_at(self, angle: float) -> Point:
        c = self.circle
        return Point(c.center.x + c.radius * math.cos(angle),
                     c.center.y + c.radius * math.sin(angle))

    def contains_angle(self, angle: float) -> bool:
        a = angle % TAU
        return any(lo <= a < hi for lo, hi in self.intervals)


def clip_arc_by_region(arc: ArcSet, region: BadRegion) -> ArcSet:
    """Remove the portion of ``arc`` lying inside ``region``.

    Boundary crossings come from circle/line intersections; each sub-arc is
    classified by a midpoint membership test.
    """
    if not arc.intervals:
        return arc
    cuts = sorted(a % TAU for a in region.cut_angles(arc.circle))
    kept = []
    for lo, hi in arc.intervals:
        marks = [lo] + [c for c in cuts if lo < c < hi] + [hi]
        for a, b in zip(marks, marks[1:]):
            if b - a <= EPS_SLIVER:
                continue
            mid = arc.point_at(0.5 * (a + b))
            if not region.contains(mid):
                kept.append((a, b))
    return ArcSet(arc.circle, _normalize_intervals(kept))


def segment_point_distance(seg: tuple[Point, Point], p) -> float:
    """Euclidean distance from ``p`` to the closed segment ``seg``."""
    (ax, ay), (bx, by) = seg
    dx, dy = bx - ax, by - ay
    px, py = p[0] - ax, p[1] - ay
    denom = dx * dx + dy * dy
    if denom <= 0.0:
        return math.hypot(px, py)
    t = (px * dx + py * dy) / denom
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(px - t * dx, py - t * dy)


def tangent_rays_from_point(p: Point, disk: Disk):
    """Tangent ray directions from an external point, (right, left).

    The right ray passes the disk on its right flank (disk on the ray's
    left); a point exactly on the circle yields the single tangent twice.
    """
    to_c = disk.center - p
    d = to_c.norm()
    if d < disk.radius - EPS_GEOM:
        raise GeometryError("point inside disk has no tangents")
    ratio = min(1.0, disk.radius / d)
    alpha = math.asin(ratio)
    base = math.atan2(to_c.y, to_c.x)
    right = Point(math.cos(base - alpha), math.sin(base - alpha))
    left = Point(math.cos(base + alpha), math.sin(base + alpha))
    return right, left
