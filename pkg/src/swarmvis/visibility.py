"""Slim-camera visibility: analytic oracle, brute-force sampling oracle, views.

A robot is a unit-radius opaque body with a concentric camera disk of radius
c < 1.  A target is visible when some open segment from the observer's camera
boundary to the target's body boundary avoids every other body and the
observer's own camera.  The analytic oracle reduces this to arc trimming on
the target circle: the candidate arc between the direct-tangent touch points
survives type-1 shadows (one per obstruction) and type-2 shadows (one per
left/right obstruction pair); the target is visible iff some arc remains.

The sampling oracle evaluates the raw definition on a deterministic jittered
grid of boundary points, with a local refinement pass so that thin but real
sight windows are still found.  It can return false negatives for grazing
sight lines, never false positives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import (
    EPS_ARC,
    EPS_GEOM,
    TAU,
    ArcSet,
    Disk,
    Point,
    direct_tangents,
    segment_point_distance,
    type1_region,
    type2_region,
    clip_arc_by_region,
)


class TooClose(ValueError):
    """Camera and target body overlap; impossible in a valid configuration."""


@dataclass(frozen=True)
class VisibilityModel:
    camera_radius: float
    body_radius: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.camera_radius < self.body_radius):
            raise ValueError(
                f"camera radius must lie in (0, {self.body_radius}), "
                f"got {self.camera_radius}")

    def camera(self, center: Point) -> Disk:
        return Disk(center, self.camera_radius)

    def body(self, center: Point) -> Disk:
        return Disk(center, self.body_radius)


class ViewEntry(NamedTuple):
    position: Point
    color: object


class View(NamedTuple):
    observer: int
    entries: tuple[ViewEntry, ...]


def _corridor(camera: Disk, target: Disk):
    """Direct tangents from camera to target body, ordered (left, right).

    Left is the tangent whose target touch point lies counterclockwise of the
    target-to-camera direction.
    """
    if (target.center - camera.center).norm() <= camera.radius + target.radius:
        raise TooClose("camera disk overlaps target body")
    t1, t2 = direct_tangents(camera, target)
    toward = camera.center - target.center
    if toward.cross(t1.touch_b - target.center) >= 0.0:
        return t1, t2
    return t2, t1


def candidate_arc(camera: Disk, target: Disk) -> ArcSet:
    """Near-side arc of the target body bounded by the tangent touch points."""
    t_left, t_right = _corridor(camera, target)
    a1 = math.atan2(t_left.touch_b.y - target.center.y,
                    t_left.touch_b.x - target.center.x)
    a2 = math.atan2(t_right.touch_b.y - target.center.y,
                    t_right.touch_b.x - target.center.x)
    near = camera.center - target.center
    near_angle = math.atan2(near.y, near.x)
    arc = ArcSet.from_span(target, a1, a2)
    if arc.contains_angle(near_angle):
        return arc
    return ArcSet.from_span(target, a2, a1)


def obstruction_sets(camera: Disk, target: Disk,
                     others: Sequence[Disk]) -> tuple[set[int], set[int]]:
    """Indices of bodies blocking the left / right corridor boundary.

    A body obstructs when it intersects the closed tangent segment from the
    camera touch point to the target touch point.
    """
    t_left, t_right = _corridor(camera, target)
    seg_l = (t_left.touch_a, t_left.touch_b)
    seg_r = (t_right.touch_a, t_right.touch_b)
    left, right = set(), set()
    for k, disk in enumerate(others):
        if segment_point_distance(seg_l, disk.center) <= disk.radius:
            left.add(k)
        if segment_point_distance(seg_r, disk.center) <= disk.radius:
            right.add(k)
    return left, right


def surviving_arc(camera: Disk, target: Disk,
                  others: Sequence[Disk]) -> ArcSet:
    """Candidate arc after trimming all type-1 and type-2 shadows."""
    arc = candidate_arc(camera, target)
    left, right = obstruction_sets(camera, target, others)
    if left & right:
        return ArcSet.empty(target)
    for k in sorted(left | right):
        arc = clip_arc_by_region(arc, type1_region(camera, others[k]))
        if not arc.intervals:
            return arc
    for i in sorted(left):
        for j in sorted(right):
            arc = clip_arc_by_region(arc, type2_region(others[i], others[j]))
            if not arc.intervals:
                return arc
    return arc


def _disks_for(config, observer_idx: int, target_idx: int):
    model = config.model
    robots = config.robots
    camera = model.camera(robots[observer_idx].position)
    target = model.body(robots[target_idx].position)
    others = [model.body(r.position) for k, r in enumerate(robots)
              if k not in (observer_idx, target_idx)]
    return camera, target, others


def surviving_arc_measure(observer_idx: int, target_idx: int, config) -> float:
    camera, target, others = _disks_for(config, observer_idx, target_idx)
    return surviving_arc(camera, target, others).measure


def is_visible_analytic(observer_idx: int, target_idx: int, config) -> bool:
    """Analytic visibility verdict for an ordered robot pair."""
    if observer_idx == target_idx:
        return False
    return surviving_arc_measure(observer_idx, target_idx, config) > EPS_ARC


def view_of(robot_idx: int, config) -> View:
    """Snapshot of positions and colors of every robot visible to one robot."""
    entries = []
    for j, robot in enumerate(config.robots):
        if j == robot_idx:
            continue
        if is_visible_analytic(robot_idx, j, config):
            entries.append(ViewEntry(robot.position, robot.color))
    return View(robot_idx, tuple(entries))


# ---------------------------------------------------------------------------
# Sampling oracle (raw definition)
# ---------------------------------------------------------------------------

def _boundary_points(center, radius, m, jitter):
    ang = (np.arange(m) + jitter) * (TAU / m)
    return np.stack([center[0] + radius * np.cos(ang),
                     center[1] + radius * np.sin(ang)], axis=1)


def _segment_clearance(P, Q, cam_c, cam_r, tgt_c, tgt_r, obstacles):
    """Clearance of each segment grid cell; positive means a clear sight line.

    P: (mp, 2) points on the camera boundary; Q: (mq, 2) points on the target
    body boundary.  Clearance is the smallest obstacle margin; segments that
    re-enter the observer camera or the target body are -inf.
    """
    A = P[:, None, :]
    B = Q[None, :, :]
    D = B - A
    # outward at the camera end: direction must not point back into the camera
    out_p = np.einsum("ijk,ijk->ij", D, A - np.asarray(cam_c))
    # outward at the target end: must not re-enter the target body
    out_q = np.einsum("ijk,ijk->ij", -D, B - np.asarray(tgt_c))
    clear = np.full(out_p.shape, np.inf)
    dd = np.einsum("ijk,ijk->ij", D, D)
    dd = np.where(dd <= 0.0, 1.0, dd)
    for (cx, cy, r) in obstacles:
        C = np.array([cx, cy])
        t = ((C - A) * D).sum(axis=2) / dd
        t = np.clip(t, 0.0, 1.0)
        foot = A + t[:, :, None] * D
        dist = np.sqrt(((foot - C) ** 2).sum(axis=2))
        clear = np.minimum(clear, dist - r)
    bad = (out_p < 0.0) | (out_q < 0.0)
    return np.where(bad, -np.inf, clear)


def is_visible_sampled(observer_idx: int, target_idx: int, config,
                       samples_per_boundary: int = 64, seed: int = 0) -> bool:
    """Brute-force oracle over sampled boundary-to-boundary segments.

    Evaluates the raw visibility definition: some open segment from the
    observer camera boundary to the target body boundary must avoid all other
    bodies and the observer's own camera.  A coarse jittered grid is followed
    by shrinking local grid refinement around the best candidates, so thin
    windows are resolved; a positive verdict is always backed by an explicit
    clear segment.
    """
    if observer_idx == target_idx:
        return False
    if samples_per_boundary < 8:
        raise ValueError("need at least 8 samples per boundary")
    model = config.model
    robots = config.robots
    cam_c = robots[observer_idx].position
    tgt_c = robots[target_idx].position
    cam_r = model.camera_radius
    tgt_r = model.body_radius
    obstacles = [(r.position.x, r.position.y, model.body_radius)
                 for k, r in enumerate(robots)
                 if k not in (observer_idx, target_idx)]

    rng = np.random.default_rng(
        (seed * 1_000_003 + observer_idx * 1009 + target_idx) & 0xFFFFFFFF)
    jp, jq = rng.random(2)

    def grid(ap, aq):
        P = np.stack([cam_c.x + cam_r * np.cos(ap), cam_c.y + cam_r * np.sin(ap)], axis=1)
        Q = np.stack([tgt_c.x + tgt_r * np.cos(aq), tgt_c.y + tgt_r * np.sin(aq)], axis=1)
        return _segment_clearance(P, Q, cam_c, cam_r, tgt_c, tgt_r, obstacles)

    offsets = np.linspace(-1.0, 1.0, 5)

    def refine(seed_a, seed_b, h):
        """Joint shrinking grid search around all seeds at once; the cross
        blocks between seeds come free and only add coverage.  Returns the
        best clearance reached (inf as soon as a clear segment shows up)."""
        ca = np.asarray(seed_a, dtype=float)
        cb = np.asarray(seed_b, dtype=float)
        k = len(ca)
        best = -np.inf
        for _ in range(20):
            la = (ca[:, None] + offsets[None, :] * h).ravel()
            lb = (cb[:, None] + offsets[None, :] * h).ravel()
            local = grid(la, lb)
            if np.any(local > EPS_GEOM):
                return np.inf
            finite = local[np.isfinite(local)]
            if finite.size:
                best = max(best, float(finite.max()))
            for s in range(k):
                block = local[5 * s:5 * s + 5, 5 * s:5 * s + 5]
                bi, bj = np.unravel_index(np.argmax(block), block.shape)
                ca[s] = la[5 * s + bi]
                cb[s] = lb[5 * s + bj]
            h /= 3.0
        return best

    # escalate resolution only when the refined best is a near graze;  a
    # definitely blocked landscape stops at the first stage
    m = samples_per_boundary
    for stage in range(3):
        ap = (np.arange(m) + jp) * (TAU / m)
        aq = (np.arange(m) + jq) * (TAU / m)
        clear = grid(ap, aq)
        if np.any(clear > EPS_GEOM):
            return True
        finite = np.isfinite(clear)
        best = -np.inf
        if finite.any():
            order = np.argsort(np.where(finite, clear, -np.inf), axis=None)[::-1]
            top = float(clear[np.unravel_index(order[0], clear.shape)])
            seeds_a, seeds_b = [], []
            for idx in order[:8]:
                i, j = np.unravel_index(idx, clear.shape)
                val = float(clear[i, j])
                if not np.isfinite(val) or val < top - 1.0:
                    break
                seeds_a.append(ap[i])
                seeds_b.append(aq[j])
            if seeds_a:
                best = refine(seeds_a, seeds_b, TAU / m)
                if best > EPS_GEOM:
                    return True
        if best < -1e-4 or m >= 8 * samples_per_boundary:
            return False
        m *= 4
    return False


# ---------------------------------------------------------------------------
# Vectorized batch oracle used by the engine
# ---------------------------------------------------------------------------

def _pair_corridors(positions: np.ndarray, c: float, obs: np.ndarray,
                    tgt: np.ndarray):
    """Tangent corridor segment endpoints for ordered index pairs."""
    P = positions[obs]
    Tc = positions[tgt]
    delta = Tc - P
    d = np.sqrt((delta ** 2).sum(axis=1))
    u = delta / d[:, None]
    v = np.stack([-u[:, 1], u[:, 0]], axis=1)
    lam = (1.0 - c) / d
    mu = np.sqrt(np.maximum(0.0, 1.0 - lam * lam))
    n1 = lam[:, None] * u + mu[:, None] * v
    n2 = lam[:, None] * u - mu[:, None] * v
    A1 = P - c * n1
    B1 = Tc - n1
    A2 = P - c * n2
    B2 = Tc - n2
    return (A1, B1), (A2, B2)


def _seg_disk_mask(A, B, positions, radius):
    """(pairs, robots) mask: body k intersects segment (A_p, B_p)."""
    D = B - A
    dd = (D ** 2).sum(axis=1)
    dd = np.where(dd <= 0.0, 1.0, dd)
    C = positions[None, :, :]
    AC = C - A[:, None, :]
    t = (AC * D[:, None, :]).sum(axis=2) / dd[:, None]
    t = np.clip(t, 0.0, 1.0)
    foot = A[:, None, :] + t[:, :, None] * D[:, None, :]
    dist2 = ((foot - C) ** 2).sum(axis=2)
    return dist2 <= radius * radius


def visible_pairs(positions: np.ndarray, model: VisibilityModel,
                  pairs: np.ndarray) -> np.ndarray:
    """Analytic verdicts for an array of ordered (observer, target) pairs.

    The corridor obstruction masks are evaluated with numpy; only pairs with
    a genuine partial obstruction fall back to exact arc trimming.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        return np.zeros(0, dtype=bool)
    obs, tgt = pairs[:, 0], pairs[:, 1]
    c = model.camera_radius
    (A1, B1), (A2, B2) = _pair_corridors(positions, c, obs, tgt)
    left = _seg_disk_mask(A1, B1, positions, model.body_radius)
    right = _seg_disk_mask(A2, B2, positions, model.body_radius)
    n = len(positions)
    idx = np.arange(n)[None, :]
    involved = (idx == obs[:, None]) | (idx == tgt[:, None])
    left &= ~involved
    right &= ~involved
    out = np.ones(len(pairs), dtype=bool)
    conflict = (left & right).any(axis=1)
    out[conflict] = False
    clearp = ~(left.any(axis=1) | right.any(axis=1))
    fine = np.flatnonzero(~conflict & ~clearp)
    for p in fine:
        i, j = int(obs[p]), int(tgt[p])
        camera = model.camera(Point(*positions[i]))
        target = model.body(Point(*positions[j]))
        others = [model.body(Point(*positions[k])) for k in range(n)
                  if k not in (i, j)]
        out[p] = surviving_arc(camera, target, others).measure > EPS_ARC
    return out
