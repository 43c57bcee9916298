"""Closed-form chain mathematics and base-chain coordinate generators.

A chain is a regular polyline with the leader at the tip: every side has
length ``stretch`` (d) and every exterior angle equals ``turning_angle``
(theta).  The constructions below fix sin(theta) = 1/d, which guarantees
pairwise visibility for every camera radius in (0, 1).  ``sigma`` is the
horizontal distance from the tip to the nearest base-chain point and
satisfies sigma = d * cos(theta / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .geometry import Point

_EPS = 1e-9


class SigmaTooSmall(ValueError):
    pass


class BranchOverflow(ValueError):
    """Requested branch index bends past the vertical, folding the base chain."""


@dataclass(frozen=True)
class ChainSpec:
    stretch: float        # side length d, plane units
    turning_angle: float  # exterior angle theta, radians
    sigma: float          # tip-to-first-base-point distance

    def __post_init__(self):
        if self.sigma <= 0.5:
            raise SigmaTooSmall(f"sigma must exceed 1/2, got {self.sigma}")
        if abs(math.sin(self.turning_angle) * self.stretch - 1.0) > _EPS:
            raise ValueError("chain spec must satisfy sin(theta) * d = 1")
        if abs(self.stretch * math.cos(self.turning_angle / 2.0) - self.sigma) > _EPS:
            raise ValueError("chain spec must satisfy sigma = d * cos(theta/2)")


def min_sin_turning(d: float, c: float) -> float:
    """Strict lower bound on sin(theta) for three consecutive chain robots
    to see past the middle one: (1 - c) / d."""
    return (1.0 - c) / d


def spec_from_sigma(sigma: float) -> ChainSpec:
    """Chain spec whose base chain starts ``sigma`` from the tip."""
    if sigma <= 0.5:
        raise SigmaTooSmall(f"sigma must exceed 1/2, got {sigma}")
    d = 2.0 * sigma * sigma / math.sqrt(4.0 * sigma * sigma - 1.0)
    theta = 2.0 * math.asin(1.0 / (2.0 * sigma))
    return ChainSpec(stretch=d, turning_angle=theta, sigma=sigma)


def spec_from_stretch(d: float) -> ChainSpec:
    """Chain spec with side length ``d`` and sin(theta) = 1/d."""
    if d <= 1.0:
        raise ValueError(f"stretch must exceed 1, got {d}")
    theta = math.asin(1.0 / d)
    return ChainSpec(stretch=d, turning_angle=theta,
                     sigma=d * math.cos(theta / 2.0))


def _side_angle(spec: ChainSpec, j: int) -> float:
    """Inclination of branch side ``j`` (1-based) above the horizontal."""
    return spec.turning_angle / 2.0 + (j - 1) * spec.turning_angle


def base_offsets(spec: ChainSpec, k: int) -> list[float]:
    """Horizontal distances of the first ``k`` base-chain points from the tip.

    Offsets are partial sums of d * cos(theta/2 + (j-1) * theta) and must stay
    strictly increasing; a side reaching the vertical raises BranchOverflow.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    out, total = [], 0.0
    for j in range(1, k + 1):
        ang = _side_angle(spec, j)
        if ang >= math.pi / 2.0:
            raise BranchOverflow(
                f"branch index {j} bends past vertical (angle {ang:.6f})")
        total += spec.stretch * math.cos(ang)
        out.append(total)
    return out


def chain_heights(spec: ChainSpec, k: int) -> list[float]:
    """Heights of the first ``k`` chain vertices above the tip line."""
    if k < 1:
        raise ValueError("k must be at least 1")
    out, total = [], 0.0
    for j in range(1, k + 1):
        ang = _side_angle(spec, j)
        if ang >= math.pi / 2.0:
            raise BranchOverflow(
                f"branch index {j} bends past vertical (angle {ang:.6f})")
        total += spec.stretch * math.sin(ang)
        out.append(total)
    return out


def branch_has_space(spec: ChainSpec, m: int) -> bool:
    """Can a branch already holding ``m`` robots accept one more?

    Requires offset m+1 to exist and the base gap to be at least 2 body
    diameters.  With m = 0 this tests sigma >= 2 (the protocol pins the very
    first slot at 4 units instead).
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    try:
        offsets = base_offsets(spec, m + 1)
    except BranchOverflow:
        return False
    prev = offsets[m - 1] if m >= 1 else 0.0
    return offsets[m] - prev >= 2.0


def branch_capacity(spec: ChainSpec) -> int:
    """Largest robot count one branch can hold under the 2-unit spacing rule.

    The first slot is taken as given (the protocol pins it), so capacity is
    1 + the number of subsequent gaps of at least 2.
    """
    m = 1
    while branch_has_space(spec, m):
        m += 1
    return m


def _offset_at(sigma: float, k: int) -> Optional[float]:
    """k-th base offset for the spec anchored at ``sigma``; None on overflow."""
    try:
        return base_offsets(spec_from_sigma(sigma), k)[k - 1]
    except (BranchOverflow, SigmaTooSmall):
        return None


def _solve_sigma(k: int, value: float) -> Optional[float]:
    """sigma with b_k(sigma) = value; offsets are monotone in sigma."""
    lo, hi = 0.5 + 1e-9, max(1.0, value)
    for _ in range(200):
        b = _offset_at(hi, k)
        if b is not None and b >= value:
            break
        hi *= 2.0
        if hi > 1e12:
            return None
    else:
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        b = _offset_at(mid, k)
        if b is None or b < value:
            lo = mid
        else:
            hi = mid
    b = _offset_at(hi, k)
    if b is None or abs(b - value) > 1e-6:
        return None
    return hi


@lru_cache(maxsize=4096)
def fit_offset_run(values: tuple, max_index: int = 40,
                   tol: float = 1e-5) -> Optional[tuple[float, int]]:
    """Recover (sigma, start index) from a contiguous run of base offsets.

    ``values`` must be ascending.  Occlusion hides a prefix of the parked
    robots from a distant viewer, so its view is a suffix run b_k..b_{k+m};
    fitting sigma for each candidate k and checking the rest identifies the
    spec and the run position.  Returns None when no candidate, or more than
    one, is consistent (the view is unreliable; the caller should wait).  A
    single value fits every k, so singletons resolve to k = 1 and the caller
    must ensure nothing inner can be hidden.
    """
    if not values:
        return None
    if len(values) == 1:
        sigma = values[0]
        return (sigma, 1) if sigma > 0.5 else None
    hits = []
    for k0 in range(1, max_index + 1):
        sigma = _solve_sigma(k0, values[0])
        if sigma is None:
            continue
        ok = True
        for t, v in enumerate(values[1:], start=1):
            b = _offset_at(sigma, k0 + t)
            if b is None or abs(b - v) > tol:
                ok = False
                break
        if ok:
            hits.append((sigma, k0))
            if len(hits) > 1:
                return None
    return hits[0] if hits else None


def _gap_at(sigma: float, k: int) -> Optional[float]:
    """Gap b_{k+1} - b_k for the spec anchored at ``sigma``."""
    try:
        spec = spec_from_sigma(sigma)
    except SigmaTooSmall:
        return None
    ang = _side_angle(spec, k + 1)
    if ang >= math.pi / 2.0:
        return None
    return spec.stretch * math.cos(ang)


@lru_cache(maxsize=4096)
def fit_gap_run(gaps: tuple, max_index: int = 40,
                tol: float = 1e-5) -> Optional[tuple[float, int]]:
    """Recover (sigma, first gap index) from consecutive base-chain gaps.

    Unlike offsets, gaps are independent of where the chain tip is, so a
    viewer that cannot see the tip can still identify the spec from three or
    more robots parked at consecutive offsets.  Needs at least two gaps;
    returns None when no candidate, or more than one, fits.
    """
    if len(gaps) < 2:
        return None
    hits = []
    for k0 in range(1, max_index + 1):
        lo, hi = 0.5 + 1e-9, 1.0
        for _ in range(200):
            g = _gap_at(hi, k0)
            if g is not None and g >= gaps[0]:
                break
            hi *= 2.0
            if hi > 1e12:
                break
        else:
            continue
        g = _gap_at(hi, k0)
        if g is None or g < gaps[0]:
            continue
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            g = _gap_at(mid, k0)
            if g is None or g < gaps[0]:
                lo = mid
            else:
                hi = mid
        sigma = hi
        g = _gap_at(sigma, k0)
        if g is None or abs(g - gaps[0]) > tol:
            continue
        ok = True
        for t, want in enumerate(gaps[1:], start=1):
            g = _gap_at(sigma, k0 + t)
            if g is None or abs(g - want) > tol:
                ok = False
                break
        if ok:
            hits.append((sigma, k0))
            if len(hits) > 1:
                return None
    return hits[0] if hits else None


def chain_points(spec: ChainSpec, k_east: int, k_west: int,
                 origin: Point) -> list[Point]:
    """Vertices of a chain with the tip at ``origin``.

    Returns [tip, east 1..k_east, west 1..k_west]; west vertices mirror the
    east ones across the vertical through the tip.
    """
    if k_east < 0 or k_west < 0:
        raise ValueError("branch sizes must be non-negative")
    k = max(k_east, k_west)
    pts = [origin]
    if k == 0:
        return pts
    offs = base_offsets(spec, k)
    hts = chain_heights(spec, k)
    for m in range(k_east):
        pts.append(Point(origin.x + offs[m], origin.y + hts[m]))
    for m in range(k_west):
        pts.append(Point(origin.x - offs[m], origin.y + hts[m]))
    return pts
