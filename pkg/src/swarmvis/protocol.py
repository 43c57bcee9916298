"""The Compute phase: pure decision rules from (own color, position, view).

Every rule is a function of the robot's light color, its own position, the
snapshot it took (positions and colors of visible robots), and the global
parameters.  Robots are memoryless between cycles apart from the light, so
every rule must be re-derivable from the current view alone; in particular
all multi-step movements are written so that a partially completed move
resumes correctly on the next activation.

Stage 1 elects a leader: a robot that sees nobody to its south and nobody
east on its own horizontal line creeps south 2 units at a time; once it is
sure of being southmost (everyone visible at least 1-c to its north) it
opens a vertical gap of max(10, D/sqrt(3)) and lights up as leader.  Stage 2
builds the mutually visible chain through a ladder of horizontal lines above
the leader (L10 -> L8 -> L6 -> L2 -> L0), expanding the base chain whenever
a new robot no longer fits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .chain import (
    BranchOverflow,
    ChainSpec,
    SigmaTooSmall,
    base_offsets,
    chain_heights,
    fit_offset_run,
    spec_from_sigma,
)
from .geometry import EPS_POS, Point, segment_point_distance
from .visibility import View, ViewEntry


class Color(str, enum.Enum):
    OFF = "off"
    DEFEATED = "defeated"
    LEADER = "leader"
    SUBORDINATE = "subordinate"
    NO_SPACE = "no_space"
    EXPAND = "expand"
    FINAL = "final"


STAGE2_COLORS = frozenset(
    {Color.LEADER, Color.SUBORDINATE, Color.NO_SPACE, Color.EXPAND, Color.FINAL})

# legal light transitions; a decision may either move or change color, never
# both (arrivals flip color on the following activation)
ALLOWED_TRANSITIONS = {
    Color.OFF: {Color.OFF, Color.DEFEATED, Color.SUBORDINATE, Color.LEADER},
    Color.DEFEATED: {Color.DEFEATED, Color.SUBORDINATE},
    Color.SUBORDINATE: {Color.SUBORDINATE, Color.NO_SPACE, Color.FINAL},
    Color.NO_SPACE: {Color.NO_SPACE, Color.SUBORDINATE},
    Color.LEADER: {Color.LEADER, Color.EXPAND, Color.FINAL},
    Color.EXPAND: {Color.EXPAND, Color.LEADER},
    Color.FINAL: {Color.FINAL},
}

FIRST_SLOT_OFFSET = 4.0  # the first robot on a branch sits 4 units from the leader


@dataclass(frozen=True)
class ProtocolParams:
    """Global knowledge shared by all robots.

    ``width_bound`` is the known upper bound D on the horizontal width of the
    initial configuration; the leader must open a vertical gap of
    ``separation_threshold`` = max(10, D/sqrt(3)) before lighting up.
    """

    width_bound: float
    camera_radius: float
    separation_threshold: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.width_bound <= 0:
            raise ValueError("width bound must be positive")
        if self.separation_threshold is None:
            object.__setattr__(
                self, "separation_threshold",
                max(10.0, self.width_bound / math.sqrt(3.0)))
        if self.separation_threshold < 10.0:
            raise ValueError("separation threshold below 10")


@dataclass(frozen=True)
class RobotState:
    position: Point
    color: Color


@dataclass(frozen=True)
class Decision:
    destination: Point
    new_color: Color


def _stay(state: RobotState) -> Decision:
    return Decision(state.position, state.color)


def _move(state: RobotState, dest: Point) -> Decision:
    return Decision(dest, state.color)


def _recolor(state: RobotState, color: Color) -> Decision:
    return Decision(state.position, color)


@dataclass(frozen=True)
class LocalFrame:
    """Coordinate frame anchored at a visible frame-defining robot.

    Constructible when a leader- or expand-colored robot is visible, or (in
    the final phase) the chain tip, identified as the lowest visible
    final-colored robot.
    """

    origin: Point
    origin_color: Color

    def rel(self, p: Point) -> Point:
        return Point(p.x - self.origin.x, p.y - self.origin.y)

    def absolute(self, p: Point) -> Point:
        return Point(p.x + self.origin.x, p.y + self.origin.y)

    def on_line(self, p: Point, k: float) -> bool:
        return abs((p.y - self.origin.y) - k) <= EPS_POS


def find_frame(view: View) -> Optional[LocalFrame]:
    for e in view.entries:
        if e.color in (Color.LEADER, Color.EXPAND):
            return LocalFrame(e.position, e.color)
    finals = [e for e in view.entries if e.color == Color.FINAL]
    if finals:
        tip = min(finals, key=lambda e: (e.position.y, e.position.x))
        return LocalFrame(tip.position, Color.FINAL)
    return None


# ---------------------------------------------------------------------------
# Stage 1
# ---------------------------------------------------------------------------

def sure_southmost(view: View, self_pos: Point, camera_radius: float) -> bool:
    """Unobstructed southern view: everyone visible is >= (1-c) to the north."""
    gap = 1.0 - camera_radius
    return all(e.position.y - self_pos.y >= gap - EPS_POS for e in view.entries)


def decide_off(state: RobotState, view: View, params: ProtocolParams) -> Decision:
    """Leader-election step for an off-colored robot.

    Priority: join stage 2 if it has visibly started; concede on seeing
    anyone south or anyone east on the own horizontal line; otherwise creep
    or jump south, becoming leader once the separation threshold is open.
    """
    if any(e.color in STAGE2_COLORS for e in view.entries):
        return _recolor(state, Color.SUBORDINATE)
    y = state.position.y
    if any(e.position.y < y - EPS_POS for e in view.entries):
        return _recolor(state, Color.DEFEATED)
    if any(abs(e.position.y - y) <= EPS_POS and e.position.x > state.position.x + EPS_POS
           for e in view.entries):
        return _recolor(state, Color.DEFEATED)
    if sure_southmost(view, state.position, params.camera_radius):
        gap = min((e.position.y - y for e in view.entries), default=math.inf)
        if gap >= params.separation_threshold - EPS_POS:
            return _recolor(state, Color.LEADER)
        return _move(state, Point(state.position.x, y - (params.separation_threshold - gap)))
    return _move(state, Point(state.position.x, y - 2.0))


def decide_defeated(state: RobotState, view: View) -> Decision:
    if any(e.color in STAGE2_COLORS for e in view.entries):
        return _recolor(state, Color.SUBORDINATE)
    return _stay(state)


# ---------------------------------------------------------------------------
# Stage 2 helpers
# ---------------------------------------------------------------------------

def _on(y: float, k: float) -> bool:
    return abs(y - k) <= EPS_POS


def _entries_rel(frame: LocalFrame, view: View) -> list[tuple[Point, Color]]:
    out = []
    for e in view.entries:
        rp = frame.rel(e.position)
        if abs(rp.x) <= EPS_POS and abs(rp.y) <= EPS_POS:
            continue  # the frame robot itself
        out.append((rp, e.color))
    return out


def _base_sigma(rel_entries, fallback: float = FIRST_SLOT_OFFSET) -> float:
    """Stretch anchor: distance from the leader to the nearest base robot."""
    xs = [abs(p.x) for p, _ in rel_entries if _on(p.y, 0.0) and abs(p.x) > EPS_POS]
    return min(xs) if xs else fallback


def _branch_counts(rel_entries) -> tuple[int, int]:
    east = sum(1 for p, _ in rel_entries
               if _on(p.y, 0.0) and p.x > EPS_POS)
    west = sum(1 for p, _ in rel_entries
               if _on(p.y, 0.0) and p.x < -EPS_POS)
    return east, west


def _next_slot(rel_entries) -> Optional[tuple[float, float]]:
    """Base-chain slot for the next inserter: (signed x, gap to the previous
    robot on that branch), or None when the branch layout is unreadable.

    Branches fill east-first, so east == west - 1 only happens while an
    expanded base is re-landing; the missing east slot is then the target.
    """
    east, west = _branch_counts(rel_entries)
    if east == west:
        side, count = 1.0, east
    elif east == west + 1:
        side, count = -1.0, west
    elif east == west - 1:
        side, count = 1.0, east
    else:
        return None
    if count == 0:
        return side * FIRST_SLOT_OFFSET, FIRST_SLOT_OFFSET
    sigma = _base_sigma(rel_entries)
    try:
        offs = base_offsets(spec_from_sigma(sigma), count + 1)
    except BranchOverflow:
        return side * math.inf, 0.0
    return side * offs[count], offs[count] - offs[count - 1]


def _corridor_clear(rel_entries, frm: Point, to: Point) -> bool:
    """No visible robot center strictly within 2 units of the travel segment."""
    return all(segment_point_distance((frm, to), p) >= 2.0 - EPS_POS
               for p, _ in rel_entries)


def _tie_key(p: Point) -> tuple[float, float]:
    # closest to the axis first; exact ties broken east
    return (abs(p.x), -p.x)


# ---------------------------------------------------------------------------
# Stage 2 rules
# ---------------------------------------------------------------------------

def _last_robot_flight(state, frame, rel_entries) -> Decision:
    """Everyone else is on the base chain: fly straight to the final chain
    vertex (always on the west branch) and light up on arrival."""
    _, west = _branch_counts(rel_entries)
    sigma = _base_sigma(rel_entries)
    spec = spec_from_sigma(sigma)
    idx = west + 1
    offs = base_offsets(spec, idx)
    hts = chain_heights(spec, idx)
    dest = frame.absolute(Point(-offs[idx - 1], hts[idx - 1]))
    if (state.position - dest).norm() <= EPS_POS:
        return _recolor(state, Color.FINAL)
    return _move(state, dest)


def _decide_final_east(state, view: View) -> Decision:
    """East-branch robot in the final phase.

    The easternmost visible final is the previous east robot (or the
    finalized leader).  Heights grow strictly outward along both branches,
    so the next final strictly above it, easternmost first, is exactly the
    own west twin; the final slot is the twin's height in the own column.
    Until the twin is visible, climb to 2 units above the reference.
    """
    me = state.position
    finals = [e.position for e in view.entries if e.color == Color.FINAL]
    ref = max(finals, key=lambda p: p.x)
    higher = [p for p in finals if p.y > ref.y + EPS_POS]
    if higher:
        twin = max(higher, key=lambda p: p.x)
        dest = Point(me.x, twin.y)
        if (me - dest).norm() <= EPS_POS:
            return _recolor(state, Color.FINAL)
        return _move(state, dest)
    staging = Point(me.x, ref.y + 2.0)
    if (me - staging).norm() <= EPS_POS:
        return _stay(state)
    return _move(state, staging)


def _decide_final_west(state, view: View, leader: ViewEntry) -> Decision:
    """West-branch robot whose outer neighbours have all finalized.

    Reached with the leader visible (from the base line that is only the
    innermost robot; everyone else first climbs 2 units in its own column,
    from where the leader is in view and fixes the stretch and the height
    of the own vertex).
    """
    me = state.position
    frame = LocalFrame(leader.position, leader.color)
    rel = _entries_rel(frame, view)
    rme = frame.rel(me)
    if _on(rme.y, 0.0):
        # the leader is visible from the base only for the innermost robot
        sigma = abs(rme.x)
        h1 = chain_heights(spec_from_sigma(sigma), 1)[0]
        dest = frame.absolute(Point(rme.x, h1))
        if (me - dest).norm() <= EPS_POS:
            return _recolor(state, Color.FINAL)
        return _move(state, dest)
    sigma = _base_sigma(rel, fallback=0.0)
    if sigma <= 0.5:
        return _stay(state)
    spec = spec_from_sigma(sigma)
    idx = 1
    try:
        while True:
            offs = base_offsets(spec, idx)
            if abs(offs[idx - 1] - abs(rme.x)) <= 10 * EPS_POS:
                break
            if offs[idx - 1] > abs(rme.x):
                return _stay(state)
            idx += 1
    except BranchOverflow:
        return _stay(state)
    h = chain_heights(spec, idx)[idx - 1]
    dest = frame.absolute(Point(rme.x, h))
    if (me - dest).norm() <= EPS_POS:
        return _recolor(state, Color.FINAL)
    return _move(state, dest)


def _recover_expansion_frame(view: View, mypos: Point):
    """Frame recovery for an expansion walker that cannot see the leader.

    Robots parked at consecutive expanded offsets encode the leader frame:
    a group of at least 3 at a common height 2 above me, whose consecutive
    gaps fit a base-chain gap run, pins the stretch and the axis.  Returns
    (origin, sigma, index of the westmost group member) or None.
    """
    groups: dict = {}
    for e in view.entries:
        if e.color != Color.SUBORDINATE:
            continue
        if abs(e.position.y - (mypos.y + 2.0)) > EPS_POS:
            continue
        key = round(e.position.y, 4)
        groups.setdefault(key, []).append(e.position.x)
    candidates = []
    for key, xs in groups.items():
        if len(xs) < 3:
            continue
        xs = sorted(xs)
        gaps = tuple(b - a for a, b in zip(xs, xs[1:]))
        # east half: ascending x means ascending offsets (decreasing gaps)
        fit = fit_gap_run(gaps)
        if fit is not None:
            sigma, k0 = fit
            b = _offset_at_checked(sigma, k0)
            if b is not None:
                candidates.append((Point(xs[0] - b, mypos.y - 2.0), sigma, k0, 1.0, xs))
        # west half: the offsets ascend westward
        fit = fit_gap_run(tuple(reversed(gaps)))
        if fit is not None:
            sigma, k0 = fit
            b = _offset_at_checked(sigma, k0)
            if b is not None:
                candidates.append((Point(xs[-1] + b, mypos.y - 2.0), sigma, k0, -1.0, xs))
    if len(candidates) != 1:
        return None
    return candidates[0]


def _offset_at_checked(sigma: float, k: int):
    try:
        return base_offsets(spec_from_sigma(sigma), k)[k - 1]
    except (BranchOverflow, SigmaTooSmall):
        return None


def _decide_l2_recovered(state: RobotState, view: View, recovered) -> Decision:
    """Expansion walk under a recovered frame.

    Without the leader's light the walker cannot tell an expansion from the
    later descent, but descending robots always stand exactly on a valid
    offset column with a smaller index than the next free slot, so: walk
    east while unaligned, park only when aligned with the first free slot.
    """
    origin, sigma, k0, s, xs = recovered
    me = state.position
    mex = (me.x - origin.x) * s
    if mex <= EPS_POS:
        return _stay(state)
    count_idx = k0 + len(xs)
    target = _offset_at_checked(sigma, count_idx)
    if target is None:
        return _stay(state)
    if abs(mex - target) <= EPS_POS:
        return _move(state, Point(me.x, me.y + 2.0))
    if mex > target + EPS_POS:
        return _stay(state)
    # standing on an occupied slot column means I am a descending robot that
    # merely cannot see the leader; never walk from there
    for k in range(1, count_idx):
        b = _offset_at_checked(sigma, k)
        if b is not None and abs(mex - b) <= EPS_POS:
            return _stay(state)
    ahead = [(e.position.x - origin.x) * s for e in view.entries
             if abs(e.position.y - me.y) <= EPS_POS
             and (e.position.x - origin.x) * s > mex + EPS_POS]
    cap = min(ahead) - 2.0 if ahead else math.inf
    dest = min(target, cap)
    if dest <= mex + EPS_POS:
        return _stay(state)
    return _move(state, Point(origin.x + s * dest, me.y))


def decide_subordinate(state: RobotState, view: View,
                       params: ProtocolParams) -> Decision:
    """Chain-construction step for a subordinate robot.

    East/west/north/south are shared by all robots, so the final-phase
    triggers use global directions; the ladder rules additionally need a
    visible leader- or expand-colored robot to anchor the line coordinates.
    """
    entries = view.entries
    mypos = state.position
    leader_entry = next((e for e in entries
                         if e.color in (Color.LEADER, Color.EXPAND)), None)
    finals = [e for e in entries if e.color == Color.FINAL]
    west_all_final = all(e.color == Color.FINAL for e in entries
                         if e.position.x < mypos.x - EPS_POS)

    if finals and west_all_final:
        if (leader_entry is not None
                and mypos.x < leader_entry.position.x - EPS_POS):
            return _decide_final_west(state, view, leader_entry)
        if leader_entry is None:
            # on the lowest populated line the leader may be hidden behind
            # the neighbours; a 2-unit climb in the own column reveals it
            # (west branch) or shows there is none left (east branch)
            lowest = min(e.position.y for e in entries)
            if mypos.y <= lowest + EPS_POS:
                return _move(state, Point(mypos.x, mypos.y + 2.0))
            return _decide_final_east(state, view)

    if leader_entry is None:
        recovered = _recover_expansion_frame(view, mypos)
        if recovered is not None:
            return _decide_l2_recovered(state, view, recovered)
        return _stay(state)
    frame = LocalFrame(leader_entry.position, leader_entry.color)
    rel = _entries_rel(frame, view)
    me = frame.rel(mypos)
    lc = frame.origin_color

    # the last robot: everyone else already sits on the base chain
    if rel and all(_on(p.y, 0.0) for p, _ in rel):
        return _last_robot_flight(state, frame, rel)

    if me.y > 10.0 + EPS_POS:
        # descend to L10 when the vertical corridor is free
        target = Point(me.x, 10.0)
        if _corridor_clear(rel, me, target):
            return _move(state, frame.absolute(target))
        return _stay(state)

    if _on(me.y, 10.0):
        if any(_on(p.y, 8.0) for p, _ in rel):
            return _stay(state)
        rivals = [p for p, _ in rel if _on(p.y, 10.0)]
        if any(_tie_key(p) < _tie_key(me) for p in rivals):
            return _stay(state)
        return _move(state, frame.absolute(Point(me.x, 8.0)))

    if _on(me.y, 8.0) and abs(me.x) > EPS_POS:
        return _decide_l8_walk(state, frame, rel, me)

    if _on(me.y, 8.0):
        if any(_on(p.y, 6.0) for p, _ in rel):
            return _stay(state)
        return _move(state, frame.absolute(Point(0.0, 6.0)))

    if _on(me.y, 6.0) and abs(me.x) <= EPS_POS:
        return _decide_l6(state, frame, rel)

    if 2.0 + EPS_POS < me.y < 6.0 - EPS_POS and abs(me.x) <= EPS_POS:
        return _move(state, frame.absolute(Point(0.0, 2.0)))

    if _on(me.y, 2.0):
        if lc == Color.EXPAND:
            return _decide_l2_expand(state, frame, rel, me)
        if lc == Color.LEADER:
            if abs(me.x) > EPS_POS and any(
                    abs(p.x) > EPS_POS and (_on(p.y, 4.0) or _on(p.y, 2.0))
                    for p, _ in rel):
                # peers still parked on L4 or beside me on L2: I am part of a
                # post-expansion descent, not the (unique) normal inserter
                return _move(state, frame.absolute(Point(me.x, 0.0)))
            return _decide_l2_insert(state, frame, rel, me)
        return _stay(state)

    if EPS_POS < me.y < 2.0 - EPS_POS and abs(me.x) > EPS_POS:
        # only a partially completed descent to the base parks here
        return _move(state, frame.absolute(Point(me.x, 0.0)))

    if _on(me.y, 4.0) and abs(me.x) > EPS_POS:
        if lc == Color.LEADER and any(
                c == Color.SUBORDINATE and _on(p.y, 6.0) for p, c in rel):
            return _move(state, frame.absolute(Point(me.x, 0.0)))
        return _stay(state)

    if _on(me.y, 0.0) and abs(me.x) > EPS_POS and lc == Color.EXPAND:
        # rise strictly in turn: the branch repositions inside-out with one
        # robot airborne at a time.  A distant walker can be hidden behind
        # the remaining base robots, so the turn is established by index
        # arithmetic rather than by looking for walkers: my old index j
        # (from fitting my own offset together with the adjacent outer
        # neighbour) must equal the count of robots already parked plus one.
        s = 1.0 if me.x > 0.0 else -1.0
        if any(_on(p.y, 2.0) and p.x * s > 0.0 for p, _ in rel):
            return _stay(state)
        if any(_on(p.y, 0.0) and p.x * s > EPS_POS
               and abs(p.x) < abs(me.x) - EPS_POS for p, _ in rel):
            return _stay(state)
        parked = sorted(abs(p.x) for p, _ in rel
                        if _on(p.y, 4.0) and p.x * s > 0.0)
        if parked:
            pfit = fit_offset_run(tuple(parked))
            if pfit is None or pfit[1] != 1:
                return _stay(state)
        outer = sorted(abs(p.x) for p, _ in rel
                       if _on(p.y, 0.0) and p.x * s > EPS_POS)
        if outer:
            ofit = fit_offset_run((abs(me.x),) + tuple(outer))
            if ofit is None:
                return _stay(state)
            j = ofit[1]
        else:
            j = len(parked) + 1  # alone on the branch: last in turn
        if j == len(parked) + 1:
            return _move(state, frame.absolute(Point(me.x, 2.0)))
        return _stay(state)

    return _stay(state)


def _decide_l8_walk(state, frame, rel, me: Point) -> Decision:
    """File along L8 toward the axis, avoiding drops from L10.

    The walk is capped 2 units short of any robot already on L8 ahead, and,
    when several L10 robots could drop onto the path, 2 units short of the
    column of the one nearest the axis unless it is near enough (horizontal
    distance at most 5) to be certain of seeing us.
    """
    s = 1.0 if me.x > 0.0 else -1.0
    dist = abs(me.x)
    floor = 0.0
    ahead = [abs(p.x) for p, _ in rel
             if _on(p.y, 8.0) and p.x * s > 0.0 and abs(p.x) < dist - EPS_POS]
    ahead += [0.0 for p, _ in rel if _on(p.y, 8.0) and abs(p.x) <= EPS_POS]
    if ahead:
        floor = max(floor, max(ahead) + 2.0)
    droppers = [p for p, _ in rel
                if _on(p.y, 10.0) and -2.0 <= p.x * s <= dist + 2.0]
    if len(droppers) >= 2:
        nearest = min(droppers, key=_tie_key)
        gap = abs(me.x - nearest.x)
        if gap > 5.0:
            floor = max(floor, dist - (gap - 2.0))
    if floor >= dist - EPS_POS:
        return _stay(state)
    return _move(state, frame.absolute(Point(s * floor, 8.0)))


def _decide_l6(state, frame, rel) -> Decision:
    """At (0, 6): wait for the band below to clear, then claim a base slot
    or declare that the chain is out of space."""
    if any(EPS_POS < p.y < 6.0 - EPS_POS for p, _ in rel):
        return _stay(state)
    slot = _next_slot(rel)
    if slot is None:
        return _stay(state)
    x, gap = slot
    if not math.isfinite(x) or gap < 2.0:
        return _recolor(state, Color.NO_SPACE)
    return _move(state, frame.absolute(Point(0.0, 2.0)))


def _decide_l2_insert(state, frame, rel, me: Point) -> Decision:
    """Normal insertion on L2: align with the computed slot, then drop."""
    slot = _next_slot(rel)
    if slot is None:
        return _stay(state)
    x, gap = slot
    if not math.isfinite(x) or gap < 2.0:
        return _stay(state)
    if abs(me.x - x) > EPS_POS:
        return _move(state, frame.absolute(Point(x, 2.0)))
    return _move(state, frame.absolute(Point(x, 0.0)))


def _decide_l2_expand(state, frame, rel, me: Point) -> Decision:
    """Expansion repositioning on L2 in the own half-plane.

    The walker aligns with the next expanded offset after the robots parked
    on L4 in its half; the first robot of a branch adopts the column of the
    old second base robot, which fixes the new stretch for everyone.

    Views of the parked robots can lose an inner prefix to occlusion, so the
    stretch and the own index are recovered by fitting the visible offsets
    as a contiguous run (waiting when the fit is ambiguous), and the walk is
    capped 2 units short of any own-half robot ahead on L2.
    """
    s = 1.0 if me.x > 0.0 else -1.0
    parked = sorted(abs(p.x) for p, _ in rel
                    if _on(p.y, 4.0) and p.x * s > 0.0)
    if not parked:
        own_l0 = [abs(p.x) for p, _ in rel
                  if _on(p.y, 0.0) and p.x * s > EPS_POS]
        if own_l0:
            target = min(own_l0)
        else:
            other_l0 = [abs(p.x) for p, _ in rel
                        if _on(p.y, 0.0) and abs(p.x) > EPS_POS]
            target = min(other_l0) if other_l0 else abs(me.x) * 1.5
    else:
        behind = any(_on(p.y, 2.0) and p.x * s > 0.0
                     and abs(p.x) < abs(me.x) - EPS_POS for p, _ in rel)
        if len(parked) == 1 and behind:
            # a walker behind me may be hiding inner parked robots; a lone
            # visible one is only trustworthy when I am alone on the line
            return _stay(state)
        fit = fit_offset_run(tuple(parked))
        if fit is None:
            return _stay(state)
        sigma, k0 = fit
        i = k0 + len(parked)
        try:
            target = base_offsets(spec_from_sigma(sigma), i)[i - 1]
        except (BranchOverflow, SigmaTooSmall):
            return _stay(state)
    ahead = [abs(p.x) for p, _ in rel
             if _on(p.y, 2.0) and p.x * s > 0.0
             and abs(p.x) > abs(me.x) + EPS_POS]
    cap = min(ahead) - 2.0 if ahead else math.inf
    if cap < target - EPS_POS:
        if cap <= abs(me.x) + EPS_POS:
            return _stay(state)
        return _move(state, frame.absolute(Point(s * cap, 2.0)))
    if abs(abs(me.x) - target) > EPS_POS:
        return _move(state, frame.absolute(Point(s * target, 2.0)))
    return _move(state, frame.absolute(Point(me.x, 4.0)))


# ---------------------------------------------------------------------------
# Leader / no-space
# ---------------------------------------------------------------------------

def decide_leader(state: RobotState, view: View) -> Decision:
    """Leader bookkeeping; the leader itself never moves.

    With color leader: flip to expand when a no-space robot appears; flip to
    final once the whole west branch has finalized.  With color expand: flip
    back once the base population is fully parked on L4 (nothing visible on
    the base line or L2; robots still queued at L6 and above don't count).
    """
    y0 = state.position.y
    if state.color == Color.LEADER:
        base_robots = any(_on(e.position.y - y0, 0.0) for e in view.entries)
        if any(e.color == Color.NO_SPACE for e in view.entries) and base_robots:
            # a populated base distinguishes a fresh no-space declaration from
            # the one-round window after an expansion in which the no-space
            # robot has not yet seen the leader flip back
            return _recolor(state, Color.EXPAND)
        west = [e for e in view.entries if e.position.x < state.position.x - EPS_POS]
        if west and all(e.color == Color.FINAL for e in west) and not any(
                _on(e.position.y - y0, 0.0) for e in west):
            return _recolor(state, Color.FINAL)
        return _stay(state)
    # expand
    below = [e for e in view.entries
             if _on(e.position.y - y0, 0.0) or _on(e.position.y - y0, 2.0)]
    parked = [e for e in view.entries if _on(e.position.y - y0, 4.0)]
    if not below and parked:
        return _recolor(state, Color.LEADER)
    return _stay(state)


def decide_no_space(state: RobotState, view: View) -> Decision:
    """Waiting at (0, 6) for the expansion to finish."""
    leader = next((e for e in view.entries if e.color == Color.LEADER), None)
    if leader is not None and any(
            _on(e.position.y - leader.position.y, 4.0) for e in view.entries):
        return _recolor(state, Color.SUBORDINATE)
    return _stay(state)


def compute(state: RobotState, view: View, params: ProtocolParams) -> Decision:
    """Deterministic Compute phase: dispatch on the robot's own color."""
    if state.color == Color.FINAL:
        return _stay(state)
    if state.color == Color.OFF:
        return decide_off(state, view, params)
    if state.color == Color.DEFEATED:
        return decide_defeated(state, view)
    if state.color == Color.SUBORDINATE:
        return decide_subordinate(state, view, params)
    if state.color in (Color.LEADER, Color.EXPAND):
        return decide_leader(state, view)
    if state.color == Color.NO_SPACE:
        return decide_no_space(state, view)
    raise ValueError(f"unknown color {state.color}")
