"""Round-based FSYNC/SSYNC execution with safety monitors and trace emission.

Each round the scheduler activates a subset of robots; all activated robots
take snapshots of the same pre-round configuration, compute decisions, and
the moves and light changes are applied atomically at the round end.  The
movement adversary may stop a non-rigid move early, but never before
min(delta, distance) has been traversed.

The engine also carries the executable correctness monitors: swept-disk
collision freedom, light-transition legality, single-leader uniqueness, the
leader-election potential (the count of live/blocking robot pairs, which
must never increase while no leader exists), immobility of off-colored
robots after the leader appears, and the phase markers T1 (leader elected),
T2 (base chain complete) and T3 (chain complete, all lights final).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .chain import BranchOverflow, base_offsets, spec_from_sigma
from .geometry import EPS_POS, Point
from .protocol import (
    ALLOWED_TRANSITIONS,
    Color,
    Decision,
    ProtocolParams,
    RobotState,
    compute,
)
from .visibility import View, ViewEntry, VisibilityModel, visible_pairs

STARVATION_CAP = 10_000     # rounds a robot may go unactivated before forcing
LIVELOCK_ROUNDS = 100_000   # identical rounds before the run is aborted
FORMAT_VERSION = 1


class SafetyViolation(RuntimeError):
    def __init__(self, round_idx, violations):
        super().__init__(f"round {round_idx}: {'; '.join(violations)}")
        self.round = round_idx
        self.violations = violations


class LivelockSuspected(RuntimeError):
    pass


class LeaderPresent(ValueError):
    pass


class Robot(NamedTuple):
    position: Point
    color: Color


@dataclass(frozen=True)
class Configuration:
    robots: tuple[Robot, ...]
    model: VisibilityModel
    params: ProtocolParams

    @property
    def n(self) -> int:
        return len(self.robots)

    def positions_array(self) -> np.ndarray:
        return np.array([[r.position.x, r.position.y] for r in self.robots],
                        dtype=float)

    def validate(self) -> None:
        pos = self.positions_array()
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                d = math.hypot(*(pos[i] - pos[j]))
                if d < 2.0 - EPS_POS:
                    raise ValueError(
                        f"robots {i} and {j} overlap: pairwise distance {d:.6f} < 2")


def make_configuration(points, model: VisibilityModel, params: ProtocolParams,
                       colors=None) -> Configuration:
    robots = tuple(
        Robot(Point(float(x), float(y)),
              Color.OFF if colors is None else colors[i])
        for i, (x, y) in enumerate(points))
    cfg = Configuration(robots, model, params)
    cfg.validate()
    return cfg


@dataclass(frozen=True)
class SchedulerPolicy:
    mode: str = "fsync"            # "fsync" | "ssync"
    activation_probability: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("fsync", "ssync"):
            raise ValueError(f"unknown scheduler mode {self.mode!r}")
        if not (0.0 < self.activation_probability <= 1.0):
            raise ValueError("activation probability must be in (0, 1]")


@dataclass(frozen=True)
class MovementPolicy:
    kind: str = "rigid"            # "rigid" | "nonrigid"
    delta: float = 2.0
    adversary: str = "full"        # "full" | "always_delta" | "uniform_random"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("rigid", "nonrigid"):
            raise ValueError(f"unknown movement kind {self.kind!r}")
        if self.adversary not in ("full", "always_delta", "uniform_random"):
            raise ValueError(f"unknown adversary {self.adversary!r}")
        if self.delta < 2.0:
            raise ValueError("delta must be at least 2")


@dataclass(frozen=True)
class TraceEvent:
    round: int
    robot: int
    frm: Point
    to: Point
    color_before: Color
    color_after: Color
    activated: bool = True


def activation_set(policy: SchedulerPolicy, n: int, rng,
                   inactivity=None) -> set[int]:
    """Robots active this round: everyone under FSYNC, an independent
    Bernoulli draw per robot under SSYNC (redrawn if empty, with robots
    starved past the cap forced in)."""
    if policy.mode == "fsync" or policy.activation_probability >= 1.0:
        return set(range(n))
    while True:
        draw = rng.random(n) < policy.activation_probability
        if inactivity is not None:
            draw |= np.asarray(inactivity) > STARVATION_CAP
        if draw.any():
            return set(np.flatnonzero(draw))


def apply_move(frm: Point, dest: Point, policy: MovementPolicy, rng) -> Point:
    """Where the robot actually stops.

    Rigid moves reach the destination; non-rigid moves reach it when it is
    within delta, otherwise the adversary picks a stop at distance in
    [delta, total] along the straight path.
    """
    dx, dy = dest.x - frm.x, dest.y - frm.y
    total = math.hypot(dx, dy)
    if policy.kind == "rigid" or total <= policy.delta or policy.adversary == "full":
        return dest
    if policy.adversary == "always_delta":
        t = policy.delta / total
    else:
        t = rng.uniform(policy.delta, total) / total
    return Point(frm.x + t * dx, frm.y + t * dy)


class MoveRecord(NamedTuple):
    robot: int
    frm: Point
    to: Point
    color_before: Color
    color_after: Color


def _swept_min_distance(a0, a1, b0, b1) -> float:
    """Minimum distance between two centers moving uniformly and
    simultaneously along their segments (closed form on the relative motion)."""
    px, py = a0[0] - b0[0], a0[1] - b0[1]
    vx = (a1[0] - a0[0]) - (b1[0] - b0[0])
    vy = (a1[1] - a0[1]) - (b1[1] - b0[1])
    vv = vx * vx + vy * vy
    if vv <= 0.0:
        return math.hypot(px, py)
    t = -(px * vx + py * vy) / vv
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(px + t * vx, py + t * vy)


def safety_check(config: Configuration, moves: list[MoveRecord],
                 sample_steps: int = 64) -> list[str]:
    """Violations of the transition from ``config`` under ``moves``.

    Checks swept pairwise separation (closed form backed by a sampled
    cross-check), light-transition legality, and leader uniqueness after the
    transition.
    """
    out = []
    n = config.n
    start = {m.robot: m.frm for m in moves}
    end = {m.robot: m.to for m in moves}
    pos0 = [r.position for r in config.robots]
    pos1 = [end.get(i, pos0[i]) for i in range(n)]
    movers = [m.robot for m in moves
              if (m.to - m.frm).norm() > EPS_POS]
    ts = np.linspace(0.0, 1.0, sample_steps + 1)
    checked = set()
    for i in movers:
        for j in range(n):
            if j == i or (min(i, j), max(i, j)) in checked:
                continue
            checked.add((min(i, j), max(i, j)))
            dmin = _swept_min_distance(pos0[i], pos1[i], pos0[j], pos1[j])
            if dmin < 2.5:
                ax = pos0[i][0] + ts * (pos1[i][0] - pos0[i][0])
                ay = pos0[i][1] + ts * (pos1[i][1] - pos0[i][1])
                bx = pos0[j][0] + ts * (pos1[j][0] - pos0[j][0])
                by = pos0[j][1] + ts * (pos1[j][1] - pos0[j][1])
                dmin = min(dmin, float(np.sqrt((ax - bx) ** 2 + (ay - by) ** 2).min()))
            if dmin < 2.0 - EPS_POS:
                out.append(
                    f"collision: robots {i} and {j} swept distance {dmin:.9f}")
    for m in moves:
        if m.color_after not in ALLOWED_TRANSITIONS[m.color_before]:
            out.append(
                f"illegal transition: robot {m.robot} "
                f"{m.color_before.value} -> {m.color_after.value}")
        if m.color_after != m.color_before and (m.to - m.frm).norm() > EPS_POS:
            out.append(
                f"robot {m.robot} moved and changed color in one decision")
    new_colors = {m.robot: m.color_after for m in moves}
    leaders = sum(
        1 for i in range(n)
        if new_colors.get(i, config.robots[i].color) == Color.LEADER)
    if leaders > 1:
        out.append(f"{leaders} leader-colored robots after the round")
    return out


def potential_B(config: Configuration) -> int:
    """Size of the leader-election potential set: ordered pairs (r, r') with
    r live (off) and r' blocking it now or able to block it later.

    r' qualifies when it shares r's horizontal line, sits to the north
    closer than 1-c, is a live robot to the north, or is anywhere south.
    """
    colors = [r.color for r in config.robots]
    if any(c == Color.LEADER for c in colors):
        raise LeaderPresent("potential is defined only while no leader exists")
    c = config.model.camera_radius
    ys = np.array([r.position.y for r in config.robots])
    live = np.array([col == Color.OFF for col in colors])
    n = config.n
    dy = ys[None, :] - ys[:, None]          # dy[r, r'] = y' - y
    same = np.abs(dy) <= EPS_POS
    north = dy > EPS_POS
    south = dy < -EPS_POS
    bad = same | (north & (dy < (1.0 - c)))
    member = bad | (north & live[None, :]) | south
    member &= live[:, None]
    np.fill_diagonal(member, False)
    return int(member.sum())


@dataclass
class PhaseMarkers:
    t1: Optional[int] = None
    t2: Optional[int] = None
    t3: Optional[int] = None


def base_chain_complete(positions, colors, model, leader_idx) -> bool:
    """Leader plus n-2 robots sitting on the leader line at valid base
    offsets, filled east-first.  The one robot left over is the last robot,
    which never joins the base."""
    n = len(positions)
    if n == 1:
        return True
    lx, ly = positions[leader_idx]
    east, west = [], []
    for i in range(n):
        if i == leader_idx:
            continue
        x, y = positions[i]
        if abs(y - ly) > EPS_POS:
            continue
        (east if x > lx else west).append(abs(x - lx))
    if len(east) + len(west) != n - 2:
        return False
    if not (len(east) == len(west) or len(east) == len(west) + 1):
        return False
    if not east:
        return n <= 2
    sigma = min(east + west)
    try:
        spec = spec_from_sigma(sigma)
        offs = base_offsets(spec, max(len(east), len(west)))
    except (ValueError, BranchOverflow):
        return False
    for branch in (sorted(east), sorted(west)):
        for k, x in enumerate(branch):
            if abs(x - offs[k]) > 10 * EPS_POS:
                return False
    return True


def detect_phase(config: Configuration, markers: PhaseMarkers,
                 round_idx: int) -> PhaseMarkers:
    """Update phase markers from the post-round configuration."""
    colors = [r.color for r in config.robots]
    if markers.t1 is None and any(
            c in (Color.LEADER, Color.EXPAND, Color.FINAL) for c in colors):
        markers.t1 = round_idx
    if markers.t1 is not None and markers.t2 is None:
        leader_idx = next(
            (i for i, c in enumerate(colors)
             if c in (Color.LEADER, Color.EXPAND)), None)
        if leader_idx is None and all(c == Color.FINAL for c in colors):
            leader_idx = int(np.argmin([r.position.y for r in config.robots]))
        if leader_idx is not None:
            pos = [(r.position.x, r.position.y) for r in config.robots]
            if base_chain_complete(pos, colors, config.model, leader_idx):
                markers.t2 = round_idx
    if markers.t3 is None and all(c == Color.FINAL for c in colors):
        markers.t3 = round_idx
    return markers


# ---------------------------------------------------------------------------
# Cached all-pairs visibility
# ---------------------------------------------------------------------------

class VisibilityCache:
    """Ordered-pair visibility matrix with exact-safe invalidation.

    A pair's verdict can only change when one of its endpoints moves or when
    some robot whose body can reach the pair's sight corridor moves.  The
    corridor between a camera and a body lies inside the capsule of radius 1
    around the center segment, so centers further than 2 from the segment
    are irrelevant.
    """

    REACH = 2.0 + 1e-6

    def __init__(self, model: VisibilityModel, positions: np.ndarray):
        self.model = model
        self.pos = positions.copy()
        n = len(positions)
        self.valid = np.zeros((n, n), dtype=bool)
        self.matrix = np.zeros((n, n), dtype=bool)
        np.fill_diagonal(self.valid, True)

    def _point_vs_all_segments(self, p) -> np.ndarray:
        A = self.pos[:, None, :]
        B = self.pos[None, :, :]
        D = B - A
        dd = (D ** 2).sum(axis=2)
        dd = np.where(dd <= 0.0, 1.0, dd)
        t = ((p - A) * D).sum(axis=2) / dd
        t = np.clip(t, 0.0, 1.0)
        foot = A + t[:, :, None] * D
        return np.sqrt(((foot - p) ** 2).sum(axis=2))

    def update_positions(self, new_positions: np.ndarray, moved) -> None:
        moved = [i for i in moved
                 if not np.array_equal(new_positions[i], self.pos[i])]
        old = {i: self.pos[i].copy() for i in moved}
        self.pos = new_positions.copy()
        if not moved:
            return
        for i in moved:
            self.valid[i, :] = False
            self.valid[:, i] = False
            self.valid[i, i] = True
        for i in moved:
            for p in (old[i], self.pos[i]):
                near = self._point_vs_all_segments(p) <= self.REACH
                self.valid &= ~near
        np.fill_diagonal(self.valid, True)

    def rows(self, observers) -> np.ndarray:
        need = []
        for i in observers:
            for j in np.flatnonzero(~self.valid[i]):
                need.append((i, int(j)))
        if need:
            pairs = np.array(need, dtype=np.int64)
            res = visible_pairs(self.pos, self.model, pairs)
            for (i, j), v in zip(need, res):
                self.matrix[i, j] = v
                self.valid[i, j] = True
        return self.matrix

    def full_matrix(self) -> np.ndarray:
        return self.rows(range(len(self.pos)))


# ---------------------------------------------------------------------------
# Round execution
# ---------------------------------------------------------------------------

def _step(config: Configuration, scheduler: SchedulerPolicy,
          movement: MovementPolicy, sched_rng, move_rng,
          cache: VisibilityCache, inactivity, round_idx: int):
    n = config.n
    active = sorted(activation_set(scheduler, n, sched_rng, inactivity))
    matrix = cache.rows(active)
    moves = []
    for i in active:
        entries = tuple(
            ViewEntry(config.robots[j].position, config.robots[j].color)
            for j in range(n) if matrix[i, j])
        state = RobotState(config.robots[i].position, config.robots[i].color)
        decision = compute(state, View(i, entries), config.params)
        actual = apply_move(state.position, decision.destination,
                            movement, move_rng)
        moves.append(MoveRecord(i, state.position, actual,
                                state.color, decision.new_color))
    violations = safety_check(config, moves)
    if violations:
        raise SafetyViolation(round_idx, violations)
    robots = list(config.robots)
    moved = []
    for m in moves:
        robots[m.robot] = Robot(m.to, m.color_after)
        if (m.to - m.frm).norm() > 0.0:
            moved.append(m.robot)
    new_config = Configuration(tuple(robots), config.model, config.params)
    cache.update_positions(new_config.positions_array(), moved)
    events = [TraceEvent(round_idx, m.robot, m.frm, m.to,
                         m.color_before, m.color_after)
              for m in moves
              if m.color_after != m.color_before or (m.to - m.frm).norm() > 0.0]
    return new_config, events, active


def step_round(config: Configuration, scheduler: SchedulerPolicy,
               movement: MovementPolicy, sched_rng, move_rng,
               cache: Optional[VisibilityCache] = None,
               round_idx: int = 0) -> tuple[Configuration, list[TraceEvent]]:
    """One scheduler round: simultaneous snapshots, decisions, moves.

    Raises SafetyViolation when the transition breaks a monitor.
    """
    if cache is None:
        cache = VisibilityCache(config.model, config.positions_array())
    new_config, events, _ = _step(config, scheduler, movement,
                                  sched_rng, move_rng, cache, None, round_idx)
    return new_config, events


# ---------------------------------------------------------------------------
# Run loop with monitors and online metrics
# ---------------------------------------------------------------------------

class EpochTracker:
    """An epoch ends at the first round by which every robot has been
    activated at least once since the previous boundary."""

    def __init__(self, n: int):
        self.n = n
        self.pending = set(range(n))
        self.completed = 0
        self.boundaries: list[int] = []  # round index ending each epoch

    def update(self, active, round_idx: int) -> bool:
        self.pending -= set(active)
        if not self.pending:
            self.completed += 1
            self.boundaries.append(round_idx)
            self.pending = set(range(self.n))
            return True
        return False

    @property
    def epochs_elapsed(self) -> int:
        """Completed epochs, counting a partial epoch in progress."""
        return self.completed + (1 if len(self.pending) < self.n else 0)


@dataclass
class MonitorReport:
    potential_increases: list = field(default_factory=list)
    potential_epoch_failures: list = field(default_factory=list)
    off_moves_after_t1: int = 0
    leaders_ever: int = 0
    final_all_visible: Optional[bool] = None
    final_matches_chain: Optional[bool] = None

    def ok(self) -> bool:
        return (not self.potential_increases
                and not self.potential_epoch_failures
                and self.off_moves_after_t1 == 0
                and self.leaders_ever <= 1
                and self.final_all_visible in (None, True)
                and self.final_matches_chain in (None, True))


@dataclass
class RunStats:
    n: int
    rounds: int = 0
    epochs: int = 0
    false_southmost_moves: int = 0
    defeat_epochs: Optional[int] = None
    expansions: int = 0
    total_distance: float = 0.0
    final_width: float = 0.0
    final_height: float = 0.0
    stretch_history: list = field(default_factory=list)


class MetricsAccumulator:
    """Online run metrics; also reused to replay a recorded trace."""

    def __init__(self, n: int):
        self.stats = RunStats(n=n)
        self.epochs = EpochTracker(n)
        self._sigma_last: Optional[float] = None

    def update(self, round_idx, pre_positions, pre_colors, events, active,
               post_positions, post_colors):
        st = self.stats
        st.rounds = round_idx
        ys = [p[1] for p in pre_positions]
        for ev in events:
            dx = ev.to.x - ev.frm.x
            dy = ev.to.y - ev.frm.y
            dist = math.hypot(dx, dy)
            st.total_distance += dist
            if (ev.color_before == Color.OFF and dist > EPS_POS
                    and dy < -EPS_POS):
                if any(k != ev.robot and ys[k] < ev.frm.y - EPS_POS
                       for k in range(len(ys))):
                    st.false_southmost_moves += 1
            if ev.color_before == Color.LEADER and ev.color_after == Color.EXPAND:
                st.expansions += 1
        self.epochs.update(active, round_idx)
        st.epochs = self.epochs.epochs_elapsed
        if (st.defeat_epochs is None
                and sum(1 for c in post_colors if c == Color.OFF) <= 1):
            st.defeat_epochs = self.epochs.epochs_elapsed
        self._track_stretch(events, post_positions, post_colors)

    def _track_stretch(self, events, positions, colors):
        """One stretch entry when the first base robot lands, then one per
        completed expansion (the leader flipping back from expand)."""
        if not events:
            return
        if not self.stats.stretch_history:
            leader_idx = next((i for i, c in enumerate(colors)
                               if c in (Color.LEADER, Color.EXPAND)), None)
            if leader_idx is None:
                return
            lx, ly = positions[leader_idx]
            base = [abs(positions[i][0] - lx) for i in range(len(colors))
                    if i != leader_idx and abs(positions[i][1] - ly) <= EPS_POS]
            if base:
                self._append_stretch(min(base))
            return
        for ev in events:
            if ev.color_before == Color.EXPAND and ev.color_after == Color.LEADER:
                lx, ly = positions[ev.robot]
                parked = [abs(positions[i][0] - lx) for i in range(len(colors))
                          if i != ev.robot
                          and abs(positions[i][1] - (ly + 4.0)) <= EPS_POS]
                if parked:
                    self._append_stretch(min(parked))

    def _append_stretch(self, sigma: float):
        if self._sigma_last is not None and abs(sigma - self._sigma_last) <= EPS_POS:
            return
        self._sigma_last = sigma
        try:
            self.stats.stretch_history.append(spec_from_sigma(sigma).stretch)
        except ValueError:
            pass

    def finalize(self, positions):
        xs = [p[0] for p in positions]
        ys = [p[1] for p in positions]
        self.stats.final_width = max(xs) - min(xs)
        self.stats.final_height = max(ys) - min(ys)
        return self.stats


def _northwestmost_live(config: Configuration) -> Optional[int]:
    best = None
    key = None
    for i, r in enumerate(config.robots):
        if r.color != Color.OFF:
            continue
        k = (-r.position.y, r.position.x)
        if key is None or k < key:
            key, best = k, i
    return best


def final_chain_matches(config: Configuration) -> bool:
    """Does the final configuration coincide with a generated chain?"""
    from .chain import chain_points
    pos = [r.position for r in config.robots]
    tip = min(pos, key=lambda p: p.y)
    east = sorted(p.x - tip.x for p in pos if p.x > tip.x + EPS_POS)
    west = sorted(tip.x - p.x for p in pos if p.x < tip.x - EPS_POS)
    if 1 + len(east) + len(west) != len(pos):
        return False
    if not east and not west:
        return len(pos) == 1
    sigma = min(east + west)
    try:
        expected = chain_points(spec_from_sigma(sigma), len(east), len(west), tip)
    except (ValueError, BranchOverflow):
        return False
    used = [False] * len(expected)
    for p in pos:
        hit = next((k for k, q in enumerate(expected)
                    if not used[k] and (p - q).norm() <= 10 * EPS_POS), None)
        if hit is None:
            return False
        used[hit] = True
    return all(used)


@dataclass
class RunResult:
    status: str                 # "t3" | "t1" | "max_rounds"
    rounds: int
    markers: PhaseMarkers
    stats: RunStats
    monitors: MonitorReport
    config: Configuration
    trace: Optional[list] = None


def _point_pair(p: Point):
    return [p.x, p.y]


def trace_header(config: Configuration, scheduler, movement, mode) -> dict:
    return {
        "type": "header", "format_version": FORMAT_VERSION,
        "n": config.n, "camera_radius": config.model.camera_radius,
        "width_bound": config.params.width_bound,
        "separation_threshold": config.params.separation_threshold,
        "scheduler": {"mode": scheduler.mode,
                      "p": scheduler.activation_probability,
                      "seed": scheduler.seed},
        "movement": {"kind": movement.kind, "delta": movement.delta,
                     "adversary": movement.adversary, "seed": movement.seed},
        "mode": mode,
    }


def trace_init(config: Configuration) -> dict:
    return {"type": "init",
            "robots": [_point_pair(r.position) for r in config.robots],
            "colors": [r.color.value for r in config.robots]}


def event_record(ev: TraceEvent) -> dict:
    return {"type": "event", "round": ev.round, "robot": ev.robot,
            "from": _point_pair(ev.frm), "to": _point_pair(ev.to),
            "color_before": ev.color_before.value,
            "color_after": ev.color_after.value,
            "activated": ev.activated}


def run_simulation(config: Configuration, scheduler: SchedulerPolicy,
                   movement: MovementPolicy, mode: str = "full",
                   max_rounds: int = 1_000_000,
                   record_trace: Optional[Callable[[dict], None]] = None,
                   check_monitors: bool = True,
                   snapshot_hook: Optional[Callable] = None) -> RunResult:
    """Run to completion (all lights final, or leader election in
    leader-only mode), enforcing safety and collecting metrics.

    ``record_trace``, when given, receives every trace record as a dict;
    ``snapshot_hook(round_idx, config)`` is called after every round.
    """
    if mode not in ("full", "leader-only"):
        raise ValueError(f"unknown mode {mode!r}")
    config.validate()
    n = config.n
    sched_rng = np.random.default_rng(scheduler.seed)
    move_rng = np.random.default_rng(movement.seed)
    cache = VisibilityCache(config.model, config.positions_array())
    inactivity = np.zeros(n, dtype=np.int64)
    markers = PhaseMarkers()
    acc = MetricsAccumulator(n)
    monitors = MonitorReport()
    leaders_seen: set[int] = set()

    if record_trace is not None:
        record_trace(trace_header(config, scheduler, movement, mode))
        record_trace(trace_init(config))

    def leaderless(cfg):
        return all(r.color != Color.LEADER for r in cfg.robots)

    potential_prev = potential_B(config) if leaderless(config) else None
    epoch_start_potential = potential_prev
    epoch_has_nw_activation = False
    stale_rounds = 0
    status = "max_rounds"
    round_idx = 0

    for round_idx in range(1, max_rounds + 1):
        pre = config
        pre_positions = [(r.position.x, r.position.y) for r in pre.robots]
        pre_colors = [r.color for r in pre.robots]
        nw_live = _northwestmost_live(pre) if potential_prev is not None else None

        config, events, active = _step(pre, scheduler, movement, sched_rng,
                                       move_rng, cache, inactivity, round_idx)
        inactivity += 1
        inactivity[list(active)] = 0

        for i, r in enumerate(config.robots):
            if r.color == Color.LEADER:
                leaders_seen.add(i)
        monitors.leaders_ever = len(leaders_seen)

        if markers.t1 is not None:
            for ev in events:
                if (ev.color_before == Color.OFF
                        and (ev.to - ev.frm).norm() > EPS_POS):
                    monitors.off_moves_after_t1 += 1

        epoch_boundary = False
        post_positions = [(r.position.x, r.position.y) for r in config.robots]
        post_colors = [r.color for r in config.robots]
        acc.update(round_idx, pre_positions, pre_colors, events, active,
                   post_positions, post_colors)
        if acc.epochs.boundaries and acc.epochs.boundaries[-1] == round_idx:
            epoch_boundary = True

        if potential_prev is not None:
            if nw_live is not None and nw_live in active:
                epoch_has_nw_activation = True
            if leaderless(config):
                p_now = potential_B(config)
                if check_monitors and p_now > potential_prev:
                    monitors.potential_increases.append(
                        (round_idx, potential_prev, p_now))
                if epoch_boundary:
                    if (check_monitors and epoch_has_nw_activation
                            and epoch_start_potential
                            and p_now >= epoch_start_potential > 0):
                        monitors.potential_epoch_failures.append(
                            (round_idx, epoch_start_potential, p_now))
                    epoch_start_potential = p_now
                    epoch_has_nw_activation = False
                potential_prev = p_now
            else:
                potential_prev = None

        detect_phase(config, markers, round_idx)

        if record_trace is not None:
            for ev in events:
                record_trace(event_record(ev))
            record_trace({"type": "round", "round": round_idx,
                          "activated": list(active)})
        if snapshot_hook is not None:
            snapshot_hook(round_idx, config)

        stale_rounds = 0 if events else stale_rounds + 1
        if stale_rounds >= LIVELOCK_ROUNDS:
            raise LivelockSuspected(
                f"no state change for {LIVELOCK_ROUNDS} rounds "
                f"(round {round_idx}, markers {markers})")

        if mode == "leader-only" and markers.t1 is not None:
            status = "t1"
            break
        if markers.t3 is not None:
            status = "t3"
            break

    stats = acc.finalize([(r.position.x, r.position.y) for r in config.robots])
    if status == "t3" and check_monitors:
        matrix = cache.full_matrix()
        off_diag = ~np.eye(n, dtype=bool)
        monitors.final_all_visible = bool(matrix[off_diag].all())
        monitors.final_matches_chain = final_chain_matches(config)
    if record_trace is not None:
        record_trace({"type": "end", "status": status,
                      "t1": markers.t1, "t2": markers.t2, "t3": markers.t3,
                      "rounds": round_idx,
                      "epochs": stats.epochs,
                      "expansions": stats.expansions})
    return RunResult(status, round_idx, markers, stats, monitors, config)
