"""Random deployments, per-run metrics, and batch aggregation.

Deployments are drawn uniformly inside a rectangle; candidates within 2
units of an accepted point are rejected and redrawn.  Metrics follow the
desk-scale studies: counts of moves by false southmost robots, epochs until
all but one robot concedes, expansions, distance traversed, and the final
extent of the configuration.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .chain import branch_capacity, spec_from_sigma
from .engine import (
    Configuration,
    MetricsAccumulator,
    RunResult,
    TraceEvent,
    make_configuration,
)
from .geometry import EPS_POS, Point
from .protocol import Color, ProtocolParams
from .visibility import VisibilityModel

PLACEMENT_ATTEMPTS = 1_000_000


class PlacementExhausted(RuntimeError):
    pass


class ModeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DeploymentSpec:
    n: int
    width: float
    height: float
    camera_radius: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("rectangle sides must be positive")
        if self.width * self.height < self.n * math.pi:
            raise ValueError(
                f"area {self.width * self.height:.1f} cannot pack {self.n} "
                f"unit disks")

    @classmethod
    def from_density(cls, n: int, density: float, aspect: float,
                     camera_radius: float = 0.5, seed: int = 0) -> "DeploymentSpec":
        """Rectangle with the given robots-per-unit-area and width:height ratio."""
        area = n / density
        return cls(n=n, width=math.sqrt(area * aspect),
                   height=math.sqrt(area / aspect),
                   camera_radius=camera_radius, seed=seed)

    @property
    def density(self) -> float:
        return self.n / (self.width * self.height)

    @property
    def aspect(self) -> float:
        return self.width / self.height


def generate_config(spec: DeploymentSpec, rng=None) -> Configuration:
    """Uniform random placement with 2-unit separation by rejection.

    The protocol's width bound D is set to the rectangle width.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    pts: list[tuple[float, float]] = []
    rejections = 0
    while len(pts) < spec.n:
        x = rng.uniform(0.0, spec.width)
        y = rng.uniform(0.0, spec.height)
        if all((x - px) ** 2 + (y - py) ** 2 >= 4.0 for px, py in pts):
            pts.append((x, y))
            rejections = 0
        else:
            rejections += 1
            if rejections >= PLACEMENT_ATTEMPTS:
                raise PlacementExhausted(
                    f"{rejections} consecutive rejections placing robot "
                    f"{len(pts) + 1} of {spec.n}")
    model = VisibilityModel(spec.camera_radius)
    params = ProtocolParams(width_bound=spec.width,
                            camera_radius=spec.camera_radius)
    return make_configuration(pts, model, params)


@dataclass
class RunMetrics:
    """Spec-level metrics of one run (leader-only runs leave t2/t3 unset)."""

    n: int
    seed: int = 0
    t1: Optional[int] = None
    t2: Optional[int] = None
    t3: Optional[int] = None
    epochs: int = 0
    false_southmost_moves: int = 0
    defeat_epochs: Optional[int] = None
    expansions: int = 0
    total_distance: float = 0.0
    final_width: float = 0.0
    final_height: float = 0.0
    stretch_history: list = field(default_factory=list)
    status: str = "ok"

    @property
    def final_stretch(self) -> Optional[float]:
        return self.stretch_history[-1] if self.stretch_history else None


def metrics_from_result(result: RunResult, mode: str = "full",
                        seed: int = 0) -> RunMetrics:
    st = result.stats
    m = RunMetrics(
        n=st.n, seed=seed,
        t1=result.markers.t1, t2=result.markers.t2, t3=result.markers.t3,
        epochs=st.epochs,
        false_southmost_moves=st.false_southmost_moves,
        defeat_epochs=st.defeat_epochs if mode == "leader-only" else None,
        expansions=st.expansions,
        total_distance=st.total_distance,
        final_width=st.final_width,
        final_height=st.final_height,
        stretch_history=list(st.stretch_history),
        status=result.status,
    )
    return m


def _iter_records(trace) -> Iterable[dict]:
    if isinstance(trace, (str, bytes)):
        with open(trace) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)
        return
    yield from trace


def collect_metrics(trace, mode: str = "full") -> RunMetrics:
    """Replay a recorded trace (a JSONL path or an iterable of records)
    through the same accumulator the engine uses online."""
    records = _iter_records(trace)
    header = next(records)
    if header.get("type") != "header":
        raise ValueError("trace must start with a header record")
    trace_mode = header.get("mode", "full")
    if mode == "leader-only" and trace_mode != "leader-only":
        raise ModeMismatch(
            "defeat epochs are defined only for leader-only traces")
    init = next(records)
    if init.get("type") != "init":
        raise ValueError("second trace record must be the initial placement")
    positions = [tuple(p) for p in init["robots"]]
    colors = [Color(c) for c in init["colors"]]
    n = len(positions)
    acc = MetricsAccumulator(n)
    markers = {"t1": None, "t2": None, "t3": None}
    pending_events: list[TraceEvent] = []
    status = "incomplete"
    for rec in records:
        kind = rec.get("type")
        if kind == "event":
            pending_events.append(TraceEvent(
                rec["round"], rec["robot"],
                Point(*rec["from"]), Point(*rec["to"]),
                Color(rec["color_before"]), Color(rec["color_after"])))
        elif kind == "round":
            pre_positions = list(positions)
            pre_colors = list(colors)
            for ev in pending_events:
                positions[ev.robot] = (ev.to.x, ev.to.y)
                colors[ev.robot] = ev.color_after
            acc.update(rec["round"], pre_positions, pre_colors,
                       pending_events, rec["activated"], positions, colors)
            pending_events = []
        elif kind == "end":
            markers = {"t1": rec["t1"], "t2": rec["t2"], "t3": rec["t3"]}
            status = rec["status"]
    stats = acc.finalize(positions)
    return RunMetrics(
        n=n, t1=markers["t1"], t2=markers["t2"], t3=markers["t3"],
        epochs=stats.epochs,
        false_southmost_moves=stats.false_southmost_moves,
        defeat_epochs=stats.defeat_epochs if trace_mode == "leader-only" else None,
        expansions=stats.expansions,
        total_distance=stats.total_distance,
        final_width=stats.final_width,
        final_height=stats.final_height,
        stretch_history=list(stats.stretch_history),
        status=status,
    )


_NUMERIC_FIELDS = ("t1", "t2", "t3", "epochs", "false_southmost_moves",
                   "defeat_epochs", "expansions", "total_distance",
                   "final_width", "final_height")


def aggregate(runs: list[RunMetrics]) -> dict:
    """Per-metric min/max/mean/stddev plus the raw rows, ordered by run index."""
    if not runs:
        raise ValueError("aggregate needs at least one run")
    summary = {}
    for name in _NUMERIC_FIELDS:
        vals = [getattr(r, name) for r in runs if getattr(r, name) is not None]
        if not vals:
            continue
        summary[name] = {
            "min": min(vals),
            "max": max(vals),
            "mean": statistics.fmean(vals),
            "stddev": statistics.pstdev(vals) if len(vals) > 1 else 0.0,
        }
    return {"runs": len(runs), "metrics": summary, "rows": list(runs)}


def optimal_sigma(n: int) -> float:
    """Smallest first-slot offset whose base chain holds the n-2 base robots.

    Binary search against the 2-unit spacing rule; the baseline the trial
    and error expansion scheme is compared with.
    """
    if n <= 2:
        return float(2.0)
    need = -(-(n - 2) // 2)  # east branch takes the ceiling

    def fits(sigma: float) -> bool:
        try:
            return branch_capacity(spec_from_sigma(sigma)) >= need
        except ValueError:
            return False

    lo, hi = 2.0, 4.0
    while not fits(hi):
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("no feasible stretch found")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if fits(mid):
            hi = mid
        else:
            lo = mid
    return hi


def optimal_stretch(n: int) -> float:
    return spec_from_sigma(optimal_sigma(n)).stretch
