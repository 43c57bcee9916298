"""Command-line surface: simulate, batch, verify-visibility, render.

Run specifications are JSON documents validated against a strict schema
(unknown keys rejected).  Exit codes: 0 success, 1 safety violation or
livelock, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from .engine import (
    FORMAT_VERSION,
    Configuration,
    LivelockSuspected,
    MovementPolicy,
    SafetyViolation,
    SchedulerPolicy,
    make_configuration,
    run_simulation,
)
from .experiments import (
    DeploymentSpec,
    PlacementExhausted,
    RunMetrics,
    collect_metrics,
    generate_config,
    metrics_from_result,
)
from .geometry import Point
from .protocol import Color, ProtocolParams
from .render import render_svg
from .visibility import (
    VisibilityModel,
    is_visible_sampled,
    surviving_arc_measure,
)

RUN_SPEC_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["c"],
    "properties": {
        "c": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "D": {"type": "number", "exclusiveMinimum": 0},
        "threshold10": {"type": "boolean"},
        "mode": {"enum": ["full", "leader-only"]},
        "scheduler": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["fsync", "ssync"]},
                "p": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "seed": {"type": "integer"},
            },
        },
        "movement": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["rigid", "nonrigid"]},
                "delta": {"type": "number", "minimum": 2},
                "adversary": {"enum": ["full", "always_delta", "uniform_random"]},
                "seed": {"type": "integer"},
            },
        },
        "robots": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"},
                      "minItems": 2, "maxItems": 2},
            "minItems": 1,
        },
        "deployment": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n"],
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "width": {"type": "number", "exclusiveMinimum": 0},
                "height": {"type": "number", "exclusiveMinimum": 0},
                "density": {"type": "number", "exclusiveMinimum": 0},
                "aspect": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer"},
            },
        },
    },
}


class InputError(Exception):
    pass


def load_run_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read run spec {path}: {exc}") from exc
    try:
        jsonschema.validate(spec, RUN_SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InputError(f"invalid run spec: {exc.message}") from exc
    if ("robots" in spec) == ("deployment" in spec):
        raise InputError("run spec needs exactly one of 'robots' or 'deployment'")
    return spec


def _deployment_from_spec(spec: dict, seed_shift: int = 0) -> DeploymentSpec:
    d = spec["deployment"]
    seed = d.get("seed", 0) + seed_shift
    if "width" in d and "height" in d:
        return DeploymentSpec(n=d["n"], width=d["width"], height=d["height"],
                              camera_radius=spec["c"], seed=seed)
    if "density" in d:
        return DeploymentSpec.from_density(
            n=d["n"], density=d["density"], aspect=d.get("aspect", 1.0),
            camera_radius=spec["c"], seed=seed)
    raise InputError("deployment needs width+height or density")


def build_configuration(spec: dict, seed_shift: int = 0) -> Configuration:
    c = spec["c"]
    if "robots" in spec:
        pts = [tuple(p) for p in spec["robots"]]
        width = max(x for x, _ in pts) - min(x for x, _ in pts) or 1.0
        D = spec.get("D", max(1.0, width))
        params = _params(D, c, spec)
        try:
            return make_configuration(pts, VisibilityModel(c), params)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    dep = _deployment_from_spec(spec, seed_shift)
    try:
        cfg = generate_config(dep)
    except PlacementExhausted as exc:
        raise InputError(str(exc)) from exc
    if "D" in spec or spec.get("threshold10"):
        params = _params(spec.get("D", dep.width), c, spec)
        cfg = Configuration(cfg.robots, cfg.model, params)
    return cfg


def _params(D: float, c: float, spec: dict) -> ProtocolParams:
    if spec.get("threshold10"):
        # practical mode: knowledge of the width bound is dropped
        return ProtocolParams(width_bound=D, camera_radius=c,
                              separation_threshold=10.0)
    return ProtocolParams(width_bound=D, camera_radius=c)


def _policies(spec: dict, seed_shift: int = 0):
    s = spec.get("scheduler", {})
    m = spec.get("movement", {})
    scheduler = SchedulerPolicy(
        mode=s.get("mode", "fsync"),
        activation_probability=s.get("p", 1.0),
        seed=s.get("seed", 0) + seed_shift)
    movement = MovementPolicy(
        kind=m.get("kind", "rigid"), delta=m.get("delta", 2.0),
        adversary=m.get("adversary", "full"),
        seed=m.get("seed", 0) + seed_shift)
    return scheduler, movement


def _metrics_payload(metrics: RunMetrics, result) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "status": metrics.status,
        "n": metrics.n,
        "T1": metrics.t1, "T2": metrics.t2, "T3": metrics.t3,
        "epochs": metrics.epochs,
        "m": metrics.false_southmost_moves,
        "r": metrics.defeat_epochs,
        "expansions": metrics.expansions,
        "total_distance": metrics.total_distance,
        "final_width": metrics.final_width,
        "final_height": metrics.final_height,
        "stretch_history": metrics.stretch_history,
        "monitors_ok": result.monitors.ok() if result else None,
    }


def cmd_simulate(args) -> int:
    spec = load_run_spec(args.spec)
    config = build_configuration(spec)
    scheduler, movement = _policies(spec)
    mode = spec.get("mode", "full")

    writer = None
    trace_fh = None
    if args.trace:
        trace_fh = open(args.trace, "w")

        def writer(rec):
            trace_fh.write(json.dumps(rec) + "\n")

    hook = None
    if args.svg_every:
        svg_dir = Path(args.svg_dir or "snapshots")
        svg_dir.mkdir(parents=True, exist_ok=True)
        (svg_dir / "round_000000.svg").write_text(render_svg(config, 0))

        def hook(round_idx, cfg):
            if round_idx % args.svg_every == 0:
                path = svg_dir / f"round_{round_idx:06d}.svg"
                path.write_text(render_svg(cfg, round_idx))

    try:
        result = run_simulation(config, scheduler, movement, mode=mode,
                                max_rounds=args.max_rounds,
                                record_trace=writer, snapshot_hook=hook)
    except (SafetyViolation, LivelockSuspected) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        if trace_fh:
            trace_fh.close()
        return 1
    finally:
        if trace_fh:
            trace_fh.close()

    metrics = metrics_from_result(result, mode=mode)
    if args.metrics:
        with open(args.metrics, "w") as fh:
            json.dump(_metrics_payload(metrics, result), fh, indent=2)
    done = result.status == ("t1" if mode == "leader-only" else "t3")
    print(f"status={result.status} rounds={result.rounds} "
          f"T1={result.markers.t1} T2={result.markers.t2} T3={result.markers.t3} "
          f"monitors_ok={result.monitors.ok()}")
    return 0 if done and result.monitors.ok() else 1


BATCH_HEADER = ["run", "seed", "n", "T1", "T2", "T3", "epochs", "m", "r",
                "expansions", "total_distance", "final_width", "final_height",
                "status", "format_version"]


def _batch_one(payload):
    spec, idx = payload
    config = build_configuration(spec, seed_shift=idx)
    scheduler, movement = _policies(spec, seed_shift=idx)
    mode = spec.get("mode", "full")
    base_seed = spec.get("deployment", {}).get("seed", 0) + idx
    try:
        result = run_simulation(config, scheduler, movement, mode=mode,
                                max_rounds=spec.get("max_rounds", 1_000_000))
        metrics = metrics_from_result(result, mode=mode, seed=base_seed)
        status = result.status
        if not result.monitors.ok():
            status = "monitor_violation"
    except (SafetyViolation, LivelockSuspected) as exc:
        metrics = RunMetrics(n=config.n, seed=base_seed,
                             status=type(exc).__name__)
        status = metrics.status
    row = [idx, base_seed, metrics.n, metrics.t1, metrics.t2, metrics.t3,
           metrics.epochs, metrics.false_southmost_moves,
           metrics.defeat_epochs, metrics.expansions,
           f"{metrics.total_distance:.6f}",
           f"{metrics.final_width:.6f}", f"{metrics.final_height:.6f}",
           status, FORMAT_VERSION]
    return idx, row


def cmd_batch(args) -> int:
    spec = load_run_spec(args.spec)
    if "deployment" not in spec:
        raise InputError("batch mode needs a deployment spec")
    jobs = [(spec, i) for i in range(args.runs)]
    threads = int(os.environ.get("SWARMVIS_THREADS", "1"))
    rows = {}
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for idx, row in pool.map(_batch_one, jobs):
                rows[idx] = row
    else:
        for job in jobs:
            idx, row = _batch_one(job)
            rows[idx] = row
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BATCH_HEADER)
        for i in range(args.runs):
            writer.writerow(rows[i])
    print(f"wrote {args.runs} runs to {args.out}")
    return 0


def cmd_verify_visibility(args) -> int:
    rng = np.random.default_rng(args.seed)
    from .engine import Robot

    disagreements = []
    total_pairs = 0
    boundary = 0
    for trial in range(args.trials):
        n = int(rng.integers(args.robots_min, args.robots_max + 1))
        c = float(rng.choice([0.25, 0.5, 0.75, 0.9]))
        side = max(10.0, math.sqrt(n * 20.0))
        pts = []
        while len(pts) < n:
            p = rng.uniform(0.0, side, 2)
            if all((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 >= 4.0 for q in pts):
                pts.append((float(p[0]), float(p[1])))
        model = VisibilityModel(c)
        params = ProtocolParams(width_bound=side, camera_radius=c)
        config = make_configuration(pts, model, params)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                total_pairs += 1
                measure = surviving_arc_measure(i, j, config)
                analytic = measure > 1e-9
                sampled = is_visible_sampled(i, j, config, args.samples,
                                             seed=args.seed + trial)
                if analytic == sampled:
                    continue
                if 0.0 < measure < 1e-8:
                    boundary += 1
                    continue
                disagreements.append({
                    "trial": trial, "observer": i, "target": j,
                    "camera_radius": c, "positions": pts,
                    "analytic": analytic, "sampled": sampled,
                    "surviving_measure": measure,
                })
    agreement = 1.0 - len(disagreements) / total_pairs if total_pairs else 1.0
    print(f"pairs={total_pairs} agreement={agreement:.6f} "
          f"boundary_excluded={boundary} disagreements={len(disagreements)}")
    if disagreements and args.dump:
        with open(args.dump, "w") as fh:
            json.dump({"format_version": FORMAT_VERSION,
                       "disagreements": disagreements}, fh, indent=2)
        print(f"fixtures written to {args.dump}")
    return 1 if disagreements else 0


def _config_at_round(trace_path: str, round_idx: int):
    positions = None
    colors = None
    header = None
    last_round = 0
    with open(trace_path) as fh:
        for line in fh:
            rec = json.loads(line)
            kind = rec.get("type")
            if kind == "header":
                header = rec
            elif kind == "init":
                positions = [tuple(p) for p in rec["robots"]]
                colors = [Color(cv) for cv in rec["colors"]]
            elif kind == "event":
                if rec["round"] > round_idx:
                    break
                positions[rec["robot"]] = tuple(rec["to"])
                colors[rec["robot"]] = Color(rec["color_after"])
                last_round = rec["round"]
            elif kind == "round":
                last_round = max(last_round, rec["round"])
                if rec["round"] >= round_idx:
                    break
    if header is None or positions is None:
        raise InputError("trace is missing header or init records")
    if round_idx > 0 and round_idx > last_round:
        raise InputError(f"round {round_idx} beyond the end of the trace")
    model = VisibilityModel(header["camera_radius"])
    params = ProtocolParams(width_bound=header["width_bound"],
                            camera_radius=header["camera_radius"],
                            separation_threshold=header["separation_threshold"])
    return make_configuration(positions, model, params, colors=colors)


def cmd_render(args) -> int:
    config = _config_at_round(args.trace, args.round)
    svg = render_svg(config, args.round)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmvis",
        description="Mutual-visibility simulator for fat robots with slim cameras")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation")
    p.add_argument("--spec", required=True)
    p.add_argument("--trace")
    p.add_argument("--metrics")
    p.add_argument("--svg-every", type=int, default=0)
    p.add_argument("--svg-dir")
    p.add_argument("--max-rounds", type=int, default=1_000_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("batch", help="run N seeded simulations to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("verify-visibility",
                       help="cross-validate the analytic and sampled oracles")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--robots-min", type=int, default=3)
    p.add_argument("--robots-max", type=int, default=10)
    p.add_argument("--samples", type=int, default=48)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump", help="JSON path for disagreement fixtures")
    p.set_defaults(func=cmd_verify_visibility)

    p = sub.add_parser("render", help="render one trace round to SVG")
    p.add_argument("--trace", required=True)
    p.add_argument("--round", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
