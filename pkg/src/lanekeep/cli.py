"""Batch command line front end.

Exit codes: 0 success, 2 configuration error, 3 the vehicle left the lane,
4 no derivative gain stabilises the requested loop.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

from .estimator import DatasetConfig, generate_dataset, write_dataset_csv
from .harness import (ConfigError, _from_dict, compare_configurations, compute_metrics,
                      config_to_dict, load_json, run_scenario, scenario_from_dict)
from .stability import (InfeasibleTuningError, StraightLoopParams, critical_delay,
                        sweep_critical_delay, tune_kd, write_sweep_csv)
from .track import TrackError, TrackParams, build_test_track

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OFF_TRACK = 3
EXIT_INFEASIBLE = 4


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _finite(x):
    return x if isinstance(x, (bool, str)) or math.isfinite(x) else None


def cmd_simulate(args) -> int:
    cfg = scenario_from_dict(load_json(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = run_scenario(cfg)
    trace.to_csv(out / "trace.csv", every=cfg.record_every)
    metrics = {k: _finite(v) for k, v in dataclasses.asdict(compute_metrics(trace)).items()}
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2) + "\n")
    print(json.dumps(metrics))
    return EXIT_OFF_TRACK if trace.off_track else EXIT_OK


def cmd_compare(args) -> int:
    """Config is either a bare scenario (standard three variants) or
    ``{"base": {...}, "variants": {"name": {overrides}}}``."""
    data = load_json(args.config)
    if isinstance(data, dict) and "base" in data:
        extra = set(data) - {"base", "variants"}
        if extra:
            raise ConfigError(f"compare: unknown key(s) {', '.join(sorted(extra))}")
        base = scenario_from_dict(data["base"])
        variants = None
        if data.get("variants"):
            base_dict = config_to_dict(base)
            variants = {name: scenario_from_dict(_merge(base_dict, ov))
                        for name, ov in data["variants"].items()}
    else:
        base = scenario_from_dict(data)
        variants = None
    table = compare_configurations(base, variants).as_table()
    cols = ("variant", "e_y_max", "e_psi_max", "rms_e_y", "lap_time", "mean_speed", "off_track")
    writer = csv.writer(sys.stdout)
    writer.writerow(cols)
    for row in table:
        writer.writerow([row[c] if isinstance(row[c], (str, bool)) else f"{row[c]:.6g}"
                         for c in cols])
    return EXIT_OFF_TRACK if any(r["off_track"] for r in table) else EXIT_OK


def cmd_sweep(args) -> int:
    """Grid file: ``{"v": [...], "L_d": [...], "K_D": [...]}`` plus optional
    scalar ``wheelbase`` and ``tau``."""
    data = load_json(args.grid)
    if not isinstance(data, dict):
        raise ConfigError("grid: expected an object")
    extra = set(data) - {"v", "L_d", "K_D", "wheelbase", "tau"}
    if extra:
        raise ConfigError(f"grid: unknown key(s) {', '.join(sorted(extra))}")
    fixed = StraightLoopParams(wheelbase=data.get("wheelbase", 0.26), tau=data.get("tau", 0.17))
    axes = {}
    for key in ("v", "L_d", "K_D"):
        if key in data:
            value = data[key]
            axes[key] = [float(x) for x in (value if isinstance(value, list) else [value])]
    rows = sweep_critical_delay(axes, fixed)
    write_sweep_csv(rows, args.out)
    print(f"{len(rows)} rows written to {args.out}")
    return EXIT_OK


def cmd_tune(args) -> int:
    kd = tune_kd(args.v, args.Ld, args.wheelbase, args.tau)
    delay = critical_delay(StraightLoopParams(args.v, args.Ld, kd, args.wheelbase, args.tau))
    print(json.dumps({"v": args.v, "L_d": args.Ld, "K_D": kd, "critical_delay": _finite(delay)}))
    return EXIT_OK


def cmd_dataset(args) -> int:
    """Config: DatasetConfig fields plus optional ``track``, ``lane``, ``direction``."""
    data = load_json(args.config)
    if not isinstance(data, dict):
        raise ConfigError("dataset: expected an object")
    data = dict(data)
    track_params = _from_dict(TrackParams, data.pop("track", {}), "dataset.track")
    lane = data.pop("lane", "centerline")
    direction = data.pop("direction", "clockwise")
    cfg = _from_dict(DatasetConfig, data, "dataset")
    track = build_test_track(track_params, lane, direction)
    records = generate_dataset(track, cfg)
    write_dataset_csv(records, cfg.lookaheads, args.out)
    print(f"{len(records)} samples written to {args.out}")
    return EXIT_OK


def cmd_track(args) -> int:
    data = load_json(args.params) if args.params else {}
    params = _from_dict(TrackParams, data, "track")
    track = build_test_track(params, args.lane, args.direction)
    poly = track.polyline(args.spacing)
    with open(args.emit_polyline, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("s", "x", "y", "psi", "kappa"))
        for row in poly:
            writer.writerow([f"{x:.9g}" for x in row])
    print(f"total length {track.total_length:.6f} m, {len(poly)} points")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lanekeep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario, write trace.csv and metrics.json")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare controller variants on one scenario")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep-stability", help="critical delay over a parameter grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tune", help="derivative gain maximising the critical delay")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--Ld", type=float, required=True)
    p.add_argument("--wheelbase", type=float, default=0.26)
    p.add_argument("--tau", type=float, default=0.17)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("dataset", help="labelled perturbed-pose dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("track", help="sample the test track centreline or a lane")
    p.add_argument("--params", default=None, help="JSON with track parameters")
    p.add_argument("--emit-polyline", required=True)
    p.add_argument("--lane", default="centerline", choices=("centerline", "inner_lane", "outer_lane"))
    p.add_argument("--direction", default="clockwise", choices=("clockwise", "counterclockwise"))
    p.add_argument("--spacing", type=float, default=0.01)
    p.set_defaults(func=cmd_track)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleTuningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, TrackError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
