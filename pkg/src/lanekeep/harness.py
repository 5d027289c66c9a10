"""Closed-loop lane keeping scenarios, metrics and configuration comparison.

One step of the loop (fixed ``dt``):

1. project the rear axle on the reference path (errors for the trace);
2. query the heading error sensor; a new frame updates the filtered
   derivative, the PP-D steering reference and the PP-VR speed target,
   all held until the next frame;
3. pass the steering reference through the dead-time/lag actuator;
4. smooth the speed target, run the speed PID and the drivetrain lag;
5. integrate the bicycle model.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import typing
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .controllers import (DerivState, PPDConfig, PPVRConfig, lhe_derivative, ppd_steer,
                          ppvr_velocity, smooth_velocity_ref)
from .estimator import SensorConfig, SensorState, sense
from .track import (NoLookaheadError, OffTrackError, PoseG, TrackParams, build_test_track,
                    lhe_global, point_at, project)
from .vehicle import (ActuatorState, VehicleParams, VehicleState, VelocityGains,
                      VelocityLoopState, actuator_step, step_global, velocity_actuator_step,
                      velocity_loop_step)

TRACE_COLUMNS = ("t", "x", "y", "psi", "v", "s", "e_y", "e_psi", "alpha_true",
                 "alpha_meas", "delta_r", "delta", "v_ref")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InitialCondition:
    """Initial path-frame errors; ``s=None`` starts at the first straight."""

    s: float | None = None
    e_y: float = 0.05
    e_psi: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one closed-loop run.

    ``velocity`` is either a :class:`PPVRConfig` or a fixed speed in m/s.
    The sensor always uses the controller's lookahead distance and the
    scenario ``rng_seed``.  Exactly one of ``duration`` (s) and ``laps``
    ends the run; with neither, it lasts 30 s.
    """

    track: TrackParams = TrackParams()
    lane: str = "centerline"
    direction: str = "clockwise"
    vehicle: VehicleParams = VehicleParams()
    controller: PPDConfig = PPDConfig()
    velocity: PPVRConfig | float = PPVRConfig()
    sensor: SensorConfig = SensorConfig()
    dt: float = 1e-3
    duration: float | None = None
    laps: float | None = None
    initial: InitialCondition = InitialCondition()
    initial_speed: float | None = None
    off_track_threshold: float | None = None
    record_every: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.duration is not None and self.laps is not None:
            raise ConfigError("give either duration or laps, not both")
        if self.duration is not None and not self.duration > 0:
            raise ConfigError("duration must be positive")
        if self.laps is not None and not self.laps > 0:
            raise ConfigError("laps must be positive")
        if isinstance(self.velocity, (int, float)) and not self.velocity > 0:
            raise ConfigError("fixed speed must be positive")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")

    @property
    def horizon(self) -> float:
        if self.duration is not None:
            return self.duration
        return math.inf if self.laps is not None else 30.0

    def build_track(self):
        return build_test_track(self.track, self.lane, self.direction)


@dataclass
class SimTrace:
    """Uniformly sampled simulation log, one array per column."""

    columns: dict
    off_track: bool = False
    track_length: float = math.nan
    dt: float = math.nan

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["t"])

    def to_csv(self, path, every: int = 10) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            data = np.column_stack([self.columns[c] for c in TRACE_COLUMNS])[::every]
            for row in data:
                writer.writerow([f"{x:.9g}" for x in row])


@dataclass(frozen=True)
class MetricsReport:
    e_y_max: float
    e_psi_max: float
    rms_e_y: float
    lap_time: float
    mean_speed: float
    off_track: bool


def initial_state(cfg: ScenarioConfig, track) -> tuple[VehicleState, float]:
    init = cfg.initial
    s0 = init.s
    if s0 is None:
        s0 = next(sec.s_start for sec in track.sections if sec.kind == "segment")
    p = point_at(track, s0)
    if cfg.initial_speed is not None:
        v0 = cfg.initial_speed
    elif isinstance(cfg.velocity, PPVRConfig):
        v0 = cfg.velocity.v_max
    else:
        v0 = float(cfg.velocity)
    state = VehicleState(p.x - init.e_y * math.sin(p.psi), p.y + init.e_y * math.cos(p.psi),
                         p.psi + init.e_psi, v0)
    return state, p.s


def run_scenario(cfg: ScenarioConfig) -> SimTrace:
    """Simulate ``cfg`` and return the full-rate trace.

    Leaving the lane corridor (``|e_y|`` above the threshold, or no path
    within the capture radius) stops the run and sets ``off_track``.
    """
    track = cfg.build_track()
    total = track.total_length
    veh = cfg.vehicle
    ctl = cfg.controller
    lookahead = ctl.lookahead
    sensor_cfg = replace(cfg.sensor, lookahead=lookahead, rng_seed=cfg.rng_seed)
    sensor_state = SensorState.create(sensor_cfg)
    threshold = cfg.off_track_threshold if cfg.off_track_threshold is not None else cfg.track.w
    ppvr = cfg.velocity if isinstance(cfg.velocity, PPVRConfig) else None
    smooth_rate = ppvr.smooth_rate if ppvr else PPVRConfig().smooth_rate

    state, s_prev = initial_state(cfg, track)
    actuator = ActuatorState.at_rest(veh)
    deriv = DerivState()
    vloop = VelocityLoopState()
    alpha_held, dalpha_held = 0.0, 0.0
    alpha_meas = math.nan
    delta_r = 0.0
    v_target = ppvr.v_max if ppvr else float(cfg.velocity)
    v_ref = state.v
    progress = 0.0
    lap_goal = cfg.laps * total if cfg.laps is not None else math.inf
    horizon = cfg.horizon

    rows = []
    off_track = False
    k = 0
    while True:
        t = k * cfg.dt
        if t >= horizon - 1e-12 or progress >= lap_goal:
            break
        pose = PoseG(state.x, state.y, state.psi)
        try:
            err = project(track, pose)
        except OffTrackError:
            off_track = True
            break
        progress += (err.s - s_prev + total / 2) % total - total / 2
        s_prev = err.s
        if abs(err.e_y) > threshold:
            off_track = True
            break
        try:
            alpha_true = lhe_global(track, pose, lookahead, err.s)
        except NoLookaheadError:
            alpha_true = math.nan

        sensor_state, meas = sense(track, pose, sensor_cfg, t, sensor_state, s_hint=err.s)
        if meas is not None and meas.valid:
            alpha_meas = meas.alpha
            deriv, dalpha_held = lhe_derivative(deriv, meas.alpha, meas.t_capture,
                                                ctl.deriv_filter_tc)
            alpha_held = meas.alpha
            delta_r = ppd_steer(alpha_held, dalpha_held, ctl, veh.wheelbase)
            if ppvr:
                v_target = ppvr_velocity(alpha_held, ppvr, lookahead)

        delta_now = actuator.delta
        actuator, delta_next = actuator_step(actuator, delta_r, cfg.dt, t)
        v_ref = smooth_velocity_ref(v_ref, v_target, cfg.dt, smooth_rate)
        rows.append((t, state.x, state.y, state.psi, state.v, err.s, err.e_y, err.e_psi,
                     alpha_true, alpha_meas, delta_r, delta_now, v_ref))

        vloop, drive = velocity_loop_step(vloop, v_ref, state.v, cfg.dt, veh.velocity_gains)
        # steering averaged over the step, speed held
        new = step_global(state, 0.5 * (delta_now + delta_next), state.v, cfg.dt, veh.wheelbase)
        v_next = velocity_actuator_step(state.v, drive, cfg.dt, veh.v_actuator_lag)
        state = VehicleState(new.x, new.y, new.psi, v_next)
        k += 1

    data = np.array(rows, dtype=float).reshape(-1, len(TRACE_COLUMNS))
    columns = {name: data[:, i].copy() for i, name in enumerate(TRACE_COLUMNS)}
    return SimTrace(columns, off_track, total, cfg.dt)


def compute_metrics(trace: SimTrace) -> MetricsReport:
    """Maximum and RMS tracking errors, first lap time and mean speed."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    e_y = np.asarray(trace["e_y"])
    e_psi = np.asarray(trace["e_psi"])
    s = np.asarray(trace["s"])
    lap_time = math.nan
    if len(s) > 1 and math.isfinite(trace.track_length):
        total = trace.track_length
        ds = (np.diff(s) + total / 2) % total - total / 2
        progress = np.concatenate([[0.0], np.cumsum(ds)])
        done = np.nonzero(progress >= total)[0]
        if done.size:
            lap_time = float(trace["t"][done[0]] - trace["t"][0])
    return MetricsReport(
        e_y_max=float(np.max(np.abs(e_y))),
        e_psi_max=float(np.max(np.abs(e_psi))),
        rms_e_y=float(np.sqrt(np.mean(e_y ** 2))),
        lap_time=lap_time,
        mean_speed=float(np.mean(trace["v"])),
        off_track=bool(trace.off_track),
    )


def standard_variants(base: ScenarioConfig) -> dict[str, ScenarioConfig]:
    """The optimal, long-lookahead and long-lookahead-no-derivative tunings."""
    ctl = base.controller
    return {
        "OC": replace(base, controller=replace(ctl, lookahead=0.5, kd=0.2)),
        "LL-C": replace(base, controller=replace(ctl, lookahead=0.8, kd=0.18)),
        "LLND-C": replace(base, controller=replace(ctl, lookahead=0.8, kd=0.0)),
    }


@dataclass
class Comparison:
    rows: list = field(default_factory=list)
    deltas: dict = field(default_factory=dict)

    def as_table(self) -> list[dict]:
        return [{"variant": name, **dataclasses.asdict(m)} for name, m in self.rows]


def compare_configurations(base: ScenarioConfig,
                           variants: Mapping[str, ScenarioConfig] | None = None) -> Comparison:
    """Run each variant with the base seed and tabulate metrics.

    ``deltas[(a, b)]`` holds metric differences ``a - b`` for every ordered
    pair of variants.
    """
    if variants is None:
        variants = standard_variants(base)
    for name, v in variants.items():
        if (v.track, v.lane, v.direction, v.vehicle) != (base.track, base.lane, base.direction,
                                                         base.vehicle):
            raise ConfigError(f"variant {name!r} does not share the base track and vehicle")
    out = Comparison()
    for name, v in variants.items():
        out.rows.append((name, compute_metrics(run_scenario(replace(v, rng_seed=base.rng_seed)))))
    keys = ("e_y_max", "e_psi_max", "rms_e_y", "lap_time", "mean_speed")
    for (a, ma), (b, mb) in ((x, y) for x in out.rows for y in out.rows if x[0] != y[0]):
        out.deltas[(a, b)] = {k: getattr(ma, k) - getattr(mb, k) for k in keys}
    return out


# ---------------------------------------------------------------- JSON config

def _from_dict(cls, data, where: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected an object")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init and not f.name.startswith("_")}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        hint = hints[key]
        if key == "velocity" and cls is ScenarioConfig:
            kwargs[key] = (float(value) if isinstance(value, (int, float))
                           else _from_dict(PPVRConfig, value, f"{where}.velocity"))
        elif dataclasses.is_dataclass(hint):
            kwargs[key] = _from_dict(hint, value, f"{where}.{key}")
        elif typing.get_origin(hint) is tuple:
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def scenario_from_dict(data: Mapping) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from parsed JSON; unknown keys are errors."""
    return _from_dict(ScenarioConfig, data, "scenario")


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def config_to_dict(cfg) -> dict:
    return dataclasses.asdict(cfg)


__all__ = [
    "ConfigError", "InitialCondition", "ScenarioConfig", "SimTrace", "MetricsReport",
    "Comparison", "TRACE_COLUMNS", "run_scenario", "compute_metrics", "standard_variants",
    "compare_configurations", "scenario_from_dict", "load_json", "config_to_dict",
    "VelocityGains", "SensorConfig", "PPDConfig", "PPVRConfig", "VehicleParams", "TrackParams",
    "initial_state",
]
