"""Lookahead heading error sensor and the labelled pose dataset generator.

The sensor stands in for the camera-based estimator: an ``ideal`` mode that
returns the exact geometric heading error at every query, and a ``noisy``
mode that samples at the camera rate and adds bias, Gaussian noise,
quantisation and latency.

Random numbers come from :func:`numpy.random.default_rng` (PCG64 bit
generator, ziggurat normal sampler), seeded from the configuration.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .track import (NoLookaheadError, PoseG, TrackPath, lhe_global, point_at,
                    project, wrap_angle)


@dataclass(frozen=True)
class SensorConfig:
    mode: Literal["ideal", "noisy"] = "noisy"
    rate: float = 30.0
    latency: float = 0.0
    noise_std: float = 0.02
    bias: float = 0.0
    quant_step: float = 0.0
    lookahead: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in ("ideal", "noisy"):
            raise ValueError(f"unknown sensor mode {self.mode!r}")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if self.noise_std < 0 or self.quant_step < 0 or self.latency < 0:
            raise ValueError("noise_std, quant_step and latency must be non-negative")


@dataclass(frozen=True)
class Measurement:
    alpha: float
    t_capture: float
    t_available: float
    valid: bool = True
    truth: float = math.nan


@dataclass
class SensorState:
    """Mutable sensor bookkeeping threaded through :func:`sense`."""

    rng: np.random.Generator
    next_frame: int = 0
    pending: deque = field(default_factory=deque)
    last_t: float = -math.inf

    @classmethod
    def create(cls, cfg: SensorConfig) -> "SensorState":
        return cls(np.random.default_rng(cfg.rng_seed))


def _quantize(x: float, step: float) -> float:
    return x if step == 0 else step * round(x / step)


def sense(track: TrackPath, pose: PoseG, cfg: SensorConfig, t: float, state: SensorState,
          s_hint: float | None = None) -> tuple[SensorState, Measurement | None]:
    """Query the sensor at time ``t``.

    Returns the newest measurement that became available at or before ``t``
    since the previous call, or ``None`` while nothing new is ready.  In
    noisy mode frames are captured at ``k / rate``; every frame due by ``t``
    is taken from the current pose.  A pose whose lookahead circle misses
    the path yields a measurement with ``valid=False``.

    ``state`` is updated in place and also returned.
    """
    if t < state.last_t:
        raise ValueError(f"sensor time went backwards ({t} < {state.last_t})")
    state.last_t = t
    if s_hint is None:
        s_hint = project(track, pose).s

    def truth():
        try:
            return lhe_global(track, pose, cfg.lookahead, s_hint)
        except NoLookaheadError:
            return None

    if cfg.mode == "ideal":
        a = truth()
        if a is None:
            return state, Measurement(math.nan, t, t, False)
        return state, Measurement(a, t, t, True, a)

    period = 1.0 / cfg.rate
    true_alpha = None
    while state.next_frame * period <= t + 1e-12:
        if true_alpha is None:
            true_alpha = truth()
            if true_alpha is None:
                true_alpha = math.nan
        t_cap = state.next_frame * period
        state.next_frame += 1
        if math.isnan(true_alpha):
            m = Measurement(math.nan, t_cap, t_cap + cfg.latency, False)
        else:
            noisy = true_alpha + cfg.bias + cfg.noise_std * state.rng.standard_normal()
            m = Measurement(wrap_angle(_quantize(noisy, cfg.quant_step)), t_cap,
                            t_cap + cfg.latency, True, true_alpha)
        state.pending.append(m)

    ready = None
    while state.pending and state.pending[0].t_available <= t + 1e-12:
        ready = state.pending.popleft()
    return state, ready


@dataclass(frozen=True)
class DatasetConfig:
    sigma_lat: float = 0.06
    sigma_head: float = math.radians(12.0)
    n_samples: int = 1000
    lookaheads: tuple[float, ...] = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    rng_seed: int = 0

    def __post_init__(self):
        if self.sigma_lat < 0 or self.sigma_head < 0:
            raise ValueError("noise standard deviations must be non-negative")
        if self.n_samples <= 0:
            raise ValueError("n_samples must be positive")
        if not self.lookaheads or any(ld <= 0 for ld in self.lookaheads):
            raise ValueError("lookaheads must be a non-empty list of positive distances")
        object.__setattr__(self, "lookaheads", tuple(float(x) for x in self.lookaheads))


@dataclass(frozen=True)
class SampleRecord:
    """One perturbed pose with its ground-truth heading errors.

    ``labels`` maps each lookahead distance to the heading error, or to
    ``None`` when the lookahead circle does not cut the path.
    """

    pose: PoseG
    s_ref: float
    labels: dict
    lateral_offset: float
    heading_offset: float


def generate_dataset(path: TrackPath, cfg: DatasetConfig) -> list[SampleRecord]:
    """Sample poses around ``path`` and label them for every lookahead.

    Stations are uniform in arc length; each pose is shifted along the left
    normal by ``N(0, sigma_lat)`` and its heading drawn from
    ``N(psi_s, sigma_head)``.  There is no longitudinal offset.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    stations = rng.uniform(0.0, path.total_length, cfg.n_samples)
    lateral = rng.normal(0.0, 1.0, cfg.n_samples) * cfg.sigma_lat
    heading = rng.normal(0.0, 1.0, cfg.n_samples) * cfg.sigma_head
    records = []
    for s, e_l, e_h in zip(stations, lateral, heading):
        p = point_at(path, float(s))
        pose = PoseG(p.x - float(e_l) * math.sin(p.psi),
                     p.y + float(e_l) * math.cos(p.psi),
                     p.psi + float(e_h))
        labels = {}
        for ld in cfg.lookaheads:
            try:
                labels[ld] = lhe_global(path, pose, ld, p.s)
            except NoLookaheadError:
                labels[ld] = None
        records.append(SampleRecord(pose, p.s, labels, float(e_l), float(e_h)))
    return records


def dataset_header(lookaheads: Sequence[float]) -> list[str]:
    return ["s_ref", "x", "y", "psi"] + [f"alpha_Ld_{ld:g}" for ld in lookaheads]


def write_dataset_csv(records: Sequence[SampleRecord], lookaheads: Sequence[float], path) -> None:
    """Write records as CSV; invalid labels become empty fields."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset_header(lookaheads))
        for r in records:
            row = [f"{r.s_ref:.9g}", f"{r.pose.x:.9g}", f"{r.pose.y:.9g}", f"{r.pose.psi:.9g}"]
            for ld in lookaheads:
                value = r.labels.get(float(ld))
                row.append("" if value is None else f"{value:.9g}")
            writer.writerow(row)
