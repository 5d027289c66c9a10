"""Pure pursuit steering (PP, PP-D) and the PP-VR speed reference."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PPDConfig:
    """Pure pursuit with derivative action on the lookahead heading error.

    Attributes
    ----------
    lookahead:
        Fixed lookahead distance in metres.
    kd:
        Derivative gain in seconds (0 gives plain pure pursuit).
    deriv_filter_tc:
        Time constant of the one-pole filter on the differenced heading error.
    cmd_limit:
        Saturation of the steering reference in radians.
    rate:
        Nominal update rate in Hz (informational; updates follow the sensor).
    """

    lookahead: float = 0.5
    kd: float = 0.2
    deriv_filter_tc: float = 0.05
    cmd_limit: float = math.radians(28.0)
    rate: float = 30.0

    def __post_init__(self):
        if not self.lookahead > 0:
            raise ValueError("lookahead must be positive")
        if not self.kd >= 0:
            raise ValueError("kd must be non-negative")
        if not self.deriv_filter_tc >= 0:
            raise ValueError("deriv_filter_tc must be non-negative")


@dataclass(frozen=True)
class PPVRConfig:
    v_max: float = 1.0
    a_max: float = 0.4
    smooth_rate: float = 3.0

    def __post_init__(self):
        if not (self.v_max > 0 and self.a_max > 0):
            raise ValueError("v_max and a_max must be positive")
        if not self.smooth_rate > 0:
            raise ValueError("smooth_rate must be positive")


@dataclass(frozen=True)
class DerivState:
    alpha: float | None = None
    dalpha: float = 0.0
    t: float | None = None


def pp_steer(alpha: float, lookahead: float, wheelbase: float) -> float:
    """Pure pursuit steering reference for heading error ``alpha``."""
    return math.atan(2.0 * wheelbase * math.sin(alpha) / lookahead)


def ppd_steer(alpha: float, dalpha_dt: float, cfg: PPDConfig, wheelbase: float) -> float:
    delta = pp_steer(alpha, cfg.lookahead, wheelbase) + cfg.kd * dalpha_dt
    return min(max(delta, -cfg.cmd_limit), cfg.cmd_limit)


def lhe_derivative(state: DerivState, alpha: float, t: float,
                   filter_tc: float = 0.05) -> tuple[DerivState, float]:
    """Filtered finite difference of the heading error.

    The raw difference quotient is passed through a one-pole low-pass with
    time constant ``filter_tc`` discretised exactly for the actual sample
    interval.  The first sample returns 0.
    """
    if state.t is None:
        return DerivState(alpha, 0.0, t), 0.0
    dt = t - state.t
    if not dt > 0:
        raise ValueError(f"sample time {t} does not increase past {state.t}")
    raw = (alpha - state.alpha) / dt
    gain = 1.0 if filter_tc == 0 else -math.expm1(-dt / filter_tc)
    filtered = state.dalpha + gain * (raw - state.dalpha)
    return DerivState(alpha, filtered, t), filtered


def ppvr_velocity(alpha: float, cfg: PPVRConfig, lookahead: float) -> float:
    """Speed that keeps the pure pursuit arc below the lateral acceleration limit."""
    sin_a = max(abs(math.sin(alpha)), 1e-9)
    return min(cfg.v_max, math.sqrt(lookahead * cfg.a_max / (2.0 * sin_a)))


def smooth_velocity_ref(v_prev: float, v_target: float, dt: float, smooth_rate: float) -> float:
    """Exponential approach of the commanded speed towards ``v_target``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return v_target + (v_prev - v_target) * math.exp(-smooth_rate * dt)
