"""Kinematic bicycle model, steering actuator and the inner speed loop.

Two integrators of the same rear-axle bicycle model are provided: one in
global coordinates and one in path coordinates ``(s, e_y, e_psi)``.  Both use
fixed-step RK4 with steering and speed held over the step.

The yaw equation is ``psi' = v/l * tan(delta)`` and the steering actuator is
the input-delayed first order lag ``tau * delta' = -delta + delta_r(t - tau_d)``,
whose transfer function is ``exp(-s tau_d) / (1 + s tau)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.optimize import brentq

from .track import LocalError, TrackPath, wrap_angle


class SingularityError(RuntimeError):
    """Vehicle sits on the local centre of curvature of the path."""


# timestamps closer than this are treated as simultaneous
_T_EPS = 1e-9


class ActuatorInitError(RuntimeError):
    """The command history does not reach back one dead time."""


@dataclass(frozen=True)
class VelocityGains:
    kp: float = 1.0
    ki: float = 0.5
    kd: float = 0.0
    integral_limit: float = 0.5
    u_max: float = 3.0

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("velocity loop gains must be non-negative")


@dataclass(frozen=True)
class VehicleParams:
    """Geometry and actuator constants of the 1:10 car."""

    wheelbase: float = 0.26
    track_width: float = 0.16
    delta_max: float = math.radians(28.0)
    tau: float = 0.17
    tau_d: float = 0.15
    velocity_gains: VelocityGains = VelocityGains()
    v_actuator_lag: float = 0.1

    def __post_init__(self):
        if not self.wheelbase > 0:
            raise ValueError("wheelbase must be positive")
        if not self.tau > 0:
            raise ValueError("steering lag tau must be positive")
        if not self.tau_d >= 0:
            raise ValueError("steering dead time tau_d must be non-negative")
        if not 0 < self.delta_max < math.pi / 2:
            raise ValueError("delta_max must lie in (0, pi/2)")
        if not self.v_actuator_lag > 0:
            raise ValueError("v_actuator_lag must be positive")


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    psi: float
    v: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(self.psi))
        if self.v < 0:
            raise ValueError("speed must be non-negative")


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f([a + 0.5 * dt * b for a, b in zip(y, k1)])
    k3 = f([a + 0.5 * dt * b for a, b in zip(y, k2)])
    k4 = f([a + dt * b for a, b in zip(y, k3)])
    return [a + dt / 6.0 * (b + 2.0 * c + 2.0 * d + e)
            for a, b, c, d, e in zip(y, k1, k2, k3, k4)]


def step_global(state: VehicleState, delta: float, v: float, dt: float,
                wheelbase: float = 0.26) -> VehicleState:
    """Advance the global bicycle model by one RK4 step."""
    yaw_rate = v / wheelbase * math.tan(delta)

    def f(z):
        return (v * math.cos(z[2]), v * math.sin(z[2]), yaw_rate)

    x, y, psi = _rk4(f, (state.x, state.y, state.psi), dt)
    return VehicleState(x, y, psi, v)


def _local_rhs(kappa, delta, v, wheelbase):
    steer_rate = v / wheelbase * math.tan(delta)

    def f(z):
        _, e_y, e_psi = z
        denom = 1.0 - kappa * e_y
        s_dot = v * math.cos(e_psi) / denom
        return (s_dot, v * math.sin(e_psi), steer_rate - kappa * s_dot)

    return f


def step_local(err: LocalError, delta: float, v: float, track: TrackPath, dt: float,
               wheelbase: float = 0.26) -> LocalError:
    """Advance the path-coordinate error model by one RK4 step.

    Path curvature is piecewise constant, so a step that crosses a section
    boundary is split at the crossing instant and each part is integrated
    with its own curvature.

    Raises
    ------
    SingularityError
        When ``|rho_s - e_y| < 1e-6``.
    """
    total = track.total_length
    n = len(track.sections)
    s0 = track.wrap_s(err.s)
    idx = track.section_index(s0)
    z = [s0, err.e_y, err.e_psi]
    lap = 0.0
    remaining = dt
    for _ in range(n + 1):
        sec = track.sections[idx]
        kappa = sec.curvature
        if kappa != 0.0 and abs(1.0 / kappa - z[1]) < 1e-6:
            raise SingularityError("vehicle is at the local centre of curvature")
        f = _local_rhs(kappa, delta, v, wheelbase)
        trial = _rk4(f, z, remaining)
        boundary = lap + sec.s_end
        if trial[0] < boundary:
            z = trial
            break
        h = brentq(lambda h: _rk4(f, z, h)[0] - boundary, 0.0, remaining,
                   xtol=1e-15, rtol=1e-15)
        z = _rk4(f, z, h)
        z[0] = boundary
        remaining -= h
        idx += 1
        if idx == n:
            idx, lap = 0, lap + total
        if remaining <= 0.0:
            break
    return LocalError(track.wrap_s(z[0]), z[1], wrap_angle(z[2]))


@dataclass(frozen=True)
class ActuatorState:
    """Steering angle plus the time-stamped history of commanded references.

    Commands are held constant until the next one (zero-order hold) and reach
    the lag ``tau_d`` seconds after they are issued.
    """

    delta: float
    pending: tuple[tuple[float, float], ...]
    tau: float = 0.17
    tau_d: float = 0.15
    delta_max: float = math.radians(28.0)

    @classmethod
    def at_rest(cls, params: VehicleParams, delta: float = 0.0) -> "ActuatorState":
        """Actuator that has been holding ``delta`` forever."""
        return cls(delta, ((-math.inf, delta),), params.tau, params.tau_d, params.delta_max)


def actuator_step(act: ActuatorState, delta_r: float, dt: float, t: float) -> tuple[ActuatorState, float]:
    """Issue ``delta_r`` at time ``t`` and advance the actuator to ``t + dt``.

    Over ``[t, t + dt]`` the delayed reference is piecewise constant; each
    piece is integrated exactly with the first order lag, then the result is
    clamped to the mechanical limit.
    """
    if act.pending and t <= act.pending[-1][0]:
        raise ValueError(f"command time {t} does not increase past {act.pending[-1][0]}")
    pending = act.pending + ((t, delta_r),)
    lo, hi = t - act.tau_d, t + dt - act.tau_d
    if pending[0][0] > lo + _T_EPS:
        raise ActuatorInitError(f"command history starts at {pending[0][0]}, needs {lo}")

    # the delayed reference is piecewise constant on [lo, hi]
    active = [i for i, (stamp, _) in enumerate(pending) if stamp <= lo + _T_EPS][-1]
    cuts = [lo] + [stamp for stamp, _ in pending[active + 1:] if stamp < hi - _T_EPS] + [hi]
    delta = act.delta
    for k, (a, b) in enumerate(zip(cuts, cuts[1:])):
        u = pending[active + k][1]
        delta = u + (delta - u) * math.exp(-(b - a) / act.tau)
    delta = min(max(delta, -act.delta_max), act.delta_max)

    keep = [i for i, (stamp, _) in enumerate(pending) if stamp <= hi + _T_EPS][-1]
    return replace(act, delta=delta, pending=pending[keep:]), delta


def ackermann_split(delta: float, params: VehicleParams) -> tuple[float, float]:
    """Inner and outer front wheel angles for a bicycle steering angle.

    Returned angles carry the sign of ``delta``; their magnitudes satisfy
    ``cot(outer) - cot(inner) = track_width / wheelbase``.
    """
    if delta == 0.0:
        return 0.0, 0.0
    sign = math.copysign(1.0, delta)
    radius = params.wheelbase / math.tan(abs(delta))
    half = params.track_width / 2
    inner = math.atan2(params.wheelbase, radius - half)
    outer = math.atan2(params.wheelbase, radius + half)
    return sign * inner, sign * outer


@dataclass(frozen=True)
class VelocityLoopState:
    integral: float = 0.0
    prev_error: float | None = None


def velocity_loop_step(state: VelocityLoopState, v_ref: float, v_meas: float, dt: float,
                       gains: VelocityGains = VelocityGains()) -> tuple[VelocityLoopState, float]:
    """Discrete PID on speed with ``v_ref`` feedforward and a clamped integrator.

    The integrator is frozen while the command saturates.
    """
    error = v_ref - v_meas
    deriv = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    integral = min(max(state.integral + error * dt, -gains.integral_limit), gains.integral_limit)
    u = v_ref + gains.kp * error + gains.ki * integral + gains.kd * deriv
    if u > gains.u_max or u < 0.0:
        integral = state.integral
        u = v_ref + gains.kp * error + gains.ki * integral + gains.kd * deriv
        u = min(max(u, 0.0), gains.u_max)
    return VelocityLoopState(integral, error), u


def velocity_actuator_step(v: float, command: float, dt: float, lag: float = 0.1) -> float:
    """First order drivetrain response to the drive command (exact over ``dt``)."""
    return max(0.0, command + (v - command) * math.exp(-dt / lag))
