"""Independent reference computations used by the test-suite.

Nothing here imports the implementation under test except for plain data
containers, so agreement with these oracles is meaningful.
"""

from __future__ import annotations

import math

import numba
import numpy as np
from scipy.integrate import quad


# --------------------------------------------------------------- track pieces

def track_pieces(x_c=1.5, m=0.25, L=2.0, R=1.04, r=0.65, R_c=None):
    """Parametric pieces of the clockwise test track, ``lam`` in [0, 1].

    Each entry is ``(pos(lam), vel(lam))`` returning numpy pairs.  ``R_c``
    fixes the vertical placement (the lanes share the centreline's centre).
    """
    R_c = R if R_c is None else R_c
    y0 = m + R_c
    pi = math.pi

    def arc(cx, cy, rad, a0, a1):
        def pos(lam):
            a = a0 + (a1 - a0) * lam
            return np.array([cx + rad * math.cos(a), cy + rad * math.sin(a)])

        def vel(lam):
            a = a0 + (a1 - a0) * lam
            return (a1 - a0) * np.array([-rad * math.sin(a), rad * math.cos(a)])
        return pos, vel

    def line(p0, p1):
        p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
        return (lambda lam: p0 + lam * (p1 - p0)), (lambda lam: p1 - p0)

    return [
        arc(x_c, y0, R, 0.0, -pi),
        line((x_c - R, y0), (x_c - R, y0 + L)),
        arc(x_c - R + r, y0 + L, r, pi, pi / 2),
        line((x_c - R + r, y0 + L + r), (x_c + R - r, y0 + L + r)),
        arc(x_c + R - r, y0 + L, r, pi / 2, 0.0),
        line((x_c + R, y0 + L), (x_c + R, y0)),
    ]


def quadrature_length(pieces) -> float:
    total = 0.0
    for _, vel in pieces:
        val, _ = quad(lambda lam: float(np.hypot(*vel(lam))), 0.0, 1.0,
                      epsabs=1e-13, epsrel=1e-13, limit=200)
        total += val
    return total


def dense_samples(track, n: int = 1_000_000) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(s, x, y)`` at ``n`` uniformly spaced arc lengths.

    Vectorised per section using only the section's start/end points,
    centre and turning sense, not its evaluate method.
    """
    total = track.total_length
    s = np.linspace(0.0, total, n, endpoint=False)
    x = np.empty(n)
    y = np.empty(n)
    for sec in track.sections:
        mask = (s >= sec.s_start) & (s < sec.s_end)
        u = s[mask] - sec.s_start
        if sec.kind == "segment":
            (x0, y0), (x1, y1) = sec.start, sec.end
            frac = u / sec.length
            x[mask] = x0 + frac * (x1 - x0)
            y[mask] = y0 + frac * (y1 - y0)
        else:
            cx, cy = sec.center
            ang = sec.theta0 + sec.turn * u / sec.radius
            x[mask] = cx + sec.radius * np.cos(ang)
            y[mask] = cy + sec.radius * np.sin(ang)
    return s, x, y


def brute_force_project(samples, px: float, py: float) -> float:
    s, x, y = samples
    return float(s[np.argmin((x - px) ** 2 + (y - py) ** 2)])


def brute_force_lookahead(samples, total: float, px: float, py: float, radius: float,
                          s_hint: float) -> float:
    """Furthest forward sign change of ``dist - radius`` within half a lap."""
    s, x, y = samples
    g = np.hypot(x - px, y - py) - radius
    crossing = np.nonzero(np.sign(g) != np.sign(np.roll(g, -1)))[0]
    best, best_prog = None, -1.0
    for i in crossing:
        j = (i + 1) % len(s)
        s_i, s_j = s[i], s[j] if j > i else s[j] + total
        root = s_i + (s_j - s_i) * g[i] / (g[i] - g[j])
        prog = (root - s_hint) % total
        if prog <= total / 2 and prog > best_prog:
            best, best_prog = root % total, prog
    return best


# ------------------------------------------------------------ DDE stability

@numba.njit(cache=True)
def _dde_growth(v, ld, kd, wb, tau, tau_d, dt, horizon):
    """Simulate the linearised straight loop; return log(late/early peak).

    State ``(e_y, e_psi, delta)``; the steering command
    ``u = (2 wb / ld) alpha + kd * alpha_dot`` with ``alpha = -(e_y/ld + e_psi)``
    reaches the lag ``tau_d`` later.  The delayed command is read from the
    stored history by linear interpolation.
    """
    n = int(horizon / dt) + 1
    hist = np.zeros(n + 1)
    ey, ep, de = 0.01, 0.0, 0.0
    kp = 2.0 * wb / ld

    def command(ey, ep, de):
        alpha = -(ey / ld + ep)
        alpha_dot = -(v * ep / ld + v * de / wb)
        return kp * alpha + kd * alpha_dot

    def delayed(t, k):
        tq = t - tau_d
        if tq <= 0.0:
            return 0.0
        pos = tq / dt
        i = int(pos)
        if i >= k:  # delay shorter than a step: newest stored value
            return hist[k]
        frac = pos - i
        return hist[i] * (1.0 - frac) + hist[i + 1] * frac

    q1, q2 = n // 4, n // 2
    q3 = (3 * n) // 4
    early, late = 0.0, 0.0
    for k in range(n):
        t = k * dt
        hist[k] = command(ey, ep, de)
        u1 = delayed(t, k)
        u2 = delayed(t + 0.5 * dt, k)
        u3 = delayed(t + dt, k)
        a1, b1, c1 = v * ep, v / wb * de, (u1 - de) / tau
        a2, b2, c2 = v * (ep + 0.5 * dt * b1), v / wb * (de + 0.5 * dt * c1), (u2 - (de + 0.5 * dt * c1)) / tau
        a3, b3, c3 = v * (ep + 0.5 * dt * b2), v / wb * (de + 0.5 * dt * c2), (u2 - (de + 0.5 * dt * c2)) / tau
        a4, b4, c4 = v * (ep + dt * b3), v / wb * (de + dt * c3), (u3 - (de + dt * c3)) / tau
        ey += dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        ep += dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
        de += dt / 6.0 * (c1 + 2 * c2 + 2 * c3 + c4)
        mag = abs(ey) + ld * abs(ep) + ld * abs(de)
        if mag > 1e8:
            return 50.0
        if q1 <= k < q2 and mag > early:
            early = mag
        elif k >= q3 and mag > late:
            late = mag
    if early == 0.0:
        return -50.0
    return math.log(late / early)


def dde_unstable(v, ld, kd, tau_d, wb=0.26, tau=0.17, dt=1e-4, horizon=None) -> bool:
    if horizon is None:
        horizon = max(40.0, 400.0 * max(tau_d, 0.01))
    return _dde_growth(v, ld, kd, wb, tau, tau_d, dt, horizon) > 0.0


def dde_critical_delay(v, ld, kd, wb=0.26, tau=0.17, dt=1e-4, tol=5e-4,
                       max_delay=4.0) -> float:
    """Smallest unstable dead time found by bracketing plus bisection.

    Returns 0 if the delay-free loop already diverges and ``inf`` if no
    instability is found up to ``max_delay``.
    """
    if dde_unstable(v, ld, kd, 0.0, wb, tau, dt):
        return 0.0
    lo, hi = 0.0, 0.02
    while not dde_unstable(v, ld, kd, hi, wb, tau, dt):
        lo, hi = hi, 2.0 * hi
        if hi > max_delay:
            return math.inf
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if dde_unstable(v, ld, kd, mid, wb, tau, dt):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
