"""Delay stability of the linearised straight-road loop.

The closed loop of the PP-D controller, the kinematic plant and the steering
actuator has the single-delay characteristic function

    Delta(s) = d(s) + n(s) exp(-s tau_d)

with ``d(s) = s^2 (1 + s tau)`` and
``n(s) = v^2/(l L_d) (2 l/L_d + s K_D)(1 + s L_d/v)``.

:func:`wm_critical_delay` applies the Walton-Marshall procedure: check the
delay-free polynomial with a Routh array, locate imaginary-axis crossings
from the positive roots of ``Q(omega^2) = |d(j omega)|^2 - |n(j omega)|^2``
and classify them by the sign of ``dQ/d(omega^2)``.

Polynomials are :class:`numpy.polynomial.Polynomial` objects, coefficients in
ascending degree.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from numpy.polynomial import Polynomial

Poly = Polynomial

REAL_ROOT_TOL = 1e-8
BISECTION_STEPS = 60
COPRIME_TOL = 1e-12


class StabilityError(ValueError):
    pass


class DegenerateCrossingError(StabilityError):
    """``n(j omega)`` vanishes at a crossing frequency."""


class NotCoprimeError(StabilityError):
    pass


class InfeasibleTuningError(StabilityError):
    """No gain in the searched range gives a delay-free stable loop."""


def _trim(p: Poly) -> np.ndarray:
    c = np.trim_zeros(np.asarray(p.coef, dtype=float), "b")
    return c if c.size else np.zeros(1)


def degree(p: Poly) -> int:
    """Degree after trimming trailing zeros; -1 for the zero polynomial."""
    c = _trim(p)
    return -1 if c.size == 1 and c[0] == 0 else c.size - 1


@dataclass(frozen=True)
class QuasiPoly:
    """``d(s) + n(s) exp(-s tau_d)`` with ``deg d >= deg n``."""

    d: Poly
    n: Poly

    def __post_init__(self):
        if degree(self.d) < 0:
            raise StabilityError("d(s) must be nonzero")
        if degree(self.n) > degree(self.d):
            raise StabilityError("deg n must not exceed deg d")

    def __call__(self, s: complex, delay: float) -> complex:
        return self.d(s) + self.n(s) * np.exp(-s * delay)


@dataclass(frozen=True)
class StraightLoopParams:
    v: float = 1.0
    lookahead: float = 0.5
    kd: float = 0.2
    wheelbase: float = 0.26
    tau: float = 0.17

    def __post_init__(self):
        if not (self.v > 0 and self.lookahead > 0 and self.wheelbase > 0 and self.tau > 0):
            raise ValueError("v, lookahead, wheelbase and tau must be positive")
        if not self.kd >= 0:
            raise ValueError("kd must be non-negative")

    @property
    def kd_star(self) -> float:
        """Normalised derivative gain ``K_D v / l``."""
        return self.kd * self.v / self.wheelbase


@dataclass(frozen=True)
class Crossing:
    omega: float
    tau: float
    sign: int


@dataclass(frozen=True)
class CrossingReport:
    crossings: tuple[Crossing, ...]
    delay_free_stable: bool
    critical_delay: float


def straight_loop_quasipoly(p: StraightLoopParams) -> QuasiPoly:
    d = Poly([0.0, 0.0, 1.0, p.tau])
    gain = p.v ** 2 / (p.wheelbase * p.lookahead)
    n = gain * Poly([2.0 * p.wheelbase / p.lookahead, p.kd]) * Poly([1.0, p.lookahead / p.v])
    return QuasiPoly(d, n)


def mu(kd_star: float) -> float:
    """Factor relaxing the ``L_d > v tau`` bound under derivative action."""
    return 2.0 / ((2.0 + kd_star) * (1.0 + kd_star))


def delay_free_stable(p: StraightLoopParams) -> tuple[bool, float]:
    """Routh verdict for ``tau_d = 0`` and the lookahead bound ``mu v tau``.

    The cubic ``tau s^3 + (1+K*) s^2 + v/L_d (2+K*) s + 2 v^2/L_d^2`` has
    positive coefficients, so the only Routh condition left is
    ``L_d > mu(K*) v tau``.
    """
    bound = mu(p.kd_star) * p.v * p.tau
    return p.lookahead > bound, bound


def routh_stable(coef: Sequence[float]) -> bool:
    """Hurwitz test of a real polynomial from its Routh array.

    ``coef`` is in ascending degree.  A zero in the first column (marginal
    or degenerate case) counts as not stable.
    """
    a = list(np.trim_zeros(np.asarray(coef, dtype=float), "b"))[::-1]
    if len(a) <= 1:
        return len(a) == 1 and a[0] != 0
    if a[0] < 0:
        a = [-x for x in a]
    rows = [a[0::2], a[1::2]]
    width = len(rows[0])
    rows[1] = rows[1] + [0.0] * (width - len(rows[1]))
    for _ in range(len(a) - 2):
        prev, cur = rows[-2], rows[-1]
        if cur[0] == 0:
            return False
        nxt = [(cur[0] * prev[i + 1] - prev[0] * cur[i + 1]) / cur[0] for i in range(width - 1)]
        rows.append(nxt + [0.0])
    first = [r[0] for r in rows]
    return all(x > 0 for x in first)


def _mirror(p: Poly) -> Poly:
    """``p(-s)``."""
    c = np.asarray(p.coef, dtype=float)
    return Poly(c * (-1.0) ** np.arange(c.size))


def wm_polynomial(qp: QuasiPoly) -> Poly:
    """``Q(eta) = d(j w) d(-j w) - n(j w) n(-j w)`` with ``eta = w^2``."""
    even = (qp.d * _mirror(qp.d) - qp.n * _mirror(qp.n)).coef
    # only even powers survive; s^(2k) = (-eta)^k
    q = np.asarray(even[0::2], dtype=float) * (-1.0) ** np.arange(len(even[0::2]))
    return Poly(_trim(Poly(q)))


def straight_wm_polynomial(p: StraightLoopParams) -> Poly:
    """Closed-form ``Q(eta)`` of the straight loop, used as a cross-check."""
    v, L, l = p.v, p.lookahead, p.wheelbase
    return Poly([
        -4.0 * v ** 4 / L ** 4,
        -(4.0 * v ** 2 / L ** 2 + p.kd ** 2 * v ** 4 / (l ** 2 * L ** 2)),
        1.0 - p.kd_star ** 2,
        p.tau ** 2,
    ])


def resultant_ratio(a: Poly, b: Poly) -> float:
    """``|Res(a, b)|`` divided by its Hadamard bound, in ``[0, 1]``."""
    ca, cb = _trim(a)[::-1], _trim(b)[::-1]
    m, n = ca.size - 1, cb.size - 1
    if m < 0 or n < 0 or (m == 0 and ca[0] == 0) or (n == 0 and cb[0] == 0):
        return 0.0
    if m + n == 0:
        return 1.0
    size = m + n
    S = np.zeros((size, size))
    for i in range(n):
        S[i, i:i + m + 1] = ca
    for i in range(m):
        S[n + i, i:i + n + 1] = cb
    bound = np.linalg.norm(ca) ** n * np.linalg.norm(cb) ** m
    return abs(np.linalg.det(S)) / bound


def positive_real_roots(q: Poly) -> list[float]:
    """Positive real roots of ``q``, from companion eigenvalues then bisection."""
    c = _trim(q)
    if c.size < 2:
        return []
    candidates = sorted(
        z.real for z in np.polynomial.polynomial.polyroots(c)
        if abs(z.imag) < REAL_ROOT_TOL * max(1.0, abs(z.real)) and z.real > 0
    )
    roots = []
    for i, r in enumerate(candidates):
        neighbours = [abs(r - o) for j, o in enumerate(candidates) if j != i]
        span = 0.5 * min(neighbours) if neighbours else max(r, 1.0)
        roots.append(_bisect_polish(q, r, min(span, 1e-3 * max(r, 1e-12) + 1e-14)))
    return roots


def _bisect_polish(q: Poly, r: float, width: float) -> float:
    lo, hi = r - width, r + width
    qlo, qhi = q(lo), q(hi)
    if lo <= 0 or qlo * qhi > 0:
        return r
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        qm = q(mid)
        if qm == 0:
            return mid
        if (qm > 0) == (qlo > 0):
            lo, qlo = mid, qm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _crossing_sign(q: Poly, eta: float) -> int:
    dq = q.deriv()
    c = dq.coef
    scale = float(np.sum(np.abs(c) * eta ** np.arange(c.size))) if c.size else 0.0
    value = dq(eta)
    if scale == 0 or abs(value) <= 1e-9 * scale:
        return 0
    return 1 if value > 0 else -1


def wm_critical_delay(qp: QuasiPoly) -> CrossingReport:
    """Imaginary-axis crossings and the critical delay of ``d + n e^{-s tau_d}``.

    Returns the crossing frequencies with their smallest positive crossing
    delays and direction (+1 destabilising, -1 stabilising, 0 tangential).
    The critical delay is 0 when the delay-free loop is unstable, the first
    delay at which a destabilising crossing occurs otherwise, and infinite
    when no such crossing exists.

    Raises
    ------
    NotCoprimeError
        If ``d`` and ``n`` share a root.
    DegenerateCrossingError
        If ``|n(j omega)| < 1e-12`` at a crossing frequency.
    """
    if degree(qp.d) <= degree(qp.n):
        raise StabilityError("deg d must exceed deg n (neutral case not supported)")
    if degree(qp.n) < 0 or resultant_ratio(qp.d, qp.n) < COPRIME_TOL:
        raise NotCoprimeError("d(s) and n(s) are not coprime")

    stable0 = routh_stable((qp.d + qp.n).coef)
    q = wm_polynomial(qp)
    crossings = []
    for eta in positive_real_roots(q):
        omega = math.sqrt(eta)
        jw = 1j * omega
        n_val = qp.n(jw)
        if abs(n_val) < 1e-12:
            raise DegenerateCrossingError(f"n(j*{omega:.6g}) vanishes")
        phase = -np.angle(-qp.d(jw) / n_val) % (2.0 * math.pi)
        if phase == 0.0:
            phase = 2.0 * math.pi
        crossings.append(Crossing(omega, float(phase / omega), _crossing_sign(q, eta)))
    crossings.sort(key=lambda c: c.tau)

    if not stable0:
        critical = 0.0
    else:
        critical = _first_destabilising(crossings)
    return CrossingReport(tuple(crossings), stable0, critical)


def _first_destabilising(crossings: Sequence[Crossing]) -> float:
    # every crossing frequency recurs with period 2 pi / omega in the delay
    moving = [c for c in crossings if c.sign != 0]
    if not any(c.sign > 0 for c in moving):
        return math.inf
    horizon = max(c.tau for c in moving if c.sign > 0)
    events = []
    for c in moving:
        k = 0
        while c.tau + 2.0 * math.pi * k / c.omega <= horizon:
            events.append((c.tau + 2.0 * math.pi * k / c.omega, c.sign))
            k += 1
    events.sort()
    unstable = 0
    for tau, sign in events:
        unstable = max(0, unstable + 2 * sign)
        if unstable > 0:
            return tau
    return math.inf


def critical_delay(p: StraightLoopParams) -> float:
    return wm_critical_delay(straight_loop_quasipoly(p)).critical_delay


@dataclass(frozen=True)
class SweepRow:
    v: float
    lookahead: float
    kd: float
    critical_delay: float
    delay_free_stable: bool


SWEEP_HEADER = ("v", "L_d", "K_D", "critical_delay_s", "delay_free_stable")


def sweep_critical_delay(grid: Mapping[str, Iterable[float]],
                         fixed: StraightLoopParams = StraightLoopParams()) -> list[SweepRow]:
    """Critical delay over the product of ``grid['v']``, ``grid['L_d']``, ``grid['K_D']``.

    Missing grid axes take their value from ``fixed``.  Rows come out in
    ``itertools.product`` order.
    """
    unknown = set(grid) - {"v", "L_d", "K_D"}
    if unknown:
        raise ValueError(f"unknown grid axes: {sorted(unknown)}")
    axes = [list(grid.get("v", [fixed.v])), list(grid.get("L_d", [fixed.lookahead])),
            list(grid.get("K_D", [fixed.kd]))]
    if any(len(a) == 0 for a in axes):
        raise ValueError("grid axes must be non-empty")
    rows = []
    for v, ld, kd in itertools.product(*axes):
        p = StraightLoopParams(v, ld, kd, fixed.wheelbase, fixed.tau)
        report = wm_critical_delay(straight_loop_quasipoly(p))
        rows.append(SweepRow(v, ld, kd, report.critical_delay, report.delay_free_stable))
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for r in rows:
            writer.writerow([f"{r.v:.9g}", f"{r.lookahead:.9g}", f"{r.kd:.9g}",
                             f"{r.critical_delay:.9g}", str(r.delay_free_stable).lower()])


def tune_kd(v: float, lookahead: float, wheelbase: float = 0.26, tau: float = 0.17,
            kd_range: tuple[float, float] = (0.0, 1.0), n_coarse: int = 101,
            tol: float = 1e-6) -> float:
    """Derivative gain maximising the critical delay at fixed lookahead.

    A coarse scan of ``kd_range`` is refined by a bounded scalar search around
    the best sample; ties go to the smaller gain.

    Raises
    ------
    InfeasibleTuningError
        If every gain in the range leaves the delay-free loop unstable.
    """
    lo, hi = kd_range
    if not hi >= lo >= 0:
        raise ValueError("kd_range must satisfy 0 <= lo <= hi")

    def cd(kd):
        return critical_delay(StraightLoopParams(v, lookahead, kd, wheelbase, tau))

    grid = np.linspace(lo, hi, n_coarse) if hi > lo else np.array([lo])
    values = [cd(k) for k in grid]
    if max(values) <= 0.0:
        raise InfeasibleTuningError(
            f"no K_D in [{lo}, {hi}] stabilises v={v}, L_d={lookahead}")
    best = int(np.argmax(values))  # first maximum: smallest gain on ties
    if math.isinf(values[best]) or values[best] == min(values):
        return float(grid[best])

    a = float(grid[max(best - 1, 0)])
    b = float(grid[min(best + 1, len(grid) - 1)])
    x = float(minimize_scalar(lambda k: -cd(k), bounds=(a, b), method="bounded",
                              options={"xatol": tol}).x)
    return x if cd(x) >= values[best] else float(grid[best])
