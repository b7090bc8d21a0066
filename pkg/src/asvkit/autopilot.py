"""Second-order Nomoto steering plant, loop analysis, and the heading PID.

Polynomials are numpy-style coefficient sequences in descending powers of s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rigid_body import wrap_angle


def _trim(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.flatnonzero(c)
    return c[nz[0]:] if nz.size else np.zeros(1)


@dataclass(frozen=True)
class TransferFunction:
    num: tuple
    den: tuple

    def __post_init__(self):
        num, den = _trim(self.num), _trim(self.den)
        if den[0] == 0:
            raise ValueError("denominator is identically zero")
        if num[0] != 0 and len(num) > len(den):
            raise ValueError("improper transfer function: deg(num) > deg(den)")
        object.__setattr__(self, "num", tuple(num.tolist()))
        object.__setattr__(self, "den", tuple(den.tolist()))

    @property
    def order(self) -> int:
        return len(self.den) - 1

    def __call__(self, s: complex) -> complex:
        return np.polyval(self.num, s) / np.polyval(self.den, s)

    def zeros(self) -> np.ndarray:
        return np.roots(self.num) if len(self.num) > 1 else np.array([])


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float
    tf_derivative: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(g) for g in (self.kp, self.ki, self.kd, self.tf_derivative)):
            raise ValueError(f"non-finite PID gains {self}")
        if self.tf_derivative < 0:
            raise ValueError("tf_derivative must be >= 0")


# Closed-loop poles placed near {-1.5 +- 1.0j, -4} on the Nomoto plant (see place_pid).
DEFAULT_PID = PidGains(kp=1.0136, ki=0.9970, kd=0.0738, tf_derivative=0.01)


@dataclass
class StepResponse:
    t: np.ndarray
    y: np.ndarray
    stable: bool
    final_value: float
    rise_time: float
    overshoot_pct: float
    settling_time: float


def nomoto_paper() -> TransferFunction:
    """Yaw-rate response of the vehicle to a steering input (identified plant)."""
    return TransferFunction((1.9103, 5.799), (0.3037, 0.7488, -1.0))


def poles(tf: TransferFunction) -> np.ndarray:
    den = np.asarray(tf.den)
    if len(den) < 2:
        raise ValueError("degree-0 denominator has no poles")
    if len(den) == 2:
        return np.array([complex(-den[1] / den[0])])
    if len(den) == 3:
        a, b, c = den
        disc = complex(b * b - 4 * a * c)
        sq = np.sqrt(disc)
        return np.array([(-b + sq) / (2 * a), (-b - sq) / (2 * a)])
    return np.roots(den).astype(complex)


def is_stable(tf: TransferFunction) -> bool:
    if tf.order == 0:
        return True
    return bool(np.all(poles(tf).real < 0))


def _pid_polys(pid: PidGains) -> tuple[np.ndarray, np.ndarray]:
    tau = pid.tf_derivative
    num = np.array([pid.kp * tau + pid.kd, pid.kp + pid.ki * tau, pid.ki])
    den = np.array([tau, 1.0, 0.0])
    # cancel the integrator pole against a zero at the origin when ki == 0
    while len(num) > 1 and len(den) > 1 and num[-1] == 0 and den[-1] == 0:
        num, den = num[:-1], den[:-1]
    return num, den


def pid_transfer(pid: PidGains) -> TransferFunction:
    """C(s) = kp + ki/s + kd*s/(tf*s + 1) as one rational function.

    An unfiltered derivative (tf = 0, kd != 0) is improper on its own; use
    ``open_loop``/``closed_loop``, which accept it.
    """
    return TransferFunction(*(tuple(c) for c in _pid_polys(pid)))


def series(a: TransferFunction, b: TransferFunction) -> TransferFunction:
    return TransferFunction(tuple(np.polymul(a.num, b.num)), tuple(np.polymul(a.den, b.den)))


def open_loop(plant: TransferFunction, pid: PidGains) -> TransferFunction:
    """C(s) G(s), formed from the polynomials so an unfiltered derivative is allowed."""
    num, den = _pid_polys(pid)
    return TransferFunction(tuple(np.polymul(num, plant.num)), tuple(np.polymul(_trim(den), plant.den)))


def feedback(open_loop: TransferFunction) -> TransferFunction:
    """Unity negative feedback around ``open_loop``."""
    num = _trim(open_loop.num)
    den = np.polyadd(open_loop.den, num)
    if not np.any(den):
        raise ValueError("closed-loop denominator cancels to zero")
    if not np.any(num):
        return TransferFunction((0.0,), tuple(_trim(den)))
    return TransferFunction(tuple(num), tuple(den))


def closed_loop(plant: TransferFunction, pid: PidGains) -> TransferFunction:
    return feedback(open_loop(plant, pid))


def place_pid(plant: TransferFunction, target_poles, tf_derivative: float = 0.0) -> PidGains:
    """Solve for (kp, ki, kd) so the unfiltered loop has the requested closed-loop poles.

    The characteristic polynomial s*den + (kd s^2 + kp s + ki)*num is matched
    coefficient-wise to a multiple of prod(s - p). ``tf_derivative`` is only
    attached to the result; it perturbs the placement by O(tf).
    """
    target = np.real_if_close(np.poly(target_poles))
    num, den = np.asarray(plant.num), np.asarray(plant.den)
    base = np.polymul([1.0, 0.0], den)
    cols = [np.polymul([1.0, 0.0, 0.0], num), np.polymul([1.0, 0.0], num), num, -target]
    n = max(len(base), *(len(c) for c in cols))
    pad = lambda c: np.concatenate([np.zeros(n - len(c)), c])
    a_mat = np.column_stack([pad(c) for c in cols])
    sol, *_ = np.linalg.lstsq(a_mat, -pad(base), rcond=None)
    if not np.allclose(a_mat @ sol, -pad(base), atol=1e-9):
        raise ValueError("requested poles are not reachable with a PID on this plant")
    kd, kp, ki, _ = sol
    return PidGains(float(kp), float(ki), float(kd), tf_derivative)


def root_locus(open_loop: TransferFunction, gains) -> list[tuple[float, np.ndarray]]:
    """Closed-loop poles of 1 + k L(s) = 0 for each gain, sorted by (re, im)."""
    gains = np.asarray(gains, dtype=float)
    if np.any(gains <= 0) or np.any(np.diff(gains) < 0):
        raise ValueError("gains must be positive and sorted")
    out = []
    for k in gains:
        char = _trim(np.polyadd(open_loop.den, k * np.asarray(open_loop.num)))
        r = np.roots(char).astype(complex) if len(char) > 1 else np.array([], dtype=complex)
        out.append((float(k), r[np.lexsort((r.imag, r.real))]))
    return out


def _realization(tf: TransferFunction):
    # controllable canonical form, with direct feedthrough when deg(num) == deg(den)
    den = np.asarray(tf.den)
    a0, n = den[0], len(den) - 1
    a = den[1:] / a0
    b = np.concatenate([np.zeros(n + 1 - len(tf.num)), tf.num]) / a0
    d = b[0]
    A = np.zeros((n, n))
    if n:
        A[0, :] = -a
        A[1:, :-1] = np.eye(n - 1)
    B = np.zeros(n)
    if n:
        B[0] = 1.0
    C = b[1:] - a * d
    return A, B, C, d


def step_response(tf: TransferFunction, horizon: float, dt: float) -> StepResponse:
    if not dt > 0 or not horizon > dt:
        raise ValueError("need dt > 0 and horizon > dt")
    A, B, C, d = _realization(tf)
    steps = int(round(horizon / dt))
    t = np.arange(steps + 1) * dt
    y = np.empty(steps + 1)
    x = np.zeros(len(B))
    f = lambda x: A @ x + B
    for i in range(steps + 1):
        y[i] = C @ x + d
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            y[i + 1:] = np.nan
            break

    stable = is_stable(tf)
    if not stable:
        nan = float("nan")
        return StepResponse(t, y, False, nan, nan, nan, nan)
    final = float(np.polyval(tf.num, 0.0) / np.polyval(tf.den, 0.0))
    return StepResponse(t, y, True, final, *_step_metrics(t, y, final))


def _step_metrics(t: np.ndarray, y: np.ndarray, final: float) -> tuple[float, float, float]:
    if final == 0:
        return float("nan"), 0.0, 0.0
    yn = y / final
    above10 = np.flatnonzero(yn >= 0.1)
    above90 = np.flatnonzero(yn >= 0.9)
    rise = float(t[above90[0]] - t[above10[0]]) if above10.size and above90.size else float("nan")
    overshoot = max(0.0, float(yn.max() - 1.0) * 100.0)
    outside = np.flatnonzero(np.abs(yn - 1.0) > 0.02)
    if outside.size == 0:
        settle = 0.0
    elif outside[-1] + 1 < len(t):
        settle = float(t[outside[-1] + 1])
    else:
        settle = float("inf")
    return rise, overshoot, settle


class HeadingPID:
    """Discrete heading controller.

    The error is wrapped to (-pi, pi]; the derivative acts on the measured
    heading through a first-order filter; the integral contribution is
    clamped to ``integral_limit`` and frozen while the output saturates in the
    direction of the error; the output is saturated to ``output_limit``.
    """

    def __init__(self, gains: PidGains, output_limit: float = math.inf,
                 integral_limit: float | None = None):
        if not output_limit > 0:
            raise ValueError("output_limit must be > 0")
        self.gains = gains
        self.output_limit = output_limit
        self.integral_limit = output_limit if integral_limit is None else integral_limit
        self.reset()

    def reset(self):
        self.integral = 0.0
        self.deriv = 0.0
        self.prev_meas: float | None = None

    def step(self, ref: float, meas: float, dt: float) -> float:
        if not dt > 0:
            raise ValueError("dt must be > 0")
        g = self.gains
        err = wrap_angle(ref - meas)

        if self.prev_meas is not None:
            dmeas = wrap_angle(meas - self.prev_meas)
            self.deriv = (g.tf_derivative * self.deriv - g.kd * dmeas) / (g.tf_derivative + dt)
        self.prev_meas = meas

        if g.ki:
            lim = self.integral_limit
            trial = min(max(self.integral + g.ki * err * dt, -lim), lim)
            u = g.kp * err + trial + self.deriv
            # clamping anti-windup: freeze the integrator while saturated in the error's direction
            if abs(u) <= self.output_limit or u * err <= 0:
                self.integral = trial

        u = g.kp * err + self.integral + self.deriv
        return min(max(u, -self.output_limit), self.output_limit)


def heading_pid_step(ref: float, meas: float, ctrl: HeadingPID, dt: float) -> float:
    return ctrl.step(ref, meas, dt)
