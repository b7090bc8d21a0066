"""Waypoint guidance, thrust allocation and PWM mapping for the twin thrusters."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .rigid_body import ForceMoment, Pose, VesselParams, wrap_angle

PWM_MIN = 1000.0
PWM_MAX = 2000.0
PWM_NEUTRAL = 1500.0

MOMENT_FORMS = ("paper", "conventional")


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    capture_radius: float = 2.0

    def __post_init__(self):
        if not self.capture_radius > 0:
            raise ValueError(f"capture_radius must be > 0, got {self.capture_radius}")

    def distance(self, pose: Pose) -> float:
        return math.hypot(self.x - pose.x, self.y - pose.y)


@dataclass(frozen=True)
class ThrusterCommand:
    t_port: float
    t_star: float
    pwm_port: float
    pwm_star: float

    def __post_init__(self):
        for pwm in (self.pwm_port, self.pwm_star):
            if not PWM_MIN <= pwm <= PWM_MAX:
                raise ValueError(f"PWM {pwm} outside [{PWM_MIN}, {PWM_MAX}] us")


def los_heading(pose: Pose, wp: Waypoint) -> float:
    """Bearing from the vehicle to the waypoint, in (-pi, pi]."""
    return wrap_angle(math.atan2(wp.y - pose.y, wp.x - pose.x))


def allocate_thrust(p: VesselParams, t_port: float, t_star: float,
                    form: str = "paper") -> ForceMoment:
    """Net body force and yaw moment from the port/starboard thrusts.

    ``form="paper"`` uses N = X*d1 + Y*d2 literally. ``form="conventional"``
    sums per-thruster moments with the thrusters at (-d1, -/+d2), so equal
    thrusts give no yaw and a stronger port thrust turns the bow to starboard.
    """
    x = t_port * math.cos(p.alpha_p) + t_star * math.cos(p.alpha_s)
    y = t_port * math.sin(p.alpha_p) - t_star * math.sin(p.alpha_s)
    if form == "paper":
        n = x * p.d1 + y * p.d2
    elif form == "conventional":
        n = p.d2 * (t_port * math.cos(p.alpha_p) - t_star * math.cos(p.alpha_s)) - p.d1 * y
    else:
        raise ValueError(f"unknown moment form {form!r}; expected one of {MOMENT_FORMS}")
    return ForceMoment(x, y, n)


def differential_from_command(u_heading: float, u_speed: float,
                              limit: float) -> tuple[float, float]:
    """Mix a turn command and a forward command into (t_port, t_star), each clamped to +-limit."""
    if not limit > 0:
        raise ValueError("thrust limit must be > 0")
    t_port = min(max(u_speed + u_heading, -limit), limit)
    t_star = min(max(u_speed - u_heading, -limit), limit)
    return t_port, t_star


def thrust_to_pwm(t: float, t_max: float) -> float:
    if not t_max > 0:
        raise ValueError("t_max must be > 0")
    t = min(max(t, -t_max), t_max)
    return PWM_NEUTRAL + 500.0 * t / t_max


def pwm_to_thrust(pwm: float, t_max: float) -> float:
    if not t_max > 0:
        raise ValueError("t_max must be > 0")
    pwm = min(max(pwm, PWM_MIN), PWM_MAX)
    return (pwm - PWM_NEUTRAL) / 500.0 * t_max


def thruster_command(t_port: float, t_star: float, t_max: float) -> ThrusterCommand:
    return ThrusterCommand(t_port, t_star, thrust_to_pwm(t_port, t_max), thrust_to_pwm(t_star, t_max))


def load_mission(path: str | Path) -> list[Waypoint]:
    """Read a mission file: a JSON array of ``{"x": .., "y": .., "r": ..}`` objects."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, list) or not doc:
        raise ValueError(f"{path}: mission must be a non-empty JSON array of waypoints")
    wps = []
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise ValueError(f"{path}: waypoint {i} is not an object")
        extra = set(item) - {"x", "y", "r"}
        if extra:
            raise ValueError(f"{path}: waypoint {i} has unknown keys {sorted(extra)}")
        try:
            wps.append(Waypoint(float(item["x"]), float(item["y"]), float(item.get("r", 2.0))))
        except KeyError as exc:
            raise ValueError(f"{path}: waypoint {i} missing {exc}") from None
    return wps
