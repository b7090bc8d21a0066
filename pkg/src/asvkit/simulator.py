"""Fixed-step closed-loop simulation of the vehicle on a waypoint mission."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .autopilot import HeadingPID, PidGains
from .guidance import Waypoint, allocate_thrust, differential_from_command
from .io import write_csv
from .rigid_body import (ForceMoment, VehicleState, VesselParams, state_rate_array,
                         wrap_angle)

log = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("t", "x", "y", "psi", "u", "v", "r", "Xb", "Yb", "N")


class IntegrationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Disturbance:
    """Yaw moment and sway force: a sinusoid plus seeded uniform noise held over each step."""

    yaw_amplitude: float = 0.0
    sway_amplitude: float = 0.0
    frequency: float = 0.5
    yaw_noise: float = 0.0
    sway_noise: float = 0.0

    def __post_init__(self):
        for name in ("yaw_amplitude", "sway_amplitude", "yaw_noise", "sway_noise"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"disturbance {name} must be >= 0")
        if not self.frequency >= 0:
            raise ValueError("disturbance frequency must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    duration: float = 120.0
    disturbance: Disturbance | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.duration >= self.dt:
            raise ValueError(f"duration {self.duration} shorter than dt {self.dt}")


@dataclass
class AutopilotConfig:
    """Mission autopilot: heading PID driving differential thrust."""

    gains: PidGains = field(default_factory=lambda: PidGains(kp=16.0, ki=0.05, kd=16.0, tf_derivative=0.05))
    thrust_limit: float = 20.0
    cruise_thrust: float = 8.0
    moment_form: str = "conventional"
    heading_control: bool = True

    def __post_init__(self):
        if not self.thrust_limit > 0:
            raise ValueError("thrust_limit must be > 0")
        if not 0 <= self.cruise_thrust <= self.thrust_limit:
            raise ValueError("cruise_thrust must lie in [0, thrust_limit]")


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    forces: np.ndarray
    completed: bool = True
    waypoints_reached: int = 0
    psi_ref: np.ndarray | None = None

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> VehicleState:
        return VehicleState.from_array(self.states[i])

    def heading_error(self) -> np.ndarray:
        if self.psi_ref is None:
            raise ValueError("trajectory carries no heading reference")
        d = self.psi_ref - self.states[:, 2]
        return np.arctan2(np.sin(d), np.cos(d))

    def rows(self):
        for t, s, f in zip(self.t, self.states, self.forces):
            yield (t, *s, *f)

    def to_csv(self, path):
        return write_csv(path, TRAJECTORY_COLUMNS, self.rows())


def _rk4(p: VesselParams, x: np.ndarray, tau: np.ndarray, dt: float) -> np.ndarray:
    # overflow is reported below as IntegrationError rather than as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = state_rate_array(p, x, tau)
        k2 = state_rate_array(p, x + 0.5 * dt * k1, tau)
        k3 = state_rate_array(p, x + 0.5 * dt * k2, tau)
        k4 = state_rate_array(p, x + dt * k3, tau)
        out = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError(f"non-finite state after RK4 step from {x.tolist()}")
    out[2] = wrap_angle(out[2])
    return out


def rk4_step(p: VesselParams, state: VehicleState, tr: ForceMoment, dt: float) -> VehicleState:
    """One classic Runge-Kutta step with the input held constant over the step."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    return VehicleState.from_array(_rk4(p, state.as_array(), tr.as_array(), dt))


def integrate(p: VesselParams, state: VehicleState, tr: ForceMoment, dt: float,
              duration: float) -> VehicleState:
    """Open-loop integration under a constant force for ``duration`` seconds."""
    x, tau = state.as_array(), tr.as_array()
    for _ in range(int(round(duration / dt))):
        x = _rk4(p, x, tau, dt)
    return VehicleState.from_array(x)


def _disturbance_sequence(dist: Disturbance | None, t: np.ndarray, seed: int) -> np.ndarray:
    """(n, 3) body force/moment disturbance for each step start time."""
    out = np.zeros((len(t), 3))
    if dist is None:
        return out
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=(len(t), 2))
    wave = np.sin(dist.frequency * t)
    out[:, 1] = dist.sway_amplitude * wave + dist.sway_noise * noise[:, 0]
    out[:, 2] = dist.yaw_amplitude * wave + dist.yaw_noise * noise[:, 1]
    return out


def run_mission(p: VesselParams, cfg: SimConfig, controller: AutopilotConfig,
                waypoints: list[Waypoint], initial: VehicleState | None = None) -> Trajectory:
    """Closed-loop run: LOS heading -> PID -> differential thrust -> RK4.

    Stops when the last waypoint is inside its capture radius or when the
    duration runs out; the latter is reported through ``completed=False``.
    """
    if not waypoints:
        raise ValueError("mission needs at least one waypoint")
    steps = int(math.floor(cfg.duration / cfg.dt + 1e-9))
    t_grid = np.arange(steps + 1) * cfg.dt
    dist = _disturbance_sequence(cfg.disturbance, t_grid, cfg.seed)
    pid = HeadingPID(controller.gains, output_limit=controller.thrust_limit)

    x = (initial or VehicleState()).as_array()
    states = np.empty((steps + 1, 6))
    forces = np.zeros((steps + 1, 3))
    refs = np.empty(steps + 1)
    wp_i = 0
    n = 0
    for k in range(steps + 1):
        pose_x, pose_y, psi = x[0], x[1], x[2]
        while wp_i < len(waypoints) and math.hypot(waypoints[wp_i].x - pose_x,
                                                   waypoints[wp_i].y - pose_y) <= waypoints[wp_i].capture_radius:
            wp_i += 1
        wp = waypoints[min(wp_i, len(waypoints) - 1)]
        ref = math.atan2(wp.y - pose_y, wp.x - pose_x)
        states[k], refs[k] = x, ref
        n = k + 1
        if wp_i == len(waypoints) or k == steps:
            break

        err = wrap_angle(ref - psi)
        if controller.heading_control:
            u_heading = pid.step(ref, psi, cfg.dt)
            u_speed = controller.cruise_thrust * max(0.0, math.cos(err))
        else:
            u_heading, u_speed = 0.0, controller.cruise_thrust
        t_port, t_star = differential_from_command(u_heading, u_speed, controller.thrust_limit)
        tau = allocate_thrust(p, t_port, t_star, controller.moment_form).as_array() + dist[k]
        forces[k] = tau
        x = _rk4(p, x, tau, cfg.dt)

    completed = wp_i == len(waypoints)
    if not completed:
        log.warning("mission timed out after %.3f s with %d of %d waypoints reached",
                    cfg.duration, wp_i, len(waypoints))
    return Trajectory(t_grid[:n].copy(), states[:n].copy(), forces[:n].copy(), completed, wp_i,
                      refs[:n].copy())
