"""3-DOF (surge, sway, yaw) rigid-body model of a twin-hull surface vehicle.

Everything here is a pure function of its arguments. The public helpers take
the small dataclasses below; the ``*_array`` variants work on plain numpy
vectors and are what the integrator calls in its inner loop.

Frames: the fixed frame has x pointing north and y east; the body frame has
x forward and y to starboard. Heading ``psi`` is measured from north,
positive clockwise seen from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

QUAD_POINTS = 32


def wrap_angle(a: float) -> float:
    """Wrap an angle in radians to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(float(self.psi)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi], dtype=float)


@dataclass(frozen=True)
class BodyVelocity:
    u: float = 0.0
    v: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.u, self.v, self.r)):
            raise ValueError(f"non-finite body velocity {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.r], dtype=float)


@dataclass(frozen=True)
class ForceMoment:
    xb: float = 0.0
    yb: float = 0.0
    n: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.xb, self.yb, self.n)):
            raise ValueError(f"non-finite force/moment {self}")

    def __add__(self, other: "ForceMoment") -> "ForceMoment":
        return ForceMoment(self.xb + other.xb, self.yb + other.yb, self.n + other.n)

    def as_array(self) -> np.ndarray:
        return np.array([self.xb, self.yb, self.n], dtype=float)


@dataclass(frozen=True)
class VehicleState:
    pose: Pose = field(default_factory=Pose)
    vel: BodyVelocity = field(default_factory=BodyVelocity)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.pose.as_array(), self.vel.as_array()])

    @classmethod
    def from_array(cls, a) -> "VehicleState":
        a = [float(c) for c in a]
        return cls(Pose(a[0], a[1], a[2]), BodyVelocity(a[3], a[4], a[5]))


@dataclass(frozen=True)
class VesselParams:
    """Physical constants of the vehicle (SI units).

    ``added_mass`` holds the diagonal surge/sway/yaw added-mass terms. The
    hull integration interval runs from ``-dax`` (aft) to ``dfx`` (fore)
    measured from the centre of gravity. ``d1``/``d2`` are the longitudinal
    and lateral thruster lever arms; ``alpha_p``/``alpha_s`` are the
    port/starboard thruster inclinations to the body x axis.
    """

    m: float = 15.0
    iz: float = 2.0
    added_mass: tuple[float, float, float] = (0.0, 0.0, 0.0)
    cf: float = 0.02
    rho: float = 1000.0
    ah: float = 0.5
    cdh: float = 1.0
    th: float = 0.15
    lh: float = 1.0
    dfx: float = 0.5
    dax: float = 0.5
    prop_d: float = 0.08
    kt: float = 0.4
    kq: float = 0.05
    d1: float = 0.45
    d2: float = 0.25
    alpha_p: float = 0.0
    alpha_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "added_mass", tuple(float(a) for a in self.added_mass))
        if len(self.added_mass) != 3:
            raise ValueError("added_mass must have three entries (surge, sway, yaw)")
        for name in ("m", "iz", "rho", "prop_d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if any(a < 0 for a in self.added_mass):
            raise ValueError(f"added-mass terms must be >= 0, got {self.added_mass}")
        if not self.dfx + self.dax > 0:
            raise ValueError("hull integration interval is degenerate (dfx + dax <= 0)")


def rotation_matrix(pose: Pose | float) -> np.ndarray:
    """Body-to-fixed rotation J(psi) for planar motion."""
    psi = pose.psi if isinstance(pose, Pose) else float(pose)
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def kinematic_derivative(pose: Pose, vel: BodyVelocity) -> np.ndarray:
    return rotation_matrix(pose) @ vel.as_array()


def mass_matrix(p: VesselParams) -> np.ndarray:
    xa, ya, na = p.added_mass
    return np.diag([p.m + xa, p.m + ya, p.iz + na])


def coriolis_rb(p: VesselParams, vel: BodyVelocity | float) -> np.ndarray:
    r = vel.r if isinstance(vel, BodyVelocity) else float(vel)
    mr = p.m * r
    return np.array([[0.0, -mr, 0.0], [mr, 0.0, 0.0], [0.0, 0.0, 0.0]])


def hull_drag_surge(p: VesselParams, u_rel: float) -> float:
    return p.cf * p.rho * p.ah * u_rel * abs(u_rel)


def _crossflow_nodes(p: VesselParams) -> tuple[np.ndarray, float]:
    h = (p.dfx + p.dax) / QUAD_POINTS
    return -p.dax + h * (np.arange(QUAD_POINTS) + 0.5), h


def _crossflow_loads(p: VesselParams, v: float, r: float) -> tuple[float, float]:
    # Midpoint rule over both hulls; returns (sway drag, yaw damping moment).
    if not p.dfx + p.dax > 0:
        raise ValueError("hull integration interval is degenerate (dfx + dax <= 0)")
    x, h = _crossflow_nodes(p)
    vx = v + r * x
    q = 0.5 * p.cdh * p.th * p.rho * vx * np.abs(vx)
    return 2.0 * h * float(q.sum()), 2.0 * h * float((q * x).sum())


def hull_drag_sway(p: VesselParams, vel: BodyVelocity) -> float:
    """Cross-flow drag on both hulls for the profile v(x) = v + r*x."""
    return _crossflow_loads(p, vel.v, vel.r)[0]


def hull_drag_yaw(p: VesselParams, vel: BodyVelocity) -> float:
    """Yaw damping moment: the sway cross-flow load weighted by lever arm x."""
    return _crossflow_loads(p, vel.v, vel.r)[1]


def damping_vector(p: VesselParams, vel: BodyVelocity) -> np.ndarray:
    """D(nu) @ nu, the resisting forces as they appear on the left-hand side."""
    fy, mz = _crossflow_loads(p, vel.v, vel.r)
    return np.array([hull_drag_surge(p, vel.u), fy, mz])


def propeller_thrust(p: VesselParams, n_rps: float) -> float:
    # n|n| so reverse rotation gives reverse thrust
    return p.kt * p.rho * p.prop_d**4 * n_rps * abs(n_rps)


def propeller_torque(p: VesselParams, n_rps: float) -> float:
    return p.kq * p.rho * p.prop_d**5 * n_rps * abs(n_rps)


def state_rate_array(p: VesselParams, x: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Rate of the 6-vector [x, y, psi, u, v, r] under body force ``tau``."""
    psi, u, v, r = x[2], x[3], x[4], x[5]
    c, s = math.cos(psi), math.sin(psi)
    fy, mz = _crossflow_loads(p, v, r)
    mr = p.m * r
    # C_RB @ nu = (-m r v, m r u, 0)
    rhs = (tau[0] + mr * v - hull_drag_surge(p, u),
           tau[1] - mr * u - fy,
           tau[2] - mz)
    # M is diagonal, so the solve is elementwise
    m11, m22, m33 = p.m + p.added_mass[0], p.m + p.added_mass[1], p.iz + p.added_mass[2]
    nu_dot = (rhs[0] / m11, rhs[1] / m22, rhs[2] / m33)
    return np.array([c * u - s * v, s * u + c * v, r, nu_dot[0], nu_dot[1], nu_dot[2]])


def dynamics_derivative(p: VesselParams, state: VehicleState, tr: ForceMoment) -> np.ndarray:
    """Time derivative [eta_dot; nu_dot] of the full state (gravity/restoring terms are zero)."""
    return state_rate_array(p, state.as_array(), tr.as_array())
