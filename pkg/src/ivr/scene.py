"""Point targets on constant-velocity trajectories and their ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, OutOfRange, UndefinedHeading
from .geometry import ArrayGeometry, Baseline, Vec3, projected_angle


@dataclass(frozen=True)
class LinearTrajectory:
    p0: Vec3
    v: Vec3
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise InvalidArgument(
                f"t_end ({self.t_end}) must exceed t_start ({self.t_start})"
            )

    @property
    def speed(self) -> float:
        return self.v.norm()

    def shifted(self, dt: float) -> "LinearTrajectory":
        """Same path, delayed in time by ``dt``."""
        return LinearTrajectory(
            p0=self.p0 - self.v.scale(dt),
            v=self.v,
            t_start=self.t_start + dt,
            t_end=self.t_end + dt,
        )

    @classmethod
    def through(
        cls,
        point: Vec3,
        speed: float,
        phi_v_deg: float,
        beta_deg: float = 0.0,
        t_cross: float = 0.0,
        half_span: float = 2.0,
    ) -> "LinearTrajectory":
        """Trajectory passing ``point`` at ``t_cross`` with heading ``phi_v``
        (counter-clockwise from +x) descending toward the array plane at
        ``beta`` degrees; defined over ``t_cross +/- half_span`` seconds."""
        phi = math.radians(phi_v_deg)
        beta = math.radians(beta_deg)
        v = Vec3(
            speed * math.cos(beta) * math.cos(phi),
            speed * math.cos(beta) * math.sin(phi),
            -speed * math.sin(beta),
        )
        return cls(
            p0=point - v.scale(t_cross),
            v=v,
            t_start=t_cross - half_span,
            t_end=t_cross + half_span,
        )


def position_at(traj: LinearTrajectory, t: float) -> Vec3:
    if not traj.t_start <= t <= traj.t_end:
        raise OutOfRange(f"t = {t} outside [{traj.t_start}, {traj.t_end}]")
    return traj.p0 + traj.v.scale(t)


def positions(traj: LinearTrajectory, t: np.ndarray) -> np.ndarray:
    """Vectorised positions, shape (len(t), 3); no span check."""
    return np.asarray(traj.p0)[None, :] + np.asarray(t, float)[:, None] * np.asarray(traj.v)[None, :]


@dataclass(frozen=True)
class PointTarget:
    trajectory: LinearTrajectory
    reflectivity: complex = 1.0 + 0j

    def __post_init__(self):
        value = complex(self.reflectivity)
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise InvalidArgument("reflectivity must be finite")
        object.__setattr__(self, "reflectivity", value)


@dataclass(frozen=True)
class Scene:
    targets: tuple[PointTarget, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))

    @classmethod
    def single(cls, trajectory: LinearTrajectory, reflectivity: complex = 1.0) -> "Scene":
        return cls((PointTarget(trajectory, reflectivity),))


def _closest_time(traj: LinearTrajectory, point: np.ndarray, axes=slice(None)) -> float:
    p0 = np.asarray(traj.p0)[axes] - point[axes]
    v = np.asarray(traj.v)[axes]
    vv = float(v @ v)
    if vv == 0.0:
        return traj.t_start
    t = -float(p0 @ v) / vv
    return min(max(t, traj.t_start), traj.t_end)


@dataclass(frozen=True)
class TruthRecord:
    """Ground truth of one pass, in the array frame.

    ``beta`` and the radial/tangential split refer to the broadside point
    (where the track meets the array's z-axis), so a level pass has
    beta = 0 and a descending one beta > 0.
    """

    phi_v: float
    beta: float
    speed: float
    v_theta: float
    v_R: float
    t_closest: float
    t_broadside: float
    r_broadside: float
    trajectory: LinearTrajectory
    geometry: ArrayGeometry

    def R(self, t):
        """Range from the array centre at time(s) ``t``."""
        p = positions(self.trajectory, np.atleast_1d(t)) - np.asarray(self.geometry.center)
        r = np.linalg.norm(p, axis=1)
        return float(r[0]) if np.ndim(t) == 0 else r

    def range_rate(self, t) -> float:
        p = np.asarray(position_at(self.trajectory, t)) - np.asarray(self.geometry.center)
        return float(p @ np.asarray(self.trajectory.v) / np.linalg.norm(p))

    def alpha(self, t: float, bl: Baseline) -> float:
        return projected_angle(position_at(self.trajectory, t) - self.geometry.center, bl)

    @property
    def r_closest(self) -> float:
        return self.R(self.t_closest)


def ground_truth(traj: LinearTrajectory, geom: ArrayGeometry) -> TruthRecord:
    v = traj.v
    if v.norm() == 0.0:
        raise UndefinedHeading("a static target has no heading")
    v_theta = math.hypot(v.x, v.y)
    if v_theta == 0.0:
        raise UndefinedHeading("purely vertical motion has no in-plane heading")
    phi_v = math.degrees(math.atan2(v.y, v.x))
    if phi_v == -180.0:
        phi_v = 180.0
    c = np.asarray(geom.center)
    t_closest = _closest_time(traj, c)
    t_broadside = _closest_time(traj, c, axes=slice(0, 2))
    p_b = np.asarray(traj.p0) + t_broadside * np.asarray(traj.v) - c
    v_R = v.z
    return TruthRecord(
        phi_v=phi_v,
        beta=math.degrees(math.atan(-v_R / v_theta)),
        speed=v.norm(),
        v_theta=v_theta,
        v_R=v_R,
        t_closest=t_closest,
        t_broadside=t_broadside,
        r_broadside=float(np.linalg.norm(p_b)),
        trajectory=traj,
        geometry=geom,
    )
