"""Interferometric/Doppler velocity models and the full 3-D reconstruction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dsp import (
    EstimatorParams,
    correlate_channels,
    estimate_closest_approach,
    peak_frequency,
    recording_spectrogram,
)
from .errors import (
    InvalidArgument,
    NonInvertibleProjection,
    UndefinedAttackAngle,
    UndefinedHeading,
)
from .geometry import ArrayGeometry, named_baselines
from .scene import TruthRecord
from .synthesis import BasebandRecording, RadarConfig

PROJECTION_FLOOR = 1e-6


@dataclass(frozen=True)
class VelocityComponents:
    """Cartesian velocity referred to the broadside point.

    ``v_alpha_x``/``v_alpha_y`` are the components along the Phi = 0 and
    Phi = 90 baseline axes, ``v_R`` the range rate at broadside (positive
    receding).  ``R`` is the radius used to scale the interferometric
    frequencies.
    """

    v_alpha_x: float
    v_alpha_y: float
    v_R: float
    R: float
    baselines: tuple = (0, 90)


@dataclass(frozen=True)
class Velocity3DEstimate:
    phi_v: float
    v_theta: float
    beta: float
    speed: float
    v_R: float
    std: dict | None = None
    components: VelocityComponents | None = None
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PassPrior:
    """What the estimator is told about a pass in advance: when and how far
    away the target crosses the array axis, its nominal speed and direction,
    and when it is nearest (which fixes the Doppler sign in real mode)."""

    t_broadside: float
    r_broadside: float
    speed: float
    t_closest: float
    direction: int = 1

    @classmethod
    def from_truth(cls, truth: TruthRecord) -> "PassPrior":
        return cls(
            t_broadside=truth.t_broadside,
            r_broadside=truth.r_broadside,
            speed=truth.speed,
            t_closest=truth.t_closest,
            direction=1 if math.cos(math.radians(truth.phi_v)) >= 0 else -1,
        )


def interferometric_frequency(omega: float, D_lambda: float, alpha: float) -> float:
    """Correlator beat frequency omega * D_lambda * cos(alpha), Hz."""
    return omega * D_lambda * math.cos(alpha)


def tangential_from_frequency(
    f_omega: float,
    R: float,
    D_lambda: float,
    phi_v: float | None = None,
    Phi: float | None = None,
) -> float:
    """Narrow-beam inversion f * R / D_lambda.

    Given both ``phi_v`` and ``Phi`` (degrees) the result is divided by
    cos(phi_v + Phi), recovering the full in-plane speed from one baseline.
    """
    if not R > 0 or not D_lambda > 0:
        raise InvalidArgument("R and D_lambda must be positive")
    v = f_omega * R / D_lambda
    if phi_v is None and Phi is None:
        return v
    if phi_v is None or Phi is None:
        raise InvalidArgument("projection correction needs both phi_v and Phi")
    c = math.cos(math.radians(phi_v + Phi))
    if abs(c) < PROJECTION_FLOOR:
        raise NonInvertibleProjection(
            f"baseline Phi = {Phi} deg is orthogonal to heading {phi_v} deg"
        )
    return v / c


def tangential_exact(f_omega: float, R: float, D_lambda: float, alpha: float) -> float:
    """Inversion keeping the cos(alpha) factor of the beat frequency."""
    return f_omega * R / (D_lambda * math.cos(alpha))


def forward_components(v_phi: float, v_theta: float, phi: float, theta: float):
    """Per-axis tangential components seen by the x and y baselines.

    Angles in degrees.  At the zenith (theta = 0) the azimuth is undefined
    and the split degenerates; there ``v_phi`` and ``v_theta`` are taken as
    the Cartesian x and y tangential components and returned unchanged.
    """
    if theta == 0.0:
        return v_phi, v_theta
    p, t = math.radians(phi), math.radians(theta)
    common = v_phi + v_theta * math.cos(t)
    return common * math.cos(p), common * math.sin(p)


def radial_velocity(f_d: float, lam: float) -> float:
    """v_R = f_d * lambda / 2 (positive f_d means receding)."""
    if not lam > 0:
        raise InvalidArgument("wavelength must be positive")
    return f_d * lam / 2.0


def heading_azimuth(v_alpha_x: float, v_alpha_y: float) -> float:
    """Quadrant-aware heading in degrees, (-180, 180]."""
    if v_alpha_x == 0 and v_alpha_y == 0:
        raise UndefinedHeading("no tangential motion, heading undefined")
    phi = math.degrees(math.atan2(v_alpha_y, v_alpha_x))
    return 180.0 if phi == -180.0 else phi


def tangential_magnitude(v_alpha_x: float, v_alpha_y: float) -> float:
    return math.hypot(v_alpha_x, v_alpha_y)


def attack_angle(v_R: float, v_theta: float) -> float:
    """beta = atan(-v_R / v_theta) in degrees, within [-90, 90]."""
    if v_R == 0 and v_theta == 0:
        raise UndefinedAttackAngle("both velocity components are zero")
    if v_theta == 0:
        return 90.0 if -v_R > 0 else -90.0
    return math.degrees(math.atan(-v_R / v_theta))


def assemble(components: VelocityComponents, **extra) -> Velocity3DEstimate:
    vx, vy, vr = components.v_alpha_x, components.v_alpha_y, components.v_R
    v_theta = tangential_magnitude(vx, vy)
    return Velocity3DEstimate(
        phi_v=heading_azimuth(vx, vy),
        v_theta=v_theta,
        beta=attack_angle(vr, v_theta),
        speed=math.hypot(v_theta, vr),
        v_R=vr,
        components=components,
        **extra,
    )


def _solve_velocity(u, axes, v_r, p_hat):
    """Velocity from its line-of-sight-normal projections ``u`` on the in-plane
    ``axes`` and the range rate ``v_r`` along ``p_hat``."""
    along = [u_k + v_r * float(ax @ p_hat) for u_k, ax in zip(u, axes)]
    v_xy = along[0] * axes[0] + along[1] * axes[1]
    v_z = (v_r - float(v_xy @ p_hat)) / p_hat[2]
    return np.array([v_xy[0], v_xy[1], v_z]), along


def reconstruct(
    rec: BasebandRecording,
    geom: ArrayGeometry,
    cfg: RadarConfig,
    params: EstimatorParams | None = None,
    prior: PassPrior | None = None,
) -> Velocity3DEstimate:
    """Estimate (phi_v, v_theta, beta, speed) from one pass.

    Finds the peak-power time on channel 1, reads the Doppler frequency there
    and the beat frequencies of the Phi = 0 and Phi = 90 baselines, then
    corrects for the target sitting off broadside at that moment using the
    prior speed and crossing time.  The correction is iterated because the
    offset direction follows the current velocity estimate.
    """
    params = params or EstimatorParams()
    if prior is None:
        raise InvalidArgument("reconstruct needs the a-priori pass geometry (PassPrior)")
    lam = geom.wavelength
    spec_d = recording_spectrogram(rec.channel(1), rec, params)
    t_peak = estimate_closest_approach(
        rec, geom, cfg, params.closest_approach, params=params, spec=spec_d
    )
    t_peak = float(spec_d.frame_times[spec_d.frame_index(t_peak)])
    real = rec.mode == "real"
    doppler = peak_frequency(
        spec_d, t_peak, params.interpolate, min_abs_freq=cfg.highpass_cutoff if real else 0.0
    )
    # A real channel cannot tell approach from recession: its analytic
    # extension is the conjugate of the complex channel while approaching.
    # The known pass timing restores the sign.
    approaching = real and t_peak < prior.t_closest
    if real:
        f_d = -abs(doppler.f) if approaching else abs(doppler.f)
    else:
        f_d = doppler.f
    v_r = radial_velocity(f_d, lam)

    bls = named_baselines(geom)
    axes, d_lam, f_beat = [], [], []
    for key in (0, 90):
        bl = bls[key]
        corr = correlate_channels(rec, bl.rx_a, bl.rx_b, path=params.correlation_path)
        spec_c = recording_spectrogram(corr, rec, params)
        f = peak_frequency(spec_c, t_peak, params.interpolate).f
        if approaching:
            f = -f
        axes.append(np.array([bl.B_hat.x, bl.B_hat.y, 0.0]))
        d_lam.append(bl.D_lambda)
        f_beat.append(f)

    z = np.array([0.0, 0.0, 1.0])
    R, p_hat = prior.r_broadside, z
    u = [tangential_from_frequency(f, R, dl) for f, dl in zip(f_beat, d_lam)]
    v, along = _solve_velocity(u, axes, v_r, p_hat)
    dt = t_peak - prior.t_broadside
    for _ in range(params.calibration_iterations):
        n = np.linalg.norm(v)
        if n == 0:
            break
        p = prior.r_broadside * z + prior.speed * dt * v / n
        R = float(np.linalg.norm(p))
        p_hat = p / R
        u = [tangential_from_frequency(f, R, dl) for f, dl in zip(f_beat, d_lam)]
        v, along = _solve_velocity(u, axes, v_r, p_hat)

    components = VelocityComponents(
        v_alpha_x=float(along[0]), v_alpha_y=float(along[1]), v_R=float(v[2]), R=R
    )
    alpha = math.acos(min(1.0, float(p_hat[2])))
    return assemble(
        components,
        diagnostics={
            "t_peak": t_peak,
            "f_doppler": f_d,
            "f_phi0": f_beat[0],
            "f_phi90": f_beat[1],
            "v_R_at_peak": v_r,
            "R_corr": R,
            "alpha_corr_deg": math.degrees(alpha),
        },
    )
