"""Frequency resolution and Cramer-Rao accuracy bounds.

Both CRLBs use the Fisher information of a complex tone with known
envelope in complex white noise,

    var(f) >= 1 / (8 pi^2 * snr * fs * int (t - t_mean)^2 |e(t)|^2 dt)

where ``e`` is the envelope normalised to unit peak and ``snr`` the peak
per-sample SNR (|peak|^2 / E|n|^2) used by the synthesiser.  Written with
the moment notation this is 1 / (snr' * (zeta^2 - mu^2 / E_s)), with
snr' = 8 pi^2 fs snr absorbing the angular-frequency and continuous-time
conversions.  For the angular bound the pattern is swept at angular rate
omega, so time moments follow from pattern moments by t = theta / omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import DegenerateEnvelope, InvalidArgument, NumericError
from .geometry import SPEED_OF_LIGHT
from .synthesis import FWHM_PER_SIGMA

MOMENT_RTOL = 1e-8
MOMENT_ATOL = 1e-14


def doppler_resolution(T: float) -> float:
    """Rayleigh Doppler resolution 1/T, Hz."""
    if not T > 0:
        raise InvalidArgument("observation time must be positive")
    return 1.0 / T


def interferometric_resolution(omega: float, theta_bw: float) -> float:
    """2.355 * omega / (pi * theta_bw), Hz; ``theta_bw`` in radians."""
    if omega < 0 or not theta_bw > 0:
        raise InvalidArgument("need omega >= 0 and theta_bw > 0")
    return FWHM_PER_SIGMA * omega / (math.pi * theta_bw)


def correlation_spectrum(f, sigma: float, omega: float, f_omega: float):
    """Gaussian correlator response centred on the beat frequency ``f_omega``."""
    if not omega > 0 or not sigma > 0:
        raise InvalidArgument("need omega > 0 and sigma > 0")
    f = np.asarray(f, float)
    peak = math.sqrt(2 * math.pi * sigma**2 / omega**2)
    out = peak * np.exp(-(2 * math.pi**2 * sigma**2 / omega**2) * (f - f_omega) ** 2)
    return float(out) if out.ndim == 0 else out


def correlation_half_power_width(sigma: float, omega: float) -> float:
    """Full width of ``correlation_spectrum`` at half its peak, found by root
    search rather than the closed form."""
    peak = correlation_spectrum(0.0, sigma, omega, 0.0)
    g = lambda f: correlation_spectrum(f, sigma, omega, 0.0) - 0.5 * peak
    hi = omega / sigma
    while g(hi) > 0:
        hi *= 2
    return 2.0 * optimize.brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-14)


@dataclass(frozen=True)
class PatternMoments:
    """Moments of |A(theta)|^2 over [-pi/2, pi/2] (theta in radians)."""

    mu_A: float
    zeta_A_sq: float
    E_s: float


@dataclass(frozen=True)
class TimeMoments:
    """Moments of |e(t)|^2 for an envelope normalised to unit peak."""

    mu_t: float
    zeta_t_sq: float
    E_s: float

    def __post_init__(self):
        if self.E_s <= 0:
            raise DegenerateEnvelope("envelope has no energy")

    @property
    def spread(self) -> float:
        """zeta^2 - mu^2 / E_s, the energy-weighted second central moment."""
        return self.zeta_t_sq - self.mu_t**2 / self.E_s


def _quad(fn, a, b):
    value, err = integrate.quad(fn, a, b, epsrel=MOMENT_RTOL, epsabs=MOMENT_ATOL, limit=200)
    if not math.isfinite(value) or err > max(10 * MOMENT_RTOL * abs(value), 10 * MOMENT_ATOL):
        raise NumericError(f"moment integral did not converge (value {value}, err {err})")
    return value


def pattern_moments(hpbw: float) -> PatternMoments:
    """Moments of the Gaussian power pattern A(theta) = exp(-theta^2 / 2 sigma^2),
    sigma = hpbw / 2.355, with hpbw in degrees."""
    if not 0 < hpbw < 180:
        raise InvalidArgument("hpbw must be in (0, 180) degrees")
    sigma = math.radians(hpbw) / FWHM_PER_SIGMA
    a2 = lambda th: math.exp(-(th**2) / sigma**2)
    lim = math.pi / 2
    return PatternMoments(
        mu_A=_quad(lambda th: th * a2(th), -lim, lim),
        zeta_A_sq=_quad(lambda th: th * th * a2(th), -lim, lim),
        E_s=_quad(a2, -lim, lim),
    )


def time_moments(envelope, rate: float, t0: float = 0.0) -> TimeMoments:
    """Trapezoid moments of a sampled envelope (samples at t0 + n / rate)."""
    e = np.abs(np.asarray(envelope))
    if e.size < 2 or not np.any(e > 0):
        raise DegenerateEnvelope("envelope must hold at least two samples with energy")
    p = (e / e.max()) ** 2
    t = t0 + np.arange(e.size) / rate
    return TimeMoments(
        mu_t=float(integrate.trapezoid(t * p, t)),
        zeta_t_sq=float(integrate.trapezoid(t * t * p, t)),
        E_s=float(integrate.trapezoid(p, t)),
    )


def beam_dwell_envelope(hpbw: float, omega: float, rate: float, n_sigma: float = 8.0):
    """Two-way channel amplitude A(omega t) of a target sweeping the beam
    at ``omega`` rad/s, sampled at ``rate`` over +/- n_sigma beam sigmas."""
    sigma = math.radians(hpbw) / FWHM_PER_SIGMA
    half = n_sigma * sigma / omega
    t = np.arange(-half, half, 1.0 / rate)
    return np.exp(-((omega * t) ** 2) / (2 * sigma**2)), float(t[0])


def doppler_crlb(snr_peak: float, tm: TimeMoments, f0: float, sample_rate: float):
    """(var_f_d in Hz^2, std_v_R in m/s)."""
    if not snr_peak > 0:
        raise InvalidArgument("snr must be positive")
    if not tm.spread > 0:
        raise DegenerateEnvelope("envelope has zero duration spread")
    var = 1.0 / (8 * math.pi**2 * snr_peak * sample_rate * tm.spread)
    return var, SPEED_OF_LIGHT / (2 * f0) * math.sqrt(var)


def angular_crlb(
    snr_peak: float,
    pm: PatternMoments,
    R: float,
    D_lambda: float,
    omega: float,
    sample_rate: float,
):
    """(var_f_omega in Hz^2, std_v_alpha in m/s) for a target crossing the
    pattern at ``omega`` rad/s."""
    if not snr_peak > 0:
        raise InvalidArgument("snr must be positive")
    if not omega > 0:
        raise InvalidArgument("omega must be positive")
    spread = pm.zeta_A_sq - pm.mu_A**2 / pm.E_s
    if not spread > 0:
        raise DegenerateEnvelope("pattern has zero angular spread")
    var = omega**3 / (8 * math.pi**2 * snr_peak * sample_rate * spread)
    return var, R / D_lambda * math.sqrt(var)


@dataclass(frozen=True)
class CrlbReport:
    var_f_d: float
    std_v_R: float
    var_f_omega: float
    std_v_alpha: float
    snr_db: float
    R: float
    D_lambda: float
    f0: float
    omega: float
    hpbw: float

    FIELDS = ("snr_db", "R", "D_lambda", "f0", "hpbw", "omega",
              "var_f_d", "std_v_R", "var_f_omega", "std_v_alpha")

    def as_rows(self):
        return [(name, getattr(self, name)) for name in self.FIELDS]

    def to_text(self) -> str:
        units = {"snr_db": "dB", "R": "m", "D_lambda": "wavelengths", "f0": "Hz",
                 "hpbw": "deg", "omega": "rad/s", "var_f_d": "Hz^2", "std_v_R": "m/s",
                 "var_f_omega": "Hz^2", "std_v_alpha": "m/s"}
        width = max(len(n) for n in self.FIELDS)
        return "\n".join(f"{n:<{width}}  {v:>14.6g}  {units[n]}" for n, v in self.as_rows())

    def to_csv(self) -> str:
        names, values = zip(*self.as_rows())
        return ",".join(names) + "\n" + ",".join(repr(float(v)) for v in values) + "\n"


def crlb_report(
    snr_db: float,
    R: float,
    speed: float,
    D_lambda: float,
    f0: float,
    hpbw: float,
    sample_rate: float,
    envelope=None,
) -> CrlbReport:
    """Both bounds for a target crossing broadside at range ``R``.

    The Doppler bound uses ``envelope`` (channel amplitude samples at
    ``sample_rate``) when given, otherwise the beam-limited dwell.
    """
    snr = 10 ** (snr_db / 10)
    omega = speed / R
    if envelope is None:
        envelope, t0 = beam_dwell_envelope(hpbw, omega, sample_rate)
    else:
        t0 = 0.0
    var_d, std_r = doppler_crlb(snr, time_moments(envelope, sample_rate, t0), f0, sample_rate)
    var_w, std_a = angular_crlb(snr, pattern_moments(hpbw), R, D_lambda, omega, sample_rate)
    return CrlbReport(
        var_f_d=var_d, std_v_R=std_r, var_f_omega=var_w, std_v_alpha=std_a,
        snr_db=snr_db, R=R, D_lambda=D_lambda, f0=f0, omega=omega, hpbw=hpbw,
    )
