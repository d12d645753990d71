"""Multi-channel baseband synthesis for a CW direct-downconversion radar.

Each receive channel n carries, per target,

    reflectivity * g_tx * g_rx,n * loss * exp(+j 2 pi f0 tau_n(t))

with tau_n the bistatic round-trip delay Tx -> target -> Rx_n evaluated
continuously at every sample.  The positive exponent is the IQ convention
under which r_a * conj(r_b) = exp(-j 2 pi f0 (tau_b - tau_a)); it makes a
receding target a positive-frequency tone.  Real mode is unaffected.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import signal

from .errors import AliasingError, InvalidArgument, OutOfRange
from .geometry import SPEED_OF_LIGHT, ArrayGeometry, Vec3
from .scene import Scene, positions

MODES = ("complex_iq", "real")
FWHM_PER_SIGMA = 2.355
"Gaussian half-power beamwidth in units of sigma, as used throughout."


@dataclass(frozen=True)
class RadarConfig:
    """Radar and acquisition settings.

    ``hpbw`` is the shared Tx/Rx half-power beamwidth in degrees;
    ``math.inf`` gives isotropic elements.  ``snr_db`` is the peak-envelope
    signal-to-noise ratio per channel and sample; ``None`` disables noise.
    """

    f0: float = 41.8e9
    sample_rate: float = 4166.7
    hpbw: float = 30.0
    baseband_mode: str = "real"
    highpass_cutoff: float = 10.0
    propagation_loss: bool = True
    snr_db: float | None = 16.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.f0 > 0:
            raise InvalidArgument("f0 must be positive")
        if not self.sample_rate > 0:
            raise InvalidArgument("sample_rate must be positive")
        if not (0 < self.hpbw < 180 or self.hpbw == math.inf):
            raise InvalidArgument(f"hpbw must be in (0, 180) degrees or inf, got {self.hpbw}")
        if self.baseband_mode not in MODES:
            raise InvalidArgument(f"baseband_mode must be one of {MODES}")
        if not 0 <= self.highpass_cutoff < self.sample_rate / 2:
            raise InvalidArgument("highpass_cutoff must lie in [0, sample_rate/2)")
        if self.snr_db is not None and not math.isfinite(self.snr_db):
            raise InvalidArgument("snr_db must be finite or None")

    @property
    def sigma(self) -> float:
        """Gaussian beam sigma in radians."""
        return math.radians(self.hpbw) / FWHM_PER_SIGMA

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f0

    def replace(self, **changes) -> "RadarConfig":
        return RadarConfig(**{**asdict(self), **changes})

    def digest(self) -> str:
        return hashlib.sha256(repr(sorted(asdict(self).items())).encode()).hexdigest()[:16]


@dataclass
class BasebandRecording:
    sample_rate: float
    t0: float
    channels: np.ndarray
    mode: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.channels = np.asarray(self.channels)
        if self.channels.ndim != 2 or self.channels.shape[0] != 3:
            raise InvalidArgument("a recording holds exactly 3 equal-length channels")
        if self.mode not in MODES:
            raise InvalidArgument(f"mode must be one of {MODES}")
        if self.mode == "real" and np.iscomplexobj(self.channels):
            raise InvalidArgument("real-mode recordings must hold real samples")
        if not np.all(np.isfinite(self.channels)):
            raise InvalidArgument("recording contains non-finite samples")

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_samples) / self.sample_rate

    def channel(self, index: int) -> np.ndarray:
        if index not in (1, 2, 3):
            raise InvalidArgument(f"channel index must be 1, 2 or 3, got {index!r}")
        return self.channels[index - 1]


def round_trip_delay(tx: Vec3, rx: Vec3, p: Vec3) -> float:
    """Bistatic delay (|tx - p| + |p - rx|) / c."""
    d_tx = (p - tx).norm()
    d_rx = (p - rx).norm()
    if d_tx == 0.0 or d_rx == 0.0:
        raise InvalidArgument("target coincides with an antenna")
    return (d_tx + d_rx) / SPEED_OF_LIGHT


def beam_amplitude(theta_off_boresight, hpbw: float):
    """One-way amplitude gain sqrt(A(theta)) of the Gaussian power pattern
    A(theta) = exp(-theta^2 / 2 sigma^2), sigma = hpbw / 2.355 (hpbw in deg)."""
    if not hpbw > 0:
        raise InvalidArgument("hpbw must be positive")
    theta = np.asarray(theta_off_boresight, float)
    if hpbw == math.inf:
        out = np.ones_like(theta)
    else:
        sigma = math.radians(hpbw) / FWHM_PER_SIGMA
        out = np.exp(-(theta**2) / (4.0 * sigma**2))
    return float(out) if out.ndim == 0 else out


def _off_boresight(rel: np.ndarray, dist: np.ndarray) -> np.ndarray:
    return np.arccos(np.clip(rel[:, 2] / dist, -1.0, 1.0))


def sample_times(span, sample_rate: float) -> np.ndarray:
    t0, t1 = (float(s) for s in span)
    n = int(math.floor((t1 - t0) * sample_rate + 1e-9)) + 1
    if n < 2:
        raise InvalidArgument("span must contain at least two samples")
    return t0 + np.arange(n) / sample_rate


def clean_returns(
    scene: Scene, geom: ArrayGeometry, cfg: RadarConfig, t: np.ndarray
) -> np.ndarray:
    """Noise-free complex returns, shape (3, len(t)), before any filtering."""
    lam = SPEED_OF_LIGHT / cfg.f0
    tx = np.asarray(geom.tx_position)
    rxs = [np.asarray(p) for p in geom.rx_positions]
    out = np.zeros((3, t.size), dtype=complex)
    for target in scene.targets:
        traj = target.trajectory
        p = positions(traj, t)
        v = np.asarray(traj.v)
        rel_tx = p - tx
        d_tx = np.linalg.norm(rel_tx, axis=1)
        g_tx = beam_amplitude(_off_boresight(rel_tx, d_tx), cfg.hpbw)
        rate_tx = rel_tx @ v / d_tx
        for n, rx in enumerate(rxs):
            rel_rx = p - rx
            d_rx = np.linalg.norm(rel_rx, axis=1)
            if np.any(d_tx == 0) or np.any(d_rx == 0):
                raise InvalidArgument("target passes through an antenna")
            f_inst = (rate_tx + rel_rx @ v / d_rx) / lam
            f_max = float(np.max(np.abs(f_inst)))
            if f_max > cfg.sample_rate / 2:
                raise AliasingError(
                    f"instantaneous frequency {f_max:.1f} Hz exceeds Nyquist "
                    f"{cfg.sample_rate / 2:.1f} Hz on channel {n + 1}"
                )
            amp = target.reflectivity * g_tx * beam_amplitude(
                _off_boresight(rel_rx, d_rx), cfg.hpbw
            )
            if cfg.propagation_loss:
                amp = amp / (d_tx * d_rx)
            out[n] += amp * np.exp(2j * np.pi * (d_tx + d_rx) / lam)
    return out


def highpass(x: np.ndarray, cutoff: float, sample_rate: float) -> np.ndarray:
    """First-order Butterworth high-pass along the last axis."""
    b, a = signal.butter(1, cutoff, btype="highpass", fs=sample_rate)
    return signal.lfilter(b, a, x, axis=-1)


def channel_noise(shape, peak: np.ndarray, cfg: RadarConfig) -> np.ndarray:
    """Seeded white Gaussian noise, one SeedSequence child per channel.

    Noise power is peak_signal_power / snr, where the peak signal power is
    |A|^2 for complex samples and |A|^2 / 2 for real ones.
    """
    snr = 10.0 ** (cfg.snr_db / 10.0)
    streams = np.random.SeedSequence(cfg.rng_seed).spawn(shape[0])
    noise = np.empty(shape, dtype=complex if cfg.baseband_mode == "complex_iq" else float)
    for n, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        if cfg.baseband_mode == "complex_iq":
            std = peak[n] / math.sqrt(snr)
            noise[n] = (std / math.sqrt(2)) * (
                rng.standard_normal(shape[1]) + 1j * rng.standard_normal(shape[1])
            )
        else:
            noise[n] = (peak[n] / math.sqrt(2 * snr)) * rng.standard_normal(shape[1])
    return noise


def synthesize(scene: Scene, geom: ArrayGeometry, cfg: RadarConfig, span) -> BasebandRecording:
    """Sample all three receive channels over ``span = (t0, t1)``."""
    t = sample_times(span, cfg.sample_rate)
    for target in scene.targets:
        traj = target.trajectory
        if t[0] < traj.t_start - 1e-12 or t[-1] > traj.t_end + 1e-12:
            raise OutOfRange(
                f"span [{t[0]}, {t[-1]}] exceeds trajectory span "
                f"[{traj.t_start}, {traj.t_end}]"
            )
    if cfg.f0 != geom.f0:
        raise InvalidArgument("radar and array carrier frequencies differ")
    clean = clean_returns(scene, geom, cfg, t)
    peak = np.max(np.abs(clean), axis=1)
    x = clean.real.copy() if cfg.baseband_mode == "real" else clean
    if cfg.highpass_cutoff > 0:
        x = highpass(x, cfg.highpass_cutoff, cfg.sample_rate)
    if cfg.snr_db is not None:
        x = x + channel_noise(x.shape, peak, cfg)
    return BasebandRecording(
        sample_rate=cfg.sample_rate,
        t0=float(t[0]),
        channels=x,
        mode=cfg.baseband_mode,
        metadata={"config_hash": cfg.digest(), "seed": cfg.rng_seed},
    )
