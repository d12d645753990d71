"""Correlation, spectrogram and peak-estimation chain."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import signal

from .errors import DetectionFailure, InvalidArgument
from .geometry import ArrayGeometry
from .synthesis import BasebandRecording, RadarConfig

WINDOW_KINDS = ("boxcar", "hann")
CLOSEST_APPROACH_METHODS = ("doppler_peak", "envelope_peak")
CORRELATION_PATHS = ("analytic", "raw")
DETECTION_MARGIN_DB = 20.0
"Peak PSD must exceed the median cell by this much to count as a detection."


@dataclass(frozen=True)
class EstimatorParams:
    """Processing settings. Defaults: 250 ms boxcar, 60 % overlap,
    2**14-point FFT, raw bin peaks."""

    window_len: float = 0.25
    overlap: float = 0.6
    nfft: int = 2**14
    window_kind: str = "boxcar"
    interpolate: bool = False
    closest_approach: str = "doppler_peak"
    correlation_path: str = "analytic"
    calibration_iterations: int = 3

    def __post_init__(self):
        if self.window_kind not in WINDOW_KINDS:
            raise InvalidArgument(f"window_kind must be one of {WINDOW_KINDS}")
        if self.closest_approach not in CLOSEST_APPROACH_METHODS:
            raise InvalidArgument(
                f"closest_approach must be one of {CLOSEST_APPROACH_METHODS}"
            )
        if self.correlation_path not in CORRELATION_PATHS:
            raise InvalidArgument(f"correlation_path must be one of {CORRELATION_PATHS}")
        if self.calibration_iterations < 0:
            raise InvalidArgument("calibration_iterations must be >= 0")

    def replace(self, **changes) -> "EstimatorParams":
        return EstimatorParams(**{**asdict(self), **changes})


@dataclass(frozen=True)
class Spectrogram:
    frame_times: np.ndarray
    freqs: np.ndarray
    psd: np.ndarray
    window_len: float
    overlap: float
    nfft: int
    window_kind: str
    sample_rate: float
    onesided: bool

    def frame_index(self, t: float) -> int:
        if self.frame_times.size == 0:
            raise DetectionFailure("spectrogram has no frames")
        half_step = (
            0.5 * (self.frame_times[1] - self.frame_times[0]) if self.frame_times.size > 1 else 0.5 * self.window_len
        )
        if t < self.frame_times[0] - half_step or t > self.frame_times[-1] + half_step:
            raise InvalidArgument(f"t = {t} outside the frame range")
        return int(np.argmin(np.abs(self.frame_times - t)))


@dataclass(frozen=True)
class SpectralPeak:
    t: float
    f: float
    psd_peak: float
    interpolated: bool


def analytic(x: np.ndarray) -> np.ndarray:
    return signal.hilbert(np.asarray(x, float))


def correlate_channels(
    rec: BasebandRecording, a: int, b: int, path: str = "analytic"
) -> np.ndarray:
    """Sample-wise r_a * conj(r_b).

    Real-mode channels are first extended to analytic signals; ``path="raw"``
    multiplies the real samples directly instead.
    """
    ra, rb = rec.channel(a), rec.channel(b)
    if rec.mode == "real":
        if path == "analytic":
            ra, rb = analytic(ra), analytic(rb)
        elif path != "raw":
            raise InvalidArgument(f"unknown correlation path {path!r}")
    return ra * np.conj(rb)


def spectrogram(
    series,
    sample_rate: float,
    window_len: float = 0.25,
    overlap: float = 0.6,
    nfft: int = 2**14,
    window_kind: str = "boxcar",
    t0: float = 0.0,
) -> Spectrogram:
    """Short-time |FFT|^2 / nfft, zero-padded to ``nfft``.

    Real input gives a one-sided PSD (interior bins doubled); complex input a
    two-sided one with ascending frequencies.  Each frame's PSD sums to the
    energy of its windowed samples.
    """
    x = np.asarray(series)
    nwin = int(round(window_len * sample_rate))
    if nwin < 8:
        raise InvalidArgument(f"window holds {nwin} samples; at least 8 are required")
    if nfft < nwin:
        raise InvalidArgument(f"nfft ({nfft}) must be at least the window length ({nwin})")
    if not 0 <= overlap <= 0.95:
        raise InvalidArgument("overlap must lie in [0, 0.95]")
    if window_kind not in WINDOW_KINDS:
        raise InvalidArgument(f"window_kind must be one of {WINDOW_KINDS}")
    step = max(1, int(round(nwin * (1.0 - overlap))))
    starts = np.arange(0, x.size - nwin + 1, step)
    win = np.ones(nwin) if window_kind == "boxcar" else signal.get_window("hann", nwin)
    onesided = not np.iscomplexobj(x)
    if starts.size:
        frames = np.lib.stride_tricks.sliding_window_view(x, nwin)[starts] * win
    else:
        frames = np.zeros((0, nwin), dtype=x.dtype)
    if onesided:
        spec = np.fft.rfft(frames, n=nfft, axis=1)
        psd = np.abs(spec) ** 2 / nfft
        psd[:, 1 : (nfft + 1) // 2] *= 2.0
        freqs = np.fft.rfftfreq(nfft, 1.0 / sample_rate)
    else:
        spec = np.fft.fftshift(np.fft.fft(frames, n=nfft, axis=1), axes=1)
        psd = np.abs(spec) ** 2 / nfft
        freqs = np.fft.fftshift(np.fft.fftfreq(nfft, 1.0 / sample_rate))
    frame_times = t0 + (starts + 0.5 * (nwin - 1)) / sample_rate
    return Spectrogram(
        frame_times=frame_times,
        freqs=freqs,
        psd=psd,
        window_len=nwin / sample_rate,
        overlap=overlap,
        nfft=nfft,
        window_kind=window_kind,
        sample_rate=sample_rate,
        onesided=onesided,
    )


def recording_spectrogram(series, rec: BasebandRecording, params: EstimatorParams) -> Spectrogram:
    return spectrogram(
        series,
        rec.sample_rate,
        window_len=params.window_len,
        overlap=params.overlap,
        nfft=params.nfft,
        window_kind=params.window_kind,
        t0=rec.t0,
    )


def _smooth_envelope(x: np.ndarray, n: int) -> np.ndarray:
    env = np.abs(analytic(x) if not np.iscomplexobj(x) else x)
    return np.convolve(env, np.ones(n) / n, mode="same")


def estimate_closest_approach(
    rec: BasebandRecording,
    geom: ArrayGeometry,
    cfg: RadarConfig,
    method: str = "doppler_peak",
    params: EstimatorParams | None = None,
    spec: Spectrogram | None = None,
) -> float:
    """Time of closest approach from channel 1.

    ``doppler_peak`` returns the frame time of the global PSD maximum,
    ignoring bins below the high-pass cutoff; ``envelope_peak`` the time of
    the maximum moving-average envelope.
    """
    params = params or EstimatorParams()
    ch1 = rec.channel(1)
    if method == "envelope_peak":
        n = max(1, int(round(params.window_len * rec.sample_rate)))
        env = _smooth_envelope(ch1, n)
        if not np.any(env > 0):
            raise DetectionFailure("channel 1 is silent")
        return float(rec.times[int(np.argmax(env))])
    if method != "doppler_peak":
        raise InvalidArgument(f"unknown closest-approach method {method!r}")
    if spec is None:
        spec = recording_spectrogram(ch1, rec, params)
    mask = np.abs(spec.freqs) >= cfg.highpass_cutoff
    psd = spec.psd[:, mask]
    if psd.size == 0:
        raise DetectionFailure("no frames or bins to search")
    peak = float(psd.max())
    floor = float(np.median(psd))
    if not peak > 0 or peak <= floor * 10 ** (DETECTION_MARGIN_DB / 10):
        raise DetectionFailure(
            f"peak PSD {peak:.3g} does not clear the noise floor {floor:.3g}"
        )
    frame, _ = np.unravel_index(int(np.argmax(psd)), psd.shape)
    return float(spec.frame_times[frame])


def peak_frequency(
    spec: Spectrogram, t: float, interpolate: bool = False, min_abs_freq: float = 0.0
) -> SpectralPeak:
    """Peak bin of the frame nearest ``t``; optional 3-point parabolic
    refinement on log-PSD.  Bins with |f| < ``min_abs_freq`` are skipped;
    equal maxima resolve to the lowest frequency."""
    i = spec.frame_index(t)
    row = spec.psd[i]
    valid = np.abs(spec.freqs) >= min_abs_freq
    masked = np.where(valid, row, -np.inf)
    k = int(np.argmax(masked))
    if not np.isfinite(masked[k]) or masked[k] <= 0:
        raise DetectionFailure(f"frame at t = {spec.frame_times[i]:.3f} s is empty")
    f = float(spec.freqs[k])
    refined = False
    if interpolate and 0 < k < row.size - 1 and valid[k - 1] and valid[k + 1]:
        a, b, c = row[k - 1 : k + 2]
        if a > 0 and c > 0:
            la, lb, lc = np.log([a, b, c])
            denom = la - 2 * lb + lc
            if denom < 0:
                delta = 0.5 * (la - lc) / denom
                f += float(delta) * (spec.freqs[k + 1] - spec.freqs[k])
                refined = True
    return SpectralPeak(t=float(spec.frame_times[i]), f=f, psd_peak=float(row[k]), interpolated=refined)


def dc_null_calibration(
    assumed_speed: float,
    assumed_direction: int,
    t_peak: float,
    t_broadside: float,
    r_broadside: float,
    track_elevation_deg: float = 0.0,
) -> tuple[float, float]:
    """Range and off-broadside angle of the target at ``t_peak``.

    The target is assumed to cross the array axis at ``r_broadside`` at
    ``t_broadside``, moving at ``assumed_speed`` along the +/- axis given by
    ``assumed_direction`` and descending at ``track_elevation_deg``.
    Returns ``(R_corr, alpha_corr)``; alpha is signed along the axis.
    """
    if assumed_direction not in (-1, 1):
        raise InvalidArgument("assumed_direction must be +1 or -1")
    d = assumed_speed * (t_peak - t_broadside)
    b = math.radians(track_elevation_deg)
    along = assumed_direction * d * math.cos(b)
    height = r_broadside - d * math.sin(b)
    return math.hypot(along, height), math.atan2(along, height)
