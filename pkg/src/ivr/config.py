"""INI configuration files.

Sections and keys (all optional; unknown sections or keys are rejected)::

    [radar]       f0, sample_rate, hpbw, baseband_mode, highpass_cutoff,
                  propagation_loss, snr_db (number or "none"), rng_seed
    [array]       side_length_wavelengths, mount_rotation_deg
    [scene]       x, y, z (crossing point, m), speed, phi_v, beta (deg),
                  t_cross, half_span (s), reflectivity (Python complex literal)
    [scene.NAME]  further targets, same keys as [scene]
    [estimator]   window_len, overlap, nfft, window_kind, interpolate,
                  closest_approach, correlation_path, calibration_iterations
    [experiment]  kind, angles, passes_per_direction, speed, R_schedule,
                  seed, side_length_wavelengths, half_span, misalignment_deg,
                  workers

``angles`` and ``R_schedule`` are comma-separated lists.  The experiment
SNR follows ``radar.snr_db``.
"""

from __future__ import annotations

import configparser
from io import StringIO
from dataclasses import dataclass, field, fields
from pathlib import Path

from .dsp import EstimatorParams
from .errors import ConfigError
from .geometry import ArrayGeometry, Vec3, make_square_array
from .harness import ExperimentConfig
from .scene import LinearTrajectory, PointTarget, Scene
from .synthesis import RadarConfig


@dataclass(frozen=True)
class TargetSpec:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.755
    speed: float = 0.50131
    phi_v: float = 0.0
    beta: float = 0.0
    t_cross: float = 0.0
    half_span: float = 2.0
    reflectivity: complex = 1.0 + 0.0j

    def target(self) -> PointTarget:
        traj = LinearTrajectory.through(
            Vec3(self.x, self.y, self.z), self.speed, self.phi_v, self.beta,
            t_cross=self.t_cross, half_span=self.half_span,
        )
        return PointTarget(traj, self.reflectivity)


@dataclass(frozen=True)
class ArraySpec:
    side_length_wavelengths: float = 7.26
    mount_rotation_deg: float = 0.0


@dataclass
class Settings:
    radar: RadarConfig = field(default_factory=RadarConfig)
    array: ArraySpec = field(default_factory=ArraySpec)
    targets: list = field(default_factory=lambda: [TargetSpec()])
    estimator: EstimatorParams = field(default_factory=EstimatorParams)
    experiment: ExperimentConfig | None = None

    def geometry(self) -> ArrayGeometry:
        return make_square_array(
            self.array.side_length_wavelengths, self.radar.f0, self.array.mount_rotation_deg
        )

    def scene(self) -> Scene:
        return Scene(tuple(t.target() for t in self.targets))

    def span(self) -> tuple[float, float]:
        """Interval covered by every target's trajectory."""
        trajs = [t.trajectory for t in self.scene().targets]
        t0 = max(tr.t_start for tr in trajs)
        t1 = min(tr.t_end for tr in trajs)
        if not t1 > t0:
            raise ConfigError("target trajectories do not overlap in time")
        return t0, t1

    def experiment_config(self) -> ExperimentConfig:
        base = self.experiment or ExperimentConfig()
        return base.replace(radar=self.radar, estimator=self.estimator, snr_db=self.radar.snr_db)


def _none_or_float(text: str):
    return None if text.strip().lower() == "none" else float(text)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


_RADAR = {
    "f0": float, "sample_rate": float, "hpbw": float, "baseband_mode": str,
    "highpass_cutoff": float, "propagation_loss": _bool, "snr_db": _none_or_float,
    "rng_seed": int,
}
_ARRAY = {"side_length_wavelengths": float, "mount_rotation_deg": float}
_TARGET = {
    "x": float, "y": float, "z": float, "speed": float, "phi_v": float, "beta": float,
    "t_cross": float, "half_span": float, "reflectivity": complex,
}
_ESTIMATOR = {
    "window_len": float, "overlap": float, "nfft": int, "window_kind": str,
    "interpolate": _bool, "closest_approach": str, "correlation_path": str,
    "calibration_iterations": int,
}
_EXPERIMENT = {
    "kind": str, "angles": _floats, "passes_per_direction": int, "speed": float,
    "R_schedule": _floats, "seed": int, "side_length_wavelengths": float,
    "half_span": float, "misalignment_deg": float, "workers": int,
}


def _section(parser, name: str, schema: dict) -> dict:
    out = {}
    for key, raw in parser[name].items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in section [{name}]")
        try:
            out[key] = schema[key](raw)
        except ValueError as exc:
            raise ConfigError(f"[{name}] {key}: {exc}") from None
    return out


def _build(cls, section: str, values: dict):
    try:
        return cls(**values)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}]: {exc}") from None


def parse_settings(text: str) -> Settings:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case-sensitive (R_schedule)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    s = Settings()
    targets = []
    for name in parser.sections():
        if name == "radar":
            s.radar = _build(RadarConfig, name, _section(parser, name, _RADAR))
        elif name == "array":
            s.array = _build(ArraySpec, name, _section(parser, name, _ARRAY))
        elif name == "scene" or name.startswith("scene."):
            targets.append(_build(TargetSpec, name, _section(parser, name, _TARGET)))
        elif name == "estimator":
            s.estimator = _build(EstimatorParams, name, _section(parser, name, _ESTIMATOR))
        elif name == "experiment":
            s.experiment = _build(ExperimentConfig, name, _section(parser, name, _EXPERIMENT))
        else:
            raise ConfigError(f"unknown section [{name}]")
    if targets:
        s.targets = targets
    return s


def load_settings(path) -> Settings:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    return parse_settings(text)


def _dump_section(obj, schema: dict) -> dict:
    out = {}
    for f in fields(obj):
        if f.name not in schema:
            continue
        v = getattr(obj, f.name)
        if v is None:
            if schema[f.name] is _none_or_float:
                out[f.name] = "none"
        elif isinstance(v, tuple):
            out[f.name] = ",".join(repr(x) for x in v)
        else:
            out[f.name] = repr(v) if isinstance(v, (float, complex)) else str(v)
    return out


def dump_settings(s: Settings) -> str:
    """Inverse of ``parse_settings`` (every key written explicitly)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser["radar"] = _dump_section(s.radar, _RADAR)
    parser["array"] = _dump_section(s.array, _ARRAY)
    for i, t in enumerate(s.targets):
        parser["scene" if i == 0 else f"scene.t{i}"] = _dump_section(t, _TARGET)
    parser["estimator"] = _dump_section(s.estimator, _ESTIMATOR)
    if s.experiment is not None:
        parser["experiment"] = _dump_section(s.experiment, _EXPERIMENT)
    buf = StringIO()
    parser.write(buf)
    return buf.getvalue()
