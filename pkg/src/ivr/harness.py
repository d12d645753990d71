"""Seeded Monte Carlo campaigns: heading sweeps and elevation sweeps of a
target crossing over the array, with per-pass records, summary statistics
and CSV export."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .dsp import EstimatorParams, correlate_channels, recording_spectrogram
from .errors import InvalidArgument, IvrError
from .geometry import ArrayGeometry, Vec3, make_square_array, named_baselines
from .scene import LinearTrajectory, Scene, ground_truth
from .synthesis import RadarConfig, synthesize
from .velocity import PassPrior, reconstruct

KINDS = ("tangential_sweep", "elevation_sweep")
DIRECTIONS = (1, -1)
OUTPUT_DIR_ENV = "IVR_OUTPUT_DIR"
NOMINAL_SPEED = 0.50131
NOMINAL_RANGE = 0.755
FAR_RANGE = 0.917
QUANTITIES = ("speed", "phi_v", "beta", "v_R", "v_theta")


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "ivr_out"))


def wrap_deg(a: float) -> float:
    """Wrap an angle difference to [-180, 180)."""
    return (a + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class ExperimentConfig:
    """One campaign.

    ``tangential_sweep`` flies level passes at each heading in ``angles``;
    ``elevation_sweep`` flies +x passes descending at each angle of attack.
    Each angle is flown ``passes_per_direction`` times in both directions.
    ``R_schedule`` gives the broadside range per angle; by default it is
    constant for heading sweeps and linear from 755 to 917 mm for elevation
    sweeps.  ``misalignment_deg`` rotates the Tx/Rx3 mount of the simulated
    array while the estimator keeps the nominal layout.
    """

    kind: str = "tangential_sweep"
    angles: tuple = (0.0, -15.0, -30.0, -45.0)
    passes_per_direction: int = 50
    speed: float = NOMINAL_SPEED
    R_schedule: tuple | None = None
    snr_db: float | None = 16.0
    radar: RadarConfig = field(default_factory=RadarConfig)
    estimator: EstimatorParams = field(default_factory=EstimatorParams)
    seed: int = 0
    side_length_wavelengths: float = 7.26
    half_span: float = 2.0
    misalignment_deg: float = 0.0
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"kind must be one of {KINDS}")
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if not self.angles:
            raise InvalidArgument("angles must be nonempty")
        if self.passes_per_direction < 1:
            raise InvalidArgument("passes_per_direction must be >= 1")
        if not self.speed > 0:
            raise InvalidArgument("speed must be positive")
        if self.R_schedule is not None:
            sched = tuple(float(r) for r in self.R_schedule)
            if len(sched) != len(self.angles) or min(sched) <= 0:
                raise InvalidArgument("R_schedule needs one positive range per angle")
            object.__setattr__(self, "R_schedule", sched)
        if self.seed < 0:
            raise InvalidArgument("seed must be non-negative")

    def ranges(self) -> tuple:
        if self.R_schedule is not None:
            return self.R_schedule
        if self.kind == "tangential_sweep" or len(self.angles) == 1:
            return (NOMINAL_RANGE,) * len(self.angles)
        return tuple(float(r) for r in np.linspace(NOMINAL_RANGE, FAR_RANGE, len(self.angles)))

    def range_note(self) -> str:
        if self.R_schedule is not None:
            return "user supplied"
        if self.kind == "elevation_sweep":
            return "linear interpolation 0.755 m to 0.917 m across angles (assumed)"
        return "constant 0.755 m"

    def replace(self, **changes) -> "ExperimentConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ExperimentConfig(**values)


@dataclass(frozen=True)
class PassSpec:
    angle_index: int
    angle: float
    direction: int
    index: int
    R: float
    seed: int
    phi_v: float
    beta: float


@dataclass(frozen=True)
class PassRecord:
    kind: str
    angle: float
    direction: int
    pass_index: int
    seed: int
    status: str
    true_speed: float
    true_phi_v: float
    true_beta: float
    true_v_R: float
    true_v_theta: float
    est_speed: float = math.nan
    est_phi_v: float = math.nan
    est_beta: float = math.nan
    est_v_R: float = math.nan
    est_v_theta: float = math.nan
    v_alpha_x: float = math.nan
    v_alpha_y: float = math.nan
    f_phi0: float = math.nan
    f_phi90: float = math.nan
    f_doppler: float = math.nan
    t_peak: float = math.nan

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def error(self, quantity: str) -> float:
        d = getattr(self, f"est_{quantity}") - getattr(self, f"true_{quantity}")
        return wrap_deg(d) if quantity == "phi_v" else d


def pass_specs(cfg: ExperimentConfig) -> list[PassSpec]:
    """Every pass of the campaign, each with its own seed substream."""
    out = []
    for i, (angle, R) in enumerate(zip(cfg.angles, cfg.ranges())):
        for d_idx, d in enumerate(DIRECTIONS):
            if cfg.kind == "tangential_sweep":
                phi_v, beta = (angle if d > 0 else angle + 180.0), 0.0
            else:
                # Flying the inclined track the other way climbs instead.
                phi_v, beta = (0.0 if d > 0 else 180.0), angle * d
            for k in range(cfg.passes_per_direction):
                ss = np.random.SeedSequence(cfg.seed, spawn_key=(i, d_idx, k))
                seed = int(ss.generate_state(1, np.uint64)[0])
                out.append(PassSpec(i, angle, d, k, R, seed, wrap_deg(phi_v), beta))
    return out


def pass_trajectory(cfg: ExperimentConfig, spec: PassSpec) -> LinearTrajectory:
    return LinearTrajectory.through(
        Vec3(0.0, 0.0, spec.R), cfg.speed, spec.phi_v, spec.beta, half_span=cfg.half_span
    )


def pass_radar(cfg: ExperimentConfig, spec: PassSpec) -> RadarConfig:
    return cfg.radar.replace(snr_db=cfg.snr_db, rng_seed=spec.seed)


def geometries(cfg: ExperimentConfig) -> tuple[ArrayGeometry, ArrayGeometry]:
    """(simulated, assumed) array geometry."""
    nominal = make_square_array(cfg.side_length_wavelengths, cfg.radar.f0)
    if cfg.misalignment_deg == 0.0:
        return nominal, nominal
    actual = make_square_array(
        cfg.side_length_wavelengths, cfg.radar.f0, mount_rotation_deg=cfg.misalignment_deg
    )
    return actual, nominal


def run_pass(cfg: ExperimentConfig, spec: PassSpec) -> PassRecord:
    actual, assumed = geometries(cfg)
    traj = pass_trajectory(cfg, spec)
    truth = ground_truth(traj, assumed)
    base = dict(
        kind=cfg.kind, angle=spec.angle, direction=spec.direction, pass_index=spec.index,
        seed=spec.seed, true_speed=truth.speed, true_phi_v=truth.phi_v,
        true_beta=truth.beta, true_v_R=truth.v_R, true_v_theta=truth.v_theta,
    )
    radar = pass_radar(cfg, spec)
    try:
        rec = synthesize(Scene.single(traj), actual, radar, (traj.t_start, traj.t_end))
        est = reconstruct(rec, assumed, radar, cfg.estimator, PassPrior.from_truth(truth))
    except IvrError as exc:
        return PassRecord(status=f"error:{type(exc).__name__}", **base)
    diag = est.diagnostics
    return PassRecord(
        status="ok",
        est_speed=est.speed, est_phi_v=est.phi_v, est_beta=est.beta,
        est_v_R=est.v_R, est_v_theta=est.v_theta,
        v_alpha_x=est.components.v_alpha_x, v_alpha_y=est.components.v_alpha_y,
        f_phi0=diag["f_phi0"], f_phi90=diag["f_phi90"], f_doppler=diag["f_doppler"],
        t_peak=diag["t_peak"], **base,
    )


def _run_chunk(args):
    cfg, specs = args
    return [run_pass(cfg, s) for s in specs]


@dataclass(frozen=True)
class SummaryRow:
    """Error statistics for one (angle, direction) cell, or the whole
    campaign when ``angle`` is NaN and ``direction`` is 0."""

    kind: str
    angle: float
    direction: int
    n_ok: int
    n_failed: int
    mean_v_alpha_x: float
    mean_v_alpha_y: float
    mean_f_phi0: float
    mean_f_phi90: float
    stats: dict  # quantity -> (mean_error, std, rmse, max_abs_error)

    def flat(self) -> dict:
        row = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "stats"}
        for q in QUANTITIES:
            for name, value in zip(("mean", "std", "rmse", "max"), self.stats[q]):
                row[f"{q}_{name}"] = value
        return row


def error_stats(errors) -> tuple[float, float, float, float]:
    """(mean, population std, RMSE, max |error|); NaNs when empty."""
    e = np.asarray(errors, float)
    if e.size == 0:
        return (math.nan,) * 4
    mean = float(np.mean(e))
    return (mean, float(np.std(e)), float(np.sqrt(np.mean(e * e))), float(np.max(np.abs(e))))


def _nanmean(values) -> float:
    v = np.asarray(values, float)
    return float(np.mean(v)) if v.size else math.nan


def _summarize(kind: str, angle: float, direction: int, recs: list[PassRecord]) -> SummaryRow:
    ok = [r for r in recs if r.ok]
    return SummaryRow(
        kind=kind, angle=angle, direction=direction,
        n_ok=len(ok), n_failed=len(recs) - len(ok),
        mean_v_alpha_x=_nanmean([r.v_alpha_x for r in ok]),
        mean_v_alpha_y=_nanmean([r.v_alpha_y for r in ok]),
        mean_f_phi0=_nanmean([r.f_phi0 for r in ok]),
        mean_f_phi90=_nanmean([r.f_phi90 for r in ok]),
        stats={q: error_stats([r.error(q) for r in ok]) for q in QUANTITIES},
    )


def _record_key(r: PassRecord):
    return (r.angle, -r.direction, r.pass_index)


def summarize(records: list[PassRecord], kind: str | None = None) -> list[SummaryRow]:
    """Per-cell rows in (angle, +x then -x) order, then one overall row.

    The input order does not matter."""
    records = sorted(records, key=_record_key)
    if kind is None:
        kind = records[0].kind if records else ""
    cells: dict = {}
    for r in records:
        cells.setdefault((r.angle, r.direction), []).append(r)
    rows = [_summarize(kind, a, d, recs) for (a, d), recs in cells.items()]
    rows.sort(key=lambda s: (s.angle, -s.direction))
    rows.append(_summarize(kind, math.nan, 0, records))
    return rows


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    summary: list
    metadata: dict = field(default_factory=dict)

    def overall(self) -> SummaryRow:
        return self.summary[-1]


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    specs = pass_specs(cfg)
    if cfg.workers > 1 and len(specs) > 1:
        chunks = [(cfg, specs[i :: cfg.workers]) for i in range(cfg.workers)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = [r for part in pool.map(_run_chunk, chunks) for r in part]
    else:
        records = _run_chunk((cfg, specs))
    records.sort(key=_record_key)
    return ExperimentResult(
        config=cfg,
        records=records,
        summary=summarize(records, cfg.kind),
        metadata={
            "kind": cfg.kind,
            "seed": cfg.seed,
            "passes": len(records),
            "range_schedule": cfg.range_note(),
            "ranges_m": " ".join(repr(r) for r in cfg.ranges()),
            "radar_hash": cfg.radar.replace(snr_db=cfg.snr_db).digest(),
        },
    )


# --- export -----------------------------------------------------------------

PASS_FIELDS = [f.name for f in fields(PassRecord)]
SUMMARY_FIELDS = [f.name for f in fields(SummaryRow) if f.name != "stats"] + [
    f"{q}_{s}" for q in QUANTITIES for s in ("mean", "std", "rmse", "max")
]
_INT_FIELDS = {"direction", "pass_index", "seed", "n_ok", "n_failed"}
_STR_FIELDS = {"kind", "status"}


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(name: str, text: str):
    if name in _STR_FIELDS:
        return text
    if name in _INT_FIELDS:
        return int(text)
    return float(text)


def _write_rows(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[h]) for h in header])


def _read_rows(path: Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [{k: _parse(k, v) for k, v in row.items()} for row in csv.DictReader(fh)]


def write_records(records, path) -> Path:
    path = Path(path)
    _write_rows(path, PASS_FIELDS, (asdict(r) for r in records))
    return path


def read_records(path) -> list[PassRecord]:
    return [PassRecord(**row) for row in _read_rows(path)]


def write_summary(summary, path) -> Path:
    path = Path(path)
    _write_rows(path, SUMMARY_FIELDS, (s.flat() for s in summary))
    return path


def read_summary(path) -> list[SummaryRow]:
    out = []
    for row in _read_rows(path):
        stats = {
            q: tuple(row.pop(f"{q}_{s}") for s in ("mean", "std", "rmse", "max"))
            for q in QUANTITIES
        }
        out.append(SummaryRow(stats=stats, **row))
    return out


def write_estimates(records, path) -> Path:
    """Estimate CSV: pass_id,phi_v_deg,beta_deg,v_theta,v_R,speed."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pass_id", "phi_v_deg", "beta_deg", "v_theta", "v_R", "speed"])
        for pid, r in records:
            w.writerow([pid, repr(r.phi_v), repr(r.beta), repr(r.v_theta), repr(r.v_R), repr(r.speed)])
    return path


def _write_spectrogram(path: Path, spec, f_max: float, max_frames: int = 200) -> None:
    keep = np.abs(spec.freqs) <= f_max
    freqs = spec.freqs[keep]
    step = max(1, spec.frame_times.size // max_frames)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "f", "psd_db"])
        for i in range(0, spec.frame_times.size, step):
            row = spec.psd[i, keep]
            db = 10 * np.log10(np.maximum(row, 1e-300))
            t = repr(float(spec.frame_times[i]))
            for f, p in zip(freqs, db):
                w.writerow([t, repr(float(f)), repr(float(p))])


def write_plotdata(result: ExperimentResult, directory, f_max: float = 60.0) -> list[Path]:
    """Estimate-vs-truth series plus gridded spectrograms (channel 1 and both
    correlation products) for the first +x pass of every angle."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    written = []
    series = directory / "estimate_vs_truth.csv"
    cols = ["angle", "direction", "pass_index"] + [
        f"{p}_{q}" for q in QUANTITIES for p in ("true", "est")
    ]
    _write_rows(series, cols, (asdict(r) for r in result.records))
    written.append(series)
    actual, _ = geometries(cfg)
    bls = named_baselines(actual)
    for spec in pass_specs(cfg):
        if spec.direction != 1 or spec.index != 0:
            continue
        traj = pass_trajectory(cfg, spec)
        radar = pass_radar(cfg, spec)
        try:
            rec = synthesize(Scene.single(traj), actual, radar, (traj.t_start, traj.t_end))
        except IvrError:
            continue
        tag = f"{cfg.kind}_{spec.angle:g}"
        series_by_name = {
            "doppler": rec.channel(1),
            "corr_phi0": correlate_channels(rec, bls[0].rx_b, bls[0].rx_a, cfg.estimator.correlation_path),
            "corr_phi90": correlate_channels(rec, bls[90].rx_b, bls[90].rx_a, cfg.estimator.correlation_path),
        }
        for name, x in series_by_name.items():
            path = directory / f"spectrogram_{tag}_{name}.csv"
            _write_spectrogram(path, recording_spectrogram(x, rec, cfg.estimator), f_max)
            written.append(path)
    return written


def export(result: ExperimentResult, path, format: str = "csv") -> list[Path]:
    """Write ``per_pass.csv``, ``summary.csv`` and ``metadata.csv`` (csv) or
    the plot series (plotdata) into directory ``path``."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    if format == "plotdata":
        return write_plotdata(result, directory)
    if format != "csv":
        raise InvalidArgument("format must be 'csv' or 'plotdata'")
    meta = directory / "metadata.csv"
    with meta.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["key", "value"])
        for k, v in result.metadata.items():
            w.writerow([k, v])
    return [
        write_records(result.records, directory / "per_pass.csv"),
        write_summary(result.summary, directory / "summary.csv"),
        meta,
    ]
