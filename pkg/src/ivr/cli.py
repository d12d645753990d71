"""Command-line entry point: ``ivr {simulate,estimate,bounds,experiment}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import recording
from .bounds import crlb_report
from .config import Settings, load_settings
from .errors import ConfigError, IvrError
from .geometry import named_baselines
from .harness import default_output_dir, export, run_experiment, write_estimates
from .scene import ground_truth
from .synthesis import synthesize
from .velocity import PassPrior, reconstruct

MODES = {"complex": "complex_iq", "real": "real"}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI configuration file")
    p.add_argument("--seed", type=int, help="noise / campaign seed (overrides config)")
    p.add_argument("--out", type=Path, help="output directory (default $IVR_OUTPUT_DIR or ./ivr_out)")
    p.add_argument("--mode", choices=sorted(MODES), help="baseband mode")
    p.add_argument("--snr-db", type=float, help="per-channel peak SNR in dB")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ivr", description="Interferometric radar velocimetry toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a recording from a scene")
    _common(p)
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    p.add_argument("--name", default="recording", help="output file stem")
    p.add_argument("--noiseless", action="store_true", help="disable receiver noise")

    p = sub.add_parser("estimate", help="estimate velocity from a recording file")
    _common(p)
    p.add_argument("recording", type=Path)

    p = sub.add_parser("bounds", help="print resolution-limited CRLBs")
    _common(p)
    p.add_argument("--range", type=float, default=0.755, help="broadside range, m")
    p.add_argument("--speed", type=float, default=0.50131, help="tangential speed, m/s")
    p.add_argument("--d-lambda", type=float, help="baseline length in wavelengths")

    p = sub.add_parser("experiment", help="run a Monte Carlo campaign")
    _common(p)
    p.add_argument("--kind", choices=("tangential_sweep", "elevation_sweep"))
    p.add_argument("--passes", type=int, help="passes per direction")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--plotdata", action="store_true", help="also write plot series")
    return parser


def _settings(args) -> Settings:
    s = load_settings(args.config) if args.config is not None else Settings()
    changes = {}
    if args.mode:
        changes["baseband_mode"] = MODES[args.mode]
    if args.snr_db is not None:
        changes["snr_db"] = args.snr_db
    if args.seed is not None:
        changes["rng_seed"] = args.seed
    if changes:
        s.radar = s.radar.replace(**changes)
    return s


def _out_dir(args) -> Path:
    out = args.out if args.out is not None else default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    s = _settings(args)
    if args.noiseless:
        s.radar = s.radar.replace(snr_db=None)
    rec = synthesize(s.scene(), s.geometry(), s.radar, s.span())
    out = _out_dir(args)
    if args.format == "csv":
        path = recording.write_csv(rec, out / f"{args.name}.csv")
    else:
        path = recording.write_binary(rec, out / f"{args.name}.ivr")
    print(path)
    return 0


def estimate_file(path: Path, s: Settings):
    """Load a recording and reconstruct it with the prior implied by the
    configured scene (its first target)."""
    rec = recording.load(path)
    radar = s.radar.replace(baseband_mode=rec.mode, sample_rate=rec.sample_rate)
    geom = s.geometry()
    truth = ground_truth(s.scene().targets[0].trajectory, geom)
    return reconstruct(rec, geom, radar, s.estimator, PassPrior.from_truth(truth))


def cmd_estimate(args) -> int:
    s = _settings(args)
    if not args.recording.exists():
        raise ConfigError(f"recording not found: {args.recording}")
    est = estimate_file(args.recording, s)
    path = write_estimates([(args.recording.stem, est)], _out_dir(args) / "estimates.csv")
    print(path)
    return 0


def cmd_bounds(args) -> int:
    s = _settings(args)
    d_lambda = args.d_lambda
    if d_lambda is None:
        d_lambda = named_baselines(s.geometry())[0].D_lambda
    snr = s.radar.snr_db if s.radar.snr_db is not None else 16.0
    report = crlb_report(
        snr, args.range, args.speed, d_lambda, s.radar.f0, s.radar.hpbw, s.radar.sample_rate
    )
    print(report.to_text())
    print()
    print(report.to_csv(), end="")
    if args.out is not None:
        (_out_dir(args) / "bounds.csv").write_text(report.to_csv())
    return 0


def cmd_experiment(args) -> int:
    s = _settings(args)
    cfg = s.experiment_config()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.kind:
        changes["kind"] = args.kind
        if s.experiment is None and args.kind == "elevation_sweep":
            changes["angles"] = (0.0, 10.0, 20.0, 30.0, 40.0)
    if args.passes is not None:
        changes["passes_per_direction"] = args.passes
    if args.workers is not None:
        changes["workers"] = args.workers
    if changes:
        cfg = cfg.replace(**changes)
    result = run_experiment(cfg)
    out = _out_dir(args)
    paths = export(result, out, "csv")
    if args.plotdata:
        paths += export(result, out / "plotdata", "plotdata")
    o = result.overall()
    print(
        f"{cfg.kind}: {o.n_ok} passes ok, {o.n_failed} failed; "
        f"speed RMSE {o.stats['speed'][2] * 1e3:.2f} mm/s, "
        f"phi_v RMSE {o.stats['phi_v'][2]:.2f} deg, beta RMSE {o.stats['beta'][2]:.2f} deg"
    )
    print(out)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "bounds": cmd_bounds,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"ivr: {exc}", file=sys.stderr)
        return 2
    except (IvrError, OSError) as exc:
        print(f"ivr: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
