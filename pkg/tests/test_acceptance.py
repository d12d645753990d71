"""Acceptance criteria 1-9, each at its stated tolerance.

Every check is recorded in ``conftest.ACCEPTANCE`` and summarised as one
PASS/FAIL line per criterion at the end of the run.
"""

import math
import time

import numpy as np
import pytest
from scipy import signal

import conftest
from ivr import recording
from ivr.bounds import (
    angular_crlb,
    correlation_half_power_width,
    crlb_report,
    doppler_resolution,
    interferometric_resolution,
    pattern_moments,
)
from ivr.dsp import EstimatorParams, correlate_channels, peak_frequency, spectrogram
from ivr.geometry import SPEED_OF_LIGHT, Vec3, make_square_array, named_baselines
from ivr.harness import ExperimentConfig, export, run_experiment
from ivr.scene import LinearTrajectory, PointTarget, Scene, ground_truth, positions
from ivr.synthesis import RadarConfig, sample_times, synthesize
from ivr.velocity import (
    PassPrior,
    interferometric_frequency,
    reconstruct,
    tangential_exact,
    tangential_from_frequency,
)

F0 = 41.8e9
SPEED = 0.50131
R0 = 0.755
BIN = 4166.7 / 2**14
CLEAN = RadarConfig(baseband_mode="complex_iq", snr_db=None, highpass_cutoff=0.0)


def check(number, name, passed, detail=""):
    conftest.ACCEPTANCE.setdefault(number, []).append((name, bool(passed), detail))
    return bool(passed)


@pytest.fixture(scope="module")
def geom():
    return make_square_array(7.26, F0)


def _pass(phi_v=0.0, beta=0.0, R=R0, half_span=2.0):
    return LinearTrajectory.through(Vec3(0.0, 0.0, R), SPEED, phi_v, beta, half_span=half_span)


def _beat(rec, bl, t=0.0):
    corr = correlate_channels(rec, bl.rx_a, bl.rx_b)
    return peak_frequency(spectrogram(corr, rec.sample_rate, t0=rec.t0), t).f


def test_criterion_1_phase_oracle(geom):
    start = time.perf_counter()
    worst = 0.0
    for phi, beta in ((0.0, 0.0), (-30.0, 20.0), (120.0, 40.0)):
        tr = _pass(phi, beta)
        t = sample_times((tr.t_start, tr.t_end), CLEAN.sample_rate)
        rec = synthesize(Scene.single(tr), geom, CLEAN, (tr.t_start, tr.t_end))
        p = positions(tr, t)
        tx = np.asarray(geom.tx_position)
        taus = [
            (np.linalg.norm(p - tx, axis=1) + np.linalg.norm(p - np.asarray(rx), axis=1)) / SPEED_OF_LIGHT
            for rx in geom.rx_positions
        ]
        for a, b in ((1, 2), (1, 3), (2, 3)):
            corr = rec.channel(a) * np.conj(rec.channel(b))
            expected = -2 * np.pi * F0 * (taus[b - 1] - taus[a - 1])
            worst = max(worst, float(np.max(np.abs(np.angle(corr * np.exp(-1j * expected))))))
    elapsed = time.perf_counter() - start
    ok = check(1, "arg(r_a conj r_b) + 2 pi f0 (tau_b - tau_a)", worst < 1e-9, f"max |error| {worst:.2e} rad")
    ok &= check(1, "runtime < 5 s", elapsed < 5, f"{elapsed:.2f} s")
    assert ok


def test_criterion_2_nominal_frequencies(geom):
    start = time.perf_counter()
    bls = named_baselines(geom)
    level = synthesize(Scene.single(_pass()), geom, CLEAN, (-2, 2))
    f0 = abs(_beat(level, bls[0]))
    ok = check(2, "Phi=0 beat, phi_v=0", abs(f0 - 4.821) <= 0.26, f"{f0:.3f} Hz vs 4.821")
    # The diagonal sees the full tangential speed only for a track along it.
    diag = synthesize(Scene.single(_pass(phi_v=45.0)), geom, CLEAN, (-2, 2))
    f45 = abs(_beat(diag, bls[-45]))
    ok &= check(2, "Phi=-45 beat, track along the diagonal", abs(f45 - 6.82) <= 0.26, f"{f45:.3f} Hz vs 6.82")
    f45_level = abs(_beat(level, bls[-45]))
    expected = interferometric_frequency(SPEED / R0, 7.26 * math.sqrt(2), 0.0) / math.sqrt(2)
    ok &= check(2, "Phi=-45 beat, phi_v=0 (projected speed)", abs(f45_level - expected) <= 0.26,
                f"{f45_level:.3f} Hz vs {expected:.3f}")
    radial = LinearTrajectory(Vec3(0.0, 0.0, 1.2), Vec3(0.0, 0.0, SPEED), 0.0, 1.6)
    rec = synthesize(Scene.single(radial), geom, CLEAN, (0.0, 1.6))
    spec = spectrogram(rec.channel(1), rec.sample_rate, t0=rec.t0)
    fd = peak_frequency(spec, 0.8).f
    ok &= check(2, "radial-pass Doppler", abs(fd - 139.8) <= 0.26, f"{fd:.3f} Hz vs 139.8")
    elapsed = time.perf_counter() - start
    ok &= check(2, "runtime < 30 s", elapsed < 30, f"{elapsed:.2f} s")
    assert ok


def test_criterion_3_noiseless_round_trip(geom):
    start = time.perf_counter()
    params = EstimatorParams(interpolate=True)
    worst_phi = worst_beta = worst_speed = 0.0
    for phi in (0.0, -15.0, -30.0, -45.0):
        for beta in (0.0, 10.0, 20.0, 30.0, 40.0):
            tr = _pass(phi, beta)
            truth = ground_truth(tr, geom)
            rec = synthesize(Scene.single(tr), geom, CLEAN, (tr.t_start, tr.t_end))
            est = reconstruct(rec, geom, CLEAN, params, PassPrior.from_truth(truth))
            worst_phi = max(worst_phi, abs(conftest.wrap(est.phi_v - truth.phi_v)))
            worst_beta = max(worst_beta, abs(est.beta - truth.beta))
            worst_speed = max(worst_speed, abs(est.speed - truth.speed) / truth.speed)
    elapsed = time.perf_counter() - start
    ok = check(3, "max |phi_v error| <= 2 deg", worst_phi <= 2.0, f"{worst_phi:.3f} deg")
    ok &= check(3, "max |beta error| <= 2 deg", worst_beta <= 2.0, f"{worst_beta:.3f} deg")
    ok &= check(3, "max speed error <= 3 %", worst_speed <= 0.03, f"{100 * worst_speed:.2f} %")
    ok &= check(3, "runtime < 5 min", elapsed < 300, f"{elapsed:.1f} s")
    assert ok


@pytest.mark.slow
def test_criterion_4_campaign_error_limits(tmp_path):
    start = time.perf_counter()
    exp1 = run_experiment(ExperimentConfig(kind="tangential_sweep", passes_per_direction=50, seed=1))
    exp2 = run_experiment(
        ExperimentConfig(kind="elevation_sweep", angles=(0.0, 10.0, 20.0, 30.0, 40.0),
                         passes_per_direction=50, seed=2)
    )
    export(exp1, tmp_path / "exp1")
    export(exp2, tmp_path / "exp2")
    o1, o2 = exp1.overall(), exp2.overall()
    elapsed = time.perf_counter() - start
    ok = check(4, "heading sweep passes", o1.n_ok == 400, f"{o1.n_ok} ok, {o1.n_failed} failed")
    ok &= check(4, "heading sweep speed RMSE <= 41.01 mm/s", o1.stats["speed"][2] <= 0.04101,
                f"{1e3 * o1.stats['speed'][2]:.2f} mm/s")
    ok &= check(4, "heading sweep phi_v RMSE <= 10.42 deg", o1.stats["phi_v"][2] <= 10.42, f"{o1.stats['phi_v'][2]:.2f} deg")
    ok &= check(4, "elevation sweep passes", o2.n_ok == 500, f"{o2.n_ok} ok, {o2.n_failed} failed")
    ok &= check(4, "elevation sweep speed RMSE <= 45.07 mm/s", o2.stats["speed"][2] <= 0.04507,
                f"{1e3 * o2.stats['speed'][2]:.2f} mm/s")
    ok &= check(4, "elevation sweep beta RMSE <= 5.11 deg", o2.stats["beta"][2] <= 5.11, f"{o2.stats['beta'][2]:.2f} deg")
    ok &= check(4, "runtime < 15 min", elapsed < 900, f"{elapsed:.0f} s")
    assert ok


def _heading_sweep_angular_std(snr_db):
    # Heading does not enter the bound; every heading-sweep pass has the same geometry.
    stds = [crlb_report(snr_db, R0, SPEED, 7.26, F0, 30.0, 4166.7).std_v_alpha for _ in (0, -15, -30, -45)]
    return float(np.mean(stds))


def _elevation_sweep_doppler_std(snr_db):
    betas = (0.0, 10.0, 20.0, 30.0, 40.0)
    ranges = np.linspace(0.755, 0.917, len(betas))
    stds = [
        crlb_report(snr_db, R, SPEED * math.cos(math.radians(b)), 7.26, F0, 30.0, 4166.7).std_v_R
        for b, R in zip(betas, ranges)
    ]
    return float(np.mean(stds))


def test_criterion_5_crlb(geom):
    start = time.perf_counter()
    snr_db = 16.0  # default campaign SNR, inside the 16-27 dB range
    ang = _heading_sweep_angular_std(snr_db)
    dop = _elevation_sweep_doppler_std(snr_db)
    span = ", ".join(f"{s:g} dB: {1e3 * _heading_sweep_angular_std(s):.3f} mm/s / {1e6 * _elevation_sweep_doppler_std(s):.2f} um/s"
                     for s in (16, 20, 27))
    ok = check(5, "angular CRLB mean within 3x of 0.31 mm/s", 0.31e-3 / 3 <= ang <= 3 * 0.31e-3,
               f"{1e3 * ang:.3f} mm/s at {snr_db:g} dB")
    ok &= check(5, "Doppler CRLB mean within 3x of 1.73 um/s", 1.73e-6 / 3 <= dop <= 3 * 1.73e-6,
                f"{1e6 * dop:.2f} um/s at {snr_db:g} dB")
    check(5, "bounds across SNR (info)", True, span)

    bl = named_baselines(geom)[0]
    tr = _pass(half_span=0.5)
    pm = pattern_moments(30.0)
    for snr in (10.0, 16.0, 20.0, 27.0):
        estimates = []
        for trial in range(200):
            cfg = CLEAN.replace(snr_db=snr, rng_seed=1000 * int(snr) + trial)
            rec = synthesize(Scene.single(tr), geom, cfg, (-0.5, 0.5))
            corr = correlate_channels(rec, bl.rx_a, bl.rx_b)
            estimates.append(peak_frequency(spectrogram(corr, rec.sample_rate, t0=rec.t0), 0.0, True).f)
        mc = float(np.var(estimates, ddof=1))
        bound, _ = angular_crlb(10 ** (snr / 10), pm, R0, 7.26, SPEED / R0, cfg.sample_rate)
        ok &= check(5, f"MC variance >= angular CRLB at {snr:g} dB", mc >= bound,
                    f"{mc:.3e} vs {bound:.3e} Hz^2")
    elapsed = time.perf_counter() - start
    ok &= check(5, "runtime < 5 min", elapsed < 300, f"{elapsed:.1f} s")
    assert ok


def _measured_width(geom, propagation_loss):
    cfg = CLEAN.replace(propagation_loss=propagation_loss)
    tr = _pass(half_span=3.0)
    rec = synthesize(Scene.single(tr), geom, cfg, (-3.0, 3.0))
    bl = named_baselines(geom)[0]
    corr = correlate_channels(rec, bl.rx_a, bl.rx_b)
    n = 2**20
    psd = np.abs(np.fft.fft(corr, n)) ** 2
    k = int(np.argmax(psd))
    width_bins = signal.peak_widths(psd, [k], rel_height=0.5)[0][0]
    return width_bins * rec.sample_rate / n


def test_criterion_6_resolution(geom):
    start = time.perf_counter()
    ok = check(6, "doppler_resolution(0.25 s) == 4 Hz", doppler_resolution(0.25) == 4.0, repr(doppler_resolution(0.25)))
    eq13 = interferometric_resolution(SPEED / R0, math.radians(30.0))
    measured = _measured_width(geom, propagation_loss=False)
    rel = abs(measured - eq13) / eq13
    ok &= check(6, "simulated -3 dB width within 20 % of the resolution formula", rel <= 0.20,
                f"{measured:.3f} Hz vs {eq13:.4f} Hz ({100 * rel:.1f} %), pattern-only channel")
    with_loss = _measured_width(geom, propagation_loss=True)
    check(6, "same with 1/R^2 loss (info)", True, f"{with_loss:.3f} Hz ({100 * abs(with_loss - eq13) / eq13:.1f} %)")
    elapsed = time.perf_counter() - start
    ok &= check(6, "runtime < 1 min", elapsed < 60, f"{elapsed:.1f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="Gaussian half-power width is sqrt(2 ln 2) times the resolution formula")
def test_criterion_6_half_power_width_identity():
    sigma = math.radians(30.0) / 2.355
    omega = SPEED / R0
    width = correlation_half_power_width(sigma, omega)
    eq13 = interferometric_resolution(omega, math.radians(30.0))
    rel = abs(width - eq13) / eq13
    ok = check(6, "half-power width of spectrum == resolution within 1e-9", rel <= 1e-9,
               f"{width:.6f} Hz vs {eq13:.6f} Hz (ratio {width / eq13:.6f})")
    assert ok


def test_criterion_7_small_angle():
    omega = SPEED / R0
    worst = 0.0
    for a_deg in np.linspace(-20.0, 20.0, 4001):
        a = math.radians(a_deg)
        f = interferometric_frequency(omega, 7.26, a)
        exact = tangential_exact(f, R0, 7.26, a)
        approx = tangential_from_frequency(f, R0, 7.26)
        # Relative to the small-angle value, matching 1/cos(20 deg) - 1.
        worst = max(worst, abs(exact - approx) / approx)
    ok = check(7, "max relative error over |alpha| <= 20 deg is 6.4 % < 10 %",
               abs(worst - 0.064) < 0.0005 and worst < 0.10, f"{100 * worst:.3f} %")
    assert ok


def test_criterion_8_intermodulation():
    start = time.perf_counter()
    geom = make_square_array(200.0, F0)
    bl = named_baselines(geom)[0]
    cfg = CLEAN.replace(hpbw=math.inf, propagation_loss=False)
    tangential = LinearTrajectory.through(Vec3(0.0, 0.0, 3.0), 0.05, 0.0, half_span=1.5)
    radial = LinearTrajectory(Vec3(0.0, 0.0, 2.0), Vec3(0.0, 0.0, 0.1), -1.5, 1.5)

    def tones(scene):
        rec = synthesize(scene, geom, cfg, (-1.5, 1.5))
        corr = correlate_channels(rec, bl.rx_a, bl.rx_b)
        spec = spectrogram(corr, rec.sample_rate, window_len=2.0, overlap=0.5, nfft=2**16,
                           window_kind="hann", t0=rec.t0)
        row = spec.psd[spec.frame_index(0.0)]
        db = 10 * np.log10(np.maximum(row, 1e-300) / row.max())
        peaks, _ = signal.find_peaks(db, height=-20.0)
        return spec.freqs[peaks]

    single_a = tones(Scene.single(tangential))
    single_b = tones(Scene.single(radial))
    both = tones(Scene((PointTarget(tangential), PointTarget(radial))))
    elapsed = time.perf_counter() - start
    ok = check(8, "one target -> 1 tone each", len(single_a) == 1 and len(single_b) == 1,
               f"{len(single_a)}, {len(single_b)}")
    ok &= check(8, "two targets -> exactly 4 tones", len(both) == 4, ", ".join(f"{f:.2f}" for f in both) + " Hz")
    ok &= check(8, "runtime < 30 s", elapsed < 30, f"{elapsed:.1f} s")
    assert ok


def test_criterion_9_determinism_and_interchange(tmp_path, geom):
    tr = _pass(-30.0, 10.0)
    truth = ground_truth(tr, geom)
    ok = True
    for mode in ("real", "complex_iq"):
        cfg = RadarConfig(baseband_mode=mode, rng_seed=123)
        rec = synthesize(Scene.single(tr), geom, cfg, (tr.t_start, tr.t_end))
        again = synthesize(Scene.single(tr), geom, cfg, (tr.t_start, tr.t_end))
        ok &= check(9, f"same seed -> identical recording ({mode})", np.array_equal(rec.channels, again.channels))
        direct = reconstruct(rec, geom, cfg, EstimatorParams(), PassPrior.from_truth(truth))
        for writer in (recording.write_csv, recording.write_binary):
            path = writer(rec, tmp_path / f"{mode}_{writer.__name__}")
            loaded = recording.load(path)
            via_file = reconstruct(loaded, geom, cfg, EstimatorParams(), PassPrior.from_truth(truth))
            same = np.array_equal(loaded.channels, rec.channels) and via_file == direct
            ok &= check(9, f"file round trip bit-exact ({mode}, {writer.__name__})", same)
    small = ExperimentConfig(angles=(-15.0,), passes_per_direction=3, seed=9)
    export(run_experiment(small), tmp_path / "a")
    export(run_experiment(small), tmp_path / "b")
    same_csv = (tmp_path / "a" / "per_pass.csv").read_bytes() == (tmp_path / "b" / "per_pass.csv").read_bytes()
    ok &= check(9, "same config and seed -> identical per-pass CSV", same_csv)
    assert ok
