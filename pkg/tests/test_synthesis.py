import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ivr.dsp import peak_frequency, spectrogram
from ivr.errors import AliasingError, InvalidArgument, OutOfRange
from ivr.geometry import SPEED_OF_LIGHT, Vec3
from ivr.scene import PointTarget, Scene, positions
from ivr.synthesis import (
    BasebandRecording,
    RadarConfig,
    beam_amplitude,
    clean_returns,
    round_trip_delay,
    sample_times,
    synthesize,
)

from conftest import F0, level_pass


def _delays(geom, traj, t):
    p = positions(traj, t)
    tx = np.asarray(geom.tx_position)
    d_tx = np.linalg.norm(p - tx, axis=1)
    return [(d_tx + np.linalg.norm(p - np.asarray(rx), axis=1)) / SPEED_OF_LIGHT for rx in geom.rx_positions]


def test_round_trip_delay():
    tau = round_trip_delay(Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(0, 0, 1.5))
    assert tau == pytest.approx(3.0 / SPEED_OF_LIGHT)
    with pytest.raises(InvalidArgument):
        round_trip_delay(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0, 0))


def test_beam_amplitude_half_power_at_half_beamwidth():
    hp = math.radians(15.0)
    # One-way amplitude squared twice (Tx and Rx) gives the two-way power.
    assert beam_amplitude(hp, 30.0) ** 4 == pytest.approx(0.25, rel=2e-3)
    assert beam_amplitude(0.0, 30.0) == 1.0
    assert beam_amplitude(1.0, math.inf) == 1.0


def test_channel_phase_matches_delay(geom, clean_complex):
    tr = level_pass()
    t = sample_times((-1.0, 1.0), clean_complex.sample_rate)
    x = clean_returns(Scene.single(tr), geom, clean_complex, t)
    taus = _delays(geom, tr, t)
    for n in range(3):
        expected = np.angle(np.exp(2j * np.pi * F0 * taus[n]))
        assert np.max(np.abs(np.angle(np.exp(1j * (np.angle(x[n]) - expected))))) < 1e-9


def test_real_mode_is_real_part_before_filtering(geom):
    tr = level_pass()
    span = (-1.0, 1.0)
    c = synthesize(Scene.single(tr), geom, RadarConfig(baseband_mode="complex_iq", snr_db=None, highpass_cutoff=0.0), span)
    r = synthesize(Scene.single(tr), geom, RadarConfig(baseband_mode="real", snr_db=None, highpass_cutoff=0.0), span)
    assert not np.iscomplexobj(r.channels)
    assert np.array_equal(r.channels, c.channels.real)


def test_seeded_noise_is_deterministic_and_seed_sensitive(geom):
    tr = level_pass()
    cfg = RadarConfig(snr_db=10.0, rng_seed=7)
    a = synthesize(Scene.single(tr), geom, cfg, (-1, 1))
    b = synthesize(Scene.single(tr), geom, cfg, (-1, 1))
    c = synthesize(Scene.single(tr), geom, cfg.replace(rng_seed=8), (-1, 1))
    assert np.array_equal(a.channels, b.channels)
    assert not np.array_equal(a.channels, c.channels)
    assert a.metadata["config_hash"] == cfg.digest()


def test_complex_noise_power_matches_snr(geom):
    tr = level_pass()
    clean_cfg = RadarConfig(baseband_mode="complex_iq", snr_db=None, highpass_cutoff=0.0)
    noisy_cfg = clean_cfg.replace(snr_db=10.0, rng_seed=3)
    clean = synthesize(Scene.single(tr), geom, clean_cfg, (-2, 2))
    noisy = synthesize(Scene.single(tr), geom, noisy_cfg, (-2, 2))
    noise = noisy.channels - clean.channels
    peak = np.max(np.abs(clean.channels), axis=1)
    measured = np.mean(np.abs(noise) ** 2, axis=1) / peak**2
    assert np.allclose(measured, 0.1, rtol=0.05)


def test_highpass_removes_static_clutter(geom):
    static = Scene.single(level_pass(speed=1e-9))
    cfg = RadarConfig(baseband_mode="real", snr_db=None, highpass_cutoff=10.0)
    rec = synthesize(static, geom, cfg, (-1, 1))
    tail = rec.channels[:, rec.n_samples // 2 :]
    raw = synthesize(static, geom, cfg.replace(highpass_cutoff=0.0), (-1, 1)).channels
    assert np.max(np.abs(tail)) < 1e-3 * np.max(np.abs(raw))


def test_errors(geom):
    tr = level_pass(half_span=1.0)
    with pytest.raises(OutOfRange):
        synthesize(Scene.single(tr), geom, RadarConfig(), (-2.0, 0.0))
    fast = level_pass(speed=20.0, phi_v=0.0, beta=60.0, half_span=0.02)
    with pytest.raises(AliasingError):
        synthesize(Scene.single(fast), geom, RadarConfig(), (-0.02, 0.02))
    with pytest.raises(InvalidArgument):
        synthesize(Scene.single(tr), geom, RadarConfig(f0=24e9), (-1, 1))
    with pytest.raises(InvalidArgument):
        RadarConfig(hpbw=0.0)
    with pytest.raises(InvalidArgument):
        RadarConfig(baseband_mode="iq")
    with pytest.raises(InvalidArgument):
        BasebandRecording(4166.7, 0.0, np.zeros((2, 10)), "real")
    with pytest.raises(InvalidArgument):
        BasebandRecording(4166.7, 0.0, np.zeros((3, 10)), "real").channel(0)


def test_superposition(geom, clean_complex):
    a, b = level_pass(), level_pass(phi_v=60.0, R=0.9)
    t = sample_times((-1.0, 1.0), clean_complex.sample_rate)
    both = clean_returns(Scene((PointTarget(a), PointTarget(b, 0.5j))), geom, clean_complex, t)
    sep = clean_returns(Scene.single(a), geom, clean_complex, t) + clean_returns(
        Scene.single(b, 0.5j), geom, clean_complex, t
    )
    assert np.allclose(both, sep, rtol=0, atol=1e-12 * np.max(np.abs(sep)))


@settings(max_examples=25, deadline=None)
@given(st.floats(-180, 180), st.floats(0, 40), st.floats(0.4, 1.5))
def test_complex_phase_property(geom_phi, beta, R):
    from ivr.geometry import make_square_array

    geom = make_square_array(7.26, F0)
    cfg = RadarConfig(baseband_mode="complex_iq", snr_db=None, highpass_cutoff=0.0, hpbw=math.inf)
    tr = level_pass(geom_phi, beta, R, half_span=0.3)
    t = sample_times((-0.3, 0.3), cfg.sample_rate)
    x = clean_returns(Scene.single(tr), geom, cfg, t)
    taus = _delays(geom, tr, t)
    for a, b in ((0, 1), (1, 2), (2, 0)):
        corr = x[a] * np.conj(x[b])
        expected = -2 * np.pi * F0 * (taus[b] - taus[a])
        assert np.max(np.abs(np.angle(corr * np.exp(-1j * expected)))) < 1e-9


def test_receding_target_is_positive_tone(geom, clean_complex):
    tr = level_pass(beta=-90.0 + 1e-9, speed=0.5)  # straight up, away from the array
    rec = synthesize(Scene.single(tr), geom, clean_complex, (-1.0, 1.0))
    s = spectrogram(rec.channel(1), rec.sample_rate, t0=rec.t0)
    f = peak_frequency(s, 0.0).f
    assert f > 0 and abs(f - 2 * 0.5 * F0 / SPEED_OF_LIGHT) < 0.26
