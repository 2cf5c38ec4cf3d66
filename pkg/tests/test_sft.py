import csv

import numpy as np
import pytest

from spikecodec import (
    LinearDecoderParams,
    SftConfig,
    SpikeTrain,
    Spectrum,
    dft_weights,
    encode_linear,
    sft_frame,
    sft_stream,
    write_spectrum,
)
from conftest import naive_dft


DEC = LinearDecoderParams(t_lin_min=5e-5, t_lin_max=3e-4, y_min=1.0, y_max=5.0)


def make_cfg(frame_size, tick=1e-6, steps=333):
    return SftConfig(frame_size=frame_size, decoder=DEC,
                     charge_phase_steps=steps, readout_phase_steps=steps,
                     tick=tick, sample_period=1.0 / 3000.0)


class TestDftWeights:
    def test_k4_rows(self):
        cos_w, sin_w = dft_weights(4)
        assert cos_w[1] == pytest.approx([1.0, 0.0, -1.0, 0.0], abs=1e-15)
        assert sin_w[1] == pytest.approx([0.0, -1.0, 0.0, 1.0], abs=1e-15)
        assert cos_w[2] == pytest.approx([1.0, -1.0, 1.0, -1.0], abs=1e-15)

    def test_row_zero_is_all_ones(self):
        cos_w, sin_w = dft_weights(8)
        assert np.all(cos_w[0] == 1.0)
        assert sin_w[0] == pytest.approx(np.zeros(8), abs=1e-15)

    def test_row_sums_cancel_above_dc(self):
        cos_w, sin_w = dft_weights(17)
        assert cos_w[1:].sum(axis=1) == pytest.approx(np.zeros(16), abs=1e-12)
        assert sin_w[1:].sum(axis=1) == pytest.approx(np.zeros(16), abs=1e-12)

    def test_entries_bounded(self):
        cos_w, sin_w = dft_weights(31)
        assert np.abs(cos_w).max() <= 1.0
        assert np.abs(sin_w).max() <= 1.0

    def test_rejects_tiny_frames(self):
        with pytest.raises(ValueError):
            dft_weights(1)


class TestSftFrame:
    def test_constant_input_is_pure_dc(self):
        cfg = make_cfg(16)
        times = encode_linear(np.full(16, 3.0), DEC)
        spec = sft_frame(times, cfg)
        assert spec.coefficients[0] == pytest.approx(16 * 3.0, rel=1e-9)
        assert np.abs(spec.coefficients[1:]).max() < 1e-9

    def test_single_cosine_hits_its_bins(self):
        cfg = make_cfg(16)
        n = np.arange(16)
        y = 3.0 + np.cos(2 * np.pi * 3 * n / 16)
        spec = sft_frame(encode_linear(y, DEC), cfg)
        assert spec.coefficients[3] == pytest.approx(8.0, rel=1e-9)
        assert spec.coefficients[13] == pytest.approx(8.0, rel=1e-9)
        assert spec.coefficients[0] == pytest.approx(48.0, rel=1e-9)

    def test_matches_reference_dft_on_random_frames(self):
        cfg = make_cfg(64)
        rng = np.random.default_rng(12)
        for _ in range(20):
            y = rng.uniform(1.0, 5.0, 64)
            spec = sft_frame(encode_linear(y, DEC), cfg)
            ref = naive_dft(y)
            assert np.abs(spec.coefficients - ref).max() < 1e-9 * np.abs(ref).max()

    def test_conjugate_symmetry(self):
        cfg = make_cfg(32)
        rng = np.random.default_rng(13)
        y = rng.uniform(1.0, 5.0, 32)
        c = sft_frame(encode_linear(y, DEC), cfg).coefficients
        scale = np.abs(c).max()
        assert np.abs(c[1:] - np.conj(c[1:][::-1])).max() < 1e-12 * scale

    def test_linear_in_the_samples(self):
        cfg = make_cfg(16)
        rng = np.random.default_rng(14)
        y1 = rng.uniform(1.0, 5.0, 16)
        y2 = rng.uniform(1.0, 5.0, 16)
        mix = 0.25 * y1 + 0.75 * y2
        c_mix = sft_frame(encode_linear(mix, DEC), cfg).coefficients
        c_sep = (0.25 * sft_frame(encode_linear(y1, DEC), cfg).coefficients
                 + 0.75 * sft_frame(encode_linear(y2, DEC), cfg).coefficients)
        assert np.abs(c_mix - c_sep).max() < 1e-9 * np.abs(c_sep).max()

    def test_quantized_times_stay_within_half_tick_bound(self):
        cfg = make_cfg(32, tick=3e-6, steps=111)
        rng = np.random.default_rng(15)
        y = rng.uniform(1.0, 5.0, 32)
        times = encode_linear(y, DEC)
        exact = sft_frame(times, cfg).coefficients
        rounded = sft_frame(np.round(times / cfg.tick) * cfg.tick, cfg).coefficients
        bound = cfg.frame_size * cfg.tick / (2 * DEC.slope)
        assert np.abs(rounded - exact).max() <= bound * (1 + 1e-9)

    def test_validation(self):
        cfg = make_cfg(8)
        with pytest.raises(ValueError, match="8"):
            sft_frame(np.zeros(7), cfg)
        with pytest.raises(ValueError, match="finite"):
            sft_frame(np.full(8, np.nan), cfg)
        with pytest.raises(ValueError, match="finite"):
            sft_frame(np.full(8, -1e-6), cfg)


class TestSftStream:
    def test_frame_count_with_hop(self, cfg3k):
        train = SpikeTrain(bins=np.tile([31, 47, 19, 95], 8), config=cfg3k)
        cfg = SftConfig.for_encoder(cfg3k, DEC, frame_size=8)
        assert len(sft_stream(train, cfg)) == 4
        assert len(sft_stream(train, cfg, hop=4)) == 7
        assert len(sft_stream(train, cfg, hop=1)) == 25

    def test_periodic_train_gives_identical_frames(self, cfg3k):
        train = SpikeTrain(bins=np.tile([31, 47, 19, 95], 8), config=cfg3k)
        cfg = SftConfig.for_encoder(cfg3k, DEC, frame_size=8)
        frames = sft_stream(train, cfg)
        for f in frames[1:]:
            assert np.array_equal(f.coefficients, frames[0].coefficients)

    def test_silent_windows_enter_as_latest_code_time(self, cfg3k):
        cfg = SftConfig.for_encoder(cfg3k, DEC, frame_size=4)
        silent = SpikeTrain(bins=np.array([31, 0, 19, 47]), config=cfg3k)
        sub = silent.bins * cfg3k.reader_period
        sub = np.where(silent.bins > 0, sub, DEC.t_lin_max)
        direct = sft_frame(sub, cfg)
        streamed = sft_stream(silent, cfg)[0]
        assert np.array_equal(streamed.coefficients, direct.coefficients)

    def test_rejects_short_trains_and_bad_hop(self, cfg3k):
        train = SpikeTrain(bins=np.array([31, 47]), config=cfg3k)
        cfg = SftConfig.for_encoder(cfg3k, DEC, frame_size=4)
        with pytest.raises(ValueError, match="need at least"):
            sft_stream(train, cfg)
        long_train = SpikeTrain(bins=np.tile([31], 8), config=cfg3k)
        with pytest.raises(ValueError, match="hop"):
            sft_stream(long_train, cfg, hop=0)


class TestSpectrum:
    def test_bin_frequencies(self):
        spec = Spectrum(coefficients=np.zeros(8, dtype=complex), sample_period=1.0 / 3000.0)
        assert spec.bin_frequencies[1] == pytest.approx(375.0, rel=1e-12)
        assert spec.bin_frequencies[4] == pytest.approx(1500.0, rel=1e-12)

    def test_magnitude(self):
        spec = Spectrum(coefficients=np.array([3 + 4j, 1 + 0j]), sample_period=1e-3)
        assert spec.magnitude() == pytest.approx([5.0, 1.0])

    def test_csv_dump(self, tmp_path):
        spec = Spectrum(coefficients=np.array([1 + 0j, 0 + 2j, -1 + 0j]), sample_period=1e-3)
        path = tmp_path / "spec.csv"
        write_spectrum(spec, str(path))
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        assert float(rows[1]["im"]) == 2.0
        assert float(rows[1]["mag"]) == 2.0
        assert float(rows[2]["freq_hz"]) == pytest.approx(2000.0 / 3.0, rel=1e-12)


class TestSftConfig:
    def test_for_encoder_defaults(self, cfg3k):
        cfg = SftConfig.for_encoder(cfg3k, DEC, frame_size=16)
        assert cfg.tick == cfg3k.reader_period
        assert cfg.charge_phase_steps == 100
        assert cfg.readout_phase_steps == 100
        assert cfg.charge_duration == pytest.approx(cfg3k.sample_period, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            SftConfig(frame_size=1, decoder=DEC, charge_phase_steps=10,
                      readout_phase_steps=10, tick=1e-6, sample_period=1e-3)
        with pytest.raises(ValueError):
            SftConfig(frame_size=8, decoder=DEC, charge_phase_steps=0,
                      readout_phase_steps=10, tick=1e-6, sample_period=1e-3)
