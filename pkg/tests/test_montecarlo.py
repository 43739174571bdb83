"""Cross-validation of the streaming kernels against the whole-trace chain."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import wakesim as ws
from wakesim.montecarlo import (ReceiverStream, noise_decision_voltages,
                                signal_decision_voltages)
from wakesim.receiver import rc_lpf_array, video_noise_ar1
from wakesim.units import dbm_to_mw


class TestChunkedFilterState:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=400), min_size=1,
                    max_size=6),
           st.floats(min_value=0.001, max_value=0.9))
    def test_chunked_equals_whole(self, chunk_sizes, alpha):
        rng = np.random.default_rng(hash(tuple(chunk_sizes)) % (1 << 32))
        n = sum(chunk_sizes)
        x = rng.normal(size=n)
        whole, _ = rc_lpf_array(x, alpha, zi=0.0)
        pieces = []
        state = 0.0
        pos = 0
        for size in chunk_sizes:
            y, state = rc_lpf_array(x[pos:pos + size], alpha, zi=state)
            pieces.append(y)
            pos += size
        np.testing.assert_allclose(np.concatenate(pieces), whole, atol=1e-10)

    def test_video_noise_continuation_is_stationary(self):
        rng = np.random.default_rng(3)
        sigma, tau, rate = 0.03, 30.0, 20e6
        state = None
        parts = []
        for _ in range(40):
            part, state = video_noise_ar1(100_000, sigma, tau, rate, rng,
                                          zi=state, dtype=np.float32)
            parts.append(part)
        nv = np.concatenate(parts)
        assert abs(nv.std() / sigma - 1.0) < 0.05
        assert abs(nv.mean()) < 0.01 * sigma * 20
        # no discontinuity artifacts at chunk joints
        joints = np.arange(1, 40) * 100_000
        jumps = np.abs(nv[joints] - nv[joints - 1])
        step_sigma = sigma * np.sqrt(2 * (1 - np.exp(-1e6 / (tau * rate))))
        assert jumps.max() < 6 * step_sigma


class TestEngineMatchesWholeTrace:
    def test_noise_p10_agreement(self, channel):
        """Engine decisions and receive() see the same noise statistics."""
        cfg = ws.ReceiverConfig(cof_hz=159e3, video_noise_sigma_v=0.0)
        t = ws.calibrate_threshold(cfg, channel, rng_seed=5)
        cfg = cfg.with_threshold(t)
        # whole-trace route: 40k decisions
        idle = ws.EnvelopeTrace(samples=np.zeros(8_000_000), sample_rate_hz=20e6)
        trace = ws.add_noise(idle, channel, rng_seed=6)
        bits = ws.receive(trace, cfg)
        p_whole = bits.bits[200:].mean()
        # engine route at the same threshold
        dec = noise_decision_voltages(cfg, channel, 200_000, rng_seed=7)
        p_engine = np.mean(dec > t)
        lo, hi = ws.wilson_interval(int(bits.bits[200:].sum()),
                                    bits.bits.size - 200)
        assert lo * 0.3 <= p_engine <= hi * 3.0
        assert 2e-4 <= p_engine <= 5e-3 and 2e-4 <= p_whole <= 5e-3

    def test_signal_p01_agreement(self, channel):
        cfg = ws.ReceiverConfig(cof_hz=159e3, video_noise_sigma_v=0.0)
        t = ws.calibrate_threshold(cfg, channel, rng_seed=8)
        cfg = cfg.with_threshold(t)
        power = -93.0
        # whole-trace route: one long frame
        sched = ws.build_tx_schedule([ws.FrameSpec(payload_bytes=12436)], cw=1,
                                     rng_seed=0)  # 100 ms on
        trace = ws.synthesize_envelope(sched, power)
        trace = ws.add_noise(trace, channel, rng_seed=9)
        bits = ws.receive(trace, cfg)
        misses = bits.bits[100:9900] == 0
        p_whole = misses.mean()
        stats = ws.estimate_p01(cfg, channel, power, rng_seed=10, n_bits=200_000)
        assert stats.p01 == pytest.approx(p_whole, rel=0.5, abs=2e-3)


class TestStreamWaveforms:
    def _mean_decision_power(self, waveform, channel, rx_power, **kwargs):
        cfg = ws.ReceiverConfig(detector_model="square_law_linear",
                                lna_gain_db=0.0, cof_hz=0.0,
                                video_noise_sigma_v=0.0)
        dec = signal_decision_voltages(cfg, channel, rx_power, 150_000,
                                       rng_seed=11, waveform=waveform, **kwargs)
        return float(np.mean(dec))

    @pytest.mark.parametrize("waveform", ["dsss_constant", "dsss_ripple",
                                          "ofdm_rayleigh"])
    def test_mean_power_additivity(self, channel, waveform):
        rx = -85.0
        mean = self._mean_decision_power(waveform, channel, rx)
        expected = dbm_to_mw(rx) + channel.noise_floor_mw
        assert mean == pytest.approx(expected, rel=0.03)

    def test_rayleigh_fluctuates_more_than_constant(self, channel):
        cfg = ws.ReceiverConfig(detector_model="square_law_linear",
                                lna_gain_db=0.0, cof_hz=0.0,
                                video_noise_sigma_v=0.0)
        out = {}
        for waveform in ("dsss_constant", "ofdm_rayleigh"):
            dec = signal_decision_voltages(cfg, channel, -80.0, 100_000,
                                           rng_seed=12, waveform=waveform)
            out[waveform] = np.var(dec.astype(np.float64))
        assert out["ofdm_rayleigh"] > 2.0 * out["dsss_constant"]

    def test_unknown_waveform_rejected(self, channel):
        cfg = ws.ReceiverConfig()
        with pytest.raises(ws.ConfigurationError):
            signal_decision_voltages(cfg, channel, -80.0, 1000, rng_seed=13,
                                     waveform="chirp")


class TestStreamDecimation:
    def test_decisions_align_with_comb_across_chunks(self):
        # push in ragged chunks; decisions must be every spb-th sample
        cfg = ws.ReceiverConfig(detector_model="square_law_linear",
                                lna_gain_db=0.0, cof_hz=0.0,
                                video_noise_sigma_v=0.0)
        rng = np.random.default_rng(14)
        stream = ReceiverStream(cfg, 20e6, rng)
        x = np.arange(1000, dtype=np.float32)
        outs = []
        pos = 0
        for size in (1, 199, 200, 123, 477):
            outs.append(stream.push(x[pos:pos + size]))
            pos += size
        got = np.concatenate(outs)
        np.testing.assert_array_equal(got, x[::200][: got.size])
