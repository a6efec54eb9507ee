"""Device simulator: sampling chain, poll loop, determinism, truth ledger."""

import random

import pytest

from octodaq.codec import FRAME_LEN, decode_frame, encode_poll
from octodaq.conversion import HUMIDITY, TEMPERATURE
from octodaq.simulator import (
    ConstantSource,
    DeviceSimulator,
    RampSource,
    ReplaySource,
    SimConfig,
    SineSource,
    VirtualClock,
    sample_channel,
)



def run_sim(cfg):
    """Simulator serving one end of an in-process pipe; host gets the other."""
    sim = DeviceSimulator(cfg)
    host_end, thread = sim.attach_pipe()
    return sim, host_end, thread


def poll_for_frame(host, n=1):
    frames = []
    for _ in range(n):
        host.send(encode_poll())
        buf = b""
        while len(buf) < FRAME_LEN:
            chunk = host.recv(FRAME_LEN - len(buf), timeout=2.0)
            assert chunk, "simulator did not answer the poll"
            buf += chunk
        frames.append(decode_frame(buf))
    return frames


class TestSampleChannel:
    def test_constant_temperature_mid_scale(self):
        src = ConstantSource(25.0, TEMPERATURE)
        assert sample_channel(src, 0.0, random.Random(0)) == 512

    def test_constant_humidity_full_scale(self):
        src = ConstantSource(90.0, HUMIDITY)
        assert sample_channel(src, 0.0, random.Random(0)) == 1023

    def test_over_range_saturates(self):
        src = ConstantSource(120.0, TEMPERATURE)
        assert sample_channel(src, 0.0, random.Random(0)) == 1023

    def test_noise_is_seed_deterministic(self):
        src = ConstantSource(25.0, TEMPERATURE, noise_sigma=0.5)
        a = [sample_channel(src, t, random.Random(7)) for t in range(5)]
        b = [sample_channel(src, t, random.Random(7)) for t in range(5)]
        assert a == b

    def test_noise_limit_clips_draws(self):
        src = ConstantSource(25.0, TEMPERATURE, noise_sigma=5.0, noise_limit=0.01)
        rng = random.Random(3)
        for t in range(200):
            counts = sample_channel(src, t, rng)
            assert abs(counts - 512) <= 1


class TestSources:
    def test_sine(self):
        src = SineSource(offset=50.0, amplitude=20.0, period_s=100.0, m=HUMIDITY)
        assert src.truth_at(0.0) == pytest.approx(50.0)
        assert src.truth_at(25.0) == pytest.approx(70.0)
        assert src.truth_at(75.0) == pytest.approx(30.0)

    def test_ramp_holds_at_end(self):
        src = RampSource(0.0, 50.0, 100.0, m=TEMPERATURE)
        assert src.truth_at(0.0) == 0.0
        assert src.truth_at(50.0) == 25.0
        assert src.truth_at(100.0) == 50.0
        assert src.truth_at(500.0) == 50.0

    def test_replay_interpolates_and_holds_endpoints(self):
        src = ReplaySource([(0.0, 10.0), (10.0, 20.0)], m=HUMIDITY)
        assert src.truth_at(-5.0) == 10.0
        assert src.truth_at(5.0) == pytest.approx(15.0)
        assert src.truth_at(99.0) == 20.0

    def test_replay_requires_sorted_times(self):
        with pytest.raises(ValueError):
            ReplaySource([(1.0, 0.0), (0.5, 1.0)], m=HUMIDITY)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            SineSource(0, 1, period_s=0.0, m=HUMIDITY)
        with pytest.raises(ValueError):
            RampSource(0, 1, duration_s=-1.0, m=HUMIDITY)
        with pytest.raises(ValueError):
            ConstantSource(0.0, HUMIDITY, noise_sigma=-0.1)


class TestVirtualClock:
    def test_advance(self):
        clock = VirtualClock()
        clock.advance(1.0)
        assert clock.now_s == 1.0

    def test_twelve_hour_horizon(self):
        clock = VirtualClock(43199.0)
        clock.advance(1.0)
        assert clock.now_s == 43200.0

    def test_zero_advance_is_identity(self):
        clock = VirtualClock(5.0)
        clock.advance(0.0)
        assert clock.now_s == 5.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            VirtualClock().advance(-0.001)


class TestDeviceLoop:
    def cfg(self, **kw):
        sources = {0: ConstantSource(25.0, TEMPERATURE)}
        return SimConfig(sources=sources, rng_seed=1, **kw)

    def test_consecutive_polls_increment_seq(self):
        sim, host, _ = run_sim(self.cfg())
        frames = poll_for_frame(host, 2)
        assert frames[0].seq == 0
        assert frames[1].seq == 1
        host.close()

    def test_seq_wraps_mod_256(self):
        sim, host, _ = run_sim(self.cfg())
        frames = poll_for_frame(host, 300)
        assert frames[255].seq == 255
        assert frames[256].seq == 0  # the 257th frame wraps
        assert frames[299].seq == (300 - 1) % 256
        host.close()

    def test_constant_zero_noise_is_constant_counts(self):
        sim, host, _ = run_sim(self.cfg())
        frames = poll_for_frame(host, 20)
        assert all(f.counts == frames[0].counts for f in frames)
        assert frames[0].counts[0] == 512
        host.close()

    def test_unassigned_channels_read_zero(self):
        sim, host, _ = run_sim(self.cfg())
        (frame,) = poll_for_frame(host)
        assert frame.counts[1:] == (0,) * 7
        host.close()

    def test_garbage_before_poll_is_skipped(self):
        sim, host, _ = run_sim(self.cfg())
        host.send(b"\x00garbage!!\xffP\r\n")
        buf = b""
        while len(buf) < FRAME_LEN:
            chunk = host.recv(64, timeout=2.0)
            assert chunk
            buf += chunk
        assert decode_frame(buf).counts[0] == 512
        host.close()

    def test_garbage_alone_gets_no_response(self):
        sim, host, _ = run_sim(self.cfg())
        host.send(b"QX\r\nnoise")
        assert host.recv(64, timeout=0.2) is None
        host.close()

    def test_one_frame_per_poll(self):
        sim, host, thread = run_sim(self.cfg())
        n = 57
        for _ in range(n):
            host.send(encode_poll())
        received = b""
        while len(received) < n * FRAME_LEN:
            chunk = host.recv(65536, timeout=2.0)
            assert chunk
            received += chunk
        assert host.recv(4096, timeout=0.2) is None  # and not one byte more
        assert sim.frames_generated == n
        host.close()
        thread.join(timeout=2.0)
        assert not thread.is_alive()

    def test_byte_identical_determinism(self):
        def one_run():
            cfg = SimConfig(
                sources={
                    0: ConstantSource(25.0, TEMPERATURE, noise_sigma=0.3),
                    3: SineSource(50.0, 20.0, 60.0, HUMIDITY, noise_sigma=0.5),
                },
                rng_seed=42,
            )
            sim, host, _ = run_sim(cfg)
            for _ in range(40):
                host.send(encode_poll())
            out = b""
            while len(out) < 40 * FRAME_LEN:
                chunk = host.recv(65536, timeout=2.0)
                assert chunk
                out += chunk
            host.close()
            return out

        assert one_run() == one_run()

    def test_virtual_clock_advances_per_poll(self):
        cfg = SimConfig(
            sources={0: RampSource(0.0, 50.0, 100.0, TEMPERATURE)},
            poll_period_s=1.0,
        )
        sim, host, _ = run_sim(cfg)
        poll_for_frame(host, 3)
        assert list(sim.truth_series(0).times) == [0.0, 1.0, 2.0]
        host.close()

    def test_truth_ledger_is_pre_noise(self):
        cfg = SimConfig(
            sources={0: ConstantSource(25.0, TEMPERATURE, noise_sigma=2.0)},
            rng_seed=9,
        )
        sim, host, _ = run_sim(cfg)
        frames = poll_for_frame(host, 30)
        truth = sim.truth_series(0)
        assert list(truth.values) == [25.0] * 30
        assert truth.unit == "degC"
        # while the noisy counts do wander
        assert len({f.counts[0] for f in frames}) > 1
        host.close()

    def test_drop_every_swallows_but_counts(self):
        cfg = self.cfg(drop_every=5)
        sim, host, _ = run_sim(cfg)
        for _ in range(10):
            host.send(encode_poll())
        received = b""
        while True:
            chunk = host.recv(65536, timeout=0.3)
            if not chunk:
                break
            received += chunk
        assert sim.frames_generated == 10
        assert sim.frames_sent == 8
        assert len(received) == 8 * FRAME_LEN
        seqs = [
            decode_frame(received[i : i + FRAME_LEN]).seq
            for i in range(0, len(received), FRAME_LEN)
        ]
        assert seqs == [0, 1, 2, 3, 5, 6, 7, 8]  # 4 and 9 were dropped
        host.close()

    def test_clean_termination_on_close(self):
        sim, host, thread = run_sim(self.cfg())
        poll_for_frame(host)
        host.close()
        thread.join(timeout=2.0)
        assert not thread.is_alive()

    def test_truth_csv_export(self, tmp_path):
        sim, host, _ = run_sim(
            SimConfig(sources={
                0: ConstantSource(25.0, TEMPERATURE),
                4: ConstantSource(50.0, HUMIDITY),
            })
        )
        poll_for_frame(host, 3)
        out = tmp_path / "truth.csv"
        sim.export_truth_csv(out)
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "time_s,ch0[degC],ch4[%RH]"
        assert len(lines) == 4
        assert lines[1].split(",") == ["0.000000", "25.000000", "50.000000"]
        host.close()


class TestSimConfigValidation:
    def test_bad_channel_id(self):
        with pytest.raises(ValueError):
            SimConfig(sources={8: ConstantSource(0.0, TEMPERATURE)})

    def test_bad_clock(self):
        with pytest.raises(ValueError):
            SimConfig(clock="warp")

    def test_bad_period(self):
        with pytest.raises(ValueError):
            SimConfig(poll_period_s=0.0)
