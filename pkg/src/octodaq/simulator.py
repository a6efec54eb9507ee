"""Deterministic stand-in for the acquisition device firmware.

Models the firmware loop: wait for a poll request, sample all eight
analog inputs at the current clock instant, format one data frame,
answer, repeat.  Each channel's analog source produces a ground-truth
value in engineering units; the conditioning chain (affine units-to-volts
transfer, protection clamp, quantization) turns it into an ADC code.

Real hardware would multiplex the eight inputs through one converter; we
sample them all at a single clock instant per poll, which is
indistinguishable for the slowly varying signals this targets.

The simulator keeps a ledger of the exact pre-noise, pre-quantization
value of every sample it produced, so an end-to-end run can be scored
against what the device actually measured.
"""

from __future__ import annotations

import math
import random
import threading
import time
from dataclasses import dataclass, field

from .analysis import Series
from .codec import NUM_CHANNELS, POLL_REQUEST, RawFrame, encode_frame
from .conversion import LinearMap, volts_to_counts, zener_clamp
from .transport import Endpoint, TransportError

_MAX_GARBAGE_BUFFER = 65536


class ChannelSource:
    """Base signal generator: subclass provides the ground truth value.

    noise_sigma adds seeded Gaussian noise in engineering units before
    the conditioning chain.  noise_limit, when set, clips a single draw
    to +/- that many units; use it to model instruments whose
    disagreement is bounded (an unbounded Gaussian will eventually
    produce arbitrarily large excursions over a long run).
    """

    def __init__(self, m: LinearMap, noise_sigma: float = 0.0,
                 noise_limit: float | None = None):
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if noise_limit is not None and noise_limit <= 0:
            raise ValueError("noise_limit must be positive")
        self.map = m
        self.noise_sigma = float(noise_sigma)
        self.noise_limit = noise_limit

    def truth_at(self, t: float) -> float:
        raise NotImplementedError


class ConstantSource(ChannelSource):
    def __init__(self, level: float, m: LinearMap, **kw):
        super().__init__(m, **kw)
        self.level = float(level)

    def truth_at(self, t: float) -> float:
        return self.level


class SineSource(ChannelSource):
    def __init__(self, offset: float, amplitude: float, period_s: float,
                 m: LinearMap, **kw):
        super().__init__(m, **kw)
        if period_s <= 0:
            raise ValueError("sine period_s must be > 0")
        self.offset = float(offset)
        self.amplitude = float(amplitude)
        self.period_s = float(period_s)

    def truth_at(self, t: float) -> float:
        return self.offset + self.amplitude * math.sin(2 * math.pi * t / self.period_s)


class RampSource(ChannelSource):
    """Linear sweep from start to end over duration_s, holding at the end."""

    def __init__(self, start: float, end: float, duration_s: float,
                 m: LinearMap, **kw):
        super().__init__(m, **kw)
        if duration_s <= 0:
            raise ValueError("ramp duration_s must be > 0")
        self.start = float(start)
        self.end = float(end)
        self.duration_s = float(duration_s)

    def truth_at(self, t: float) -> float:
        frac = min(max(t / self.duration_s, 0.0), 1.0)
        return self.start + (self.end - self.start) * frac


class ReplaySource(ChannelSource):
    """Plays back a recorded (time, value) series, linearly interpolated."""

    def __init__(self, series, m: LinearMap, **kw):
        super().__init__(m, **kw)
        pts = [(float(t), float(v)) for t, v in series]
        if not pts:
            raise ValueError("replay series is empty")
        if any(t1 >= t2 for (t1, _), (t2, _) in zip(pts, pts[1:])):
            raise ValueError("replay series times must be strictly increasing")
        self.series = pts

    def truth_at(self, t: float) -> float:
        pts = self.series
        if t <= pts[0][0]:
            return pts[0][1]
        if t >= pts[-1][0]:
            return pts[-1][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t0 <= t <= t1:
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        raise AssertionError("unreachable: series is sorted")


def sample_channel(src: ChannelSource, t: float, rng: random.Random) -> int:
    """Run one reading through the conditioning chain, returning ADC counts.

    truth -> +noise -> affine units-to-volts -> protection clamp ->
    quantization.  Deterministic given the source, time and RNG state.
    """
    value = src.truth_at(t)
    if src.noise_sigma > 0:
        noise = rng.gauss(0.0, src.noise_sigma)
        if src.noise_limit is not None:
            noise = min(max(noise, -src.noise_limit), src.noise_limit)
        value += noise
    volts = src.map.volts_at(value)
    return volts_to_counts(zener_clamp(volts))


class VirtualClock:
    """Simulated seconds; the poll loop advances it one period per poll,
    so a 12-hour observation compresses to however fast polls arrive."""

    def __init__(self, now_s: float = 0.0):
        if now_s < 0:
            raise ValueError("clock cannot start negative")
        self.now_s = float(now_s)

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise ValueError("clock cannot move backwards")
        self.now_s += dt


class RealTimeClock:
    """Wall-clock seconds since construction; advance is a no-op."""

    def __init__(self):
        self._t0 = time.monotonic()

    @property
    def now_s(self) -> float:
        return time.monotonic() - self._t0

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise ValueError("clock cannot move backwards")


@dataclass
class SimConfig:
    """Channel assignments plus the RNG seed and clock mode.

    Unassigned channels read 0 counts.  drop_every > 0 makes the device
    swallow every Nth response after generating it (fault injection for
    loss-accounting tests): the frame counts as emitted, the sequence
    number still advances, but nothing is written to the transport.
    drop_phase shifts which frames drop (frame numbers congruent to it
    mod drop_every); a phase away from the run end keeps the final drop
    observable, since a gap only shows once a later frame arrives.
    """

    sources: dict[int, ChannelSource] = field(default_factory=dict)
    rng_seed: int = 0
    clock: str = "virtual"
    poll_period_s: float = 1.0
    drop_every: int = 0
    drop_phase: int = 0

    def __post_init__(self):
        for ch in self.sources:
            if not 0 <= ch < NUM_CHANNELS:
                raise ValueError(f"channel id {ch} outside 0..{NUM_CHANNELS - 1}")
        if self.clock not in ("virtual", "real-time"):
            raise ValueError(f"clock must be 'virtual' or 'real-time', got {self.clock!r}")
        if self.poll_period_s <= 0:
            raise ValueError("poll_period_s must be > 0")
        if self.drop_every < 0:
            raise ValueError("drop_every must be >= 0")


class DeviceSimulator:
    """One simulated device instance; owns its transport end exclusively."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.clock = VirtualClock() if cfg.clock == "virtual" else RealTimeClock()
        # independent per-channel noise streams, stable under reconfiguration
        # of other channels (string seeding hashes with SHA-512, so this is
        # reproducible across processes and PYTHONHASHSEED values)
        self._rngs = {
            ch: random.Random(f"{cfg.rng_seed}/{ch}") for ch in cfg.sources
        }
        self._seq = 0
        self.frames_generated = 0
        self.frames_sent = 0
        self._truth: dict[int, list[tuple[float, float]]] = {
            ch: [] for ch in cfg.sources
        }

    def respond_to_poll(self) -> bytes | None:
        """Sample all channels at the current instant and build one frame.

        Returns the encoded frame, or None when fault injection drops it.
        """
        t = self.clock.now_s
        counts = []
        for ch in range(NUM_CHANNELS):
            src = self.cfg.sources.get(ch)
            if src is None:
                counts.append(0)
            else:
                self._truth[ch].append((t, src.truth_at(t)))
                counts.append(sample_channel(src, t, self._rngs[ch]))
        payload = encode_frame(RawFrame(self._seq, tuple(counts)))
        self._seq = (self._seq + 1) % 256
        self.frames_generated += 1
        self.clock.advance(self.cfg.poll_period_s)
        if (self.cfg.drop_every
                and self.frames_generated % self.cfg.drop_every
                == self.cfg.drop_phase % self.cfg.drop_every):
            return None
        self.frames_sent += 1
        return payload

    def serve(self, ep: Endpoint) -> None:
        """Firmware loop: answer each poll request until the peer closes.

        Garbage bytes before a valid poll are skipped without response.
        Transport failure propagates as TransportError; a clean close
        returns normally.
        """
        buf = bytearray()
        while True:
            idx = buf.find(POLL_REQUEST)
            while idx >= 0:
                del buf[: idx + len(POLL_REQUEST)]
                payload = self.respond_to_poll()
                if payload is not None:
                    ep.send(payload)
                idx = buf.find(POLL_REQUEST)
            if len(buf) > _MAX_GARBAGE_BUFFER:
                del buf[: -(len(POLL_REQUEST) - 1)]
            chunk = ep.recv(4096, timeout=None)
            if not chunk:
                return
            buf.extend(chunk)

    def serve_tcp(self, server_socket, stop=None) -> None:
        """Accept host connections one at a time on a listening socket.

        Device identity (sequence counter, clock, noise streams) persists
        across reconnects.  Stops when `stop` (an Event) is set or the
        listening socket is closed.
        """
        from .transport import accept_endpoint

        while stop is None or not stop.is_set():
            try:
                server_socket.settimeout(0.2)
                ep = accept_endpoint(server_socket)
            except TimeoutError:
                continue
            except OSError:
                return
            try:
                self.serve(ep)
            except TransportError:
                pass  # host went away mid-exchange; await the next connection
            finally:
                ep.close()

    def attach_pipe(self) -> tuple[Endpoint, threading.Thread]:
        """Serve this device over an in-process pipe in a daemon thread.

        Returns the host end plus the thread.  The thread exits silently
        when the host closes its end, even if that lands mid-send; other
        transport failures still surface as thread exceptions.
        """
        from .transport import pipe_pair

        device_end, host_end = pipe_pair()

        def _serve():
            try:
                self.serve(device_end)
            except TransportError:
                pass  # host hung up; nothing left to answer
            finally:
                device_end.close()

        thread = threading.Thread(target=_serve, daemon=True,
                                  name="octodaq-device-sim")
        thread.start()
        return host_end, thread

    def truth_series(self, channel: int) -> Series:
        """Exact pre-noise, pre-quantization values the device sampled."""
        if channel not in self._truth:
            raise KeyError(f"channel {channel} has no source")
        pts = self._truth[channel]
        return Series.from_pairs(pts, unit=self.cfg.sources[channel].map.unit)

    def export_truth_csv(self, path) -> None:
        """Ground-truth ledger as CSV: time_s plus one column per source."""
        channels = sorted(self._truth)
        with open(path, "w", newline="") as fh:
            header = ["time_s"] + [
                f"ch{ch}[{self.cfg.sources[ch].map.unit}]" for ch in channels
            ]
            fh.write(",".join(header) + "\n")
            if channels:
                n = len(self._truth[channels[0]])
                for i in range(n):
                    t = self._truth[channels[0]][i][0]
                    row = [f"{t:.6f}"] + [
                        f"{self._truth[ch][i][1]:.6f}" for ch in channels
                    ]
                    fh.write(",".join(row) + "\n")
