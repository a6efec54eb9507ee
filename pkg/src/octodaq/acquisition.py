"""Host-side polling engine: poll, decode, timestamp, convert, fan out.

One logical writer (the polling loop) produces SampleRecords; any number
of readers follow along through ring-buffer subscriptions that can never
stall the loop.  Timeouts and decode errors are routine outcomes, not
session killers: a long unattended run must survive transient corruption.

Every issued poll resolves to exactly one of record / timeout / decode
error, so a session summary always satisfies
``polls == records + timeouts + decode_errors``.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from .codec import (
    FRAME_LEN,
    NUM_CHANNELS,
    FrameDecodeError,
    decode_frame,
    encode_poll,
)
from .conversion import (
    FULL_SCALE,
    LinearMap,
    QualityFlag,
    apply_map,
    counts_to_volts,
)
from .transport import Endpoint, TransportError


@dataclass
class AcquisitionConfig:
    """Polling schedule, channel selection and calibration assignments.

    enabled_channels picks what gets displayed/logged; the device always
    reports all eight.  Set paced=False to poll back-to-back (virtual
    clock desk runs); the period then only bounds the response timeout.
    """

    poll_period_ms: int = 1000
    response_timeout_ms: int = 250
    enabled_channels: tuple[int, ...] = tuple(range(NUM_CHANNELS))
    channel_maps: dict[int, LinearMap] = field(default_factory=dict)
    buffer_capacity: int = 65536
    paced: bool = True

    def __post_init__(self):
        self.enabled_channels = tuple(sorted(set(self.enabled_channels)))
        if self.poll_period_ms <= 0:
            raise ValueError("poll_period_ms must be > 0")
        if self.response_timeout_ms <= 0:
            raise ValueError("response_timeout_ms must be > 0")
        if self.response_timeout_ms >= self.poll_period_ms:
            raise ValueError("response timeout must be shorter than the poll period")
        if not self.enabled_channels:
            raise ValueError("at least one channel must be enabled")
        for ch in self.enabled_channels:
            if not 0 <= ch < NUM_CHANNELS:
                raise ValueError(f"enabled channel {ch} outside 0..{NUM_CHANNELS - 1}")
        for ch in self.channel_maps:
            if not 0 <= ch < NUM_CHANNELS:
                raise ValueError(f"mapped channel {ch} outside 0..{NUM_CHANNELS - 1}")
        if self.buffer_capacity <= 0:
            raise ValueError("buffer_capacity must be > 0")


@dataclass(frozen=True)
class ChannelValue:
    value: float
    unit: str
    flag: QualityFlag


@dataclass(frozen=True)
class SampleRecord:
    """One decoded, timestamped, converted device report."""

    seq: int
    host_time: float  # epoch seconds, millisecond resolution
    counts: tuple[int, ...]
    volts: tuple[float, ...]
    values: dict[int, ChannelValue]  # only channels with a calibration map


@dataclass(frozen=True)
class GapReport:
    """Sequence jump: frames the device emitted that never arrived."""

    expected_seq: int
    received_seq: int
    missed_count: int  # mod-256 aware, >= 1
    timestamp: float


@dataclass(frozen=True)
class PollTimeout:
    timestamp: float


@dataclass(frozen=True)
class DecodeFailure:
    timestamp: float
    error: FrameDecodeError


@dataclass
class SessionSummary:
    polls: int = 0
    records: int = 0
    timeouts: int = 0
    decode_errors: int = 0
    gap_reports: int = 0
    missed_total: int = 0
    outcome: str = "running"  # completed | stopped | transport-closed | transport-error
    error: str | None = None

    def conserved(self) -> bool:
        return self.polls == self.records + self.timeouts + self.decode_errors

    def to_dict(self) -> dict:
        return {
            "polls": self.polls,
            "records": self.records,
            "timeouts": self.timeouts,
            "decode_errors": self.decode_errors,
            "gap_reports": self.gap_reports,
            "missed_total": self.missed_total,
            "outcome": self.outcome,
            "error": self.error,
        }


def record_from_counts(seq: int, counts: tuple[int, ...], host_time: float,
                       channel_maps: dict[int, LinearMap]) -> SampleRecord:
    """Convert raw counts into the fully materialized host record.

    A reading that sits on an ADC rail (code 0 or 1023) while inside the
    map's span is flagged saturated: the true value may lie beyond what
    the clamped input could represent.
    """
    volts = tuple(counts_to_volts(c) for c in counts)
    values = {}
    for ch, m in channel_maps.items():
        value, flag = apply_map(m, volts[ch])
        if flag is QualityFlag.OK and counts[ch] in (0, FULL_SCALE):
            flag = QualityFlag.SATURATED
        values[ch] = ChannelValue(value, m.unit, flag)
    return SampleRecord(seq, host_time, counts, volts, values)


class SessionSink:
    """Override any of these to observe session events in emission order."""

    def on_record(self, record: SampleRecord) -> None:
        pass

    def on_gap(self, gap: GapReport) -> None:
        pass

    def on_timeout(self, event: PollTimeout) -> None:
        pass

    def on_decode_error(self, event: DecodeFailure) -> None:
        pass


class Poller:
    """Issues single polls over a transport, reassembling one frame each.

    Keeps a byte buffer across calls so partial reads and late bytes are
    never lost.  Not thread-safe; a session owns exactly one.
    """

    def __init__(self, transport: Endpoint, cfg: AcquisitionConfig):
        self.transport = transport
        self.cfg = cfg
        self._buf = bytearray()
        self._eof = False

    def poll_once(self) -> SampleRecord | PollTimeout | DecodeFailure:
        """One request/response cycle.

        Returns a SampleRecord on a valid frame, PollTimeout if no
        complete frame arrives in time, DecodeFailure if the frame is
        corrupt (the bad bytes are consumed, the session continues).
        Raises TransportError if the stream fails or closes.
        """
        self.transport.send(encode_poll())
        deadline = time.monotonic() + self.cfg.response_timeout_ms / 1000.0
        while True:
            start = self._buf.find(b"$")
            if start >= 0 and len(self._buf) - start >= FRAME_LEN:
                candidate = bytes(self._buf[start : start + FRAME_LEN])
                del self._buf[: start + FRAME_LEN]
                now = _stamp_ms()
                try:
                    frame = decode_frame(candidate)
                except FrameDecodeError as exc:
                    return DecodeFailure(now, exc)
                return record_from_counts(
                    frame.seq, frame.counts, now, self.cfg.channel_maps
                )
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return PollTimeout(_stamp_ms())
            chunk = self.transport.recv(4096, timeout=remaining)
            if chunk is None:
                return PollTimeout(_stamp_ms())
            if chunk == b"":
                self._eof = True
                raise TransportError("device closed the stream")
            self._buf.extend(chunk)


def _stamp_ms() -> float:
    """Wall-clock timestamp rounded to the millisecond."""
    return round(time.time() * 1000.0) / 1000.0


class RecordBuffer:
    """Bounded fan-out ring.

    Each subscription reads records at-most-once in emission order; a
    subscriber that falls more than `capacity` records behind loses the
    oldest ones and is told how many.
    """

    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ValueError("capacity must be > 0")
        self.capacity = capacity
        self._records: list[SampleRecord] = []
        self._base = 0  # global index of _records[0]
        self._cond = threading.Condition()

    @property
    def next_index(self) -> int:
        with self._cond:
            return self._base + len(self._records)

    def append(self, record: SampleRecord) -> None:
        with self._cond:
            self._records.append(record)
            if len(self._records) > self.capacity:
                drop = len(self._records) - self.capacity
                del self._records[:drop]
                self._base += drop
            self._cond.notify_all()

    def subscribe(self) -> "Subscription":
        """New subscribers see only records appended after this call."""
        return Subscription(self, self.next_index)

    def _read_from(self, cursor: int, timeout: float | None):
        with self._cond:
            if timeout is not None:
                end = self._base + len(self._records)
                if cursor >= end:
                    self._cond.wait_for(
                        lambda: self._base + len(self._records) > cursor, timeout
                    )
            dropped = max(0, self._base - cursor)
            cursor += dropped
            batch = self._records[cursor - self._base :]
            return batch, dropped, cursor + len(batch)


class Subscription:
    def __init__(self, buffer: RecordBuffer, cursor: int):
        self._buffer = buffer
        self._cursor = cursor
        self._pending: list[SampleRecord] = []
        self.dropped = 0  # total records this subscriber lost to overflow

    def next(self, timeout: float | None = None) -> SampleRecord | None:
        """Next record in order, or None if nothing arrives within timeout."""
        if not self._pending:
            batch, dropped, self._cursor = self._buffer._read_from(
                self._cursor, timeout
            )
            self.dropped += dropped
            self._pending = list(batch)
        return self._pending.pop(0) if self._pending else None

    def drain(self) -> list[SampleRecord]:
        """Everything currently available, without blocking."""
        out = list(self._pending)
        self._pending.clear()
        batch, dropped, self._cursor = self._buffer._read_from(self._cursor, None)
        self.dropped += dropped
        out.extend(batch)
        return out


class Session:
    """One acquisition run: a polling loop feeding sinks and subscribers."""

    def __init__(self, transport: Endpoint, cfg: AcquisitionConfig,
                 sink: SessionSink | None = None):
        self.transport = transport
        self.cfg = cfg
        self.sink = sink or SessionSink()
        self.summary = SessionSummary()
        self.buffer = RecordBuffer(cfg.buffer_capacity)
        self._poller = Poller(transport, cfg)
        self._stop = threading.Event()
        self._lock = threading.Lock()
        self._last_seq: int | None = None
        self._last_host_time = 0.0

    def subscribe(self) -> Subscription:
        return self.buffer.subscribe()

    def summary_snapshot(self) -> SessionSummary:
        """Consistent copy of the counters (never torn mid-update)."""
        with self._lock:
            return SessionSummary(**self.summary.to_dict())

    def stop(self) -> None:
        self._stop.set()

    def run(self, max_polls: int | None = None) -> SessionSummary:
        """Poll until stopped, the transport ends, or max_polls is reached.

        Blocking; run it in a thread for live use.  The summary always
        satisfies the poll conservation law when it returns.
        """
        period_s = self.cfg.poll_period_ms / 1000.0
        outcome = "completed"
        error: str | None = None
        try:
            while not self._stop.is_set():
                if max_polls is not None and self.summary.polls >= max_polls:
                    break
                poll_started = time.monotonic()
                try:
                    result = self._poller.poll_once()
                except TransportError as exc:
                    outcome = "transport-closed" if self._poller._eof else "transport-error"
                    error = str(exc)
                    break
                self._dispatch(result)
                if self.cfg.paced and not self._stop.is_set():
                    sleep_for = period_s - (time.monotonic() - poll_started)
                    if sleep_for > 0:
                        self._stop.wait(sleep_for)
            if self._stop.is_set():
                outcome = "stopped"
        finally:
            with self._lock:
                self.summary.outcome = outcome
                self.summary.error = error
        return self.summary

    def _dispatch(self, result) -> None:
        with self._lock:
            self.summary.polls += 1
            if isinstance(result, SampleRecord):
                record = self._monotonic_stamp(result)
                gap = self._check_gap(record)
                self.summary.records += 1
                if gap is not None:
                    self.summary.gap_reports += 1
                    self.summary.missed_total += gap.missed_count
            elif isinstance(result, PollTimeout):
                self.summary.timeouts += 1
            else:
                self.summary.decode_errors += 1
        # deliver outside the counter lock: sinks may be slow
        if isinstance(result, SampleRecord):
            if gap is not None:
                self.sink.on_gap(gap)
            self.sink.on_record(record)
            self.buffer.append(record)
        elif isinstance(result, PollTimeout):
            self.sink.on_timeout(result)
        else:
            self.sink.on_decode_error(result)

    def _monotonic_stamp(self, record: SampleRecord) -> SampleRecord:
        # wall clock can step backwards (NTP); record times never do
        host_time = max(record.host_time, self._last_host_time)
        self._last_host_time = host_time
        if host_time != record.host_time:
            record = SampleRecord(
                record.seq, host_time, record.counts, record.volts, record.values
            )
        return record

    def _check_gap(self, record: SampleRecord) -> GapReport | None:
        gap = None
        if self._last_seq is not None:
            expected = (self._last_seq + 1) % 256
            missed = (record.seq - expected) % 256
            if missed:
                gap = GapReport(expected, record.seq, missed, record.host_time)
        self._last_seq = record.seq
        return gap
