"""CSV logging of sample records, and the reader that round-trips them.

Schema (one header row, then one row per record):

    timestamp,seq,ch0_counts,ch0_volts,ch0_value[degC],ch0_flag,ch1_counts,...

* timestamp is ISO-8601 UTC with milliseconds ("2026-08-10T12:00:00.000Z")
* counts and volts appear for every logged channel; value and flag only
  for channels that have a calibration map (the unit rides in the header)
* volts print with 4 decimal places, engineering values with 3 by
  default -- 3 places is also the enforced minimum, since one ADC step
  is 0.0489 degC / 0.0978 %RH and fewer places would alias codes

The writer's byte output is deterministic for a given input and policy,
so a reconstructed waveform is reproducible from the file alone.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .acquisition import ChannelValue, SampleRecord
from .codec import NUM_CHANNELS
from .conversion import QualityFlag


class LogFormatError(ValueError):
    """A log file violates the documented schema; carries the line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class LogPolicy:
    directory: str = "."
    pattern: str = "acq_{stamp}.csv"  # {stamp} -> UTC YYYYmmdd_HHMMSS
    flush_interval: int = 100  # records between forced flushes
    value_places: int = 3
    volts_places: int = 4

    def __post_init__(self):
        if self.flush_interval < 1:
            raise ValueError("flush_interval must be >= 1")
        if self.value_places < 3:
            raise ValueError("value precision below 3 places would alias ADC steps")
        if self.volts_places < 4:
            raise ValueError("volts precision below 4 places would alias ADC steps")

    def make_path(self, now: float | None = None) -> str:
        stamp = format_timestamp(now if now is not None else _utcnow())
        stamp = stamp.replace("-", "").replace(":", "").replace(".", "")
        stamp = stamp[:8] + "_" + stamp[9:15]  # YYYYmmdd_HHMMSS
        return os.path.join(self.directory, self.pattern.format(stamp=stamp))


@dataclass(frozen=True)
class ChannelColumn:
    channel: int
    unit: str | None  # None -> counts/volts only, no value/flag columns


@dataclass
class LogSchema:
    """Which channels a file carries, in column order, with their units."""

    channels: list[ChannelColumn] = field(default_factory=list)

    @classmethod
    def for_channels(cls, channels, maps) -> "LogSchema":
        cols = []
        for ch in sorted(set(channels)):
            if not 0 <= ch < NUM_CHANNELS:
                raise ValueError(f"channel {ch} outside 0..{NUM_CHANNELS - 1}")
            m = maps.get(ch)
            cols.append(ChannelColumn(ch, m.unit if m is not None else None))
        return cls(cols)

    @classmethod
    def from_record(cls, record: SampleRecord, channels=None) -> "LogSchema":
        chans = sorted(set(channels)) if channels is not None else range(NUM_CHANNELS)
        cols = []
        for ch in chans:
            cv = record.values.get(ch)
            cols.append(ChannelColumn(ch, cv.unit if cv is not None else None))
        return cls(cols)

    def header_fields(self) -> list[str]:
        fields = ["timestamp", "seq"]
        for col in self.channels:
            fields.append(f"ch{col.channel}_counts")
            fields.append(f"ch{col.channel}_volts")
            if col.unit is not None:
                fields.append(f"ch{col.channel}_value[{col.unit}]")
                fields.append(f"ch{col.channel}_flag")
        return fields


def _utcnow() -> float:
    return datetime.now(timezone.utc).timestamp()


def format_timestamp(epoch_s: float) -> str:
    # integer ms arithmetic: float microseconds would mis-round at the
    # .xx9999 boundaries for large epochs
    ms_total = round(epoch_s * 1000)
    dt = datetime.fromtimestamp(ms_total // 1000, timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{ms_total % 1000:03d}Z"


def parse_timestamp(text: str) -> float:
    if not text.endswith("Z"):
        raise ValueError(f"timestamp {text!r} is not UTC ISO-8601 with Z suffix")
    dt = datetime.strptime(text[:-1], "%Y-%m-%dT%H:%M:%S.%f")
    return dt.replace(tzinfo=timezone.utc).timestamp()


def format_row(record: SampleRecord, schema: LogSchema, policy: LogPolicy) -> str:
    fields = [format_timestamp(record.host_time), str(record.seq)]
    for col in schema.channels:
        fields.append(str(record.counts[col.channel]))
        fields.append(f"{record.volts[col.channel]:.{policy.volts_places}f}")
        if col.unit is not None:
            cv = record.values.get(col.channel)
            if cv is None:
                raise ValueError(
                    f"schema expects a value for channel {col.channel} "
                    "but the record has no map for it"
                )
            fields.append(f"{cv.value:.{policy.value_places}f}")
            fields.append(cv.flag.value)
    return ",".join(fields)


class LogWriter:
    """Streaming writer: header on open, flush every flush_interval records.

    Killing the process mid-run leaves a parseable file containing every
    flushed row; only the tail since the last flush can be lost.
    """

    def __init__(self, path, schema: LogSchema, policy: LogPolicy | None = None):
        self.path = str(path)
        self.schema = schema
        self.policy = policy or LogPolicy()
        self.rows_written = 0
        self._since_flush = 0
        self._fh = open(self.path, "w", newline="")
        self._fh.write(",".join(schema.header_fields()) + "\n")
        self._fh.flush()

    def write(self, record: SampleRecord) -> None:
        self._fh.write(format_row(record, self.schema, self.policy) + "\n")
        self.rows_written += 1
        self._since_flush += 1
        if self._since_flush >= self.policy.flush_interval:
            self.flush()

    def flush(self) -> None:
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._since_flush = 0

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_log(path, records, schema: LogSchema | None = None,
              policy: LogPolicy | None = None, channels=None) -> str:
    """Write a complete record list; returns the path.

    The schema defaults to what the first record carries (all eight
    channels, or the subset in `channels`).  An explicit schema is
    required to write a header-only file from an empty list.
    """
    records = list(records)
    if schema is None:
        if not records:
            raise ValueError("an explicit schema is required for an empty record list")
        schema = LogSchema.from_record(records[0], channels)
    with LogWriter(path, schema, policy) as writer:
        for rec in records:
            writer.write(rec)
    return str(path)


@dataclass(frozen=True)
class LoggedRow:
    """One parsed log row; channel fields keyed by channel id."""

    host_time: float
    seq: int
    counts: dict[int, int]
    volts: dict[int, float]
    values: dict[int, ChannelValue]


_HEADER_PATTERNS = [
    (re.compile(r"^ch(\d+)_counts$"), "counts"),
    (re.compile(r"^ch(\d+)_volts$"), "volts"),
    (re.compile(r"^ch(\d+)_value\[(.+)\]$"), "value"),
    (re.compile(r"^ch(\d+)_flag$"), "flag"),
]

_FLAGS = {f.value: f for f in QualityFlag}


def _parse_header(fields: list[str]) -> LogSchema:
    if fields[:2] != ["timestamp", "seq"]:
        raise LogFormatError(1, "header must start with timestamp,seq")
    cols: list[ChannelColumn] = []
    i = 2
    while i < len(fields):
        m = _HEADER_PATTERNS[0][0].match(fields[i])
        if not m:
            raise LogFormatError(1, f"unknown header column {fields[i]!r}")
        ch = int(m.group(1))
        if i + 1 >= len(fields) or fields[i + 1] != f"ch{ch}_volts":
            raise LogFormatError(1, f"channel {ch} is missing its volts column")
        unit = None
        width = 2
        if i + 2 < len(fields):
            mv = _HEADER_PATTERNS[2][0].match(fields[i + 2])
            if mv and int(mv.group(1)) == ch:
                unit = mv.group(2)
                if i + 3 >= len(fields) or fields[i + 3] != f"ch{ch}_flag":
                    raise LogFormatError(1, f"channel {ch} is missing its flag column")
                width = 4
        cols.append(ChannelColumn(ch, unit))
        i += width
    if not cols:
        raise LogFormatError(1, "header declares no channels")
    return LogSchema(cols)


def read_log(path) -> tuple[LogSchema, list[LoggedRow]]:
    """Parse a log file back into rows plus the schema from its header.

    Tolerates a missing final newline.  A malformed row (including a
    truncated last line) raises LogFormatError naming the failing line.
    """
    with open(path, "r", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise LogFormatError(1, "empty file")
    # writer emits \n, but accept files rewritten with CRLF
    fields = lines[0].rstrip("\r").split(",")
    schema = _parse_header(fields)
    expected_width = len(schema.header_fields())

    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.rstrip("\r").split(",")
        if len(parts) != expected_width:
            raise LogFormatError(
                lineno,
                f"expected {expected_width} fields, got {len(parts)} "
                "(truncated or malformed row)",
            )
        try:
            rows.append(_parse_row(parts, schema))
        except (ValueError, KeyError) as exc:
            raise LogFormatError(lineno, str(exc)) from None
    return schema, rows


def _parse_row(parts: list[str], schema: LogSchema) -> LoggedRow:
    host_time = parse_timestamp(parts[0])
    seq = int(parts[1])
    if not 0 <= seq <= 255:
        raise ValueError(f"seq {seq} outside 0..255")
    counts: dict[int, int] = {}
    volts: dict[int, float] = {}
    values: dict[int, ChannelValue] = {}
    i = 2
    for col in schema.channels:
        counts[col.channel] = int(parts[i])
        volts[col.channel] = float(parts[i + 1])
        i += 2
        if col.unit is not None:
            value = float(parts[i])
            flag_text = parts[i + 1]
            if flag_text not in _FLAGS:
                raise ValueError(f"unknown quality flag {flag_text!r}")
            values[col.channel] = ChannelValue(value, col.unit, _FLAGS[flag_text])
            i += 2
    return LoggedRow(host_time, seq, counts, volts, values)


def read_series(path, channel: int, field_name: str = "value",
                time_base: str = "wall"):
    """Extract one channel's column as an analysis Series.

    time_base "wall" uses elapsed seconds since the first record;
    "index" uses the sample index (0, 1, 2, ...), the right choice for
    virtual-clock runs where wall time is compressed.
    """
    from .analysis import Series

    schema, rows = read_log(path)
    col = next((c for c in schema.channels if c.channel == channel), None)
    if col is None:
        raise KeyError(f"channel {channel} is not in this log")
    if field_name == "value":
        if col.unit is None:
            raise KeyError(f"channel {channel} has no value column")
        data = [r.values[channel].value for r in rows]
        unit = col.unit
    elif field_name == "volts":
        data = [r.volts[channel] for r in rows]
        unit = "V"
    elif field_name == "counts":
        data = [float(r.counts[channel]) for r in rows]
        unit = "counts"
    else:
        raise ValueError(f"unknown field {field_name!r}")

    if time_base == "index":
        times = [float(i) for i in range(len(rows))]
    elif time_base == "wall":
        t0 = rows[0].host_time if rows else 0.0
        times = [r.host_time - t0 for r in rows]
    else:
        raise ValueError(f"unknown time_base {time_base!r}")
    return Series(unit, times, data)


def read_truth_csv(path, channel: int):
    """Series from a simulator ground-truth export (time_s,chN[unit],...)."""
    from .analysis import Series

    with open(path, "r", newline="") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    if not lines:
        raise LogFormatError(1, "empty file")
    header = lines[0].split(",")
    if header[0] != "time_s":
        raise LogFormatError(1, "truth file must start with a time_s column")
    idx = None
    unit = ""
    for i, name in enumerate(header[1:], start=1):
        m = re.match(r"^ch(\d+)\[(.*)\]$", name)
        if m and int(m.group(1)) == channel:
            idx, unit = i, m.group(2)
            break
    if idx is None:
        raise KeyError(f"channel {channel} is not in this truth file")
    times, values = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise LogFormatError(lineno, "truncated or malformed row")
        times.append(float(parts[0]))
        values.append(float(parts[idx]))
    return Series(unit, times, values)
