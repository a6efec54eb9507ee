"""CSV schema, deterministic output, round-trips, failure reporting."""

import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from octodaq.acquisition import record_from_counts
from octodaq.conversion import HUMIDITY, TEMPERATURE
from octodaq.csvlog import (
    LogFormatError,
    LogPolicy,
    LogSchema,
    LogWriter,
    format_timestamp,
    parse_timestamp,
    read_log,
    read_series,
    write_log,
)

MAPS = {0: TEMPERATURE, 3: HUMIDITY}
T0 = 1765359000.0  # arbitrary epoch anchor, ms-aligned


def make_records(n, maps=MAPS, seed=0):
    rng = random.Random(seed)
    records = []
    for i in range(n):
        counts = tuple(rng.randrange(1024) for _ in range(8))
        records.append(record_from_counts(i % 256, counts, T0 + i * 0.25, maps))
    return records


class TestTimestamps:
    def test_format_is_iso_utc_ms(self):
        assert format_timestamp(0.0) == "1970-01-01T00:00:00.000Z"
        assert format_timestamp(1.5) == "1970-01-01T00:00:01.500Z"

    @given(st.integers(0, 4102444800_000))
    def test_round_trip_at_ms_resolution(self, ms):
        epoch = ms / 1000.0
        assert parse_timestamp(format_timestamp(epoch)) == pytest.approx(
            epoch, abs=2e-6
        )

    def test_rejects_non_utc(self):
        with pytest.raises(ValueError):
            parse_timestamp("2026-08-10T12:00:00.000+05:30")


class TestWrite:
    def test_known_row_content(self, tmp_path):
        rec = record_from_counts(7, (512,) + (0,) * 7, T0, {0: TEMPERATURE})
        path = write_log(tmp_path / "x.csv", [rec], channels=[0])
        header, row = open(path).read().strip().split("\n")
        assert header == "timestamp,seq,ch0_counts,ch0_volts,ch0_value[degC],ch0_flag"
        assert row.endswith(",7,512,2.5024,25.024,ok")

    def test_deterministic_bytes(self, tmp_path):
        records = make_records(50)
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        write_log(a, records)
        write_log(b, records)
        assert a.read_bytes() == b.read_bytes()

    def test_empty_records_header_only(self, tmp_path):
        schema = LogSchema.for_channels([0, 3], MAPS)
        path = write_log(tmp_path / "empty.csv", [], schema=schema)
        text = open(path).read()
        assert text.count("\n") == 1
        got_schema, rows = read_log(path)
        assert rows == []
        assert [c.channel for c in got_schema.channels] == [0, 3]
        assert [c.unit for c in got_schema.channels] == ["degC", "%RH"]

    def test_empty_without_schema_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_log(tmp_path / "x.csv", [])

    def test_policy_minimum_precision(self):
        with pytest.raises(ValueError):
            LogPolicy(value_places=2)
        with pytest.raises(ValueError):
            LogPolicy(volts_places=3)


class TestRoundTrip:
    def assert_rows_match(self, records, rows, schema, policy):
        assert len(rows) == len(records)
        for rec, row in zip(records, rows):
            assert row.seq == rec.seq
            assert row.host_time == pytest.approx(rec.host_time, abs=1e-6)
            for col in schema.channels:
                ch = col.channel
                assert row.counts[ch] == rec.counts[ch]
                assert row.volts[ch] == pytest.approx(
                    rec.volts[ch], abs=10 ** -policy.volts_places / 2
                )
                if col.unit is not None:
                    assert row.values[ch].value == pytest.approx(
                        rec.values[ch].value, abs=10 ** -policy.value_places / 2
                    )
                    assert row.values[ch].flag == rec.values[ch].flag
                    assert row.values[ch].unit == rec.values[ch].unit

    def test_thousand_records(self, tmp_path):
        records = make_records(1000)
        path = write_log(tmp_path / "run.csv", records)
        schema, rows = read_log(path)
        self.assert_rows_match(records, rows, schema, LogPolicy())

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 255),
                              st.tuples(*[st.integers(0, 1023)] * 8)),
                    min_size=1, max_size=20))
    def test_arbitrary_records(self, raw):
        import tempfile

        records = [
            record_from_counts(seq, counts, T0 + i, MAPS)
            for i, (seq, counts) in enumerate(raw)
        ]
        with tempfile.TemporaryDirectory() as tmp:
            path = write_log(f"{tmp}/r.csv", records)
            schema, rows = read_log(path)
        self.assert_rows_match(records, rows, schema, LogPolicy())

    def test_trailing_newline_tolerated(self, tmp_path):
        records = make_records(3)
        path = write_log(tmp_path / "r.csv", records)
        with open(path, "a") as fh:
            fh.write("\n")  # duplicate final newline
        # a fully blank trailing line is not a record row
        with pytest.raises(LogFormatError):
            read_log(path)


class TestReadErrors:
    def test_truncated_last_line_cites_line_number(self, tmp_path):
        records = make_records(10)
        path = write_log(tmp_path / "r.csv", records)
        text = open(path).read()
        cut = text[: len(text) - 30]  # chop mid-row
        broken = tmp_path / "broken.csv"
        broken.write_text(cut)
        with pytest.raises(LogFormatError) as exc:
            read_log(broken)
        assert exc.value.line == 11  # header + 10 rows; the last is mangled

    def test_unknown_header_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("timestamp,seq,ch0_counts,ch0_volts,ch0_banana\n")
        with pytest.raises(LogFormatError) as exc:
            read_log(path)
        assert exc.value.line == 1

    def test_bad_flag_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "timestamp,seq,ch0_counts,ch0_volts,ch0_value[degC],ch0_flag\n"
            "2026-08-10T00:00:00.000Z,0,512,2.5024,25.024,meh\n"
        )
        with pytest.raises(LogFormatError) as exc:
            read_log(path)
        assert exc.value.line == 2

    def test_header_only_is_valid(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("timestamp,seq,ch2_counts,ch2_volts\n")
        schema, rows = read_log(path)
        assert rows == []
        assert schema.channels[0].channel == 2
        assert schema.channels[0].unit is None


class TestWriterDurability:
    def test_flushed_rows_survive_abandoned_writer(self, tmp_path):
        path = tmp_path / "crash.csv"
        schema = LogSchema.for_channels([0], {0: TEMPERATURE})
        writer = LogWriter(path, schema, LogPolicy(flush_interval=5))
        records = make_records(12, maps={0: TEMPERATURE})
        for rec in records:
            writer.write(rec)
        # writer is abandoned without close(); everything through the last
        # flush (record 10) must already be parseable on disk
        schema2, rows = read_log(path)
        assert len(rows) >= 10

    def test_file_named_from_pattern(self, tmp_path):
        policy = LogPolicy(directory=str(tmp_path), pattern="run_{stamp}.csv")
        path = policy.make_path(now=0.0)
        assert path.endswith("run_19700101_000000.csv")


class TestReadSeries:
    def test_value_series_wall_and_index(self, tmp_path):
        records = make_records(5)
        path = write_log(tmp_path / "r.csv", records)
        wall = read_series(path, 0)
        assert wall.unit == "degC"
        assert list(wall.times) == [0.0, 0.25, 0.5, 0.75, 1.0]
        idx = read_series(path, 0, time_base="index")
        assert list(idx.times) == [0.0, 1.0, 2.0, 3.0, 4.0]

    def test_missing_channel_raises(self, tmp_path):
        records = make_records(3)
        path = write_log(tmp_path / "r.csv", records)
        with pytest.raises(KeyError):
            read_series(path, 5)  # logged but unmapped: no value column
