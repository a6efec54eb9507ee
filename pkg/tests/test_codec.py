"""Frame codec: layout, round-trips, corruption detection, totality."""

import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from octodaq.codec import (
    FRAME_LEN,
    POLL_REQUEST,
    FrameDecodeError,
    InvalidFrame,
    RawFrame,
    decode_frame,
    encode_frame,
    encode_poll,
    is_poll,
)


def oracle_checksum(encoded: bytes) -> int:
    """Independent checksum: iterate the payload bytes one by one."""
    total = 0
    for b in encoded[1:35]:
        total = (total + b) % 256
    return total


frames = st.builds(
    RawFrame,
    seq=st.integers(0, 255),
    counts=st.tuples(*[st.integers(0, 1023)] * 8),
)


class TestEncode:
    def test_all_zeros_frame(self):
        # 34 payload bytes, each ASCII '0' (48): sum 1632, mod 256 = 0x60
        assert 34 * ord("0") % 256 == 0x60
        encoded = encode_frame(RawFrame(0, (0,) * 8))
        assert encoded == b"$00" + b"0" * 32 + b"60\r\n"
        assert oracle_checksum(encoded) == 0x60

    def test_full_scale_first_channel(self):
        encoded = encode_frame(RawFrame(0, (1023, 0, 0, 0, 0, 0, 0, 0)))
        assert encoded[3:7] == b"1023"
        for ch in range(1, 8):
            assert encoded[3 + 4 * ch : 7 + 4 * ch] == b"0000"
        stated = int(encoded[35:37], 16)
        assert stated == oracle_checksum(encoded)

    def test_length_is_always_39(self):
        for seq, counts in [(0, (0,) * 8), (255, (1023,) * 8), (17, tuple(range(8)))]:
            assert len(encode_frame(RawFrame(seq, counts))) == FRAME_LEN

    @pytest.mark.parametrize(
        "seq,counts",
        [
            (-1, (0,) * 8),
            (256, (0,) * 8),
            (0, (0,) * 7),
            (0, (0,) * 9),
            (0, (1024,) + (0,) * 7),
            (0, (-1,) + (0,) * 7),
        ],
    )
    def test_invalid_frames_rejected(self, seq, counts):
        with pytest.raises(InvalidFrame):
            RawFrame(seq, counts)

    def test_non_integer_counts_rejected(self):
        with pytest.raises(InvalidFrame):
            RawFrame(0, (1.5,) + (0,) * 7)


class TestDecode:
    def test_all_zeros_inverse(self):
        frame = decode_frame(b"$00" + b"0" * 32 + b"60\r\n")
        assert frame.seq == 0
        assert frame.counts == (0,) * 8

    def test_single_corrupted_digit_fails_checksum(self):
        encoded = bytearray(encode_frame(RawFrame(0, (0,) * 8)))
        encoded[3] = ord("1")  # checksum left untouched
        with pytest.raises(FrameDecodeError) as exc:
            decode_frame(bytes(encoded))
        assert exc.value.code == "checksum-mismatch"

    def test_empty_input_is_wrong_length(self):
        with pytest.raises(FrameDecodeError) as exc:
            decode_frame(b"")
        assert exc.value.code == "length"

    @pytest.mark.parametrize(
        "mangle,code,offset",
        [
            (lambda b: b[:20], "length", 0),
            (lambda b: b + b"x", "length", 0),
            (lambda b: b"#" + b[1:], "sync", 0),
            (lambda b: b[:1] + b"g" + b[2:], "seq", 1),
            (lambda b: b[:2] + b"a" + b[3:], "seq", 2),  # lowercase rejected
            (lambda b: b[:5] + b"A" + b[6:], "count", 5),
            (lambda b: b[:3] + b"9999" + b[7:], "count-range", 3),
            (lambda b: b[:35] + b"g" + b[36:], "checksum", 35),
            (lambda b: b[:37] + b"\n\r", "terminator", 37),
        ],
    )
    def test_error_taxonomy_and_offsets(self, mangle, code, offset):
        good = encode_frame(RawFrame(66, (1, 2, 3, 4, 5, 6, 7, 8)))
        with pytest.raises(FrameDecodeError) as exc:
            decode_frame(mangle(good))
        assert exc.value.code == code
        assert exc.value.offset == offset

    def test_count_range_checked_even_with_matching_checksum(self):
        # hand-build a frame whose checksum is valid but counts overflow
        body = b"00" + b"1024" + b"0000" * 7
        raw = b"$" + body + b"%02X" % (sum(body) % 256) + b"\r\n"
        with pytest.raises(FrameDecodeError) as exc:
            decode_frame(raw)
        assert exc.value.code == "count-range"


class TestRoundTrip:
    @given(frames)
    def test_random_frames(self, frame):
        assert decode_frame(encode_frame(frame)) == frame

    def test_exhaustive_over_seq(self):
        counts = (0, 1, 512, 1023, 7, 99, 1000, 333)
        for seq in range(256):
            frame = RawFrame(seq, counts)
            assert decode_frame(encode_frame(frame)) == frame


LEGAL_ALPHABET = b"0123456789ABCDEF"


class TestCorruptionDetection:
    def test_every_single_substitution_rejected(self):
        rng = random.Random(1234)
        for _ in range(25):
            frame = RawFrame(
                rng.randrange(256), tuple(rng.randrange(1024) for _ in range(8))
            )
            encoded = encode_frame(frame)
            for pos in range(1, 35):
                for repl in LEGAL_ALPHABET:
                    if repl == encoded[pos]:
                        continue
                    mutated = encoded[:pos] + bytes([repl]) + encoded[pos + 1 :]
                    with pytest.raises(FrameDecodeError):
                        decode_frame(mutated)

    @given(st.binary(max_size=4096))
    @settings(max_examples=300)
    def test_decode_is_total_over_arbitrary_bytes(self, data):
        try:
            decode_frame(data)
        except FrameDecodeError:
            pass  # the only permitted failure mode

    @given(frames, st.integers(0, FRAME_LEN - 1), st.integers(0, 255))
    def test_decode_never_crashes_on_byte_flips(self, frame, pos, value):
        encoded = bytearray(encode_frame(frame))
        encoded[pos] = value
        try:
            result = decode_frame(bytes(encoded))
        except FrameDecodeError:
            return
        if value == encode_frame(frame)[pos]:
            assert result == frame


class TestPoll:
    def test_poll_request_constant(self):
        assert encode_poll() == b"P\r\n"
        assert encode_poll() == POLL_REQUEST

    def test_is_poll(self):
        assert is_poll(b"P\r\n")
        assert not is_poll(b"Q\r\n")
        assert not is_poll(b"P\r\nP\r\n")
        assert not is_poll(b"")
        assert not is_poll(b"P\n")
