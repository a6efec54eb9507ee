"""Wire protocol shared by the simulated device and the host stack.

A data frame is exactly 39 ASCII bytes:

======  =====  ==================================================
offset  width  field
======  =====  ==================================================
0       1      ``$`` sync byte
1       2      sequence number, two uppercase hex digits
3       32     eight channel readings, four decimal digits each,
               zero padded, channel 0 first
35      2      checksum: sum of the ASCII values of bytes 1-34,
               modulo 256, as two uppercase hex digits
37      2      CR LF
======  =====  ==================================================

The poll request is the 3 bytes ``b"P\\r\\n"``.  The device answers each
valid poll with exactly one data frame.  Fixed width plus sync and
checksum make the stream self-delimiting: any single-character
substitution inside the payload is detectable, either as a malformed
field or as a checksum mismatch (the ASCII sum changes by less than 256,
so it never wraps back onto itself).
"""

from __future__ import annotations

import operator
from dataclasses import dataclass

FRAME_LEN = 39
POLL_REQUEST = b"P\r\n"
SYNC = ord("$")
MAX_COUNT = 1023
NUM_CHANNELS = 8

_HEX_DIGITS = frozenset(b"0123456789ABCDEF")
_DEC_DIGITS = frozenset(b"0123456789")


class FrameError(ValueError):
    """Base class for frame construction and parsing failures."""


class InvalidFrame(FrameError):
    """A RawFrame field is outside its allowed range."""


class FrameDecodeError(FrameError):
    """Raised by decode_frame; carries the failure kind and byte offset.

    ``code`` is one of: "length", "sync", "seq", "count", "count-range",
    "terminator", "checksum", "checksum-mismatch".  ``offset`` is the
    byte position where validation failed (0 for a length error).
    """

    def __init__(self, code: str, offset: int, message: str):
        super().__init__(f"{message} (at byte {offset})")
        self.code = code
        self.offset = offset


@dataclass(frozen=True)
class RawFrame:
    """One device report: wrapping sequence number plus 8 ADC readings."""

    seq: int
    counts: tuple[int, ...]

    def __post_init__(self):
        try:
            seq = operator.index(self.seq)
            counts = tuple(operator.index(c) for c in self.counts)
        except TypeError as exc:
            raise InvalidFrame(f"non-integer frame field: {exc}") from None
        if not 0 <= seq <= 255:
            raise InvalidFrame(f"seq {seq} outside 0..255")
        if len(counts) != NUM_CHANNELS:
            raise InvalidFrame(f"expected {NUM_CHANNELS} counts, got {len(counts)}")
        for ch, c in enumerate(counts):
            if not 0 <= c <= MAX_COUNT:
                raise InvalidFrame(f"channel {ch} count {c} outside 0..{MAX_COUNT}")
        object.__setattr__(self, "seq", seq)
        object.__setattr__(self, "counts", counts)


def checksum(body: bytes) -> int:
    """Mod-256 sum of the ASCII byte values of the frame body (bytes 1-34)."""
    return sum(body) % 256


def encode_frame(frame: RawFrame) -> bytes:
    """Render a RawFrame as its 39-byte wire representation."""
    body = "%02X" % frame.seq + "".join("%04d" % c for c in frame.counts)
    raw = body.encode("ascii")
    return b"$" + raw + b"%02X" % checksum(raw) + b"\r\n"


def decode_frame(data: bytes) -> RawFrame:
    """Parse 39 bytes back into a RawFrame, validating every field.

    Total over arbitrary input: any non-conforming byte sequence raises
    FrameDecodeError (never anything else).
    """
    buf = bytes(data)
    if len(buf) != FRAME_LEN:
        raise FrameDecodeError(
            "length", 0, f"expected {FRAME_LEN} bytes, got {len(buf)}"
        )
    if buf[0] != SYNC:
        raise FrameDecodeError("sync", 0, f"expected '$' sync byte, got {buf[0]:#04x}")
    if buf[37] != 0x0D or buf[38] != 0x0A:
        offset = 37 if buf[37] != 0x0D else 38
        raise FrameDecodeError("terminator", offset, "frame must end with CR LF")

    for i in (1, 2):
        if buf[i] not in _HEX_DIGITS:
            raise FrameDecodeError("seq", i, "sequence field is not uppercase hex")
    seq = int(buf[1:3], 16)

    counts = []
    for ch in range(NUM_CHANNELS):
        start = 3 + 4 * ch
        field = buf[start : start + 4]
        for j, b in enumerate(field):
            if b not in _DEC_DIGITS:
                raise FrameDecodeError(
                    "count", start + j, f"channel {ch} field is not decimal"
                )
        value = int(field)
        if value > MAX_COUNT:
            raise FrameDecodeError(
                "count-range", start, f"channel {ch} count {value} exceeds {MAX_COUNT}"
            )
        counts.append(value)

    for i in (35, 36):
        if buf[i] not in _HEX_DIGITS:
            raise FrameDecodeError("checksum", i, "checksum field is not uppercase hex")
    stated = int(buf[35:37], 16)
    actual = checksum(buf[1:35])
    if stated != actual:
        raise FrameDecodeError(
            "checksum-mismatch",
            35,
            f"checksum {stated:#04x} does not match computed {actual:#04x}",
        )
    return RawFrame(seq, tuple(counts))


def encode_poll() -> bytes:
    return POLL_REQUEST


def is_poll(data: bytes) -> bool:
    return bytes(data) == POLL_REQUEST
