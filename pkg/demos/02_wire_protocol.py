"""
The 39-byte wire protocol
=========================

Each poll request ("P" CR LF) is answered with one fixed-width ASCII
frame: sync byte, hex sequence number, eight 4-digit channel readings,
mod-256 checksum, CR LF.  Fixed width plus checksum makes the stream
self-delimiting and any single-character corruption detectable.
"""

from octodaq import RawFrame, decode_frame, encode_frame, encode_poll
from octodaq.codec import FrameDecodeError

frame = RawFrame(seq=66, counts=(512, 0, 0, 1023, 204, 0, 0, 7))
wire = encode_frame(frame)
print(f"poll request : {encode_poll()!r}")
print(f"data frame   : {wire!r}")
print(f"frame length : {len(wire)} bytes")

# the frame parses back to exactly what went in
assert decode_frame(wire) == frame
print(f"decoded      : seq={decode_frame(wire).seq} counts={decode_frame(wire).counts}")

# flip one payload character and the checksum catches it
corrupted = wire[:4] + b"9" + wire[5:]
try:
    decode_frame(corrupted)
except FrameDecodeError as exc:
    print(f"corrupted    : rejected ({exc.code} at byte {exc.offset})")

# arbitrary garbage is rejected too, never crashes the decoder
for blob in (b"", b"hello world", bytes(range(39))):
    try:
        decode_frame(blob)
    except FrameDecodeError as exc:
        print(f"garbage {str(blob[:12]):24s} -> {exc.code}")
