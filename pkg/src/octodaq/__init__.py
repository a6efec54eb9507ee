"""octodaq: software twin of an 8-channel, 10-bit polled USB DAQ.

A bit-faithful device simulator plus the host stack that talks to it:
wire codec, polling engine, unit conversion, CSV logging, an HTTP
control/streaming service, and agreement analysis for scoring acquired
runs against ground truth.
"""

__version__ = "0.1.0"

from .acquisition import (
    AcquisitionConfig,
    ChannelValue,
    GapReport,
    SampleRecord,
    Session,
    SessionSink,
    SessionSummary,
    Subscription,
)
from .analysis import AgreementStats, Series, align, compare
from .codec import (
    FrameDecodeError,
    InvalidFrame,
    RawFrame,
    decode_frame,
    encode_frame,
    encode_poll,
    is_poll,
)
from .conversion import (
    HUMIDITY,
    PRESETS,
    TEMPERATURE,
    LinearMap,
    QualityFlag,
    apply_map,
    counts_to_volts,
    invert_map,
    lsb_in_units,
    lsb_volts,
    volts_to_counts,
    zener_clamp,
)
from .csvlog import LogPolicy, LogSchema, LogWriter, read_log, write_log
from .simulator import (
    ChannelSource,
    ConstantSource,
    DeviceSimulator,
    RampSource,
    ReplaySource,
    SimConfig,
    SineSource,
    VirtualClock,
    sample_channel,
)
from .transport import Endpoint, TransportError, connect_tcp, pipe_pair

__all__ = [
    "AcquisitionConfig",
    "AgreementStats",
    "ChannelSource",
    "ChannelValue",
    "ConstantSource",
    "DeviceSimulator",
    "Endpoint",
    "FrameDecodeError",
    "GapReport",
    "HUMIDITY",
    "InvalidFrame",
    "LinearMap",
    "LogPolicy",
    "LogSchema",
    "LogWriter",
    "PRESETS",
    "QualityFlag",
    "RampSource",
    "RawFrame",
    "ReplaySource",
    "SampleRecord",
    "Series",
    "Session",
    "SessionSink",
    "SessionSummary",
    "SimConfig",
    "SineSource",
    "Subscription",
    "TEMPERATURE",
    "TransportError",
    "VirtualClock",
    "align",
    "apply_map",
    "compare",
    "connect_tcp",
    "counts_to_volts",
    "decode_frame",
    "encode_frame",
    "encode_poll",
    "invert_map",
    "is_poll",
    "lsb_in_units",
    "lsb_volts",
    "pipe_pair",
    "read_log",
    "sample_channel",
    "volts_to_counts",
    "write_log",
    "zener_clamp",
]
