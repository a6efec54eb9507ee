"""Operator command line: simulate, acquire, serve, convert, compare.

Every subcommand prints machine-readable JSON on stdout and diagnostics
on stderr.  Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
import threading

from .acquisition import AcquisitionConfig, Session, SessionSink
from .codec import NUM_CHANNELS
from .config import (
    ConfigError,
    load_service_settings,
    load_sim_config,
    parse_map,
)
from .conversion import PRESETS, apply_map, counts_to_volts
from .csvlog import LogPolicy, LogSchema, LogWriter, read_series, read_truth_csv
from .analysis import compare, write_comparison_csv, align
from .service import DasService
from .simulator import DeviceSimulator
from .transport import StdioEndpoint, TransportError, connect_tcp, listen_tcp


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # spec'd exit codes: usage errors are 1, not argparse's default 2
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="octodaq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the device simulator")
    p.add_argument("--config", required=True, help="simulator config JSON")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--listen", help="serve the protocol on host:port (port 0 picks one)")
    mode.add_argument("--stdio", action="store_true", help="speak the protocol on stdin/stdout")
    p.add_argument("--virtual-clock", action="store_true",
                   help="force the virtual clock regardless of the config file")
    p.add_argument("--truth", help="write the ground-truth CSV here on exit")

    p = sub.add_parser("acquire", help="poll a device and log to CSV")
    p.add_argument("--device", required=True, help="device address host:port")
    p.add_argument("--period", type=int, default=1000, help="poll period, ms")
    p.add_argument("--timeout", type=int, default=250, help="response timeout, ms")
    p.add_argument("--duration", type=int, required=True, help="number of polls")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--map", action="append", default=[], metavar="CH=PRESET",
                   help="calibration, e.g. 0=temperature (repeatable)")
    p.add_argument("--channels", default=None,
                   help="comma-separated channels to log (default: all)")
    p.add_argument("--unpaced", action="store_true",
                   help="poll back-to-back instead of every --period ms")

    p = sub.add_parser("serve", help="run the control/streaming HTTP service")
    p.add_argument("--config", help="service config JSON")
    p.add_argument("--listen", help="override listen address")
    p.add_argument("--device", help="override device address")
    p.add_argument("--assets", help="override dashboard assets directory")

    p = sub.add_parser("convert", help="convert an ADC count to volts/units")
    p.add_argument("--counts", type=int, required=True)
    p.add_argument("--map", choices=sorted(PRESETS), default=None)

    p = sub.add_parser("compare", help="agreement stats between two series")
    p.add_argument("--a", required=True, dest="file_a")
    p.add_argument("--b", required=True, dest="file_b")
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--index-time", action="store_true",
                   help="pair by sample index (virtual-clock runs)")
    p.add_argument("--plot-out", help="write aligned time,a,b,diff CSV here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, TransportError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 0


def _cmd_simulate(args) -> int:
    cfg = load_sim_config(args.config)
    if args.virtual_clock:
        cfg.clock = "virtual"
    sim = DeviceSimulator(cfg)
    stop = threading.Event()

    def _on_signal(signum, frame):
        stop.set()
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, _on_signal)
    try:
        if args.stdio:
            sim.serve(StdioEndpoint())
        else:
            server = listen_tcp(args.listen)
            host, port = server.getsockname()[:2]
            print(json.dumps({"listening": f"{host}:{port}"}), flush=True)
            sim.serve_tcp(server, stop=stop)
    except KeyboardInterrupt:
        pass
    finally:
        if args.truth:
            sim.export_truth_csv(args.truth)
            print(json.dumps({"truth": args.truth,
                              "frames_generated": sim.frames_generated}),
                  file=sys.stderr)
    return 0


class _CsvSink(SessionSink):
    def __init__(self, writer: LogWriter | None):
        self.writer = writer

    def on_record(self, record):
        if self.writer is not None:
            self.writer.write(record)


def _parse_map_args(pairs) -> dict:
    maps = {}
    for item in pairs:
        ch_text, sep, name = item.partition("=")
        if not sep:
            raise UsageError(f"--map expects CH=PRESET, got {item!r}")
        ch = int(ch_text)
        if not 0 <= ch < NUM_CHANNELS:
            raise UsageError(f"--map channel {ch} outside 0..{NUM_CHANNELS - 1}")
        maps[ch] = parse_map(name, f"--map {item}")
    return maps


def _cmd_acquire(args) -> int:
    maps = _parse_map_args(args.map)
    channels = (tuple(int(c) for c in args.channels.split(","))
                if args.channels else tuple(range(NUM_CHANNELS)))
    cfg = AcquisitionConfig(
        poll_period_ms=args.period,
        response_timeout_ms=args.timeout,
        enabled_channels=channels,
        channel_maps=maps,
        paced=not args.unpaced,
    )
    transport = connect_tcp(args.device)
    writer = None
    if args.out:
        schema = LogSchema.for_channels(cfg.enabled_channels, cfg.channel_maps)
        writer = LogWriter(args.out, schema, LogPolicy())
    session = Session(transport, cfg, _CsvSink(writer))
    signal.signal(signal.SIGTERM, lambda s, f: session.stop())
    signal.signal(signal.SIGINT, lambda s, f: session.stop())
    try:
        summary = session.run(max_polls=args.duration)
    finally:
        if writer is not None:
            writer.close()
        transport.close()
    print(json.dumps(summary.to_dict()))
    return 0 if summary.outcome in ("completed", "stopped") else 2


def _cmd_serve(args) -> int:
    settings = load_service_settings(args.config) if args.config else None
    if settings is None:
        from .config import ServiceSettings

        settings = ServiceSettings()
    if args.listen:
        settings.listen = args.listen
    if args.device:
        settings.device = args.device
    if args.assets:
        settings.assets_dir = args.assets
    service = DasService(settings)
    print(json.dumps({"listening": service.address}), flush=True)

    def _terminate(signum, frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, _terminate)
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
    return 0


def _cmd_convert(args) -> int:
    volts = counts_to_volts(args.counts)
    out = {"counts": args.counts, "volts": round(volts, 6)}
    if args.map:
        m = PRESETS[args.map]
        value, flag = apply_map(m, volts)
        out.update({"value": round(value, 6), "unit": m.unit, "flag": flag.value})
    print(json.dumps(out))
    return 0


def _load_series(path, channel, index_time):
    with open(path) as fh:
        header = fh.readline()
    if header.startswith("time_s"):
        return read_truth_csv(path, channel)
    try:
        return read_series(path, channel,
                           time_base="index" if index_time else "wall")
    except ValueError as exc:
        if "strictly increasing" in str(exc) and not index_time:
            raise ValueError(
                f"{path}: wall-clock timestamps are not strictly increasing "
                "(back-to-back virtual-clock run?); retry with --index-time"
            ) from exc
        raise


def _cmd_compare(args) -> int:
    a = _load_series(args.file_a, args.channel, args.index_time)
    b = _load_series(args.file_b, args.channel, args.index_time)
    stats = compare(a, b)
    if args.plot_out:
        t, av, bv = align(a, b)
        write_comparison_csv(args.plot_out, t, av, bv)
    print(json.dumps({"unit": a.unit, **stats.to_dict()}))
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "acquire": _cmd_acquire,
    "serve": _cmd_serve,
    "convert": _cmd_convert,
    "compare": _cmd_compare,
}


if __name__ == "__main__":
    sys.exit(main())
