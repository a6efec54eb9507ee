"""Control and live-streaming HTTP+JSON service over one acquisition.

The ServiceController is the phase machine (idle -> acquiring -> idle,
or acquiring -> error on transport loss); the HTTP layer is a thin
adapter over it, so the machine can be exercised exhaustively in-process
without sockets.

Endpoints:

* ``GET  /status``             live counters and phase
* ``GET  /config``             current acquisition config (explicit maps)
* ``PUT  /config``             replace config; only enabled_channels may
                               change while acquiring (409 otherwise,
                               422 on invariant violations)
* ``POST /acquisition/start``  begin a session (409 wrong phase, 502
                               device unreachable)
* ``POST /acquisition/stop``   drain, finalize the log file (409 if idle)
* ``GET  /stream``             newline-delimited JSON SampleRecords;
                               idles silently when not acquiring, blank
                               lines are keepalives
* ``GET  /log/latest``         download the most recent session's CSV
* ``GET  /`` and ``/app/*``    dashboard static assets, when configured

Stream record lines look like::

    {"seq": 17, "host_time": "2026-08-10T12:00:00.000Z",
     "counts": [...8], "volts": [...8],
     "values": [{"channel": 0, "value": 25.0, "unit": "degC", "flag": "ok"}]}

``values`` is filtered to the currently enabled channels, which is how a
live selection change shows up on the very next record.  The CSV column
set, by contrast, is fixed when the session starts: a file's schema is a
contract for the whole file.
"""

from __future__ import annotations

import json
import mimetypes
import os
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .acquisition import (
    RecordBuffer,
    SampleRecord,
    Session,
    SessionSink,
    SessionSummary,
    Subscription,
)
from .config import (
    ConfigError,
    ServiceSettings,
    acquisition_config_from_json,
    acquisition_config_to_json,
    log_policy_to_json,
    parse_log_policy,
)
from .csvlog import LogSchema, LogWriter, format_timestamp
from .transport import Endpoint, TransportError, connect_tcp

PHASE_IDLE = "idle"
PHASE_ACQUIRING = "acquiring"
PHASE_ERROR = "error"


class WrongPhaseError(RuntimeError):
    """Command not legal in the current phase (HTTP 409)."""


class DeviceUnreachableError(RuntimeError):
    """The device endpoint did not accept a connection (HTTP 502)."""


class _FanoutSink(SessionSink):
    def __init__(self, fanout: RecordBuffer, writer: LogWriter | None):
        self.fanout = fanout
        self.writer = writer

    def on_record(self, record: SampleRecord) -> None:
        if self.writer is not None:
            self.writer.write(record)
        self.fanout.append(record)


class ServiceController:
    """Owns the acquisition lifecycle; all mutations serialize on one lock."""

    def __init__(self, settings: ServiceSettings,
                 device_factory=None):
        self.settings = settings
        self._connect = device_factory or (lambda: connect_tcp(settings.device))
        self._lock = threading.RLock()
        self._phase = PHASE_IDLE
        self._session: Session | None = None
        self._thread: threading.Thread | None = None
        self._transport: Endpoint | None = None
        self._writer: LogWriter | None = None
        self._last_summary = SessionSummary()
        self._last_error: str | None = None
        self._started_at = time.monotonic()
        self.latest_log_path: str | None = None
        # outlives individual sessions so stream clients span them
        self.fanout = RecordBuffer(settings.acquisition.buffer_capacity)
        self.shutting_down = threading.Event()

    # ------------------------------------------------------------- queries

    @property
    def phase(self) -> str:
        with self._lock:
            return self._phase

    def status(self) -> dict:
        with self._lock:
            if self._session is not None:
                summary = self._session.summary_snapshot()
            else:
                summary = self._last_summary
            return {
                "phase": self._phase,
                "polls": summary.polls,
                "records": summary.records,
                "timeouts": summary.timeouts,
                "decode_errors": summary.decode_errors,
                "gaps": summary.gap_reports,
                "missed_total": summary.missed_total,
                "uptime_s": round(time.monotonic() - self._started_at, 3),
                "error": self._last_error,
            }

    def get_config(self) -> dict:
        with self._lock:
            payload = acquisition_config_to_json(self.settings.acquisition)
            payload["log"] = log_policy_to_json(self.settings.log)
            return payload

    # ------------------------------------------------------------ commands

    def put_config(self, payload: dict) -> dict:
        """Validate and apply a config; only enabled_channels while acquiring."""
        if not isinstance(payload, dict):
            raise ConfigError([{"field": "config", "message": "must be a JSON object"}])
        payload = dict(payload)
        log_part = payload.pop("log", ...)
        with self._lock:
            if self._phase == PHASE_ACQUIRING:
                extra = set(payload) - {"enabled_channels"}
                if extra or log_part is not ...:
                    raise WrongPhaseError(
                        "only enabled_channels may change while acquiring"
                    )
            cfg = acquisition_config_from_json(payload, base=self.settings.acquisition)
            self.settings.acquisition = cfg
            if log_part is not ...:
                self.settings.log = (parse_log_policy(log_part)
                                     if log_part is not None else None)
            if self._session is not None:
                # live selection: affects stream filtering on the next record
                self._session.cfg.enabled_channels = cfg.enabled_channels
            return self.get_config()

    def start(self) -> dict:
        with self._lock:
            if self._phase == PHASE_ACQUIRING:
                raise WrongPhaseError("acquisition already running")
            try:
                transport = self._connect()
            except (TransportError, OSError) as exc:
                raise DeviceUnreachableError(str(exc)) from exc

            cfg = self.settings.acquisition
            writer = None
            if self.settings.log is not None:
                os.makedirs(self.settings.log.directory, exist_ok=True)
                schema = LogSchema.for_channels(cfg.enabled_channels, cfg.channel_maps)
                path = self.settings.log.make_path()
                writer = LogWriter(path, schema, self.settings.log)
                self.latest_log_path = path

            session = Session(transport, cfg, _FanoutSink(self.fanout, writer))
            thread = threading.Thread(
                target=self._run_session, args=(session,), daemon=True,
                name="octodaq-session",
            )
            self._session = session
            self._thread = thread
            self._transport = transport
            self._writer = writer
            self._phase = PHASE_ACQUIRING
            self._last_error = None
            thread.start()
            return {"phase": self._phase}

    def stop(self) -> dict:
        with self._lock:
            if self._phase != PHASE_ACQUIRING or self._session is None:
                raise WrongPhaseError("no acquisition running")
            session, thread = self._session, self._thread
        session.stop()
        thread.join(timeout=30.0)
        if thread.is_alive():
            raise RuntimeError("session thread failed to stop within 30 s")
        with self._lock:
            return {"phase": self._phase, "summary": self._last_summary.to_dict()}

    def _run_session(self, session: Session) -> None:
        summary = session.run()
        with self._lock:
            if session is not self._session:
                return
            self._last_summary = summary
            if summary.outcome in ("stopped", "completed"):
                self._phase = PHASE_IDLE
            else:
                self._phase = PHASE_ERROR
                self._last_error = summary.error or summary.outcome
            if self._writer is not None:
                self._writer.close()
                self._writer = None
            if self._transport is not None:
                self._transport.close()
                self._transport = None
            self._session = None
            self._thread = None

    def stream_subscribe(self) -> Subscription:
        return self.fanout.subscribe()

    def record_to_json(self, record: SampleRecord) -> dict:
        enabled = set(self.settings.acquisition.enabled_channels)
        return {
            "seq": record.seq,
            "host_time": format_timestamp(record.host_time),
            "counts": list(record.counts),
            "volts": [round(v, 6) for v in record.volts],
            "values": [
                {"channel": ch, "value": cv.value, "unit": cv.unit,
                 "flag": cv.flag.value}
                for ch, cv in sorted(record.values.items())
                if ch in enabled
            ],
        }

    def shutdown(self) -> None:
        self.shutting_down.set()
        with self._lock:
            acquiring = self._phase == PHASE_ACQUIRING
        if acquiring:
            try:
                self.stop()
            except (WrongPhaseError, RuntimeError):
                pass


class _Handler(BaseHTTPRequestHandler):
    server_version = "octodaq"
    controller: ServiceController  # set by make_server

    # ------------------------------------------------------------- plumbing

    def log_message(self, fmt, *args):
        pass  # keep the operator console quiet; errors surface as responses

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        try:
            return json.loads(raw or b"null")
        except json.JSONDecodeError:
            return ...

    # --------------------------------------------------------------- routes

    def do_GET(self):
        ctl = self.controller
        if self.path == "/status":
            self._send_json(200, ctl.status())
        elif self.path == "/config":
            self._send_json(200, ctl.get_config())
        elif self.path == "/stream":
            self._stream()
        elif self.path == "/log/latest":
            self._send_log()
        elif self.path == "/" or self.path.startswith("/app"):
            self._send_asset()
        else:
            self._send_json(404, {"error": f"unknown path {self.path}"})

    def do_PUT(self):
        if self.path != "/config":
            self._send_json(404, {"error": f"unknown path {self.path}"})
            return
        payload = self._read_json()
        if payload is ...:
            self._send_json(400, {"error": "request body is not valid JSON"})
            return
        try:
            self._send_json(200, self.controller.put_config(payload))
        except ConfigError as exc:
            self._send_json(422, {"errors": exc.errors})
        except WrongPhaseError as exc:
            self._send_json(409, {"error": str(exc)})

    def do_POST(self):
        ctl = self.controller
        try:
            if self.path == "/acquisition/start":
                self._send_json(200, ctl.start())
            elif self.path == "/acquisition/stop":
                self._send_json(200, ctl.stop())
            else:
                self._send_json(404, {"error": f"unknown path {self.path}"})
        except WrongPhaseError as exc:
            self._send_json(409, {"error": str(exc)})
        except DeviceUnreachableError as exc:
            self._send_json(502, {"error": f"device unreachable: {exc}"})

    # ------------------------------------------------------------ streaming

    def _stream(self):
        ctl = self.controller
        sub = ctl.stream_subscribe()
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Cache-Control", "no-cache")
        self.end_headers()
        last_write = time.monotonic()
        try:
            while not ctl.shutting_down.is_set():
                record = sub.next(timeout=0.25)
                if record is not None:
                    line = json.dumps(ctl.record_to_json(record)) + "\n"
                    self.wfile.write(line.encode())
                    self.wfile.flush()
                    last_write = time.monotonic()
                elif time.monotonic() - last_write > 5.0:
                    self.wfile.write(b"\n")  # keepalive; clients skip blanks
                    self.wfile.flush()
                    last_write = time.monotonic()
        except (BrokenPipeError, ConnectionResetError):
            pass  # client went away; acquisition is unaffected

    def _send_log(self):
        path = self.controller.latest_log_path
        if path is None or not os.path.exists(path):
            self._send_json(404, {"error": "no log file yet"})
            return
        with open(path, "rb") as fh:
            body = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", "text/csv")
        self.send_header(
            "Content-Disposition",
            f'attachment; filename="{os.path.basename(path)}"',
        )
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_asset(self):
        root = self.controller.settings.assets_dir
        if root is None:
            self._send_json(404, {"error": "no dashboard assets configured"})
            return
        # the URL space mirrors the assets tree: / -> index.html,
        # /app/main.js -> <assets>/app/main.js
        rel = self.path.lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(root, rel))
        if not full.startswith(os.path.realpath(root)) or not os.path.isfile(full):
            self._send_json(404, {"error": f"no such asset {rel!r}"})
            return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            body = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class DasService:
    """The controller plus its HTTP server, with a clean start/stop."""

    def __init__(self, settings: ServiceSettings, device_factory=None):
        self.controller = ServiceController(settings, device_factory)
        handler = type("BoundHandler", (_Handler,), {"controller": self.controller})
        host, _, port = settings.listen.rpartition(":")
        self.server = ThreadingHTTPServer((host or "127.0.0.1", int(port)), handler)
        self.server.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self.server.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> None:
        self._thread = threading.Thread(
            target=self.server.serve_forever, kwargs={"poll_interval": 0.1},
            daemon=True, name="octodaq-http",
        )
        self._thread.start()

    def serve_forever(self) -> None:
        self.server.serve_forever(poll_interval=0.1)

    def stop(self) -> None:
        self.controller.shutdown()
        self.server.shutdown()
        self.server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
