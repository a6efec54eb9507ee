"""Reliable duplex byte streams the device and host talk over.

Both the in-process pipe (tests) and TCP (pluggable device emulation)
present the same small Endpoint surface, so every layer above sees one
transport type and the wire bytes are identical on either.
"""

from __future__ import annotations

import socket
import sys


class TransportError(IOError):
    """The underlying stream failed (reset, broken pipe, closed socket)."""


class Endpoint:
    """One end of a duplex byte stream, wrapping a connected socket.

    recv() returns b"" once the peer has closed, and None on timeout;
    both are routine outcomes, not errors.
    """

    def __init__(self, sock: socket.socket, label: str = "stream"):
        self._sock = sock
        self._label = label
        self._closed = False

    def recv(self, max_bytes: int = 4096, timeout: float | None = None) -> bytes | None:
        try:
            self._sock.settimeout(timeout)
            return self._sock.recv(max_bytes)
        except socket.timeout:
            return None
        except OSError as exc:
            if self._closed:
                return b""
            raise TransportError(f"{self._label}: receive failed: {exc}") from exc

    def send(self, data: bytes) -> None:
        try:
            self._sock.settimeout(None)
            self._sock.sendall(data)
        except OSError as exc:
            raise TransportError(f"{self._label}: send failed: {exc}") from exc

    def close(self) -> None:
        self._closed = True
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def pipe_pair() -> tuple[Endpoint, Endpoint]:
    """In-process duplex pipe; returns (device end, host end)."""
    a, b = socket.socketpair()
    return Endpoint(a, "pipe"), Endpoint(b, "pipe")


def parse_address(addr: str) -> tuple[str, int]:
    """Split "host:port" (host may be empty for all interfaces)."""
    host, sep, port = addr.rpartition(":")
    if not sep:
        raise ValueError(f"address {addr!r} is not host:port")
    return host or "0.0.0.0", int(port)


def connect_tcp(addr: str, timeout: float = 2.0) -> Endpoint:
    host, port = parse_address(addr)
    try:
        sock = socket.create_connection((host, port), timeout=timeout)
    except OSError as exc:
        raise TransportError(f"cannot connect to {addr}: {exc}") from exc
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return Endpoint(sock, f"tcp {addr}")


def listen_tcp(addr: str) -> socket.socket:
    """Bound, listening server socket; caller accepts connections."""
    host, port = parse_address(addr)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, port))
    sock.listen(1)
    return sock


def accept_endpoint(server: socket.socket) -> Endpoint:
    conn, peer = server.accept()
    conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return Endpoint(conn, f"tcp {peer[0]}:{peer[1]}")


class StdioEndpoint:
    """Protocol over this process's stdin/stdout (for pipe wiring).

    Blocking reads only; the device loop never needs a receive timeout.
    """

    def __init__(self):
        self._in = sys.stdin.buffer
        self._out = sys.stdout.buffer

    def recv(self, max_bytes: int = 4096, timeout: float | None = None) -> bytes | None:
        try:
            return self._in.read1(max_bytes)
        except (OSError, ValueError) as exc:
            raise TransportError(f"stdio: receive failed: {exc}") from exc

    def send(self, data: bytes) -> None:
        try:
            self._out.write(data)
            self._out.flush()
        except (OSError, ValueError) as exc:
            raise TransportError(f"stdio: send failed: {exc}") from exc

    def close(self) -> None:
        pass
