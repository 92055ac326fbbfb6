"""Byte-stream transports between the device and the host.

Two implementations of one small duck-typed surface:
  send(data)        -> None
  recv_available()  -> bytes (possibly empty, never blocks)
  close()           -> None

InProcessPipe keeps a hermetic run single-threaded and deterministic;
TcpTransport is the stand-in for the BLE radio in live runs.
"""

from __future__ import annotations

import select
import socket
import threading
from collections import deque
from typing import Callable

from .errors import TransportError


class InProcessPipe:
    """One end of an in-process duplex byte channel."""

    def __init__(self) -> None:
        self._inbox: deque[bytes] = deque()
        self._lock = threading.Lock()
        self._peer_deliver: Callable[[bytes], None] | None = None
        self._closed = False

    def _deliver(self, data: bytes) -> None:
        with self._lock:
            self._inbox.append(data)

    def connect(self, deliver: Callable[[bytes], None]) -> None:
        self._peer_deliver = deliver

    def send(self, data: bytes) -> None:
        if self._closed:
            raise TransportError("pipe closed")
        if self._peer_deliver is None:
            raise TransportError("pipe not connected")
        self._peer_deliver(bytes(data))

    def recv_available(self) -> bytes:
        with self._lock:
            if not self._inbox:
                return b""
            chunks = list(self._inbox)
            self._inbox.clear()
        return b"".join(chunks)

    def close(self) -> None:
        self._closed = True


def pipe_pair() -> tuple[InProcessPipe, InProcessPipe]:
    a, b = InProcessPipe(), InProcessPipe()
    a.connect(b._deliver)
    b.connect(a._deliver)
    return a, b


class CallbackPipe:
    """Device-side pipe whose sends invoke a callback synchronously.

    Used by the hermetic runner: device bytes flow straight into the host
    ingest path, host command bytes are queued back for the device.
    """

    def __init__(self, on_send: Callable[[bytes], None]) -> None:
        self._on_send = on_send
        self._inbox: deque[bytes] = deque()
        self._lock = threading.Lock()

    def feed_back(self, data: bytes) -> None:
        with self._lock:
            self._inbox.append(bytes(data))

    def send(self, data: bytes) -> None:
        self._on_send(bytes(data))

    def recv_available(self) -> bytes:
        with self._lock:
            if not self._inbox:
                return b""
            chunks = list(self._inbox)
            self._inbox.clear()
        return b"".join(chunks)

    def close(self) -> None:
        pass


class TcpTransport:
    def __init__(self, sock: socket.socket) -> None:
        self._sock = sock
        self._sock.setblocking(True)
        self._closed = False

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 5.0) -> "TcpTransport":
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise TransportError(f"cannot connect to {host}:{port}: {exc}") from exc
        sock.settimeout(None)
        return cls(sock)

    def send(self, data: bytes) -> None:
        if self._closed:
            raise TransportError("socket closed")
        try:
            self._sock.sendall(data)
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def recv_available(self) -> bytes:
        if self._closed:
            return b""
        out = []
        try:
            while True:
                ready, _, _ = select.select([self._sock], [], [], 0)
                if not ready:
                    break
                chunk = self._sock.recv(65536)
                if not chunk:
                    raise TransportError("connection closed by peer")
                out.append(chunk)
        except OSError as exc:
            raise TransportError(f"recv failed: {exc}") from exc
        return b"".join(out)

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            try:
                self._sock.close()
            except OSError:
                pass
