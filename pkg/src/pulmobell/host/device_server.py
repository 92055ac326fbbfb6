"""Raw framed-protocol TCP port for device connections."""

from __future__ import annotations

import socketserver
import threading

from ..errors import RejectedError, StorageError
from .link import DeviceLink
from .store import SessionStore


class _DeviceHandler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        store: SessionStore = self.server.store  # type: ignore[attr-defined]
        link = DeviceLink(store, send_fn=self.request.sendall)
        try:
            while True:
                data = self.request.recv(65536)
                if not data:
                    break
                link.feed(data)
        except RejectedError:
            pass  # bad token or binding frame: drop the connection
        except (ConnectionError, OSError, StorageError):
            pass  # peer went away or disk trouble; partial log is preserved
        finally:
            session_id = link.session_id
            link.close()
            if session_id is not None:
                _close_if_finished(store, session_id)


def _close_if_finished(store: SessionStore, session_id: str) -> None:
    """Close the session once its device disconnects after a terminal event."""
    try:
        summary = store.summary(session_id)
    except Exception:
        return
    if summary.outcome in ("completed", "aborted"):
        store.close_session(session_id)


class DeviceTCPServer:
    def __init__(self, host: str, port: int, store: SessionStore) -> None:
        class _Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._server = _Server((host, port), _DeviceHandler)
        self._server.store = store  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(
            target=self._server.serve_forever, kwargs={"poll_interval": 0.1}, daemon=True
        )
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
