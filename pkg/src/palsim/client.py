"""Socket clients for the two wire protocols.

:class:`PalClient` speaks the agent line protocol (one command out, one JSON
envelope back); :class:`ControlClient` speaks the newline-JSON control
protocol of the manager port.
"""

from __future__ import annotations

import json
import socket


class PalClient:
    """Blocking agent-side client; one in-flight command at a time."""

    def __init__(self, host: str = "127.0.0.1", port: int = 9000,
                 timeout: float = 120.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._sock: socket.socket | None = None
        self._reader = None

    def connect(self) -> "PalClient":
        self._sock = socket.create_connection((self.host, self.port),
                                              timeout=self.timeout)
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._reader = self._sock.makefile("rb")
        return self

    def send(self, command: str) -> dict:
        """Send one command line, block for its envelope."""
        self._sock.sendall((command + "\n").encode("utf-8"))
        raw = self._reader.readline()
        if not raw:
            raise ConnectionError("server closed the connection")
        return json.loads(raw.decode("utf-8"))

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None
                self._reader = None

    def __enter__(self) -> "PalClient":
        return self.connect()

    def __exit__(self, *exc) -> None:
        self.close()


class LoopbackTransport:
    """In-process stand-in for PalClient: commands go straight to a Session.

    Used by tests, the deterministic replay runner and the in-process agent
    harness; it skips TCP and tick pacing but speaks the same envelopes.
    """

    def __init__(self, session):
        self.session = session

    def send(self, command: str) -> dict:
        return self.session.handle_line(command)

    def close(self) -> None:
        pass


class ControlClient:
    """Manager-side client for LOAD / STATUS / SHUTDOWN."""

    def __init__(self, host: str = "127.0.0.1", port: int = 9005,
                 timeout: float = 30.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._sock: socket.socket | None = None
        self._reader = None

    def connect(self) -> "ControlClient":
        self._sock = socket.create_connection((self.host, self.port),
                                              timeout=self.timeout)
        self._reader = self._sock.makefile("rb")
        return self

    def request(self, record: dict) -> dict:
        self._sock.sendall((json.dumps(record) + "\n").encode("utf-8"))
        raw = self._reader.readline()
        if not raw:
            raise ConnectionError("control connection closed")
        return json.loads(raw.decode("utf-8"))

    def load(self, path: str) -> dict:
        return self.request({"cmd": "LOAD", "path": path})

    def status(self) -> dict:
        return self.request({"cmd": "STATUS"})

    def shutdown(self) -> dict:
        return self.request({"cmd": "SHUTDOWN"})

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None
                self._reader = None

    def __enter__(self) -> "ControlClient":
        return self.connect()

    def __exit__(self, *exc) -> None:
        self.close()
