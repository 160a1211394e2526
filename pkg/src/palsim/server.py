"""TCP service: the agent line protocol on one port, manager control on another.

Agent wire: UTF-8, one command per '\\n'-terminated line, one single-line
JSON envelope per command, written only in response to a received command.
Commands execute strictly serially, at most one per tick (tick = 1/fps
seconds); excess commands queue in arrival order in the socket buffer.

Control wire: newline-delimited JSON records. ``{"cmd": "LOAD", "path": p}``
arms the next instance, ``{"cmd": "STATUS"}`` returns a live snapshot and
``{"cmd": "SHUTDOWN"}`` stops the server.

Exactly one agent connection is served at a time; a second concurrent
connection attempt is refused.
"""

from __future__ import annotations

import json
import logging
import os
import socket
import threading
import time
from dataclasses import dataclass, field

from . import tasks
from .costs import CostTable
from .protocol import encode_envelope
from .session import GAME_OVER_PENDING, RUNNING, Session

log = logging.getLogger("palsim.server")

DEFAULT_AGENT_PORT = 9000
DEFAULT_CONTROL_PORT = 9005
DEFAULT_FPS = 20.0
MAX_FPS = 1000.0

ENV_SCREEN_FORMAT = "SENSE_SCREEN_FORMAT"
ENV_AIGYM = "AIGYM_REPORTING"
ENV_REPORT_SCREEN = "REPORT_SCREEN"
ENV_AGENT_PORT = "PAL_AGENT_PORT"
ENV_CONTROL_PORT = "PAL_TM_PORT"
ENV_FPS = "PAL_FPS"
ENV_X = "PAL_X"
ENV_Y = "PAL_Y"
ENV_WIDTH = "PAL_WIDTH"
ENV_HEIGHT = "PAL_HEIGHT"


def _env_flag(value: str | None) -> bool:
    return value is not None and value.strip().lower() in ("true", "1", "yes")


@dataclass
class ServerConfig:
    agent_port: int = DEFAULT_AGENT_PORT
    control_port: int = DEFAULT_CONTROL_PORT
    fps: float = DEFAULT_FPS
    screen_format: str = "PNG"
    aigym_reporting: bool = False
    report_screen: bool = False
    render_x: int = 0  # window placement: accepted for compatibility, unused
    render_y: int = 0
    width: int = 256
    height: int = 256
    dev_mode: bool = False
    task_root: str = "."

    def __post_init__(self):
        if not 1 <= self.fps <= MAX_FPS:
            raise ValueError(f"fps must be within [1, {MAX_FPS:.0f}]")

    @classmethod
    def from_env(cls, env=None, **overrides) -> "ServerConfig":
        env = os.environ if env is None else env
        values = {
            "agent_port": int(env.get(ENV_AGENT_PORT, DEFAULT_AGENT_PORT)),
            "control_port": int(env.get(ENV_CONTROL_PORT, DEFAULT_CONTROL_PORT)),
            "fps": float(env.get(ENV_FPS, DEFAULT_FPS)),
            "screen_format": env.get(ENV_SCREEN_FORMAT, "PNG"),
            "aigym_reporting": _env_flag(env.get(ENV_AIGYM)),
            "report_screen": _env_flag(env.get(ENV_REPORT_SCREEN)),
            "render_x": int(env.get(ENV_X, 0)),
            "render_y": int(env.get(ENV_Y, 0)),
            "width": int(env.get(ENV_WIDTH, 256)),
            "height": int(env.get(ENV_HEIGHT, 256)),
        }
        values.update(overrides)
        return cls(**values)


@dataclass
class _Shared:
    lock: threading.Lock = field(default_factory=threading.Lock)
    agent_connected: bool = False
    agent_ever_connected: bool = False


class PalServer:
    """Runs the agent session and the control channel on daemon threads."""

    def __init__(self, config: ServerConfig, initial_task: tasks.TaskDef | None = None,
                 costs: CostTable | None = None):
        self.config = config
        self.session = Session(
            task_loader=self._load_task_file,
            dev_mode=config.dev_mode,
            aigym_reporting=config.aigym_reporting,
            report_screen=config.report_screen,
            screen_format=config.screen_format,
            screen_width=config.width,
            screen_height=config.height,
            costs=costs,
        )
        if initial_task is not None:
            self.session.load_task(initial_task)
        self._shared = _Shared()
        self._shutdown = threading.Event()
        self._agent_sock: socket.socket | None = None
        self._control_sock: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self._conns: set[socket.socket] = set()
        self._tick = 1.0 / config.fps
        self._next_slot = 0.0

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> None:
        self._agent_sock = self._listen(self.config.agent_port)
        self._control_sock = self._listen(self.config.control_port)
        self.agent_port = self._agent_sock.getsockname()[1]
        self.control_port = self._control_sock.getsockname()[1]
        for name, fn, sock in (("agent", self._serve_agent, self._agent_sock),
                               ("control", self._serve_control, self._control_sock)):
            t = threading.Thread(target=fn, args=(sock,),
                                 name=f"palsim-{name}", daemon=True)
            t.start()
            self._threads.append(t)
        log.info("listening: agent port %d, control port %d, fps %g",
                 self.agent_port, self.control_port, self.config.fps)

    @staticmethod
    def _listen(port: int) -> socket.socket:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind(("127.0.0.1", port))
        sock.listen(4)
        return sock

    def wait(self, timeout: float | None = None) -> bool:
        return self._shutdown.wait(timeout)

    def stop(self) -> None:
        self._shutdown.set()
        for sock in (self._agent_sock, self._control_sock):
            if sock is not None:
                try:
                    sock.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                try:
                    sock.close()
                except OSError:
                    pass
        for conn in list(self._conns):
            try:
                conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
        for t in self._threads:
            t.join(timeout=2.0)

    # -- agent side -------------------------------------------------------------

    def _load_task_file(self, path: str) -> tasks.TaskDef:
        resolved = path if os.path.isabs(path) else os.path.join(
            self.config.task_root, path)
        return tasks.load_task(resolved)

    def _serve_agent(self, sock: socket.socket) -> None:
        while not self._shutdown.is_set():
            try:
                conn, addr = sock.accept()
            except OSError:
                return
            with self._shared.lock:
                if self._shared.agent_connected:
                    log.warning("refusing second agent connection from %s", addr)
                    conn.close()
                    continue
                self._shared.agent_connected = True
                self._shared.agent_ever_connected = True
            log.info("agent connected from %s", addr)
            self._conns.add(conn)
            try:
                self._agent_loop(conn)
            finally:
                with self._shared.lock:
                    self._shared.agent_connected = False
                self._conns.discard(conn)
                conn.close()
                log.info("agent disconnected")

    def _agent_loop(self, conn: socket.socket) -> None:
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        reader = conn.makefile("rb")
        self._next_slot = time.monotonic()
        while not self._shutdown.is_set():
            raw = reader.readline()
            if not raw:
                return
            line = raw.decode("utf-8", errors="replace")
            self._pace()
            with self._shared.lock:
                envelope = self.session.handle_line(line)
            cr = envelope["command_result"]
            log.info("step %s %s -> %s %s", envelope["step"], line.strip(),
                     cr["result"], cr["message"])
            try:
                conn.sendall(encode_envelope(envelope))
            except OSError:
                return

    def _pace(self) -> None:
        """At most one command per tick window."""
        now = time.monotonic()
        wait = self._next_slot - now
        if wait > 0:
            time.sleep(wait)
            self._next_slot += self._tick
        else:
            self._next_slot = now + self._tick

    # -- control side -------------------------------------------------------------

    def _serve_control(self, sock: socket.socket) -> None:
        while not self._shutdown.is_set():
            try:
                conn, _ = sock.accept()
            except OSError:
                return
            self._conns.add(conn)
            try:
                self._control_loop(conn)
            finally:
                self._conns.discard(conn)
                conn.close()

    def _control_loop(self, conn: socket.socket) -> None:
        reader = conn.makefile("rb")
        while not self._shutdown.is_set():
            raw = reader.readline()
            if not raw:
                return
            try:
                record = json.loads(raw.decode("utf-8"))
                reply = self._handle_control(record)
            except (ValueError, KeyError) as exc:
                reply = {"ok": False, "error": f"malformed control message: {exc}"}
            try:
                conn.sendall((json.dumps(reply) + "\n").encode("utf-8"))
            except OSError:
                return

    def _handle_control(self, record: dict) -> dict:
        cmd = str(record.get("cmd", "")).upper()
        if cmd == "STATUS":
            with self._shared.lock:
                status = self.session.status()
                status["agentConnected"] = self._shared.agent_connected
                status["agentEverConnected"] = self._shared.agent_ever_connected
            return {"ok": True, **status}
        if cmd == "LOAD":
            path = record["path"]
            with self._shared.lock:
                if self.session.phase in (RUNNING, GAME_OVER_PENDING):
                    return {"ok": False, "error": "busy: instance in progress"}
                try:
                    task = self._load_task_file(path)
                    self.session.load_task(task)
                except (OSError, tasks.TaskError, RuntimeError) as exc:
                    return {"ok": False, "error": str(exc)}
            log.info("loaded instance %s", task.name)
            return {"ok": True, "instance": task.name}
        if cmd == "SHUTDOWN":
            log.info("shutdown requested by control channel")
            self._shutdown.set()
            return {"ok": True}
        return {"ok": False, "error": f"unknown control command: {cmd!r}"}
