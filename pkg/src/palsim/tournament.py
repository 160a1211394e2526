"""Tournament orchestration: processes, sequencing, watchdogs, logs, results.

The manager owns four concerns: the simulator server subprocess, the agent
subprocess (launched through a shell-interpreted command), instance
sequencing over the control channel, and logging. Logs land in three tracks
per instance: the manager's own events, the server (game) output, and the
agent's merged stdout/stderr. The manager talks only to the control port;
it never opens the agent port.

Instances end when the control STATUS shows the session back in
AwaitingReset with an end reason. A watchdog ends the tournament when no
step progress is seen for ``watchdog_factor x seconds_per_game`` (default
5x), and a wall-clock cap bounds the whole tournament.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import os
import signal
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field

from .client import ControlClient

DEFAULT_GAME_COUNT = 100
DEFAULT_SECONDS_PER_GAME = 300.0
DEFAULT_MAX_TOURNAMENT_MINUTES = 2880.0
WATCHDOG_FACTOR = 5.0
STATUS_POLL_INTERVAL = 0.1

END_NONRESPONSIVE = "NONRESPONSIVE"


class TournamentError(RuntimeError):
    """The tournament could not run to completion."""


@dataclass
class TournamentConfig:
    games_folder: str
    agent_command: str
    tournament_name: str = "TOURNAMENT"
    game_count: int = DEFAULT_GAME_COUNT
    agent_name: str = "MY_AGENT_ID"
    agent_dir: str = ""
    seconds_per_game: float = DEFAULT_SECONDS_PER_GAME
    max_tournament_minutes: float = DEFAULT_MAX_TOURNAMENT_MINUTES
    output_dir: str = ""
    agent_port: int = 0  # 0 picks a free port
    control_port: int = 0
    fps: float = 20.0
    watchdog_factor: float = WATCHDOG_FACTOR
    poll_interval: float = STATUS_POLL_INTERVAL
    server_env: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.game_count < 1:
            raise ValueError("game count must be >= 1")
        if self.seconds_per_game < 1:
            raise ValueError("seconds per game must be >= 1")
        if not self.output_dir:
            self.output_dir = os.path.join("tournaments", self.tournament_name)


@dataclass
class InstanceRecord:
    instance_file: str
    start_time: str
    end_time: str = ""
    end_reason: str = ""
    steps: int = 0
    total_cost: float = 0.0
    goal_achieved: bool = False
    novelty_reports: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance_file,
            "startTime": self.start_time,
            "endTime": self.end_time,
            "endReason": self.end_reason,
            "steps": self.steps,
            "totalCost": self.total_cost,
            "goalAchieved": self.goal_achieved,
            "noveltyReports": self.novelty_reports,
        }


class _TrackWriter:
    """Timestamped, per-instance-rolled append writer for one log track.

    A write failure (disk full, permissions yanked) flips the shared failure
    event; the sequencing loop turns that into a tournament abort after
    flushing what it can.
    """

    def __init__(self, directory: str, suffix: str, failure: threading.Event):
        self.directory = directory
        self.suffix = suffix
        self.failure = failure
        self._lock = threading.Lock()
        self._fh = None

    def roll(self, instance_stem: str) -> None:
        with self._lock:
            if self._fh:
                self._fh.close()
            path = os.path.join(self.directory, f"{instance_stem}_{self.suffix}.log")
            self._fh = open(path, "a", encoding="utf-8")

    def write(self, line: str) -> None:
        stamp = dt.datetime.now().isoformat(timespec="milliseconds")
        with self._lock:
            if self._fh is None:
                return
            try:
                self._fh.write(f"[{stamp}] {line.rstrip()}\n")
                self._fh.flush()
            except OSError:
                self.failure.set()

    def close(self) -> None:
        with self._lock:
            if self._fh:
                try:
                    self._fh.close()
                except OSError:
                    self.failure.set()
                self._fh = None


def _free_port() -> int:
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _pump(stream, writer: _TrackWriter, on_line=None) -> None:
    for raw in iter(stream.readline, b""):
        line = raw.decode("utf-8", errors="replace")
        writer.write(line)
        if on_line:
            on_line(line)
    stream.close()


class TournamentManager:
    def __init__(self, config: TournamentConfig):
        self.config = config
        self.records: list[InstanceRecord] = []
        self.opened_ports: list[int] = []  # every port this manager dials
        self._server_proc: subprocess.Popen | None = None
        self._agent_proc: subprocess.Popen | None = None
        self._control: ControlClient | None = None
        self._tracks: dict[str, _TrackWriter] = {}
        self._log_failure = threading.Event()
        self._abort_reason = ""

    # -- public entry -------------------------------------------------------------

    def run(self) -> dict:
        """Run the tournament; returns the summary written to disk."""
        config = self.config
        os.makedirs(config.output_dir, exist_ok=True)
        log_dir = os.path.join(config.output_dir, "logs")
        os.makedirs(log_dir, exist_ok=True)
        for key in ("manager", "game", "agent"):
            self._tracks[key] = _TrackWriter(log_dir, key, self._log_failure)
        self._roll_tracks("00_startup")

        try:
            instances = self._instance_files()
            self._log(f"tournament {config.tournament_name}: "
                      f"{len(instances)} instances queued")
            agent_port = config.agent_port or _free_port()
            control_port = config.control_port or _free_port()
            self._start_server(agent_port, control_port)
            self._roll_tracks(self._stem(instances[0]))
            self._connect_control(control_port)
            self._load_instance(instances[0])
            self._start_agent(agent_port, control_port)
            self._sequence(instances)
        except TournamentError as exc:
            self._abort_reason = str(exc)
            self._log(f"ABORT: {exc}")
        finally:
            summary = self._finish()
        return summary

    # -- setup -------------------------------------------------------------------

    def _instance_files(self) -> list[str]:
        config = self.config
        try:
            names = [n for n in os.listdir(config.games_folder)
                     if n.endswith(".json")]
        except OSError as exc:
            raise TournamentError(f"cannot read games folder: {exc}") from exc
        names.sort()
        if len(names) < config.game_count:
            raise TournamentError(
                f"games folder holds {len(names)} task files, "
                f"need {config.game_count}")
        return [os.path.join(config.games_folder, n)
                for n in names[:config.game_count]]

    @staticmethod
    def _stem(path: str) -> str:
        return os.path.splitext(os.path.basename(path))[0]

    def _start_server(self, agent_port: int, control_port: int) -> None:
        config = self.config
        cmd = [
            sys.executable, "-m", "palsim", "serve",
            "--agent-port", str(agent_port),
            "--control-port", str(control_port),
            "--fps", str(config.fps),
            "--task-root", os.path.abspath(config.games_folder),
            "--no-dev",
        ]
        env = dict(os.environ)
        env.update(config.server_env)
        try:
            self._server_proc = subprocess.Popen(
                cmd, stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
                env=env, start_new_session=True)
        except OSError as exc:
            raise TournamentError(f"cannot start server: {exc}") from exc
        threading.Thread(
            target=_pump, args=(self._server_proc.stdout, self._tracks["game"]),
            name="pump-game", daemon=True).start()
        self._log(f"server started, pid {self._server_proc.pid}")

    def _connect_control(self, control_port: int) -> None:
        deadline = time.monotonic() + 15.0
        last_error = None
        while time.monotonic() < deadline:
            if self._server_proc.poll() is not None:
                raise TournamentError(
                    f"server exited early with code {self._server_proc.returncode}")
            try:
                client = ControlClient(port=control_port)
                client.connect()
                self.opened_ports.append(control_port)
                self._control = client
                return
            except OSError as exc:
                last_error = exc
                time.sleep(0.1)
        raise TournamentError(f"control channel never came up: {last_error}")

    def _start_agent(self, agent_port: int, control_port: int) -> None:
        config = self.config
        env = dict(os.environ)
        env["PAL_AGENT_PORT"] = str(agent_port)
        env["PAL_TM_PORT"] = str(control_port)
        cwd = config.agent_dir or None
        try:
            self._agent_proc = subprocess.Popen(
                config.agent_command, shell=True, cwd=cwd, env=env,
                stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
                start_new_session=True)
        except OSError as exc:
            raise TournamentError(f"cannot launch agent: {exc}") from exc
        threading.Thread(
            target=_pump, args=(self._agent_proc.stdout, self._tracks["agent"]),
            name="pump-agent", daemon=True).start()
        self._log(f"agent {config.agent_name!r} launched: "
                  f"{config.agent_command!r} (pid {self._agent_proc.pid})")

    # -- sequencing ----------------------------------------------------------------

    def _load_instance(self, path: str) -> None:
        reply = self._control.load(os.path.abspath(path))
        if not reply.get("ok"):
            raise TournamentError(f"LOAD failed for {path}: {reply.get('error')}")
        self._log(f"loaded {os.path.basename(path)}")

    def _roll_tracks(self, stem: str) -> None:
        for track in self._tracks.values():
            track.roll(stem)

    def _sequence(self, instances: list[str]) -> None:
        config = self.config
        tournament_deadline = time.monotonic() + config.max_tournament_minutes * 60
        watchdog_limit = config.watchdog_factor * config.seconds_per_game

        for index, path in enumerate(instances):
            record = InstanceRecord(
                instance_file=os.path.basename(path),
                start_time=dt.datetime.now().isoformat(timespec="milliseconds"))
            self.records.append(record)
            last_progress = time.monotonic()
            last_step = -1

            while True:
                time.sleep(config.poll_interval)
                if self._log_failure.is_set():
                    self._close_record(record, self._status())
                    raise TournamentError("log track write failed (disk full?)")
                status = self._status()
                if status["step"] != last_step:
                    last_step = status["step"]
                    last_progress = time.monotonic()

                if status["phase"] == "AwaitingReset" and status["endReason"]:
                    self._close_record(record, status)
                    self._log(
                        f"instance {record.instance_file} ended: "
                        f"{record.end_reason}, steps={record.steps}, "
                        f"cost={record.total_cost}, goal={record.goal_achieved}")
                    break

                if self._agent_proc.poll() not in (None, 0):
                    self._close_record(record, status)
                    raise TournamentError(
                        f"agent process exited with code "
                        f"{self._agent_proc.returncode} before finishing")

                now = time.monotonic()
                if now - last_progress > watchdog_limit:
                    self._close_record(record, status,
                                       override_reason=END_NONRESPONSIVE)
                    self._kill_agent()
                    raise TournamentError(
                        "watchdog: no step progress within "
                        f"{watchdog_limit:.0f}s; agent is non-responsive")
                if now > tournament_deadline:
                    self._close_record(record, status)
                    raise TournamentError("max tournament time exceeded")

            if index + 1 < len(instances):
                self._roll_tracks(self._stem(instances[index + 1]))
                self._load_instance(instances[index + 1])

    def _status(self) -> dict:
        try:
            return self._control.status()
        except (OSError, ValueError) as exc:
            raise TournamentError(f"control channel lost: {exc}") from exc

    def _close_record(self, record: InstanceRecord, status: dict,
                      override_reason: str = "") -> None:
        record.end_time = dt.datetime.now().isoformat(timespec="milliseconds")
        record.end_reason = override_reason or status.get("endReason", "")
        record.steps = status.get("step", 0)
        record.total_cost = status.get("cost", 0.0)
        record.goal_achieved = bool(status.get("goalAchieved"))
        record.novelty_reports = status.get("novelties", [])

    # -- teardown and results --------------------------------------------------------

    def _kill_process(self, proc: subprocess.Popen | None) -> None:
        if proc is None or proc.poll() is not None:
            return
        try:
            os.killpg(os.getpgid(proc.pid), signal.SIGTERM)
        except (OSError, ProcessLookupError):
            proc.terminate()
        try:
            proc.wait(timeout=3.0)
        except subprocess.TimeoutExpired:
            try:
                os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
            except (OSError, ProcessLookupError):
                proc.kill()
            proc.wait(timeout=3.0)

    def _kill_agent(self) -> None:
        self._log("terminating agent process")
        self._kill_process(self._agent_proc)

    def _finish(self) -> dict:
        if self._control is not None:
            try:
                self._control.shutdown()
            except (OSError, ValueError):
                pass
            self._control.close()
        self._kill_agent()
        self._kill_process(self._server_proc)
        summary = self._emit_results()
        self._log(f"tournament finished: {summary}")
        for track in self._tracks.values():
            track.close()
        return summary

    def _emit_results(self) -> dict:
        config = self.config
        records_path = os.path.join(config.output_dir, "results.jsonl")
        with open(records_path, "w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(json.dumps(record.to_dict()) + "\n")
        csv_path = os.path.join(config.output_dir, "summary.csv")
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["instance", "end_reason", "steps", "cost", "success"])
            for record in self.records:
                writer.writerow([
                    record.instance_file, record.end_reason, record.steps,
                    record.total_cost, int(record.goal_achieved)])
        played = len(self.records)
        successes = sum(r.goal_achieved for r in self.records)
        summary = {
            "tournament": config.tournament_name,
            "agent": config.agent_name,
            "gamesPlayed": played,
            "gamesRequested": config.game_count,
            "successes": successes,
            "successRate": successes / played if played else 0.0,
            "completed": not self._abort_reason and played == config.game_count,
            "abortReason": self._abort_reason,
            "records": records_path,
            "summaryCsv": csv_path,
        }
        with open(os.path.join(config.output_dir, "summary.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
        return summary

    def _log(self, message: str) -> None:
        self._tracks["manager"].write(message)


def run_tournament(config: TournamentConfig) -> dict:
    return TournamentManager(config).run()
