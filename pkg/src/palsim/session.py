"""One agent session: the phase machine that turns command lines into envelopes.

Phases advance AwaitingStart -> Running -> GameOverPending -> AwaitingReset
-> Running... A task may be armed by the control channel (LOAD) or, in dev
mode, by an agent-issued RESET. Instance-ending conditions are evaluated
after every executed command, in fixed order: goal achieved, time limit
exceeded, step-cost ceiling crossed, GIVE_UP received. The first trigger
emits gameOver=true exactly once; the next command is executed against a
scratch copy of the world (an acknowledgment that cannot affect scoring)
and its envelope reverts to gameOver=false.
"""

from __future__ import annotations

import time
from typing import Callable

from . import observe, tasks
from .costs import COST_CEILING, CostTable
from .protocol import (
    GAME_OVER_COST,
    GAME_OVER_GIVE_UP,
    GAME_OVER_GOAL,
    GAME_OVER_TIMEOUT,
    Command,
    ProtocolError,
    build_envelope,
    parse_command,
)
from .world import FAIL, CommandResult, WorldState

AWAITING_START = "AwaitingStart"
RUNNING = "Running"
GAME_OVER_PENDING = "GameOverPending"
AWAITING_RESET = "AwaitingReset"

_SENSE_PARTS = {
    "SENSE_INVENTORY": "INVENTORY",
    "SENSE_LOCATIONS": "LOCATIONS",
    "SENSE_RECIPES": "RECIPES",
    "SENSE_ENTITIES": "ENTITIES",
    "SENSE_ACTOR_ACTIONS": "ACTOR_ACTIONS",
}


class Session:
    """Serial executor for one agent connection."""

    def __init__(self, task_loader: Callable[[str], tasks.TaskDef] | None = None,
                 dev_mode: bool = False, aigym_reporting: bool = False,
                 report_screen: bool = False, screen_format: str = "PNG",
                 screen_width: int = observe.DEFAULT_SCREEN_SIZE,
                 screen_height: int = observe.DEFAULT_SCREEN_SIZE,
                 costs: CostTable | None = None,
                 clock: Callable[[], float] = time.monotonic):
        self.task_loader = task_loader or tasks.load_task
        self.dev_mode = dev_mode
        self.aigym_reporting = aigym_reporting
        self.report_screen = report_screen
        self.screen_format = screen_format
        self.screen_width = screen_width
        self.screen_height = screen_height
        self.costs = costs
        self.clock = clock

        self.phase = AWAITING_START
        self.task: tasks.TaskDef | None = None
        self.state: WorldState | None = None
        self.goal_achieved = False
        self.end_reason = ""
        self.first_command_time: float | None = None
        self.novelty_reports: list[dict] = []
        self.started = False

    # -- instance management -------------------------------------------------

    def load_task(self, task: tasks.TaskDef) -> None:
        """Arm a fresh instance; counters, cost and clock all zeroed."""
        if self.phase in (RUNNING, GAME_OVER_PENDING):
            raise RuntimeError("busy: an instance is in progress")
        self.task = task
        self.state = task.build_world(self.costs)
        self.goal_achieved = False
        self.end_reason = ""
        self.first_command_time = None
        self.novelty_reports = []
        if self.started:
            self.phase = RUNNING

    def load_task_file(self, path: str) -> None:
        self.load_task(self.task_loader(path))

    def status(self) -> dict:
        """Consistent snapshot for the control channel."""
        now = self.clock()
        elapsed = 0.0 if self.first_command_time is None else now - self.first_command_time
        return {
            "phase": self.phase,
            "instance": self.task.name if self.task else "",
            "step": self.state.step_count if self.state else 0,
            "cost": self.state.total_cost if self.state else 0.0,
            "elapsed": elapsed,
            "goalAchieved": self.goal_achieved,
            "endReason": self.end_reason,
            "novelties": list(self.novelty_reports),
        }

    # -- envelope plumbing -----------------------------------------------------

    def _goal_section(self) -> dict:
        if self.task is None:
            return {"goalType": "", "goalAchieved": False, "Distribution": ""}
        return {
            "goalType": self.task.goal.goal_type,
            "goalAchieved": self.goal_achieved,
            "Distribution": self.task.goal.distribution,
        }

    def _augmentations(self, state: WorldState) -> dict:
        extras: dict = {}
        if self.aigym_reporting:
            extras["senseAll"] = observe.sense_all(state)
            if self.report_screen:
                extras["screen"] = observe.screen_payload(
                    state, self.task.palette, self.screen_format,
                    self.screen_width, self.screen_height)
        return extras

    def _bare_envelope(self, result: CommandResult, step: int = 0,
                       game_over: bool = False) -> dict:
        return build_envelope(self._goal_section(), result, step, game_over)

    # -- command handling --------------------------------------------------------

    def handle_line(self, line: str) -> dict:
        """Process one received line and return its reply envelope."""
        try:
            cmd = parse_command(line)
        except ProtocolError as exc:
            return self._handle_parse_error(line, str(exc))

        if self.phase == AWAITING_START:
            return self._handle_awaiting_start(cmd)
        if self.phase == GAME_OVER_PENDING:
            return self._handle_acknowledgment(cmd)
        if self.phase == AWAITING_RESET:
            return self._handle_awaiting_reset(cmd)
        return self._handle_running(cmd)

    def _handle_parse_error(self, line: str, message: str) -> dict:
        result = CommandResult(FAIL, message, 0.0, command="invalid",
                               argument=line.strip())
        if self.phase == RUNNING and self.state is not None:
            if self.first_command_time is None:
                self.first_command_time = self.clock()
            step = self.state.step_count
            self.state.record(result)
            return self._finalize(result, step, give_up=False)
        if self.phase == GAME_OVER_PENDING:
            # Any received line, even a malformed one, acknowledges gameOver.
            self.phase = AWAITING_RESET
            step = self.state.step_count if self.state else 0
            return self._bare_envelope(result, step)
        return self._bare_envelope(result)

    def _handle_awaiting_start(self, cmd: Command) -> dict:
        if cmd.verb == "START":
            self.started = True
            self.phase = RUNNING if self.task is not None else AWAITING_RESET
            result = CommandResult("SUCCESS", "", 0.0, cmd.name, cmd.argument)
            return self._bare_envelope(result)
        if cmd.verb == "RESET" and self.dev_mode:
            return self._handle_reset(cmd, mark_started=True)
        result = CommandResult(FAIL, "not started; send START first", 0.0,
                               cmd.name, cmd.argument)
        return self._bare_envelope(result)

    def _handle_awaiting_reset(self, cmd: Command) -> dict:
        if cmd.verb == "RESET":
            return self._handle_reset(cmd)
        step = self.state.step_count if self.state else 0
        result = CommandResult(FAIL, "instance over; awaiting reset", 0.0,
                               cmd.name, cmd.argument)
        return self._bare_envelope(result, step)

    def _handle_reset(self, cmd: Command, mark_started: bool = False) -> dict:
        if self.phase == RUNNING and not self.dev_mode:
            result = CommandResult(FAIL, "busy: instance in progress", 0.0,
                                   cmd.name, cmd.argument)
            return self._bare_envelope(result)
        if self.phase == GAME_OVER_PENDING:
            # The one-shot flag must be acknowledged before a reset.
            return self._handle_acknowledgment(cmd)
        try:
            task = self.task_loader(cmd.args["path"])
        except (OSError, tasks.TaskError) as exc:
            result = CommandResult(FAIL, f"cannot load task: {exc}", 0.0,
                                   cmd.name, cmd.argument)
            return self._bare_envelope(result)
        old_phase = self.phase
        self.phase = AWAITING_RESET if old_phase == RUNNING else old_phase
        self.load_task(task)
        if mark_started:
            self.started = True
        self.phase = RUNNING
        result = CommandResult("SUCCESS", f"loaded {task.name}", 0.0,
                               cmd.name, cmd.argument)
        return self._bare_envelope(result)

    def _handle_acknowledgment(self, cmd: Command) -> dict:
        """Execute the post-gameOver command on a scratch world and discard it."""
        scratch = self.state.clone()
        result = self._execute(cmd, scratch)
        step = scratch.step_count
        scratch.record(result)
        self.phase = AWAITING_RESET
        extras = self._sense_extras(cmd, scratch)
        extras.update(self._augmentations(scratch))
        return build_envelope(self._goal_section(), result, step, False, extras or None)

    def _handle_running(self, cmd: Command) -> dict:
        if self.first_command_time is None:
            self.first_command_time = self.clock()
        if cmd.verb == "START":
            result = CommandResult(FAIL, "already started", 0.0, cmd.name, cmd.argument)
        elif cmd.verb == "RESET":
            if self.dev_mode:
                return self._handle_reset(cmd)
            result = CommandResult(FAIL, "busy: instance in progress", 0.0,
                                   cmd.name, cmd.argument)
        else:
            result = self._execute(cmd, self.state)
        step = self.state.step_count
        extras = self._sense_extras(cmd, self.state)
        self.state.record(result)
        return self._finalize(result, step, give_up=(cmd.verb == "GIVE_UP"), extras=extras)

    def _finalize(self, result: CommandResult, step: int, give_up: bool,
                  extras: dict | None = None) -> dict:
        """Latch the goal, evaluate ending conditions, build the envelope."""
        if not self.goal_achieved and tasks.goal_check(self.task, self.state):
            self.goal_achieved = True
        game_over = False
        if self.phase == RUNNING:
            elapsed = self.clock() - self.first_command_time
            if self.goal_achieved:
                self.end_reason = GAME_OVER_GOAL
            elif elapsed > self.task.time_limit_sec:
                self.end_reason = GAME_OVER_TIMEOUT
            elif self.state.total_cost > COST_CEILING:
                self.end_reason = GAME_OVER_COST
            elif give_up:
                self.end_reason = GAME_OVER_GIVE_UP
            if self.end_reason:
                game_over = True
                self.phase = GAME_OVER_PENDING
        merged = dict(extras or {})
        merged.update(self._augmentations(self.state))
        return build_envelope(self._goal_section(), result, step, game_over,
                              merged or None)

    # -- execution --------------------------------------------------------------

    def _sense_extras(self, cmd: Command, state: WorldState) -> dict:
        if cmd.kind == "SENSE_ALL":
            return observe.sense_all(state, nonav=cmd.args["nonav"])
        if cmd.kind in _SENSE_PARTS:
            return observe.sense_part(state, _SENSE_PARTS[cmd.kind])
        if cmd.kind == "SENSE_SCREEN":
            try:
                payload = observe.screen_payload(
                    state, self.task.palette, self.screen_format,
                    self.screen_width, self.screen_height)
            except observe.RenderError:
                return {}
            return {"screen": payload}
        if cmd.kind == "CHECK_COST":
            cost = state.total_cost
            return {"totalCost": int(cost) if cost.is_integer() else cost}
        return {}

    def _execute(self, cmd: Command, state: WorldState) -> CommandResult:
        result = self._dispatch(cmd, state)
        result.command = cmd.name
        result.argument = cmd.argument
        return result

    def _dispatch(self, cmd: Command, state: WorldState) -> CommandResult:
        verb, args = cmd.kind, cmd.args
        if verb == "MOVE":
            return state.move(args["key"])
        if verb == "TURN":
            return state.turn(args["delta"])
        if verb == "SMOOTH_TILT":
            return state.tilt(args["mode"])
        if verb == "TP_TO":
            if "entity_id" in args:
                return state.tp_to_entity(args["entity_id"])
            return state.tp_to(args["target"], args["distance"])
        if verb == "BREAK_BLOCK":
            return state.break_block()
        if verb == "SELECT_ITEM":
            return state.select_item(args["item"])
        if verb == "CRAFT":
            return state.craft(args["slots"])
        if verb == "PLACE":
            return state.place(args["item"])
        if verb == "EXTRACT_RUBBER":
            return state.extract_rubber()
        if verb == "COLLECT":
            return state.collect()
        if verb == "DELETE":
            return state.delete_selected()
        if verb in ("USE", "USE_HAND"):
            return state.use()
        if verb in ("INTERACT", "TRADE"):
            return state.interact(args["entity_id"], verb.lower())
        if verb == "NOP":
            return state.nop()
        if verb == "GIVE_UP":
            return CommandResult("SUCCESS", "", 0.0)
        if verb == "REPORT_NOVELTY":
            self.novelty_reports.append({
                "level": args["level"],
                "confidence": args["confidence"],
                "message": args["message"],
            })
            return CommandResult("SUCCESS", "novelty reported", 0.0)
        if verb in ("SENSE_ALL", "SENSE_SCREEN", "CHECK_COST") or verb in _SENSE_PARTS:
            return CommandResult("SUCCESS", "", 0.0)
        if verb == "CHAT":
            if not self.dev_mode:
                return CommandResult(FAIL, "dev commands disabled", 0.0)
            return CommandResult("SUCCESS", "", 0.0)
        if verb == "TELEPORT":
            if not self.dev_mode:
                return CommandResult(FAIL, "dev commands disabled", 0.0)
            return self._dev_teleport(state, args)
        return CommandResult(FAIL, f"unhandled command {verb}", 0.0)

    def _dev_teleport(self, state: WorldState, args: dict) -> CommandResult:
        if args["yaw"] % 15 != 0 or args["pitch"] not in (0, -45):
            return CommandResult(FAIL, "bad pose", 0.0)
        if not state.is_passable(args["pos"]):
            return CommandResult(FAIL, "obstructed", 0.0)
        state.agent.pos = args["pos"]
        state.agent.yaw = args["yaw"] % 360
        state.agent.pitch = args["pitch"]
        return CommandResult("SUCCESS", "", 0.0)
