"""Wire grammar: one command per line in, one single-line JSON envelope out.

Command verbs are case-insensitive on input and canonicalized to lower case
in the reply's ``command_result.command`` field. Parsing is strict: an
unknown verb or malformed argument raises :class:`ProtocolError`, which the
session layer turns into a FAIL envelope with step cost 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .world import BlockPos, CommandResult

MOVE_KEYS = ("w", "a", "d", "x", "q", "e", "z", "c")

GAME_OVER_NONE = ""
GAME_OVER_GOAL = "GOAL"
GAME_OVER_TIMEOUT = "TIMEOUT"
GAME_OVER_COST = "COST_CEILING"
GAME_OVER_GIVE_UP = "GIVE_UP"


class ProtocolError(ValueError):
    """A received line does not parse under the command grammar."""


# Alias verbs fold onto one operation; the original spelling is kept for the
# reply echo and wire round-trips.
_CANONICAL_VERBS = {
    "TILT": "SMOOTH_TILT",
    "PLACE_BLOCK": "PLACE",
    "PLACE_TREE_TAP": "PLACE",
    "PLACE_CRAFTING_TABLE": "PLACE",
    "PLACE_MACGUFFIN": "PLACE",
    "SENSE_ALL_NONAV": "SENSE_ALL",
}


@dataclass(frozen=True)
class Command:
    """One parsed command line."""

    verb: str  # upper-case wire name as received
    args: dict = field(default_factory=dict)
    argument: str = ""  # raw argument text, echoed in the reply
    raw: str = ""

    @property
    def name(self) -> str:
        """Lower-cased verb as reported in command_result.command."""
        return self.verb.lower()

    @property
    def kind(self) -> str:
        """Canonical operation the verb maps to."""
        return _CANONICAL_VERBS.get(self.verb, self.verb)


_NO_ARG_VERBS = {
    "START", "GIVE_UP", "BREAK_BLOCK", "COLLECT", "USE", "USE_HAND", "DELETE",
    "EXTRACT_RUBBER", "NOP", "CHECK_COST", "SENSE_SCREEN", "SENSE_INVENTORY",
    "SENSE_LOCATIONS", "SENSE_RECIPES", "SENSE_ENTITIES", "SENSE_ACTOR_ACTIONS",
    "PLACE_TREE_TAP", "PLACE_CRAFTING_TABLE", "PLACE_MACGUFFIN",
}

_PLACE_ALIASES = {
    "PLACE_TREE_TAP": "polycraft:tree_tap",
    "PLACE_CRAFTING_TABLE": "minecraft:crafting_table",
    "PLACE_MACGUFFIN": "polycraft:macguffin",
}


def _int_arg(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ProtocolError(f"{what} must be an integer, got {token!r}") from None


def parse_command(line: str) -> Command:
    """Parse one newline-stripped command line."""
    raw = line.strip()
    if not raw:
        raise ProtocolError("empty command line")
    head, _, rest = raw.partition(" ")
    verb = head.upper()
    argument = rest.strip()
    tokens = argument.split()

    def require(n: int, usage: str):
        if len(tokens) != n:
            raise ProtocolError(f"usage: {verb} {usage}".rstrip())

    if verb in _NO_ARG_VERBS:
        require(0, "")
        args = {"item": _PLACE_ALIASES[verb]} if verb in _PLACE_ALIASES else {}
        return Command(verb, args, argument, raw)

    if verb == "MOVE":
        require(1, "w|a|d|x|q|e|z|c")
        key = tokens[0].lower()
        if key not in MOVE_KEYS:
            raise ProtocolError(f"MOVE direction must be one of w,a,d,x,q,e,z,c, got {tokens[0]!r}")
        return Command(verb, {"key": key}, argument, raw)

    if verb == "TURN":
        require(1, "<degrees>")
        return Command(verb, {"delta": _int_arg(tokens[0], "TURN angle")}, argument, raw)

    if verb in ("SMOOTH_TILT", "TILT"):
        require(1, "FORWARD|DOWN")
        return Command(verb, {"mode": tokens[0].upper()}, argument, raw)

    if verb == "TP_TO":
        if not tokens:
            raise ProtocolError("usage: TP_TO x,y,z [distance] | TP_TO <entityID>")
        if "," in tokens[0]:
            parts = tokens[0].split(",")
            if len(parts) != 3:
                raise ProtocolError("TP_TO target must be x,y,z")
            target = BlockPos(*(_int_arg(p, "TP_TO coordinate") for p in parts))
            distance = 1
            if len(tokens) == 2:
                distance = _int_arg(tokens[1], "TP_TO distance")
            elif len(tokens) > 2:
                raise ProtocolError("usage: TP_TO x,y,z [distance]")
            return Command(verb, {"target": target, "distance": distance}, argument, raw)
        if len(tokens) != 1:
            raise ProtocolError("usage: TP_TO <entityID>")
        return Command(verb, {"entity_id": _int_arg(tokens[0], "entity id")}, argument, raw)

    if verb == "SELECT_ITEM":
        require(1, "<item>")
        return Command(verb, {"item": tokens[0]}, argument, raw)

    if verb in ("PLACE", "PLACE_BLOCK"):
        require(1, "<item>")
        return Command(verb, {"item": tokens[0]}, argument, raw)

    if verb == "CRAFT":
        if not tokens or tokens[0] != "1":
            raise ProtocolError('CRAFT must be followed by a "1"')
        slots = tokens[1:]
        if len(slots) not in (4, 9):
            raise ProtocolError("CRAFT takes 4 or 9 slot tokens")
        return Command(verb, {"slots": tuple(slots)}, argument, raw)

    if verb in ("INTERACT", "TRADE"):
        if not tokens:
            raise ProtocolError(f"usage: {verb} <entityID> ...")
        return Command(verb, {"entity_id": _int_arg(tokens[0], "entity id"),
                              "extra": tuple(tokens[1:])}, argument, raw)

    if verb == "SENSE_ALL":
        if not tokens:
            return Command(verb, {"nonav": False}, argument, raw)
        if len(tokens) == 1 and tokens[0].upper() == "NONAV":
            return Command(verb, {"nonav": True}, argument, raw)
        raise ProtocolError("usage: SENSE_ALL [NONAV]")

    if verb == "SENSE_ALL_NONAV":
        require(0, "")
        return Command(verb, {"nonav": True}, argument, raw)

    if verb == "RESET":
        if len(tokens) < 2 or tokens[0].lower() != "domain":
            raise ProtocolError("usage: RESET domain <task file>")
        return Command(verb, {"path": argument.split(None, 1)[1]}, argument, raw)

    if verb == "REPORT_NOVELTY":
        return Command(verb, _parse_novelty(tokens), argument, raw)

    if verb == "CHAT":
        return Command(verb, {"message": argument}, argument, raw)

    if verb == "TELEPORT":
        require(5, "<x> <y> <z> <yaw> <pitch>")
        x, y, z, yaw, pitch = (_int_arg(t, "TELEPORT parameter") for t in tokens)
        return Command(verb, {"pos": BlockPos(x, y, z), "yaw": yaw, "pitch": pitch},
                       argument, raw)

    raise ProtocolError(f"unknown command: {head!r}")


def _parse_novelty(tokens: list[str]) -> dict:
    args = {"level": None, "confidence": None, "message": ""}
    i = 0
    while i < len(tokens):
        flag = tokens[i]
        if flag == "-l" and i + 1 < len(tokens):
            args["level"] = _int_arg(tokens[i + 1], "novelty level")
            i += 2
        elif flag == "-c" and i + 1 < len(tokens):
            try:
                args["confidence"] = float(tokens[i + 1])
            except ValueError:
                raise ProtocolError("novelty confidence must be a number") from None
            i += 2
        elif flag == "-m":
            args["message"] = " ".join(tokens[i + 1:])
            i = len(tokens)
        else:
            raise ProtocolError(f"unknown REPORT_NOVELTY flag: {flag!r}")
    return args


def format_command(cmd: Command) -> str:
    """Rebuild a wire line from a parsed command (token-equivalent)."""
    if cmd.argument:
        return f"{cmd.verb} {cmd.argument}"
    return cmd.verb


# -- reply envelopes -----------------------------------------------------------

def _plain_cost(cost: float):
    """Integral costs serialize as integers, matching the wire examples."""
    return int(cost) if float(cost).is_integer() else cost


def result_to_dict(result: CommandResult) -> dict:
    return {
        "command": result.command,
        "argument": result.argument,
        "result": result.result,
        "message": result.message,
        "stepCost": _plain_cost(result.step_cost),
    }


def build_envelope(goal: dict, result: CommandResult, step: int, game_over: bool,
                   extras: dict | None = None) -> dict:
    """The four-key reply document, plus documented optional augmentations."""
    envelope = {
        "goal": goal,
        "command_result": result_to_dict(result),
    }
    if extras:
        envelope.update(extras)
    envelope["step"] = step
    envelope["gameOver"] = game_over
    return envelope


def encode_envelope(envelope: dict) -> bytes:
    """One single-line UTF-8 JSON record, newline-terminated."""
    return (json.dumps(envelope) + "\n").encode("utf-8")
