"""Shared agent plumbing: envelope bookkeeping and sensed-state views."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .nav import NavGraph

ACK_COMMAND = "SENSE_ALL"


class InstanceOver(Exception):
    """Raised when an envelope arrives with gameOver=true."""

    def __init__(self, envelope: dict):
        super().__init__("gameOver")
        self.envelope = envelope


class AgentIO:
    """Counts commands and surfaces the one-shot gameOver flag as control flow."""

    def __init__(self, transport):
        self.transport = transport
        self.commands_sent = 0

    def send(self, line: str) -> dict:
        envelope = self.transport.send(line)
        self.commands_sent += 1
        if envelope.get("gameOver"):
            raise InstanceOver(envelope)
        return envelope

    def acknowledge(self) -> dict:
        """The required post-gameOver command; its reply is irrelevant."""
        return self.transport.send(ACK_COMMAND)


@dataclass
class SenseView:
    """Parsed SENSE_ALL reply: everything an agent plans against."""

    nav: NavGraph
    pos: tuple[int, int, int]
    yaw: int
    inventory: dict[str, int]
    selected: str
    entities: dict[int, dict]
    recipes: list[dict]
    goal_type: str
    goal_achieved: bool
    y_level: int = 4
    blocks: dict[tuple[int, int], str] = field(default_factory=dict)

    @classmethod
    def from_envelope(cls, envelope: dict) -> "SenseView":
        player = envelope["player"]
        nav = NavGraph.from_sense_map(envelope["map"])
        return cls(
            nav=nav,
            pos=tuple(player["pos"]),
            yaw=player["yaw"],
            inventory=dict(envelope["inventory"]["items"]),
            selected=envelope["inventory"]["selectedItem"],
            entities={int(k): v for k, v in envelope["entities"].items()},
            recipes=list(envelope["recipes"]),
            goal_type=envelope["goal"]["goalType"],
            goal_achieved=envelope["goal"]["goalAchieved"],
            y_level=player["pos"][1],
            blocks=dict(nav.blocks),
        )

    @property
    def cell(self) -> tuple[int, int]:
        return (self.pos[0], self.pos[2])

    def find_blocks(self, name: str) -> list[tuple[int, int]]:
        return sorted(c for c, n in self.blocks.items() if n == name)

    def count(self, item: str) -> int:
        return self.inventory.get(item, 0)

    def recipe_for(self, output_item: str, slots: int | None = None) -> dict | None:
        for recipe in self.recipes:
            if recipe["output"]["item"] != output_item:
                continue
            if slots is not None and len(recipe["inputs"]) != slots:
                continue
            return recipe
        return None


def wait_for_instance(io: AgentIO, poll_delay: float = 0.05,
                      give_up_after: float | None = None) -> SenseView | None:
    """Poll with SENSE_ALL until a live instance answers.

    Returns None when the connection closes (tournament ended).
    """
    start = time.monotonic()
    while True:
        try:
            envelope = io.transport.send("SENSE_ALL")
        except (ConnectionError, OSError):
            return None
        if envelope.get("gameOver"):
            # Stale expired instance: the next poll doubles as the
            # acknowledgment command, then polling continues.
            continue
        if envelope["command_result"]["result"] == "SUCCESS" and "map" in envelope:
            return SenseView.from_envelope(envelope)
        if give_up_after is not None and time.monotonic() - start > give_up_after:
            return None
        time.sleep(poll_delay)
