"""Deterministic grid-world state machine.

One mutable :class:`WorldState` per task instance: a single-layer block grid
(the arena is flat at the agent's height), the agent pose, the inventory,
item/NPC entities, and the accumulated step cost. Every interacting command
maps to one method returning a :class:`CommandResult`; the caller is the
single serialized executor and applies exactly one command at a time.

Failed commands still charge their step cost so that probing the world via
rejected commands is never free.
"""

from __future__ import annotations

import copy
import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from . import blocks
from .costs import CostTable

SUCCESS = "SUCCESS"
FAIL = "FAIL"

# Movement keys in the local frame: (right, forward) amounts. The diagonal
# keys sit around "w" the way they do on a WSAD keyboard.
_MOVE_LOCAL = {
    "w": (0, 1),
    "x": (0, -1),
    "a": (-1, 0),
    "d": (1, 0),
    "q": (-1, 1),
    "e": (1, 1),
    "z": (-1, -1),
    "c": (1, -1),
}

_SNAP_EPS = 1e-9


class BlockPos(NamedTuple):
    x: int
    y: int
    z: int


def _snap(v: float) -> int:
    """Round a rotated unit-vector component to {-1, 0, 1}.

    Half-magnitudes round away from zero, so yaw 30/45/60 all target the
    diagonal cell.
    """
    if v >= 0.5 - _SNAP_EPS:
        return 1
    if v <= -0.5 + _SNAP_EPS:
        return -1
    return 0


def yaw_offset(yaw: int) -> tuple[int, int]:
    """Unit (dx, dz) of the cell faced at *yaw* degrees (0 = North = -z)."""
    rad = math.radians(yaw % 360)
    return _snap(math.sin(rad)), _snap(-math.cos(rad))


def move_offset(yaw: int, key: str) -> tuple[int, int]:
    """World-frame (dx, dz) for a MOVE key at the given yaw."""
    lr, lf = _MOVE_LOCAL[key]
    rad = math.radians(yaw % 360)
    wx = lr * math.cos(rad) + lf * math.sin(rad)
    wz = lr * math.sin(rad) - lf * math.cos(rad)
    return _snap(wx), _snap(wz)


@dataclass
class CommandResult:
    """Outcome of one executed command, echoed inside the reply envelope."""

    result: str
    message: str
    step_cost: float
    command: str = ""
    argument: str = ""

    @property
    def ok(self) -> bool:
        return self.result == SUCCESS


def _ok(cost: float, message: str = "") -> CommandResult:
    return CommandResult(SUCCESS, message, cost)


def _fail(message: str, cost: float) -> CommandResult:
    return CommandResult(FAIL, message, cost)


@dataclass(frozen=True)
class Recipe:
    """Positional crafting grid (4 or 9 slots, "0" = empty) and its output."""

    inputs: tuple[str, ...]
    output_item: str
    output_count: int

    def __post_init__(self):
        if len(self.inputs) not in (4, 9):
            raise ValueError("recipe grid must have 4 or 9 slots")
        if self.output_count < 1:
            raise ValueError("recipe output count must be >= 1")

    @property
    def ingredients(self) -> Counter:
        return Counter(t for t in self.inputs if t != blocks.EMPTY_SLOT)

    @property
    def occupied_slots(self) -> int:
        return sum(1 for t in self.inputs if t != blocks.EMPTY_SLOT)


@dataclass
class Entity:
    """A non-block occupant of the arena (dropped item or NPC)."""

    entity_id: int
    kind: str  # "item-entity" or "npc"
    pos: BlockPos
    item: str = ""


@dataclass
class WorldGrid:
    """Solid blocks of a flat arena; absent cells are air."""

    width: int
    depth: int
    y_level: int = 4
    cells: dict[BlockPos, str] = field(default_factory=dict)
    unbreakable: frozenset[str] = frozenset()

    def in_bounds(self, pos: BlockPos) -> bool:
        return 0 <= pos.x < self.width and 0 <= pos.z < self.depth and pos.y == self.y_level

    def block_at(self, pos: BlockPos) -> str:
        return self.cells.get(pos, blocks.AIR)

    def is_solid(self, pos: BlockPos) -> bool:
        return pos in self.cells

    def set_block(self, pos: BlockPos, name: str) -> None:
        if not self.in_bounds(pos):
            raise ValueError(f"position out of bounds: {pos}")
        self.cells[pos] = name

    def clear_block(self, pos: BlockPos) -> None:
        self.cells.pop(pos, None)

    def is_unbreakable(self, name: str) -> bool:
        return name in blocks.ALWAYS_UNBREAKABLE or name in self.unbreakable


@dataclass
class AgentPose:
    pos: BlockPos
    yaw: int = 0  # multiples of 15 in [0, 360); 0 faces North (-z)
    pitch: int = 0  # 0 or -45


@dataclass
class Inventory:
    slots: dict[str, int] = field(default_factory=dict)
    selected: str = ""

    def count(self, item: str) -> int:
        return self.slots.get(item, 0)

    def add(self, item: str, n: int = 1) -> None:
        self.slots[item] = self.slots.get(item, 0) + n

    def remove(self, item: str, n: int = 1) -> None:
        have = self.slots.get(item, 0)
        if have < n:
            raise ValueError(f"inventory underflow for {item}")
        if have == n:
            del self.slots[item]
            if self.selected == item:
                self.selected = ""
        else:
            self.slots[item] = have - n

    def has_all(self, needed: Counter) -> bool:
        return all(self.count(item) >= n for item, n in needed.items())


@dataclass
class WorldState:
    """Full mutable simulation state for one task instance."""

    grid: WorldGrid
    agent: AgentPose
    inventory: Inventory
    entities: dict[int, Entity] = field(default_factory=dict)
    recipes: list[Recipe] = field(default_factory=list)
    costs: CostTable = field(default_factory=CostTable)
    total_cost: float = 0.0
    step_count: int = 0
    actor_actions: list[tuple[int, str]] = field(default_factory=list)

    # -- bookkeeping ------------------------------------------------------

    def record(self, result: CommandResult) -> None:
        """Charge one processed command: cost accumulates, step count +1."""
        self.total_cost += result.step_cost
        self.step_count += 1

    def check_cost(self) -> float:
        return self.total_cost

    def clone(self) -> "WorldState":
        return copy.deepcopy(self)

    def digest(self) -> str:
        """Stable fingerprint of the full state, for purity/replay checks."""
        h = hashlib.sha256()
        h.update(f"{self.grid.width},{self.grid.depth},{self.grid.y_level};".encode())
        for pos in sorted(self.grid.cells):
            h.update(f"{pos.x},{pos.y},{pos.z}={self.grid.cells[pos]};".encode())
        a = self.agent
        h.update(f"@{a.pos.x},{a.pos.y},{a.pos.z}|{a.yaw}|{a.pitch};".encode())
        for item in sorted(self.inventory.slots):
            h.update(f"{item}x{self.inventory.slots[item]};".encode())
        h.update(f"sel={self.inventory.selected};".encode())
        for eid in sorted(self.entities):
            e = self.entities[eid]
            h.update(f"e{eid}:{e.kind}@{e.pos.x},{e.pos.y},{e.pos.z}:{e.item};".encode())
        h.update(f"cost={self.total_cost!r};steps={self.step_count};".encode())
        return h.hexdigest()

    # -- geometry helpers --------------------------------------------------

    def facing_cell(self) -> BlockPos:
        """Cell one block ahead at foot level; pitch never shifts the target."""
        dx, dz = yaw_offset(self.agent.yaw)
        p = self.agent.pos
        return BlockPos(p.x + dx, p.y, p.z + dz)

    def entity_at(self, pos: BlockPos, kind: str | None = None) -> Entity | None:
        for e in self.entities.values():
            if e.pos == pos and (kind is None or e.kind == kind):
                return e
        return None

    def is_passable(self, pos: BlockPos) -> bool:
        if not self.grid.in_bounds(pos) or self.grid.is_solid(pos):
            return False
        return self.entity_at(pos, kind="npc") is None

    def _has_adjacent(self, pos: BlockPos, name: str) -> bool:
        for dx, dz in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            if self.grid.block_at(BlockPos(pos.x + dx, pos.y, pos.z + dz)) == name:
                return True
        return False

    def _table_nearby(self, radius: float = 2.0) -> bool:
        a = self.agent.pos
        for pos, name in self.grid.cells.items():
            if name != blocks.CRAFTING_TABLE:
                continue
            if math.dist((pos.x, pos.y, pos.z), (a.x, a.y, a.z)) <= radius:
                return True
        return False

    # -- movement ----------------------------------------------------------

    def move(self, key: str) -> CommandResult:
        dx, dz = move_offset(self.agent.yaw, key)
        cost = self.costs.move(dx, dz)
        p = self.agent.pos
        dest = BlockPos(p.x + dx, p.y, p.z + dz)
        if not self.is_passable(dest):
            return _fail("obstructed", cost)
        self.agent.pos = dest
        self._pickup_item_entities(dest)
        return _ok(cost)

    def _pickup_item_entities(self, pos: BlockPos) -> None:
        entered = self.entity_at(pos, kind="item-entity")
        if entered is not None and entered.item:
            self.inventory.add(entered.item, 1)
            del self.entities[entered.entity_id]

    def turn(self, delta: int) -> CommandResult:
        cost = self.costs.flat("turn")
        if delta % 15 != 0:
            return _fail("invalid increment", cost)
        self.agent.yaw = (self.agent.yaw + delta) % 360
        return _ok(cost)

    def tilt(self, mode: str) -> CommandResult:
        cost = self.costs.flat("smooth_tilt")
        if mode == "FORWARD":
            self.agent.pitch = 0
        elif mode == "DOWN":
            self.agent.pitch = -45
        else:
            return _fail("invalid tilt mode", cost)
        return _ok(cost)

    def tp_to(self, target: BlockPos, distance: int = 1) -> CommandResult:
        if distance < 1:
            return _fail("bad distance", 0.0)
        dest = BlockPos(target.x, target.y, target.z - distance)
        a = self.agent.pos
        cost = self.costs.teleport(math.dist((a.x, a.y, a.z), (dest.x, dest.y, dest.z)))
        if not self.is_passable(dest):
            return _fail("obstructed", cost)
        self.agent.pos = dest
        self.agent.yaw = 0
        self.agent.pitch = 0
        self._pickup_item_entities(dest)
        return _ok(cost)

    def tp_to_entity(self, entity_id: int) -> CommandResult:
        entity = self.entities.get(entity_id)
        if entity is None:
            return _fail("no such entity", 0.0)
        return self.tp_to(entity.pos, 1)

    # -- interactions ------------------------------------------------------

    def break_block(self) -> CommandResult:
        cost = self.costs.flat("break_block")
        cell = self.facing_cell()
        name = self.grid.block_at(cell)
        if name == blocks.AIR:
            return _fail("air", cost)
        if self.grid.is_unbreakable(name):
            return _fail("unbreakable", cost)
        self.grid.clear_block(cell)
        self.inventory.add(blocks.BLOCK_DROPS.get(name, name), 1)
        return _ok(cost)

    def select_item(self, item: str) -> CommandResult:
        cost = self.costs.flat("select_item")
        if self.inventory.count(item) < 1:
            return _fail("item not in inventory", cost)
        self.inventory.selected = item
        return _ok(cost, "selected item")

    def craft(self, slots: Iterable[str]) -> CommandResult:
        grid = tuple(slots)
        recipe = next((r for r in self.recipes if r.inputs == grid), None)
        if recipe is None:
            return _fail("unknown recipe", self.costs.craft(
                sum(1 for t in grid if t != blocks.EMPTY_SLOT)))
        cost = self.costs.craft(recipe.occupied_slots)
        if not self.inventory.has_all(recipe.ingredients):
            return _fail("missing ingredients", cost)
        if len(grid) == 9 and not self._table_nearby():
            return _fail("no crafting table nearby", cost)
        for item, n in recipe.ingredients.items():
            self.inventory.remove(item, n)
        self.inventory.add(recipe.output_item, recipe.output_count)
        return _ok(cost)

    def place(self, item: str) -> CommandResult:
        cost = self.costs.flat("place")
        cell = self.facing_cell()
        if not self.grid.in_bounds(cell) or self.grid.is_solid(cell) \
                or self.entity_at(cell, kind="npc") is not None:
            return _fail("occupied", cost)
        if self.inventory.count(item) < 1:
            return _fail("not held", cost)
        if item == blocks.TREE_TAP and not self._has_adjacent(cell, blocks.LOG):
            return _fail("no adjacent log", cost)
        self.inventory.remove(item, 1)
        self.grid.set_block(cell, item)
        return _ok(cost)

    def extract_rubber(self) -> CommandResult:
        cost = self.costs.flat("extract_rubber")
        cell = self.facing_cell()
        if self.grid.block_at(cell) != blocks.TREE_TAP:
            return _fail("no tree tap in front", cost)
        if not self._has_adjacent(cell, blocks.LOG):
            return _fail("no adjacent log", cost)
        self.inventory.add(blocks.SACK_PELLETS, 1)
        return _ok(cost)

    def use(self) -> CommandResult:
        # Door-like blocks do not exist in the base tasks, so USE/USE_HAND
        # never finds anything to toggle.
        return _fail("nothing to use", self.costs.flat("use"))

    def collect(self) -> CommandResult:
        cost = self.costs.flat("collect")
        cell = self.facing_cell()
        entity = self.entity_at(cell, kind="item-entity")
        if entity is not None and entity.item:
            self.inventory.add(entity.item, 1)
            del self.entities[entity.entity_id]
            return _ok(cost)
        name = self.grid.block_at(cell)
        if name in blocks.COLLECTIBLE_BLOCKS:
            self.grid.clear_block(cell)
            self.inventory.add(name, 1)
            return _ok(cost)
        return _fail("nothing to collect", cost)

    def delete_selected(self) -> CommandResult:
        cost = self.costs.flat("delete")
        item = self.inventory.selected
        if not item or self.inventory.count(item) < 1:
            return _fail("no selected item", cost)
        self.inventory.remove(item, 1)
        return _ok(cost)

    def interact(self, entity_id: int, kind: str) -> CommandResult:
        cost = self.costs.flat(kind)
        entity = self.entities.get(entity_id)
        if entity is None or entity.kind != "npc":
            return _fail("no entity", cost)
        p = self.agent.pos
        if abs(entity.pos.x - p.x) + abs(entity.pos.z - p.z) > 1:
            return _fail("no entity", cost)
        # NPC behaviors are not modeled; the interaction is acknowledged only.
        return _ok(cost)

    def nop(self) -> CommandResult:
        return _ok(self.costs.flat("nop"))
