"""Task definitions: schema, loaders, seeded generators, goal evaluation.

A task file is UTF-8 JSON, one task per file, with top-level keys
``schemaVersion, name, arena, blocks, entities, spawn, inventory, recipes,
goal, timeLimitSec, seed, palette`` (plus a reserved ``extensions`` object).
Files are named after the instance-name convention
``<TASK>_L00_T01_S01_X0100_U9999_V0_G00000_I0020_N0.json``.

Generators are pure functions of their seed: the same seed always yields a
byte-identical task file.
"""

from __future__ import annotations

import json
import random
import re
from collections import deque
from dataclasses import dataclass, field

from . import blocks
from .world import AgentPose, BlockPos, Entity, Inventory, Recipe, WorldGrid, WorldState

SCHEMA_VERSION = 1
GOAL_POGOSTICK = "POGOSTICK"
GOAL_ITEM = "ITEM"
GOAL_BLOCK_TO_LOCATION = "BLOCK_TO_LOCATION"
_GOAL_TYPES = (GOAL_POGOSTICK, GOAL_ITEM, GOAL_BLOCK_TO_LOCATION)
_DISTRIBUTIONS = ("Uninformed", "PreNovelty", "Novelty")

DEFAULT_TIME_LIMIT_SEC = 300.0
ARENA_Y = 4

POGO_RECIPES = [
    Recipe((blocks.LOG, "0", "0", "0"), blocks.PLANKS, 4),
    Recipe((blocks.PLANKS, "0", blocks.PLANKS, "0"), blocks.STICK, 4),
    Recipe((blocks.PLANKS, "0", "0", blocks.PLANKS, "0", "0", "0", "0", "0"),
           blocks.STICK, 4),
    Recipe((blocks.PLANKS, blocks.STICK, blocks.PLANKS,
            blocks.PLANKS, "0", blocks.PLANKS,
            "0", blocks.PLANKS, "0"), blocks.TREE_TAP, 1),
    Recipe((blocks.STICK, blocks.STICK, blocks.STICK,
            blocks.PLANKS, blocks.STICK, blocks.PLANKS,
            "0", blocks.SACK_PELLETS, "0"), blocks.POGO_STICK, 1),
]

_POGO_PALETTE = {
    blocks.AIR: (58, 157, 35),
    blocks.BEDROCK: (70, 70, 70),
    blocks.LOG: (104, 78, 43),
    blocks.PLANKS: (186, 151, 98),
    blocks.STICK: (140, 110, 70),
    blocks.CRAFTING_TABLE: (168, 116, 54),
    blocks.TREE_TAP: (222, 184, 68),
    blocks.IRON_PICKAXE: (200, 200, 210),
    blocks.SACK_PELLETS: (230, 230, 230),
    blocks.POGO_STICK: (196, 64, 64),
    blocks.MACGUFFIN: (64, 220, 128),
}


class TaskError(ValueError):
    """A task file failed to parse or violates the schema."""


@dataclass(frozen=True)
class GoalSpec:
    goal_type: str
    item: str | None = None
    location: BlockPos | None = None
    distribution: str = "Uninformed"

    def __post_init__(self):
        if self.goal_type not in _GOAL_TYPES:
            raise TaskError(f"goal.goalType: unknown value {self.goal_type!r}")
        if self.goal_type in (GOAL_POGOSTICK, GOAL_ITEM) and not self.item:
            raise TaskError("goal.item: required for item goals")
        if self.goal_type == GOAL_BLOCK_TO_LOCATION and self.location is None:
            raise TaskError("goal.location: required for BLOCK_TO_LOCATION goals")
        if self.distribution not in _DISTRIBUTIONS:
            raise TaskError(f"goal.distribution: unknown value {self.distribution!r}")


@dataclass(frozen=True)
class TaskDef:
    """One serializable task instance. Immutable after load/generation."""

    name: str
    width: int
    depth: int
    block_list: tuple[tuple[BlockPos, str], ...]
    entity_list: tuple[Entity, ...]
    spawn_pos: BlockPos
    spawn_yaw: int
    inventory: dict[str, int]
    recipes: tuple[Recipe, ...]
    goal: GoalSpec
    time_limit_sec: float = DEFAULT_TIME_LIMIT_SEC
    seed: int = 0
    palette: dict[str, tuple[int, int, int]] = field(default_factory=dict)
    y_level: int = ARENA_Y
    extensions: dict = field(default_factory=dict)

    def build_world(self, costs=None) -> WorldState:
        """Instantiate a fresh mutable world for this task."""
        grid = WorldGrid(self.width, self.depth, self.y_level,
                         cells={pos: name for pos, name in self.block_list})
        entities = {e.entity_id: replace_entity(e) for e in self.entity_list}
        kwargs = {} if costs is None else {"costs": costs}
        return WorldState(
            grid=grid,
            agent=AgentPose(self.spawn_pos, self.spawn_yaw),
            inventory=Inventory(dict(self.inventory)),
            entities=entities,
            recipes=list(self.recipes),
            **kwargs,
        )


def replace_entity(e: Entity) -> Entity:
    return Entity(e.entity_id, e.kind, e.pos, e.item)


def goal_check(task: TaskDef, state: WorldState) -> bool:
    """True when the task goal currently holds in *state*.

    Item goals hold while the target item is in the inventory; location
    goals hold while the MacGuffin block occupies the designated placement
    cell. The session layer latches the first True so a goal, once reported
    achieved, stays achieved for the rest of the instance.
    """
    goal = task.goal
    if goal.goal_type in (GOAL_POGOSTICK, GOAL_ITEM):
        return state.inventory.count(goal.item) >= 1
    return state.grid.block_at(goal.location) == blocks.MACGUFFIN


# -- instance naming --------------------------------------------------------

_NAME_RE = re.compile(
    r"^(?P<task>[A-Z]+)_L(?P<level>\d+)_T(?P<tournament>\d+)_S(?P<scenario>\d+)"
    r"_X(?P<count>\d+)_U(?P<u>[0-9A-Za-z]+)_V(?P<v>[0-9A-Za-z]+)_G(?P<seed>\d+)"
    r"_I(?P<index>\d+)_N(?P<n>[0-9A-Za-z]+)$"
)


@dataclass(frozen=True)
class InstanceName:
    """Parsed fields of the instance-file naming convention.

    Numeric-looking fields stay strings so arbitrary zero-padding
    round-trips exactly; U, V and N are opaque.
    """

    task: str
    level: str
    tournament: str
    scenario: str
    count: str
    u: str
    v: str
    seed: str
    index: str
    n: str

    @classmethod
    def parse(cls, text: str) -> "InstanceName":
        stem = text[:-5] if text.endswith(".json") else text
        m = _NAME_RE.match(stem)
        if m is None:
            raise TaskError(f"instance name does not match convention: {text!r}")
        return cls(**m.groupdict())

    @classmethod
    def build(cls, task: str, seed: int, index: int, count: int = 100) -> "InstanceName":
        return cls(task=task, level="00", tournament="01", scenario="01",
                   count=f"{count:04d}", u="9999", v="0",
                   seed=f"{seed % 100000:05d}", index=f"{index:04d}", n="0")

    def format(self) -> str:
        return (f"{self.task}_L{self.level}_T{self.tournament}_S{self.scenario}"
                f"_X{self.count}_U{self.u}_V{self.v}_G{self.seed}"
                f"_I{self.index}_N{self.n}")

    @property
    def seed_value(self) -> int:
        return int(self.seed)

    @property
    def index_value(self) -> int:
        return int(self.index)


# -- generators --------------------------------------------------------------

def _bedrock_ring(width: int, depth: int) -> list[tuple[BlockPos, str]]:
    ring = []
    for x in range(width):
        ring.append((BlockPos(x, ARENA_Y, 0), blocks.BEDROCK))
        ring.append((BlockPos(x, ARENA_Y, depth - 1), blocks.BEDROCK))
    for z in range(1, depth - 1):
        ring.append((BlockPos(0, ARENA_Y, z), blocks.BEDROCK))
        ring.append((BlockPos(width - 1, ARENA_Y, z), blocks.BEDROCK))
    return ring


def _reachable_cells(solid: set[tuple[int, int]], width: int, depth: int,
                     start: tuple[int, int]) -> set[tuple[int, int]]:
    """4-connected flood fill over passable interior cells."""
    seen = {start}
    queue = deque([start])
    while queue:
        x, z = queue.popleft()
        for dx, dz in ((0, -1), (1, 0), (0, 1), (-1, 0)):
            nxt = (x + dx, z + dz)
            if nxt in seen or nxt in solid:
                continue
            if not (1 <= nxt[0] < width - 1 and 1 <= nxt[1] < depth - 1):
                continue
            seen.add(nxt)
            queue.append(nxt)
    return seen


def generate_pogo(seed: int, distribution: str = "Uninformed",
                  name: str | None = None) -> TaskDef:
    """A 30x30 grass field inside a bedrock ring, with 5 trees and 1 table.

    The agent spawns somewhere passable with an iron pickaxe; the goal is a
    crafted pogo stick. Pure function of *seed*.
    """
    rng = random.Random(seed)
    width = depth = 32
    interior = [(x, z) for x in range(1, 31) for z in range(1, 31)]
    for _ in range(64):
        cells = rng.sample(interior, 7)
        trees, table, spawn = cells[:5], cells[5], cells[6]
        solid = set(trees) | {table}
        reach = _reachable_cells(solid, width, depth, spawn)
        targets_ok = all(
            any((x + dx, z + dz) in reach for dx, dz in ((0, -1), (1, 0), (0, 1), (-1, 0)))
            for x, z in solid)
        if targets_ok:
            break
    else:  # pragma: no cover - astronomically unlikely with 7 cells in 900
        raise TaskError(f"could not place a solvable arena for seed {seed}")

    block_list = _bedrock_ring(width, depth)
    for x, z in sorted(trees):
        block_list.append((BlockPos(x, ARENA_Y, z), blocks.LOG))
    block_list.append((BlockPos(table[0], ARENA_Y, table[1]), blocks.CRAFTING_TABLE))

    if name is None:
        name = InstanceName.build("POGO", seed, 0).format()
    return TaskDef(
        name=name,
        width=width,
        depth=depth,
        block_list=tuple(block_list),
        entity_list=(),
        spawn_pos=BlockPos(spawn[0], ARENA_Y, spawn[1]),
        spawn_yaw=rng.choice((0, 90, 180, 270)),
        inventory={blocks.IRON_PICKAXE: 1},
        recipes=tuple(POGO_RECIPES),
        goal=GoalSpec(GOAL_POGOSTICK, item=blocks.POGO_STICK, distribution=distribution),
        seed=seed,
        palette=dict(_POGO_PALETTE),
    )


# Room geometry for the four-room arena. The 32-block axis splits as
# 1 (perimeter) + 14 (room) + 2 (inner wall band) + 14 (room) + 1 (perimeter);
# doorways are cut through both layers of the wall band.
_ROOM_LO = range(1, 15)
_ROOM_HI = range(17, 31)
_WALL_BAND = (15, 16)

HUGA_MACGUFFIN_ID = 7101


def generate_huga(seed: int, distribution: str = "Uninformed",
                  name: str | None = None) -> TaskDef:
    """A 32x32 four-room arena: fetch the MacGuffin, place it at the Target.

    The agent spawns in the bottom-left room, the MacGuffin item sits in the
    top-left room, the Target marker stands in the bottom-right room and the
    top-right room is empty. Every shared wall gets 1-3 doorways, so the
    rooms are always fully connected. Wall and floor colors vary by seed.
    """
    rng = random.Random(seed)
    width = depth = 32
    walls: set[tuple[int, int]] = set()
    for z in range(1, 31):
        walls.update((x, z) for x in _WALL_BAND)
    for x in range(1, 31):
        walls.update((x, z) for z in _WALL_BAND)

    # One doorway list per shared wall: (fixed axis, span of the other axis).
    for span, vertical in ((_ROOM_LO, True), (_ROOM_HI, True),
                           (_ROOM_LO, False), (_ROOM_HI, False)):
        for pos in rng.sample(list(span), rng.randint(1, 3)):
            for band in _WALL_BAND:
                walls.discard((band, pos) if vertical else (pos, band))

    spawn = (rng.choice(_ROOM_LO), rng.choice(_ROOM_HI))        # bottom-left
    macguffin = (rng.choice(_ROOM_LO), rng.choice(_ROOM_LO))    # top-left
    target = (rng.randrange(18, 30), rng.randrange(19, 30))     # bottom-right
    placement = BlockPos(target[0], ARENA_Y, target[1] - 1)

    block_list = _bedrock_ring(width, depth)
    for x, z in sorted(walls):
        block_list.append((BlockPos(x, ARENA_Y, z), blocks.WOOL))
    block_list.append((BlockPos(target[0], ARENA_Y, target[1]), blocks.TARGET))

    floor = (rng.randrange(40, 216), rng.randrange(40, 216), rng.randrange(40, 216))
    wall = (rng.randrange(40, 216), rng.randrange(40, 216), rng.randrange(40, 216))
    palette = {
        blocks.AIR: floor,
        blocks.WOOL: wall,
        blocks.BEDROCK: (70, 70, 70),
        blocks.TARGET: (40, 90, 230),
        blocks.MACGUFFIN: (64, 220, 128),
    }

    if name is None:
        name = InstanceName.build("HUGA", seed, 0).format()
    return TaskDef(
        name=name,
        width=width,
        depth=depth,
        block_list=tuple(block_list),
        entity_list=(Entity(HUGA_MACGUFFIN_ID, "item-entity",
                            BlockPos(macguffin[0], ARENA_Y, macguffin[1]),
                            blocks.MACGUFFIN),),
        spawn_pos=BlockPos(spawn[0], ARENA_Y, spawn[1]),
        spawn_yaw=rng.choice((0, 90, 180, 270)),
        inventory={},
        recipes=(),
        goal=GoalSpec(GOAL_BLOCK_TO_LOCATION, location=placement,
                      distribution=distribution),
        seed=seed,
        palette=palette,
    )


# -- serialization ------------------------------------------------------------

def task_to_dict(task: TaskDef) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "name": task.name,
        "arena": {"width": task.width, "depth": task.depth, "y": task.y_level},
        "blocks": [{"pos": list(pos), "name": name} for pos, name in task.block_list],
        "entities": [
            {"id": e.entity_id, "type": e.kind, "pos": list(e.pos), "item": e.item}
            for e in task.entity_list
        ],
        "spawn": {"pos": list(task.spawn_pos), "yaw": task.spawn_yaw},
        "inventory": dict(task.inventory),
        "recipes": [
            {"inputs": list(r.inputs),
             "output": {"item": r.output_item, "count": r.output_count}}
            for r in task.recipes
        ],
        "goal": {
            "goalType": task.goal.goal_type,
            "item": task.goal.item,
            "location": list(task.goal.location) if task.goal.location else None,
            "distribution": task.goal.distribution,
        },
        "timeLimitSec": task.time_limit_sec,
        "seed": task.seed,
        "palette": {name: list(rgb) for name, rgb in task.palette.items()},
        "extensions": task.extensions,
    }


def _pos(raw, where: str) -> BlockPos:
    if (not isinstance(raw, list)) or len(raw) != 3 \
            or not all(isinstance(v, int) for v in raw):
        raise TaskError(f"{where}: expected [x, y, z] integers")
    return BlockPos(*raw)


def task_from_dict(data: dict) -> TaskDef:
    if not isinstance(data, dict):
        raise TaskError("task file must hold a JSON object")
    version = data.get("schemaVersion")
    if version != SCHEMA_VERSION:
        raise TaskError(f"schemaVersion: unsupported value {version!r}")
    try:
        arena = data["arena"]
        width, depth = int(arena["width"]), int(arena["depth"])
        y_level = int(arena.get("y", ARENA_Y))
        block_list = tuple(
            (_pos(b["pos"], "blocks[].pos"), str(b["name"])) for b in data["blocks"])
        entity_list = tuple(
            Entity(int(e["id"]), str(e["type"]), _pos(e["pos"], "entities[].pos"),
                   str(e.get("item", "")))
            for e in data["entities"])
        spawn_pos = _pos(data["spawn"]["pos"], "spawn.pos")
        spawn_yaw = int(data["spawn"]["yaw"])
        inventory = {str(k): int(v) for k, v in data["inventory"].items()}
        recipes = tuple(
            Recipe(tuple(str(t) for t in r["inputs"]),
                   str(r["output"]["item"]), int(r["output"]["count"]))
            for r in data["recipes"])
        g = data["goal"]
        goal = GoalSpec(
            goal_type=str(g["goalType"]),
            item=g.get("item"),
            location=_pos(g["location"], "goal.location") if g.get("location") else None,
            distribution=str(g.get("distribution", "Uninformed")),
        )
        time_limit = float(data.get("timeLimitSec", DEFAULT_TIME_LIMIT_SEC))
        seed = int(data.get("seed", 0))
        palette = {str(k): tuple(int(c) for c in v)
                   for k, v in data.get("palette", {}).items()}
        extensions = data.get("extensions", {})
        name = str(data["name"])
    except KeyError as exc:
        raise TaskError(f"missing required field: {exc.args[0]}") from exc
    except (TypeError, ValueError) as exc:
        raise TaskError(f"malformed field: {exc}") from exc

    task = TaskDef(name=name, width=width, depth=depth, block_list=block_list,
                   entity_list=entity_list, spawn_pos=spawn_pos, spawn_yaw=spawn_yaw,
                   inventory=inventory, recipes=recipes, goal=goal,
                   time_limit_sec=time_limit, seed=seed, palette=palette,
                   y_level=y_level, extensions=extensions)
    _validate_semantics(task)
    return task


def _validate_semantics(task: TaskDef) -> None:
    grid = WorldGrid(task.width, task.depth, task.y_level)
    for pos, name in task.block_list:
        if not grid.in_bounds(pos):
            raise TaskError(f"blocks: placement out of bounds at {tuple(pos)}")
        grid.cells[pos] = name
    for e in task.entity_list:
        if not grid.in_bounds(e.pos):
            raise TaskError(f"entities: id {e.entity_id} out of bounds")
    if not grid.in_bounds(task.spawn_pos) or grid.is_solid(task.spawn_pos):
        raise TaskError("spawn.pos: spawn cell is blocked or out of bounds")
    if task.spawn_yaw % 15 != 0:
        raise TaskError("spawn.yaw: must be a multiple of 15")
    if task.time_limit_sec <= 0:
        raise TaskError("timeLimitSec: must be positive")
    if task.goal.location is not None and not grid.in_bounds(task.goal.location):
        raise TaskError("goal.location: out of bounds")


def save_task(task: TaskDef, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(task_to_dict(task), fh, indent=2)
        fh.write("\n")


def load_task(path: str) -> TaskDef:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TaskError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return task_from_dict(data)
