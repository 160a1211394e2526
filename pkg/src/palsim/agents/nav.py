"""Grid navigation over sensed maps: passable-cell graph and BFS paths."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

Cell = tuple[int, int]  # (x, z)

# Deterministic expansion order: North, East, South, West.
STEPS = ((0, -1), (1, 0), (0, 1), (-1, 0))

NO_PATH = None

# Facing direction per step, in degrees (0 = North = -z, clockwise).
STEP_YAW = {(0, -1): 0, (1, 0): 90, (0, 1): 180, (-1, 0): 270}


@dataclass
class NavGraph:
    """4-connected adjacency over the passable cells of one sensed map."""

    passable: set[Cell]
    blocks: dict[Cell, str] = field(default_factory=dict)

    @classmethod
    def from_sense_map(cls, map_payload: dict) -> "NavGraph":
        passable = set()
        blocks = {}
        for key, entry in map_payload.items():
            x, _, z = (int(v) for v in key.split(","))
            if entry.get("isAccessible"):
                passable.add((x, z))
            if entry["name"] != "minecraft:air":
                blocks[(x, z)] = entry["name"]
        return cls(passable, blocks)

    def neighbors(self, cell: Cell):
        for dx, dz in STEPS:
            nxt = (cell[0] + dx, cell[1] + dz)
            if nxt in self.passable:
                yield nxt


def bfs_path(graph: NavGraph, start: Cell, goal: Cell):
    """Shortest 4-connected path from start to goal, start excluded.

    Ties break by N, E, S, W expansion order; NO_PATH when unreachable.
    """
    return bfs_to_any(graph, start, {goal})


def bfs_to_any(graph: NavGraph, start: Cell, goals: set[Cell]):
    """Shortest path to the nearest of several goal cells."""
    if start in goals:
        return []
    frontier = deque([start])
    parents: dict[Cell, Cell | None] = {start: None}
    while frontier:
        cell = frontier.popleft()
        for nxt in graph.neighbors(cell):
            if nxt in parents:
                continue
            parents[nxt] = cell
            if nxt in goals:
                path = [nxt]
                cur = cell
                while parents[cur] is not None:
                    path.append(cur)
                    cur = parents[cur]
                return list(reversed(path))
            frontier.append(nxt)
    return NO_PATH


def path_to_commands(path: list[Cell], start: Cell, start_yaw: int):
    """Translate a cell path into TURN/MOVE w lines; returns (lines, end_yaw)."""
    lines: list[str] = []
    yaw = start_yaw % 360
    here = start
    for cell in path:
        step = (cell[0] - here[0], cell[1] - here[1])
        want = STEP_YAW[step]
        delta = (want - yaw + 180) % 360 - 180
        if delta == -180:
            delta = 180
        if delta:
            lines.append(f"TURN {delta}")
            yaw = want
        lines.append("MOVE w")
        here = cell
    return lines, yaw
