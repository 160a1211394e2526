"""Expansion of high-level plan actions into wire command sequences.

Every template ends in a state-verifiable effect (an inventory or block
delta), so the executor can confirm progress from the next sense. Navigation
runs in one of two modes: "tp" teleports next to the target (the teleport
resets the view north, so templates turn around before interacting), "move"
walks a BFS path with TURN/MOVE steps.
"""

from __future__ import annotations

from ..planner import GroundAction
from .base import SenseView
from .nav import STEP_YAW, bfs_to_any, path_to_commands

Cell = tuple[int, int]

LOG = "minecraft:log"
TABLE = "minecraft:crafting_table"
TREE_TAP = "polycraft:tree_tap"
PLANKS = "minecraft:planks"
STICK = "minecraft:stick"
POGO = "polycraft:wooden_pogo_stick"


class ExpansionError(Exception):
    """A referenced object cannot be located; triggers re-sense and replan."""


def _turn_to(current_yaw: int, want_yaw: int) -> list[str]:
    delta = (want_yaw - current_yaw + 180) % 360 - 180
    if delta == -180:
        delta = 180
    return [f"TURN {delta}"] if delta else []


def _face_step(from_cell: Cell, to_cell: Cell) -> int:
    step = (to_cell[0] - from_cell[0], to_cell[1] - from_cell[1])
    try:
        return STEP_YAW[step]
    except KeyError:
        raise ExpansionError(f"cells {from_cell} and {to_cell} are not adjacent") from None


def _walk_and_face(view: SenseView, target: Cell) -> list[str]:
    """BFS to any passable neighbor of *target*, then face it."""
    if view.cell in _neighbors(target):
        return _turn_to(view.yaw, _face_step(view.cell, target))
    stands = {c for c in _neighbors(target) if c in view.nav.passable}
    path = bfs_to_any(view.nav, view.cell, stands)
    if path is None:
        raise ExpansionError(f"no path to a cell adjacent to {target}")
    lines, yaw = path_to_commands(path, view.cell, view.yaw)
    end = path[-1] if path else view.cell
    return lines + _turn_to(yaw, _face_step(end, target))


def _neighbors(cell: Cell) -> list[Cell]:
    x, z = cell
    return [(x, z - 1), (x + 1, z), (x, z + 1), (x - 1, z)]


def _approach(view: SenseView, target: Cell, nav_mode: str,
              distance: int = 1) -> list[str]:
    """Commands that leave the agent adjacent to *target*, facing it."""
    x, z = target
    y = view.y_level
    if nav_mode == "tp":
        # Teleport lands `distance` cells north of the target facing away;
        # the cells in between must be clear for the landing to make sense.
        gap = [(x, z - d) for d in range(1, distance + 1)]
        if all(c in view.nav.passable for c in gap):
            return [f"TP_TO {x},{y},{z}" + (f" {distance}" if distance != 1 else ""),
                    "TURN 180"]
    if distance == 1:
        return _walk_and_face(view, target)
    raise ExpansionError(f"no clear approach at distance {distance} to {target}")


def _craft_line(view: SenseView, output_item: str, slots: int | None = None) -> str:
    recipe = view.recipe_for(output_item, slots)
    if recipe is None:
        raise ExpansionError(f"no recipe for {output_item}")
    return "CRAFT 1 " + " ".join(recipe["inputs"])


def _go_to_table(view: SenseView, nav_mode: str) -> list[str]:
    tables = view.find_blocks(TABLE)
    if not tables:
        raise ExpansionError("no crafting table in the arena")
    return _approach(view, tables[0], nav_mode)


def _tap_site(view: SenseView, tree: Cell) -> tuple[Cell, Cell, int]:
    """(stand cell, tap cell, facing yaw) for placing a tap on *tree*."""
    for tap_cell in _neighbors(tree):
        if tap_cell not in view.nav.passable:
            continue
        for stand in _neighbors(tap_cell):
            if stand == tree or stand not in view.nav.passable:
                continue
            return stand, tap_cell, _face_step(stand, tap_cell)
    raise ExpansionError(f"tree at {tree} has no placeable side")


def expand_macro(action: GroundAction, view: SenseView,
                 bindings: dict[str, Cell], nav_mode: str = "tp") -> list[str]:
    """Wire commands realizing one ground action against the sensed world."""
    name = action.name

    if name == "get-wood":
        tree = bindings.get(action.args[0])
        if tree is None or view.blocks.get(tree) != LOG:
            raise ExpansionError(f"tree {action.args[0]} not found")
        return _approach(view, tree, nav_mode) + ["BREAK_BLOCK"]

    if name == "craft-planks":
        return [_craft_line(view, PLANKS, 4)]

    if name == "craft-sticks":
        return [_craft_line(view, STICK, 4)]

    if name == "craft-tree-tap":
        return _go_to_table(view, nav_mode) + [_craft_line(view, TREE_TAP)]

    if name == "place-tree-tap":
        tree = bindings.get(action.args[0])
        if tree is None or view.blocks.get(tree) != LOG:
            raise ExpansionError(f"tree {action.args[0]} not found")
        x, z = tree
        lines: list[str]
        if nav_mode == "tp" and (x, z - 1) in view.nav.passable \
                and (x, z - 2) in view.nav.passable:
            lines = [f"TP_TO {x},{view.y_level},{z} 2", "TURN 180"]
        else:
            stand, tap_cell, yaw = _tap_site(view, tree)
            path = bfs_to_any(view.nav, view.cell, {stand})
            if path is None:
                raise ExpansionError(f"no path to a stand cell near {tree}")
            lines, end_yaw = path_to_commands(path, view.cell, view.yaw)
            lines += _turn_to(end_yaw, yaw)
        return lines + [f"SELECT_ITEM {TREE_TAP}", "PLACE_TREE_TAP"]

    if name == "extract-rubber":
        taps = view.find_blocks(TREE_TAP)
        if not taps:
            raise ExpansionError("no tree tap in the arena")
        return _approach(view, taps[0], nav_mode) + ["EXTRACT_RUBBER"]

    if name == "craft-pogo":
        return _go_to_table(view, nav_mode) + [_craft_line(view, POGO, 9)]

    raise ExpansionError(f"no expansion for action {name}")
