"""World-core transition tests: movement, interactions, cost accounting."""

import math
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from palsim import blocks
from palsim.tasks import POGO_RECIPES, generate_pogo, goal_check
from palsim.world import (
    AgentPose,
    BlockPos,
    Entity,
    Inventory,
    Recipe,
    WorldGrid,
    WorldState,
    move_offset,
    yaw_offset,
)

CARDINAL = 12.0
DIAG = 12.0 * math.sqrt(2.0)

# Hand-built facing table: each 15-degree yaw against its target offset,
# worked out by hand before the implementation existed. A cardinal owns the
# +/-15 degrees around it, diagonals own the 30..60 band.
FACING_TABLE = {
    0: (0, -1), 15: (0, -1), 30: (1, -1), 45: (1, -1), 60: (1, -1),
    75: (1, 0), 90: (1, 0), 105: (1, 0), 120: (1, 1), 135: (1, 1),
    150: (1, 1), 165: (0, 1), 180: (0, 1), 195: (0, 1), 210: (-1, 1),
    225: (-1, 1), 240: (-1, 1), 255: (-1, 0), 270: (-1, 0), 285: (-1, 0),
    300: (-1, -1), 315: (-1, -1), 330: (-1, -1), 345: (0, -1),
}


def bare_world(width=12, depth=12, pos=(5, 4, 5), yaw=0, inventory=None,
               cells=None, recipes=None, entities=None):
    grid = WorldGrid(width, depth, 4, cells=dict(cells or {}))
    return WorldState(
        grid=grid,
        agent=AgentPose(BlockPos(*pos), yaw),
        inventory=Inventory(dict(inventory or {})),
        entities={e.entity_id: e for e in (entities or [])},
        recipes=list(recipes if recipes is not None else POGO_RECIPES),
    )


class TestFacing:
    def test_yaw_zero_faces_north(self):
        s = bare_world()
        assert s.facing_cell() == BlockPos(5, 4, 4)

    def test_yaw_90_faces_east(self):
        s = bare_world(yaw=90)
        assert s.facing_cell() == BlockPos(6, 4, 5)

    def test_yaw_45_faces_northeast(self):
        s = bare_world(yaw=45)
        assert s.facing_cell() == BlockPos(6, 4, 4)

    def test_full_24_yaw_table(self):
        for yaw, expected in FACING_TABLE.items():
            assert yaw_offset(yaw) == expected, f"yaw {yaw}"

    def test_pitch_does_not_change_target(self):
        s = bare_world()
        s.tilt("DOWN")
        assert s.facing_cell() == BlockPos(5, 4, 4)


class TestMove:
    def test_forward_at_yaw_zero(self):
        s = bare_world()
        r = s.move("w")
        assert r.ok and s.agent.pos == BlockPos(5, 4, 4)
        assert r.step_cost == CARDINAL

    def test_move_into_block_fails_but_charges(self):
        s = bare_world(cells={BlockPos(5, 4, 4): blocks.BEDROCK})
        r = s.move("w")
        assert not r.ok and r.message == "obstructed"
        assert s.agent.pos == BlockPos(5, 4, 5)
        assert r.step_cost == CARDINAL

    def test_move_out_of_bounds_fails(self):
        s = bare_world(pos=(0, 4, 0))
        assert not s.move("w").ok

    def test_move_picks_up_macguffin_entity(self):
        mac = Entity(7101, "item-entity", BlockPos(5, 4, 4), blocks.MACGUFFIN)
        s = bare_world(entities=[mac])
        r = s.move("w")
        assert r.ok
        assert s.inventory.count(blocks.MACGUFFIN) == 1
        assert not s.entities

    def test_diagonal_keys_and_costs(self):
        s = bare_world()
        r = s.move("q")  # forward-left of North = NW
        assert r.ok and s.agent.pos == BlockPos(4, 4, 4)
        assert r.step_cost == pytest.approx(DIAG, abs=1e-9)

    def test_diagonal_cardinal_ratio(self):
        for key in ("q", "e", "z", "c"):
            s = bare_world()
            ratio = s.move(key).step_cost / bare_world().move("w").step_cost
            assert abs(ratio - math.sqrt(2)) < 1e-9

    def test_move_keys_relative_to_yaw(self):
        # Facing East: "a" strafes left, which is North.
        assert move_offset(90, "a") == (0, -1)
        assert move_offset(90, "w") == (1, 0)
        assert move_offset(180, "w") == (0, 1)
        assert move_offset(270, "x") == (1, 0)


class TestTurnTilt:
    def test_turn_minus_15_wraps(self):
        s = bare_world()
        assert s.turn(-15).ok and s.agent.yaw == 345

    def test_turn_360_identity(self):
        s = bare_world(yaw=30)
        assert s.turn(360).ok and s.agent.yaw == 30

    def test_turn_20_rejected(self):
        s = bare_world()
        r = s.turn(20)
        assert not r.ok and s.agent.yaw == 0

    def test_tilt_down_and_forward(self):
        s = bare_world()
        assert s.tilt("DOWN").ok and s.agent.pitch == -45
        assert s.tilt("FORWARD").ok and s.agent.pitch == 0
        assert s.tilt("FORWARD").ok and s.agent.pitch == 0

    def test_tilt_up_rejected(self):
        assert not bare_world().tilt("UP").ok


class TestTeleport:
    def test_default_distance_lands_one_north(self):
        s = bare_world(pos=(2, 4, 2))
        r = s.tp_to(BlockPos(10, 4, 10))
        assert r.ok and s.agent.pos == BlockPos(10, 4, 9)

    def test_resets_yaw_and_pitch(self):
        s = bare_world(yaw=180)
        s.tilt("DOWN")
        assert s.tp_to(BlockPos(8, 4, 8)).ok
        assert s.agent.yaw == 0 and s.agent.pitch == 0

    def test_distance_two_leaves_gap_for_tap(self):
        tree = BlockPos(6, 4, 8)
        s = bare_world(cells={tree: blocks.LOG})
        assert s.tp_to(tree, distance=2).ok
        assert s.agent.pos == BlockPos(6, 4, 6)

    def test_cost_is_ten_x_for_ten_blocks(self):
        s = bare_world(pos=(0, 4, 0))
        r = s.tp_to(BlockPos(0, 4, 11))  # lands on (0,4,10)
        assert r.ok and s.agent.pos == BlockPos(0, 4, 10)
        assert r.step_cost == pytest.approx(10 * CARDINAL)

    def test_obstructed_destination_fails(self):
        s = bare_world(cells={BlockPos(6, 4, 7): blocks.LOG, BlockPos(6, 4, 8): blocks.LOG})
        assert s.tp_to(BlockPos(6, 4, 8)).message == "obstructed"

    def test_bad_distance(self):
        assert bare_world().tp_to(BlockPos(6, 4, 8), distance=0).message == "bad distance"

    def test_entity_form(self):
        npc = Entity(7101, "npc", BlockPos(8, 4, 8))
        s = bare_world(entities=[npc])
        assert s.tp_to_entity(7101).ok
        assert s.agent.pos == BlockPos(8, 4, 7)

    def test_entity_absent(self):
        assert bare_world().tp_to_entity(9999).message == "no such entity"

    def test_entity_with_blocked_approach(self):
        npc = Entity(7101, "npc", BlockPos(8, 4, 8))
        s = bare_world(entities=[npc], cells={BlockPos(8, 4, 7): blocks.BEDROCK})
        assert s.tp_to_entity(7101).message == "obstructed"


class TestBreakBlock:
    def test_break_log_drops_log(self):
        s = bare_world(cells={BlockPos(5, 4, 4): blocks.LOG})
        r = s.break_block()
        assert r.ok
        assert s.inventory.count(blocks.LOG) == 1
        assert s.grid.block_at(BlockPos(5, 4, 4)) == blocks.AIR

    def test_bedrock_unbreakable(self):
        s = bare_world(cells={BlockPos(5, 4, 4): blocks.BEDROCK})
        r = s.break_block()
        assert r.message == "unbreakable"
        assert s.grid.is_solid(BlockPos(5, 4, 4))

    def test_air_fails(self):
        assert bare_world().break_block().message == "air"


class TestSelectItem:
    def test_select_present(self):
        s = bare_world(inventory={blocks.IRON_PICKAXE: 1})
        r = s.select_item(blocks.IRON_PICKAXE)
        assert r.ok and r.message == "selected item" and r.step_cost == 120
        assert s.inventory.selected == blocks.IRON_PICKAXE

    def test_select_absent_still_costs_120(self):
        r = bare_world().select_item(blocks.IRON_PICKAXE)
        assert not r.ok and r.step_cost == 120

    def test_select_idempotent(self):
        s = bare_world(inventory={blocks.STICK: 2})
        assert s.select_item(blocks.STICK).ok
        assert s.select_item(blocks.STICK).ok
        assert s.inventory.selected == blocks.STICK


class TestCraft:
    def test_planks_from_log(self):
        s = bare_world(inventory={blocks.LOG: 1})
        r = s.craft((blocks.LOG, "0", "0", "0"))
        assert r.ok
        assert s.inventory.count(blocks.PLANKS) == 4
        assert s.inventory.count(blocks.LOG) == 0
        assert r.step_cost == 120  # one occupied slot

    def test_sticks_from_planks(self):
        s = bare_world(inventory={blocks.PLANKS: 2})
        assert s.craft((blocks.PLANKS, "0", blocks.PLANKS, "0")).ok
        assert s.inventory.count(blocks.STICK) == 4

    def test_pogo_recipe_needs_table_nearby(self):
        inv = {blocks.STICK: 4, blocks.PLANKS: 2, blocks.SACK_PELLETS: 1}
        grid9 = POGO_RECIPES[4].inputs
        s = bare_world(inventory=dict(inv))
        assert s.craft(grid9).message == "no crafting table nearby"
        s = bare_world(inventory=dict(inv),
                       cells={BlockPos(5, 4, 3): blocks.CRAFTING_TABLE})
        r = s.craft(grid9)
        assert r.ok
        assert s.inventory.count(blocks.POGO_STICK) == 1
        assert r.step_cost == 120 * 7

    def test_unknown_recipe(self):
        s = bare_world(inventory={blocks.STICK: 4})
        assert s.craft((blocks.STICK, "0", "0", "0")).message == "unknown recipe"

    def test_missing_ingredients(self):
        s = bare_world()
        assert s.craft((blocks.LOG, "0", "0", "0")).message == "missing ingredients"

    def test_conservation(self):
        s = bare_world(inventory={blocks.LOG: 3},
                       cells={BlockPos(4, 4, 5): blocks.CRAFTING_TABLE})
        for grid in [(blocks.LOG, "0", "0", "0"),
                     (blocks.PLANKS, "0", blocks.PLANKS, "0")]:
            recipe = next(r for r in POGO_RECIPES if r.inputs == tuple(grid))
            before = Counter(s.inventory.slots)
            assert s.craft(grid).ok
            after = Counter(s.inventory.slots)
            delta = Counter(after)
            delta.subtract(before)
            expected = Counter({recipe.output_item: recipe.output_count})
            expected.subtract(recipe.ingredients)
            assert {k: v for k, v in delta.items() if v} == \
                   {k: v for k, v in expected.items() if v}


class TestPlace:
    def test_tree_tap_next_to_log(self):
        s = bare_world(inventory={blocks.TREE_TAP: 1},
                       cells={BlockPos(5, 4, 3): blocks.LOG})
        r = s.place(blocks.TREE_TAP)  # facing (5,4,4), log is 4-adjacent
        assert r.ok
        assert s.grid.block_at(BlockPos(5, 4, 4)) == blocks.TREE_TAP
        assert s.inventory.count(blocks.TREE_TAP) == 0

    def test_tree_tap_in_open_field_fails(self):
        s = bare_world(inventory={blocks.TREE_TAP: 1})
        assert s.place(blocks.TREE_TAP).message == "no adjacent log"

    def test_occupied_cell(self):
        s = bare_world(inventory={blocks.TREE_TAP: 1},
                       cells={BlockPos(5, 4, 4): blocks.LOG})
        assert s.place(blocks.TREE_TAP).message == "occupied"

    def test_not_held(self):
        assert bare_world().place(blocks.MACGUFFIN).message == "not held"


class TestExtractRubber:
    def make_tapped(self):
        return bare_world(cells={BlockPos(5, 4, 4): blocks.TREE_TAP,
                                 BlockPos(5, 4, 3): blocks.LOG})

    def test_extract_from_valid_tap(self):
        s = self.make_tapped()
        assert s.extract_rubber().ok
        assert s.inventory.count(blocks.SACK_PELLETS) == 1

    def test_extract_twice_yields_two(self):
        s = self.make_tapped()
        assert s.extract_rubber().ok and s.extract_rubber().ok
        assert s.inventory.count(blocks.SACK_PELLETS) == 2

    def test_facing_air_fails(self):
        assert bare_world().extract_rubber().message == "no tree tap in front"

    def test_tap_without_log_fails(self):
        s = bare_world(cells={BlockPos(5, 4, 4): blocks.TREE_TAP})
        assert not s.extract_rubber().ok


class TestMisc:
    def test_nop_free(self):
        r = bare_world().nop()
        assert r.ok and r.step_cost == 0

    def test_delete_selected(self):
        s = bare_world(inventory={blocks.STICK: 3})
        s.select_item(blocks.STICK)
        assert s.delete_selected().ok
        assert s.inventory.count(blocks.STICK) == 2

    def test_delete_clears_selection_at_zero(self):
        s = bare_world(inventory={blocks.STICK: 1})
        s.select_item(blocks.STICK)
        assert s.delete_selected().ok
        assert s.inventory.selected == ""
        assert not s.delete_selected().ok

    def test_trade_without_npc(self):
        assert bare_world().interact(7101, "trade").message == "no entity"

    def test_use_nothing(self):
        assert bare_world().use().message == "nothing to use"

    def test_collect_item_entity(self):
        drop = Entity(4242, "item-entity", BlockPos(5, 4, 4), blocks.STICK)
        s = bare_world(entities=[drop])
        assert s.collect().ok
        assert s.inventory.count(blocks.STICK) == 1

    def test_collect_placed_macguffin_block(self):
        s = bare_world(cells={BlockPos(5, 4, 4): blocks.MACGUFFIN})
        assert s.collect().ok
        assert s.inventory.count(blocks.MACGUFFIN) == 1
        assert not s.grid.is_solid(BlockPos(5, 4, 4))


class TestCostAccounting:
    def test_fresh_world_zero(self):
        assert bare_world().check_cost() == 0

    def test_select_then_nop(self):
        s = bare_world(inventory={blocks.IRON_PICKAXE: 1})
        for result in (s.select_item(blocks.IRON_PICKAXE), s.nop()):
            s.record(result)
        assert s.check_cost() == 120

    def test_additivity_over_random_commands(self):
        s, total = random_romp(seed=99, steps=400)
        assert s.check_cost() == pytest.approx(total)


@given(st.lists(st.integers(-24, 24).map(lambda k: k * 15), max_size=50))
def test_turn_keeps_yaw_on_grid(deltas):
    s = bare_world()
    for d in deltas:
        assert s.turn(d).ok
        assert s.agent.yaw % 15 == 0 and 0 <= s.agent.yaw < 360


@given(st.integers(0, 345).filter(lambda y: y % 15 == 0),
       st.sampled_from(("w", "a", "d", "x", "q", "e", "z", "c")))
def test_move_offset_never_zero(yaw, key):
    dx, dz = move_offset(yaw, key)
    assert (dx, dz) != (0, 0)
    assert dx in (-1, 0, 1) and dz in (-1, 0, 1)


def random_romp(seed: int, steps: int):
    """Drive a generated arena with random commands, checking invariants."""
    task = generate_pogo(seed)
    s = task.build_world()
    rng = random.Random(seed)
    items = [blocks.LOG, blocks.PLANKS, blocks.STICK, blocks.IRON_PICKAXE,
             blocks.TREE_TAP, blocks.SACK_PELLETS]
    total = 0.0
    for _ in range(steps):
        op = rng.randrange(12)
        if op < 4:
            r = s.move(rng.choice("wadxqezc"))
        elif op < 6:
            r = s.turn(rng.choice((-90, -15, 15, 30, 90, 180)))
        elif op == 6:
            r = s.tilt(rng.choice(("FORWARD", "DOWN")))
        elif op == 7:
            r = s.tp_to(BlockPos(rng.randrange(32), 4, rng.randrange(32)),
                        rng.choice((1, 1, 2)))
        elif op == 8:
            r = s.break_block()
        elif op == 9:
            r = s.select_item(rng.choice(items))
        elif op == 10:
            r = s.craft(rng.choice([rec.inputs for rec in POGO_RECIPES]))
        else:
            r = s.place(rng.choice(items))
        s.record(r)
        total += r.step_cost

        assert s.agent.yaw % 15 == 0 and 0 <= s.agent.yaw < 360
        assert s.agent.pitch in (0, -45)
        assert not s.grid.is_solid(s.agent.pos), "agent inside a solid block"
        assert all(v >= 0 for v in s.inventory.slots.values())
        assert r.step_cost >= 0
        assert r.ok or r.message
    return s, total


def test_fuzz_10000_commands_hold_invariants():
    for seed in (1, 2):
        random_romp(seed=seed, steps=5000)


def test_goal_check_monotone_via_inventory():
    task = generate_pogo(3)
    s = task.build_world()
    assert not goal_check(task, s)
    s.inventory.add(blocks.POGO_STICK, 1)
    assert goal_check(task, s)
