"""Task generator and schema tests, with an independent connectivity oracle."""

import json
from collections import deque

import pytest
from hypothesis import given
from hypothesis import strategies as st

from palsim import blocks
from palsim.tasks import (
    InstanceName,
    TaskDef,
    TaskError,
    generate_huga,
    generate_pogo,
    goal_check,
    load_task,
    save_task,
    task_from_dict,
    task_to_dict,
)
from palsim.world import BlockPos

N_SEEDS = 1000


def oracle_bfs(task: TaskDef, start, goals):
    """Independent shortest-path check over passable cells (4-connected)."""
    solid = {(p.x, p.z) for p, _ in task.block_list}
    frontier = deque([(start[0], start[1])])
    seen = {(start[0], start[1])}
    while frontier:
        x, z = frontier.popleft()
        for dx, dz in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            nxt = (x + dx, z + dz)
            if nxt in seen or nxt in solid:
                continue
            if not (0 <= nxt[0] < task.width and 0 <= nxt[1] < task.depth):
                continue
            seen.add(nxt)
            frontier.append(nxt)
    return all(g in seen for g in goals), seen


class TestPogoGenerator:
    def test_counts_over_many_seeds(self):
        for seed in range(N_SEEDS):
            task = generate_pogo(seed)
            names = [n for _, n in task.block_list]
            assert names.count(blocks.LOG) == 5, f"seed {seed}"
            assert names.count(blocks.CRAFTING_TABLE) == 1, f"seed {seed}"

    def test_interior_is_30_by_30_with_bedrock_ring(self):
        task = generate_pogo(11)
        assert task.width == 32 and task.depth == 32
        ring = {(p.x, p.z) for p, n in task.block_list if n == blocks.BEDROCK}
        for x in range(32):
            assert (x, 0) in ring and (x, 31) in ring
        for z in range(32):
            assert (0, z) in ring and (31, z) in ring
        for p, n in task.block_list:
            if n != blocks.BEDROCK:
                assert 1 <= p.x <= 30 and 1 <= p.z <= 30

    def test_same_seed_bytes_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_task(generate_pogo(77), a)
        save_task(generate_pogo(77), b)
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_differs(self):
        assert generate_pogo(1) != generate_pogo(2)

    def test_spawn_passable_and_targets_reachable(self):
        for seed in range(200):
            task = generate_pogo(seed)
            solid_targets = [(p.x, p.z) for p, n in task.block_list
                             if n in (blocks.LOG, blocks.CRAFTING_TABLE)]
            ok, seen = oracle_bfs(task, (task.spawn_pos.x, task.spawn_pos.z), [])
            adjacent_ok = all(
                any((x + dx, z + dz) in seen
                    for dx, dz in ((0, 1), (0, -1), (1, 0), (-1, 0)))
                for x, z in solid_targets)
            assert adjacent_ok, f"seed {seed}: unreachable tree or table"

    def test_starting_inventory_and_goal(self):
        task = generate_pogo(5)
        assert task.inventory == {blocks.IRON_PICKAXE: 1}
        assert task.goal.goal_type == "POGOSTICK"
        assert task.goal.item == blocks.POGO_STICK
        assert len(task.recipes) == 5


class TestHugaGenerator:
    def test_connectivity_over_many_seeds(self):
        for seed in range(N_SEEDS):
            task = generate_huga(seed)
            mac = task.entity_list[0].pos
            target = task.goal.location
            ok, _ = oracle_bfs(
                task, (task.spawn_pos.x, task.spawn_pos.z),
                [(mac.x, mac.z), (target.x, target.z)])
            assert ok, f"seed {seed}: spawn/MacGuffin/Target not connected"

    def test_room_assignment(self):
        for seed in range(200):
            task = generate_huga(seed)
            sx, sz = task.spawn_pos.x, task.spawn_pos.z
            assert 1 <= sx <= 14 and 17 <= sz <= 30, "spawn in bottom-left room"
            mac = task.entity_list[0].pos
            assert 1 <= mac.x <= 14 and 1 <= mac.z <= 14, "MacGuffin top-left"
            marker = [p for p, n in task.block_list if n == blocks.TARGET]
            assert len(marker) == 1
            assert 17 <= marker[0].x <= 30 and 17 <= marker[0].z <= 30, "Target bottom-right"
            # top-right room stays empty
            for p, n in task.block_list:
                if 17 <= p.x <= 30 and 1 <= p.z <= 14:
                    pytest.fail(f"seed {seed}: block {n} in the empty room")

    def test_placement_cell_is_north_of_marker(self):
        task = generate_huga(31)
        marker = next(p for p, n in task.block_list if n == blocks.TARGET)
        assert task.goal.location == BlockPos(marker.x, marker.y, marker.z - 1)

    def test_seed_determinism(self):
        assert generate_huga(123) == generate_huga(123)

    def test_palette_varies_and_covers_blocks(self):
        palettes = {tuple(generate_huga(s).palette[blocks.AIR]) for s in range(50)}
        assert len(palettes) > 10
        task = generate_huga(9)
        for _, name in task.block_list:
            assert name in task.palette


class TestTaskFiles:
    def test_round_trip(self, tmp_path):
        task = generate_huga(42)
        path = tmp_path / f"{task.name}.json"
        save_task(task, path)
        assert load_task(path) == task

    def test_round_trip_pogo(self, tmp_path):
        task = generate_pogo(42)
        path = tmp_path / f"{task.name}.json"
        save_task(task, path)
        assert load_task(path) == task

    def test_truncated_file_is_parse_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(task_to_dict(generate_pogo(1)))[:200])
        with pytest.raises(TaskError, match="line"):
            load_task(path)

    def test_goal_missing_location_is_semantic_error(self):
        data = task_to_dict(generate_huga(2))
        data["goal"]["location"] = None
        with pytest.raises(TaskError, match="location"):
            task_from_dict(data)

    def test_blocked_spawn_rejected(self):
        data = task_to_dict(generate_pogo(3))
        data["spawn"]["pos"] = data["blocks"][0]["pos"]
        with pytest.raises(TaskError, match="spawn"):
            task_from_dict(data)

    def test_unknown_schema_version(self):
        data = task_to_dict(generate_pogo(3))
        data["schemaVersion"] = 99
        with pytest.raises(TaskError, match="schemaVersion"):
            task_from_dict(data)

    def test_out_of_bounds_block_rejected(self):
        data = task_to_dict(generate_pogo(3))
        data["blocks"][0]["pos"] = [99, 4, 99]
        with pytest.raises(TaskError, match="bounds"):
            task_from_dict(data)


class TestInstanceName:
    def test_example_round_trip(self):
        text = "POGO_L00_T01_S01_X0100_U9999_V0_G00000_I0020_N0"
        name = InstanceName.parse(text + ".json")
        assert name.task == "POGO"
        assert name.index_value == 20
        assert name.format() == text

    def test_build_format(self):
        name = InstanceName.build("HUGA", seed=123, index=7)
        assert name.format() == "HUGA_L00_T01_S01_X0100_U9999_V0_G00123_I0007_N0"
        assert InstanceName.parse(name.format()) == name

    def test_reject_malformed(self):
        with pytest.raises(TaskError):
            InstanceName.parse("POGO_20.json")

    @given(st.integers(0, 2**63 - 1), st.integers(0, 9999))
    def test_build_round_trips(self, seed, index):
        name = InstanceName.build("POGO", seed, index)
        assert InstanceName.parse(name.format()) == name


def test_goal_check_huga_placement():
    task = generate_huga(6)
    state = task.build_world()
    assert not goal_check(task, state)
    state.grid.set_block(task.goal.location, blocks.MACGUFFIN)
    assert goal_check(task, state)
