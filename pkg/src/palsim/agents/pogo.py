"""Baseline planner agent for the pogo-stick task.

The agent senses the arena, regenerates the planning problem from what it
saw (tree and table positions, current inventory), runs the planner over
the shipped domain, and walks the plan macro by macro. Any failed command
or expansion triggers a re-sense and replan, a bounded number of times;
an unsolvable problem sends GIVE_UP.
"""

from __future__ import annotations

import logging

from .. import planner
from ..planner.pddl import format_problem, parse_problem, PddlProblem
from .base import AgentIO, InstanceOver, SenseView, wait_for_instance
from .macros import (
    LOG,
    POGO,
    TABLE,
    TREE_TAP,
    ExpansionError,
    expand_macro,
)

log = logging.getLogger("palsim.agents.pogo")

NUM_RANGE = 20
MAX_REPLANS = 3


def build_problem(view: SenseView) -> tuple[str, dict[str, tuple[int, int]]]:
    """Problem text for the sensed world, plus tree-token coordinates.

    Inventory logs become virtual (already chopped) tree tokens so replans
    pick up exactly where the world stands.
    """
    trees = view.find_blocks(LOG)
    bindings: dict[str, tuple[int, int]] = {}
    objects: dict[str, str] = {}
    init: set[tuple] = set()

    for i, cell in enumerate(trees, start=1):
        token = f"t{i}"
        objects[token] = "tree"
        bindings[token] = cell
        init.add(("standing", token))
        taps_nearby = any(
            view.blocks.get((cell[0] + dx, cell[1] + dz)) == TREE_TAP
            for dx, dz in ((0, -1), (1, 0), (0, 1), (-1, 0)))
        if taps_nearby:
            init.add(("tapped", token))
    for i in range(view.count(LOG)):
        token = f"v{i + 1}"
        objects[token] = "tree"
        init.add(("have-log", token))

    for i in range(NUM_RANGE + 1):
        objects[f"n{i}"] = "num"
    for k in (1, 2, 4, 5):
        for i in range(NUM_RANGE + 1 - k):
            init.add((f"sum{k}", f"n{i}", f"n{i + k}"))
    init.add(("planks", f"n{min(view.count('minecraft:planks'), NUM_RANGE)}"))
    init.add(("sticks", f"n{min(view.count('minecraft:stick'), NUM_RANGE)}"))

    if view.find_blocks(TABLE):
        init.add(("table-available",))
    if view.count(TREE_TAP) >= 1:
        init.add(("have-tap",))
    if view.count("polycraft:sack_polyisoprene_pellets") >= 1:
        init.add(("have-rubber",))
    if view.count(POGO) >= 1:
        init.add(("have-pogo",))

    problem = PddlProblem(
        name="pogo-sensed", domain_name="pogo", objects=objects,
        init=frozenset(init), goal=[planner.Literal(True, ("have-pogo",))])
    return format_problem(problem), bindings


class PogoAgent:
    def __init__(self, transport, nav_mode: str = "tp",
                 max_replans: int = MAX_REPLANS):
        self.io = AgentIO(transport)
        self.nav_mode = nav_mode
        self.max_replans = max_replans
        self.domain = planner.load_pogo_domain()

    # -- one instance ---------------------------------------------------------

    def solve_instance(self, view: SenseView) -> bool:
        """Plan and execute until the instance ends; True on goal."""
        replans = 0
        try:
            while True:
                steps = self._plan(view)
                if steps is planner.NO_PLAN:
                    log.info("no plan exists; giving up")
                    self.io.send("GIVE_UP")
                    return False  # the gameOver envelope raises before this
                # On a clean run the goal envelope interrupts _execute; both a
                # failed command and a plan that ran dry mean replanning.
                self._execute(steps, view)
                replans += 1
                if replans > self.max_replans:
                    log.info("replan budget exhausted; giving up")
                    self.io.send("GIVE_UP")
                    return False
                view = self._sense()
        except InstanceOver as over:
            achieved = over.envelope["goal"]["goalAchieved"]
            log.info("instance over, goalAchieved=%s", achieved)
            self.io.acknowledge()
            return bool(achieved)

    def _plan(self, view: SenseView):
        problem_text, self.bindings = build_problem(view)
        problem = parse_problem(problem_text, self.domain)
        steps = planner.plan(self.domain, problem)
        if steps is not planner.NO_PLAN:
            log.info("plan: %s", " ".join(a.signature for a in steps))
        return steps

    def _execute(self, steps, view: SenseView) -> None:
        """Walk the plan macro by macro; returns early on any failure."""
        for action in steps:
            try:
                lines = expand_macro(action, view, self.bindings, self.nav_mode)
            except ExpansionError as exc:
                log.info("expansion failed (%s); replanning", exc)
                return
            for line in lines:
                envelope = self.io.send(line)
                if envelope["command_result"]["result"] == "FAIL":
                    log.info("command %r failed (%s); replanning", line,
                             envelope["command_result"]["message"])
                    return
            view = self._sense()

    def _sense(self) -> SenseView:
        return SenseView.from_envelope(self.io.send("SENSE_ALL"))

    # -- tournament loop ---------------------------------------------------------

    def run_forever(self, max_instances: int | None = None) -> int:
        """START, then solve instances as the manager loads them."""
        try:
            self.io.transport.send("START")
        except (ConnectionError, OSError):
            return 1
        solved = 0
        played = 0
        while max_instances is None or played < max_instances:
            view = wait_for_instance(self.io)
            if view is None:
                break
            played += 1
            try:
                if self.solve_instance(view):
                    solved += 1
            except (ConnectionError, OSError):
                break
        log.info("agent done: %d/%d instances solved", solved, played)
        return 0
