"""Relaxed planning graph and the relaxed-plan length heuristic.

Under delete relaxation, facts accumulate in layers until the goal appears
or a fixpoint is reached. The heuristic value of a state is the size of a
relaxed plan extracted by backward chaining from the goal facts at their
first-appearance layers. Achievers are taken from the earliest layer, with
ties broken on lexicographically smallest (name, arguments), so the
extraction is deterministic. Negative goal literals are ignored by the
relaxation (they are checked exactly during search).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grounding import GroundAction
from .pddl import Atom, Literal

UNREACHABLE = float("inf")


@dataclass
class RelaxedPlanGraph:
    fact_level: dict[Atom, int]
    action_level: dict[GroundAction, int]
    plan: list[GroundAction] = field(default_factory=list)
    reachable: bool = False

    @property
    def value(self) -> float:
        return len(self.plan) if self.reachable else UNREACHABLE

    def helpful_actions(self) -> list[GroundAction]:
        """Relaxed-plan actions applicable in the evaluated state itself."""
        return [a for a in self.plan if self.action_level.get(a) == 0]


def build_relaxed_plan(state: frozenset[Atom], goal: list[Literal],
                       actions: list[GroundAction]) -> RelaxedPlanGraph:
    goal_atoms = sorted(lit.atom for lit in goal if lit.positive)
    fact_level: dict[Atom, int] = {f: 0 for f in state}
    action_level: dict[GroundAction, int] = {}
    achievers: dict[Atom, list[GroundAction]] = {}

    pending = [a for a in actions]
    level = 0
    while any(g not in fact_level for g in goal_atoms):
        frontier_facts: list[tuple[Atom, GroundAction]] = []
        still_pending = []
        for action in pending:
            if all(p in fact_level for p in action.pre):
                action_level[action] = level
                for atom in sorted(action.add):
                    frontier_facts.append((atom, action))
            else:
                still_pending.append(action)
        pending = still_pending
        new = False
        for atom, action in frontier_facts:
            achievers.setdefault(atom, []).append(action)
            if atom not in fact_level:
                fact_level[atom] = level + 1
                new = True
        if not new:
            return RelaxedPlanGraph(fact_level, action_level, reachable=False)
        level += 1

    rpg = RelaxedPlanGraph(fact_level, action_level, reachable=True)
    if not goal_atoms or all(fact_level[g] == 0 for g in goal_atoms):
        return rpg

    # Backward extraction: satisfy each subgoal at its first-appearance layer
    # with the earliest achiever, smallest (name, args) on ties.
    max_level = max(fact_level[g] for g in goal_atoms)
    subgoals: dict[int, set[Atom]] = {t: set() for t in range(max_level + 1)}
    for g in goal_atoms:
        subgoals[fact_level[g]].add(g)
    chosen: list[GroundAction] = []
    chosen_set: set[GroundAction] = set()
    satisfied: set[Atom] = set()
    for t in range(max_level, 0, -1):
        for atom in sorted(subgoals[t]):
            if atom in satisfied:
                continue
            best = min(
                (a for a in achievers.get(atom, ()) if action_level[a] < t),
                key=lambda a: (action_level[a],) + a.sort_key(),
                default=None,
            )
            if best is None:
                return RelaxedPlanGraph(fact_level, action_level, reachable=False)
            if best not in chosen_set:
                chosen.append(best)
                chosen_set.add(best)
                satisfied.update(best.add)
                for p in best.pre:
                    lvl = fact_level[p]
                    if lvl > 0 and p not in satisfied:
                        subgoals[lvl].add(p)
    rpg.plan = sorted(chosen, key=lambda a: (action_level[a],) + a.sort_key())
    return rpg


def h_ff(state: frozenset[Atom], goal: list[Literal],
         actions: list[GroundAction]) -> float:
    """Relaxed-plan length from *state*; 0 iff the goal already holds,
    UNREACHABLE when the relaxed fixpoint never covers the goal."""
    return build_relaxed_plan(state, goal, actions).value
