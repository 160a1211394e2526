"""Forward search: enforced hill-climbing with a complete best-first fallback.

EHC runs breadth-first lookahead over helpful actions from the current
state, committing to the first strictly heuristic-improving successor; when
no improvement is found within the lookahead depth (a plateau) or helpful
actions dead-end, the search falls back to greedy best-first over the full
action set, which is complete on finite groundings. Every returned plan is
replayed before being handed back.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

from .grounding import GroundAction, ground
from .heuristic import UNREACHABLE, build_relaxed_plan, h_ff
from .pddl import Atom, Literal, PddlDomain, PddlProblem

DEFAULT_PLATEAU_DEPTH = 5
NO_PLAN = None


@dataclass
class SearchStats:
    expanded: int = 0
    evaluations: int = 0
    fallback_used: bool = False


def goal_satisfied(goal: list[Literal], state: frozenset[Atom]) -> bool:
    return all((lit.atom in state) == lit.positive for lit in goal)


def validate_plan(plan: list[GroundAction], init: frozenset[Atom],
                  goal: list[Literal]) -> bool:
    """Replay: every precondition holds when its action fires, goal at end."""
    state = init
    for action in plan:
        if not action.applicable(state):
            return False
        state = action.apply(state)
    return goal_satisfied(goal, state)


def _successors(state: frozenset[Atom], actions: list[GroundAction]):
    for action in actions:
        if action.applicable(state):
            yield action, action.apply(state)


def _ehc(init: frozenset[Atom], goal: list[Literal], actions: list[GroundAction],
         plateau_depth: int, stats: SearchStats):
    """Enforced hill-climbing; None when it plateaus or dead-ends."""
    current = init
    rpg = build_relaxed_plan(current, goal, actions)
    best_h = rpg.value
    if best_h == UNREACHABLE:
        return None
    plan: list[GroundAction] = []
    while not goal_satisfied(goal, current):
        helpful = rpg.helpful_actions() or actions
        frontier = deque([(current, [])])
        seen = {current}
        found = None
        while frontier and found is None:
            state, path = frontier.popleft()
            if len(path) >= plateau_depth:
                continue
            node_actions = helpful if not path else actions
            for action, nxt in _successors(state, node_actions):
                if nxt in seen:
                    continue
                seen.add(nxt)
                stats.evaluations += 1
                if goal_satisfied(goal, nxt):
                    found = (nxt, path + [action],
                             build_relaxed_plan(nxt, goal, actions))
                    break
                nxt_rpg = build_relaxed_plan(nxt, goal, actions)
                if nxt_rpg.value < best_h:
                    found = (nxt, path + [action], nxt_rpg)
                    break
                frontier.append((nxt, path + [action]))
            stats.expanded += 1
        if found is None:
            return None  # plateau: hand over to the complete search
        current, step_path, rpg = found
        plan.extend(step_path)
        best_h = rpg.value
    return plan


def _greedy_best_first(init: frozenset[Atom], goal: list[Literal],
                       actions: list[GroundAction], stats: SearchStats):
    """Complete on finite groundings: exhausts the state space before NO_PLAN."""
    stats.fallback_used = True
    h0 = h_ff(init, goal, actions)
    if h0 == UNREACHABLE:
        return NO_PLAN
    counter = 0
    heap = [(h0, counter, init)]
    parents: dict[frozenset[Atom], tuple] = {init: None}
    closed: set[frozenset[Atom]] = set()
    while heap:
        _, _, state = heapq.heappop(heap)
        if state in closed:
            continue
        closed.add(state)
        stats.expanded += 1
        if goal_satisfied(goal, state):
            return _unwind(parents, state)
        for action, nxt in _successors(state, actions):
            if nxt in closed or nxt in parents:
                continue
            parents[nxt] = (state, action)
            h = h_ff(nxt, goal, actions)
            stats.evaluations += 1
            if h == UNREACHABLE:
                continue
            counter += 1
            heapq.heappush(heap, (h, counter, nxt))
    return NO_PLAN


def _unwind(parents: dict, state: frozenset[Atom]) -> list[GroundAction]:
    plan = []
    while parents[state] is not None:
        state, action = parents[state]
        plan.append(action)
    return list(reversed(plan))


def plan(domain: PddlDomain, problem: PddlProblem,
         plateau_depth: int = DEFAULT_PLATEAU_DEPTH,
         stats: SearchStats | None = None):
    """A valid plan for the problem, or NO_PLAN when none exists."""
    stats = stats if stats is not None else SearchStats()
    actions = ground(domain, problem)
    init = problem.init
    if goal_satisfied(problem.goal, init):
        return []
    result = _ehc(init, problem.goal, actions, plateau_depth, stats)
    if result is None:
        result = _greedy_best_first(init, problem.goal, actions, stats)
    if result is NO_PLAN:
        return NO_PLAN
    assert validate_plan(result, init, problem.goal), "search produced an invalid plan"
    return result
