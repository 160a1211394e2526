"""Planner tests: parser, grounding, heuristic and search against oracles.

The oracles here are deliberately separate implementations: a plain STRIPS
replay simulator, a breadth-first optimal planner, and a naive delete-relaxed
layering that mirrors the documented extraction rule.
"""

import random
import time
from collections import deque

import pytest

from palsim import planner
from palsim.planner import (
    NO_PLAN,
    UNREACHABLE,
    PddlError,
    ground,
    h_ff,
    parse_domain,
    parse_problem,
    plan,
)
from palsim.planner.pddl import (
    ActionSchema,
    Literal,
    PddlDomain,
    PddlProblem,
    format_domain,
    format_problem,
)

POGO_ACTIONS = {"get-wood", "craft-planks", "craft-sticks", "craft-tree-tap",
                "place-tree-tap", "extract-rubber", "craft-pogo"}


@pytest.fixture(scope="module")
def pogo():
    domain = planner.load_pogo_domain()
    with open(planner.POGO_PROBLEM_PATH, encoding="utf-8") as fh:
        problem = parse_problem(fh.read(), domain)
    return domain, problem


# -- oracles -------------------------------------------------------------------

def oracle_applicable(action, state):
    return action.pre <= state and not (action.neg_pre & state)


def oracle_apply(action, state):
    return (state - action.delete) | action.add


def oracle_goal(goal, state):
    return all((lit.atom in state) == lit.positive for lit in goal)


def oracle_replay(steps, init, goal):
    """Independent STRIPS simulator: validates a plan action by action."""
    state = init
    for action in steps:
        if not oracle_applicable(action, state):
            return False
        state = oracle_apply(action, state)
    return oracle_goal(goal, state)


class OracleOverflow(Exception):
    pass


def oracle_bfs_optimal(actions, init, goal, max_states=300_000):
    """Uniform-cost breadth-first search: optimal plan length or None."""
    if oracle_goal(goal, init):
        return 0
    seen = {init}
    frontier = deque([(init, 0)])
    while frontier:
        state, depth = frontier.popleft()
        for action in actions:
            if not oracle_applicable(action, state):
                continue
            nxt = oracle_apply(action, state)
            if nxt in seen:
                continue
            if oracle_goal(goal, nxt):
                return depth + 1
            seen.add(nxt)
            if len(seen) > max_states:
                raise OracleOverflow()
            frontier.append((nxt, depth + 1))
    return None


def oracle_relaxed_length(actions, init, goal):
    """Naive delete-relaxed layering + documented extraction rule.

    Levels by repeated full scans; backward extraction picks the achiever
    with the earliest level, ties broken on smallest (name, args); an
    action's add effects satisfy any later subgoal.
    """
    goal_atoms = sorted(lit.atom for lit in goal if lit.positive)
    level = {f: 0 for f in init}
    action_level = {}
    while True:
        if all(g in level for g in goal_atoms):
            break
        new_facts = {}
        for a in actions:
            if a in action_level:
                continue
            if all(p in level for p in a.pre):
                action_level[a] = max([level[p] for p in a.pre], default=0)
                for f in a.add:
                    if f not in level:
                        cand = action_level[a] + 1
                        new_facts[f] = min(new_facts.get(f, cand), cand)
        if not new_facts:
            return UNREACHABLE
        for f, lv in new_facts.items():
            level[f] = lv
    if not goal_atoms:
        return 0

    chosen = []
    satisfied = set()
    max_level = max(level[g] for g in goal_atoms)
    subgoals = {t: set() for t in range(max_level + 1)}
    for g in goal_atoms:
        subgoals[level[g]].add(g)
    for t in range(max_level, 0, -1):
        for atom in sorted(subgoals[t]):
            if atom in satisfied:
                continue
            candidates = [a for a in actions
                          if atom in a.add and action_level.get(a, 99) < t]
            best = min(candidates,
                       key=lambda a: (action_level[a], a.name, a.args))
            if best not in chosen:
                chosen.append(best)
                satisfied.update(best.add)
                for p in best.pre:
                    if level[p] > 0 and p not in satisfied:
                        subgoals[level[p]].add(p)
    return len(chosen)


# Level bookkeeping differs on purpose: the oracle assigns an action the max
# level of its preconditions, the implementation records the sweep at which it
# first fired. They coincide because each sweep adds exactly one fact layer.


# -- parser ---------------------------------------------------------------------

class TestParser:
    def test_pogo_domain_actions(self, pogo):
        domain, _ = pogo
        assert {a.name for a in domain.actions} == POGO_ACTIONS

    def test_durative_requirement_rejected(self):
        text = "(define (domain d) (:requirements :strips :durative-actions))"
        with pytest.raises(PddlError, match="durative"):
            parse_domain(text)

    def test_unbalanced_paren_has_position(self):
        text = "(define (domain d)\n  (:requirements :strips)\n"
        with pytest.raises(PddlError, match="line 1"):
            parse_domain(text)

    def test_numeric_fluents_rejected(self):
        text = """(define (domain d) (:requirements :strips)
                   (:predicates (p))
                   (:action a :parameters () :precondition (>= (x) 3)
                            :effect (p)))"""
        with pytest.raises(PddlError):
            parse_domain(text)

    def test_undeclared_predicate(self):
        text = """(define (domain d) (:requirements :strips)
                   (:predicates (p))
                   (:action a :parameters () :precondition (q) :effect (p)))"""
        with pytest.raises(PddlError, match="undeclared predicate q"):
            parse_domain(text)

    def test_arity_mismatch(self):
        text = """(define (domain d) (:requirements :strips :typing)
                   (:types thing)
                   (:predicates (p ?x - thing))
                   (:action a :parameters (?x - thing)
                            :precondition (p ?x ?x) :effect (p ?x)))"""
        with pytest.raises(PddlError, match="takes 1 arguments"):
            parse_domain(text)

    def test_unbound_variable(self):
        text = """(define (domain d) (:requirements :strips :typing)
                   (:types thing)
                   (:predicates (p ?x - thing))
                   (:action a :parameters (?x - thing)
                            :precondition (p ?y) :effect (p ?x)))"""
        with pytest.raises(PddlError, match="unbound variable"):
            parse_domain(text)

    def test_problem_type_check(self, pogo):
        domain, _ = pogo
        bad = """(define (problem p) (:domain pogo)
                  (:objects a - num)
                  (:init (standing a))
                  (:goal (have-pogo)))"""
        with pytest.raises(PddlError, match="does not fit"):
            parse_problem(bad, domain)

    def test_round_trip_domain(self, pogo):
        domain, _ = pogo
        again = parse_domain(format_domain(domain))
        assert again.name == domain.name
        assert again.predicates == domain.predicates
        assert [a.name for a in again.actions] == [a.name for a in domain.actions]
        for a, b in zip(again.actions, domain.actions):
            assert a.params == b.params
            assert sorted(map(str, a.precondition)) == sorted(map(str, b.precondition))
            assert sorted(a.add_list) == sorted(b.add_list)
            assert sorted(a.del_list) == sorted(b.del_list)

    def test_round_trip_problem(self, pogo):
        domain, problem = pogo
        again = parse_problem(format_problem(problem), domain)
        assert again.objects == problem.objects
        assert again.init == problem.init
        assert again.goal == problem.goal


# -- grounding -------------------------------------------------------------------

class TestGrounding:
    def test_five_get_wood_groundings(self, pogo):
        actions = ground(*pogo)
        get_wood = [a for a in actions if a.name == "get-wood"]
        assert len(get_wood) == 5
        assert [a.args for a in get_wood] == [(f"t{i}",) for i in range(1, 6)]

    def test_grounding_stable_order(self, pogo):
        first = ground(*pogo)
        second = ground(*pogo)
        assert [(a.name, a.args) for a in first] == [(a.name, a.args) for a in second]

    def test_empty_object_list_means_no_groundings(self):
        domain = parse_domain("""
            (define (domain d) (:requirements :strips :typing)
              (:types thing widget)
              (:predicates (p ?x - thing) (made ?w - widget))
              (:action make :parameters (?w - widget)
                       :precondition (and) :effect (made ?w)))""")
        problem = parse_problem("""
            (define (problem e) (:domain d)
              (:objects a - thing)
              (:init)
              (:goal (p a)))""", domain)
        assert ground(domain, problem) == []

    def test_unreachable_actions_pruned(self, pogo):
        domain, problem = pogo
        # Without trees, nothing can ever be chopped or crafted.
        bare = PddlProblem(
            name="bare", domain_name="pogo",
            objects={k: v for k, v in problem.objects.items() if v == "num"},
            init=frozenset(a for a in problem.init if a[0].startswith("sum")
                           or a[0] in ("planks", "sticks")),
            goal=problem.goal)
        names = {a.name for a in ground(domain, bare)}
        assert "craft-planks" not in names
        assert "get-wood" not in names


# -- heuristic --------------------------------------------------------------------

class TestHeuristic:
    def test_goal_in_state_is_zero(self, pogo):
        domain, problem = pogo
        actions = ground(domain, problem)
        state = problem.init | {("have-pogo",)}
        assert h_ff(frozenset(state), problem.goal, actions) == 0

    def test_initial_h_matches_oracle(self, pogo):
        domain, problem = pogo
        actions = ground(domain, problem)
        value = h_ff(problem.init, problem.goal, actions)
        assert value == oracle_relaxed_length(actions, problem.init, problem.goal)
        assert value == 8  # frozen from the oracle on the shipped problem

    def test_no_trees_unreachable(self, pogo):
        domain, problem = pogo
        actions = ground(domain, problem)
        gutted = frozenset(a for a in problem.init if a[0] != "standing")
        assert h_ff(gutted, problem.goal, actions) == UNREACHABLE

    def test_extracted_plan_valid_under_relaxation(self, pogo):
        domain, problem = pogo
        actions = ground(domain, problem)
        rpg = planner.build_relaxed_plan(problem.init, problem.goal, actions)
        state = set(problem.init)
        for action in rpg.plan:
            assert action.pre <= state, "relaxed plan out of order"
            state |= action.add  # deletes ignored: that is the relaxation
        assert all(lit.atom in state for lit in problem.goal if lit.positive)


# -- search ----------------------------------------------------------------------

class TestSearch:
    def test_pogo_plan_valid_and_optimal(self, pogo):
        domain, problem = pogo
        actions = ground(domain, problem)
        start = time.perf_counter()
        steps = plan(domain, problem)
        elapsed = time.perf_counter() - start
        assert steps is not NO_PLAN
        assert oracle_replay(steps, problem.init, problem.goal)
        assert elapsed <= 1.0
        optimal = oracle_bfs_optimal(actions, problem.init, problem.goal)
        assert len(steps) == optimal == 12

    def test_trivial_problem_empty_plan(self, pogo):
        domain, problem = pogo
        trivial = PddlProblem(
            name="done", domain_name="pogo", objects=problem.objects,
            init=problem.init | {("have-pogo",)}, goal=problem.goal)
        assert plan(domain, trivial) == []

    def test_unreachable_goal_no_plan(self, pogo):
        domain, problem = pogo
        hopeless = PddlProblem(
            name="hopeless", domain_name="pogo",
            objects=problem.objects,
            init=frozenset(a for a in problem.init if a[0] != "standing"),
            goal=problem.goal)
        assert plan(domain, hopeless) is NO_PLAN


# -- randomized cross-checks -------------------------------------------------------

def random_instance(rng: random.Random):
    """A small random STRIPS task over one type; roughly half are solvable."""
    n_objects = rng.randint(2, 6)
    objects = {f"o{i}": "thing" for i in range(n_objects)}
    predicates = {f"p{i}": ["thing"] * rng.randint(1, 2)
                  for i in range(rng.randint(2, 4))}
    predicates["z"] = []

    def random_literal_template(params):
        pred = rng.choice(sorted(predicates))
        arity = len(predicates[pred])
        if arity and params:
            return (pred,) + tuple(rng.choice(params) for _ in range(arity))
        if arity:
            return None
        return (pred,)

    schemas = []
    for i in range(rng.randint(2, 5)):
        params = [f"?x{j}" for j in range(rng.randint(0, 2))]
        literal_pool = [t for t in (random_literal_template(params)
                                    for _ in range(6)) if t]
        if not literal_pool:
            continue
        pre = [Literal(True, t) for t in literal_pool[:rng.randint(0, 2)]]
        adds = list(dict.fromkeys(literal_pool[rng.randint(0, 2):][:2]))
        dels = [t for t in literal_pool[-1:] if rng.random() < 0.4]
        if not adds:
            continue
        schemas.append(ActionSchema(
            name=f"act{i}", params=[(p, "thing") for p in params],
            precondition=pre, add_list=adds,
            del_list=[d for d in dels if d not in adds]))
    domain = PddlDomain(name="rand", requirements=[":strips", ":typing"],
                        types={"thing": "object"}, predicates=predicates,
                        actions=schemas)

    ground_pool = []
    for pred, types in predicates.items():
        if len(types) == 0:
            ground_pool.append((pred,))
        elif len(types) == 1:
            ground_pool.extend((pred, o) for o in objects)
        else:
            ground_pool.extend((pred, a, b) for a in objects for b in objects)
    init = frozenset(a for a in ground_pool if rng.random() < 0.25)

    if rng.random() < 0.5 and schemas:
        # forward-walk goal: guaranteed solvable
        actions = ground(domain, PddlProblem("tmp", "rand", objects, init,
                                             [Literal(True, ("z",))]))
        state = init
        for _ in range(rng.randint(1, 6)):
            applicable = [a for a in actions if oracle_applicable(a, state)]
            if not applicable:
                break
            state = oracle_apply(rng.choice(applicable), state)
        candidates = sorted(state) or sorted(init)
        goal_atoms = rng.sample(candidates, min(len(candidates),
                                                rng.randint(1, 2)))
    else:
        goal_atoms = rng.sample(ground_pool, min(len(ground_pool),
                                                 rng.randint(1, 2)))
    goal = [Literal(True, g) for g in goal_atoms]
    return domain, PddlProblem("rand-inst", "rand", objects, init, goal)


def test_random_instances_match_oracles():
    rng = random.Random(20240817)
    checked = 0
    attempts = 0
    while checked < 20 and attempts < 80:
        attempts += 1
        domain, problem = random_instance(rng)
        actions = ground(domain, problem)
        try:
            optimal = oracle_bfs_optimal(actions, problem.init, problem.goal)
        except OracleOverflow:
            continue
        start = time.perf_counter()
        steps = plan(domain, problem)
        elapsed = time.perf_counter() - start
        assert elapsed <= 1.0, "planner exceeded its time budget"

        h0 = h_ff(problem.init, problem.goal, actions)
        assert h0 == oracle_relaxed_length(actions, problem.init, problem.goal)

        if optimal is None:
            assert steps is NO_PLAN
        else:
            assert steps is not NO_PLAN, "oracle found a plan, planner did not"
            assert oracle_replay(steps, problem.init, problem.goal)
        checked += 1
    assert checked == 20
