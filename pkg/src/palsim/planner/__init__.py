"""Typed-STRIPS planning engine: parser, grounding, relaxed-plan heuristic,
enforced hill-climbing search with a complete best-first fallback."""

import os

from .grounding import GroundAction, ground
from .heuristic import UNREACHABLE, RelaxedPlanGraph, build_relaxed_plan, h_ff
from .pddl import (
    ActionSchema,
    Literal,
    PddlDomain,
    PddlError,
    PddlProblem,
    format_domain,
    format_problem,
    parse_domain,
    parse_pddl,
    parse_problem,
)
from .search import NO_PLAN, SearchStats, goal_satisfied, plan, validate_plan

ASSET_DIR = os.path.join(os.path.dirname(__file__), "assets")
POGO_DOMAIN_PATH = os.path.join(ASSET_DIR, "pogo_domain.pddl")
POGO_PROBLEM_PATH = os.path.join(ASSET_DIR, "pogo_problem.pddl")


def load_pogo_domain() -> PddlDomain:
    with open(POGO_DOMAIN_PATH, "r", encoding="utf-8") as fh:
        return parse_domain(fh.read())


__all__ = [
    "ActionSchema", "GroundAction", "Literal", "NO_PLAN", "PddlDomain",
    "PddlError", "PddlProblem", "RelaxedPlanGraph", "SearchStats",
    "UNREACHABLE", "ASSET_DIR", "POGO_DOMAIN_PATH", "POGO_PROBLEM_PATH",
    "build_relaxed_plan", "format_domain", "format_problem", "goal_satisfied",
    "ground", "h_ff", "load_pogo_domain", "parse_domain", "parse_pddl",
    "parse_problem", "plan", "validate_plan",
]
