"""Baseline agents: the planner-driven pogo crafter and the scripted
hunter-gatherer navigator."""

from .base import AgentIO, InstanceOver, SenseView, wait_for_instance
from .huga import HugaAgent
from .nav import NO_PATH, NavGraph, bfs_path, bfs_to_any, path_to_commands
from .pogo import PogoAgent, build_problem

__all__ = [
    "AgentIO", "HugaAgent", "InstanceOver", "NO_PATH", "NavGraph",
    "PogoAgent", "SenseView", "bfs_path", "bfs_to_any", "build_problem",
    "path_to_commands", "wait_for_instance",
]
