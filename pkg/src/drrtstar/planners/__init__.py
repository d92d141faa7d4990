"""Planners over the tensor roadmap (dRRT*, dRRT, implicit A*) and in composite space (RRT*)."""

from .astar import implicit_astar
from .common import (
    MODES,
    InfeasibleQueryError,
    PlannerConfig,
    PlanResult,
    audit_configs,
    audit_result,
    path_cost,
)
from .drrt import drrt, drrt_star, expand_drrt, expand_drrt_star, random_sample
from .rrt_star import composite_rrt_star
from .tree import NearestIndex, SearchTree, trace_path

__all__ = [
    "MODES",
    "InfeasibleQueryError",
    "PlannerConfig",
    "PlanResult",
    "SearchTree",
    "NearestIndex",
    "audit_configs",
    "audit_result",
    "path_cost",
    "drrt_star",
    "expand_drrt_star",
    "drrt",
    "expand_drrt",
    "implicit_astar",
    "composite_rrt_star",
    "random_sample",
    "trace_path",
    "heuristic",
    "plan",
]


def heuristic(t, v) -> float:
    """Sum of per-robot roadmap goal distances for composite vertex ``v``."""
    return t.heuristic(t.check_vertex(v))


def plan(t, cfg: PlannerConfig, S=None, T=None, **kwargs) -> PlanResult:
    """Dispatch on ``cfg.mode``; ``S``/``T`` default to the all-start / all-goal vertices."""
    S = t.start if S is None else S
    T = t.target if T is None else T
    if cfg.mode == "drrt_star":
        return drrt_star(t, S, T, cfg, **kwargs)
    audit = kwargs.get("audit_tree", False)
    if cfg.mode == "drrt":
        return drrt(t, S, T, cfg, audit_tree=audit)
    if cfg.mode == "implicit_astar":
        return implicit_astar(t, S, T, cfg)
    stop = kwargs.get("stop_on_solution", False)
    return composite_rrt_star(t.workspace, t.robots, t.config(S), t.config(T), cfg, stop_on_solution=stop,
                              audit_tree=audit)
