"""Multi-robot motion planning over implicit tensor-product roadmaps (dRRT*)."""

from .geometry2d import (
    DiskRobot,
    Polygon,
    Workspace,
    disks_collide,
    point_free,
    segment_free,
)
from .planners import (
    PlannerConfig,
    PlanResult,
    composite_rrt_star,
    drrt,
    drrt_star,
    implicit_astar,
    plan,
)
from .roadmap import (
    Roadmap,
    build_prm_star,
    connection_radius,
    goal_distance_table,
    load_roadmap,
    save_roadmap,
)
from .scenario import Scenario, ScenarioError, build_tensor, load_scenario, resolve_scenario
from .bench import emit_csv, run_benchmark, verify_small_instance
from .tensor import TensorRoadmap, explicit_tensor_graph

__version__ = "0.1.0"

__all__ = [
    "DiskRobot",
    "Polygon",
    "Workspace",
    "disks_collide",
    "point_free",
    "segment_free",
    "Roadmap",
    "build_prm_star",
    "connection_radius",
    "goal_distance_table",
    "load_roadmap",
    "save_roadmap",
    "TensorRoadmap",
    "explicit_tensor_graph",
    "PlannerConfig",
    "PlanResult",
    "drrt_star",
    "drrt",
    "implicit_astar",
    "composite_rrt_star",
    "plan",
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "resolve_scenario",
    "build_tensor",
    "run_benchmark",
    "emit_csv",
    "verify_small_instance",
]
