from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from ..geometry2d import Workspace
from ..tensor import CompositeVertex, TensorRoadmap, motions_free

MODES = ("drrt_star", "drrt", "implicit_astar", "composite_rrt_star")


class InfeasibleQueryError(ValueError):
    """The composite start configuration is in collision."""


@dataclass
class PlannerConfig:
    """Budget and knobs for one planner run.

    ``time_limit`` is in seconds. ``target_bias`` only affects dRRT,
    ``rrt_star_steer`` only composite RRT* and ``max_states`` only implicit A*.
    """

    mode: str = "drrt_star"
    iteration_limit: int | None = 10_000
    time_limit: float | None = None
    seed: int = 0
    branch_and_bound: bool = True
    collision_step: float = 0.05
    rrt_star_steer: float = 1.0
    target_bias: float = 0.1
    max_states: int = 2_000_000
    label: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown planner mode {self.mode!r}; expected one of {MODES}")
        if self.iteration_limit is None and self.time_limit is None:
            raise ValueError("planner needs an iteration limit, a time limit, or both")
        if self.iteration_limit is not None and self.iteration_limit < 0:
            raise ValueError("iteration_limit must be non-negative")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.collision_step <= 0:
            raise ValueError("collision_step must be positive")

    @property
    def name(self) -> str:
        return self.label or self.mode


@dataclass
class PlanResult:
    """Outcome of one planner run.

    ``path`` lists composite vertices for the roadmap-based planners and is
    empty for composite RRT*; ``configs`` always holds the matching ``(R, 2)``
    composite configurations. ``history`` rows are
    ``(iteration, elapsed_seconds, best_cost)`` recorded at each improvement.
    ``tree_audit`` is the largest gap between stored and recomputed
    cost-to-come over the final tree, filled in only on request.
    """

    planner: str
    path: list[CompositeVertex]
    configs: list[NDArray[np.float64]]
    cost: float
    iterations_used: int
    time_used: float
    first_solution_iteration: int | None
    history: list[tuple[int, float, float]] = field(default_factory=list)
    status: str = "budget"
    expanded: int = 0
    tree_size: int = 0
    checkpoints: dict[int, float] = field(default_factory=dict)
    tree_audit: float | None = None

    @property
    def success(self) -> bool:
        return math.isfinite(self.cost)

    def best_cost_at(self, iteration: int) -> float:
        best = math.inf
        for it, _, c in self.history:
            if it > iteration:
                break
            best = c
        return best


def log_grid(limit: int) -> list[int]:
    """1-2-5 grid ``1, 2, 5, 10, 20, 50, ...`` up to ``limit``."""
    out, base = [], 1
    while base <= limit:
        out.extend(x for x in (base, 2 * base, 5 * base) if x <= limit)
        base *= 10
    return out


_GRID = frozenset(log_grid(10**9))


class Budget:
    """Iteration and wall-clock budget tracker (monotonic clock).

    Elapsed time is also recorded whenever the iteration count passes a
    point of the 1-2-5 grid, for the benchmark records.
    """

    def __init__(self, cfg: PlannerConfig):
        self.iteration_limit = cfg.iteration_limit
        self.time_limit = cfg.time_limit
        self.t0 = time.perf_counter()
        self.marks: dict[int, float] = {}

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def exhausted(self, iterations: int) -> bool:
        if iterations in _GRID:
            self.marks[iterations] = self.elapsed()
        if self.iteration_limit is not None and iterations >= self.iteration_limit:
            return True
        return self.time_limit is not None and self.elapsed() >= self.time_limit


def path_cost(configs: Sequence[NDArray]) -> float:
    total = 0.0
    for a, b in zip(configs, configs[1:]):
        d = np.asarray(b) - np.asarray(a)
        total += float(np.hypot(d[:, 0], d[:, 1]).sum())
    return total


def audit_configs(workspace: Workspace, radii: Sequence[float], configs: Sequence[NDArray],
                  step: float) -> bool:
    """Re-check a composite path from scratch: obstacles, bounds and robot pairs."""
    if not configs:
        return True
    c = np.asarray(configs, dtype=float)
    if len(c) == 1:
        return bool(motions_free(c[:1], c[:1], radii, step, workspace)[0])
    return bool(motions_free(c[:-1], c[1:], radii, step, workspace).all())


def audit_result(t: TensorRoadmap, result: PlanResult, start: NDArray, goal: NDArray,
                 step: float) -> bool:
    """Soundness audit of a successful result: endpoints, adjacency, cost, collisions."""
    if not result.success:
        return True
    cfgs = result.configs
    if not cfgs:
        return False
    if not (np.allclose(cfgs[0], start, atol=1e-12) and np.allclose(cfgs[-1], goal, atol=1e-12)):
        return False
    if result.path:
        if any(not t.adjacent(a, b) for a, b in zip(result.path, result.path[1:])):
            return False
    if abs(path_cost(cfgs) - result.cost) > 1e-9 * max(1.0, result.cost):
        return False
    return audit_configs(t.workspace, t.radii, cfgs, step)
