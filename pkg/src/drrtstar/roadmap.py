"""Per-robot PRM* roadmaps and goal-distance tables.

Vertex 0 of every roadmap is the robot's start and vertex 1 its goal; the
remaining ``n - 2`` vertices are uniform samples of the robot's free space.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from os import PathLike
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree

from .geometry2d import DiskRobot, Workspace, points_free, segments_free

__all__ = [
    "Roadmap",
    "GoalDistanceTable",
    "RoadmapError",
    "SamplingError",
    "InfeasibleEndpointError",
    "connection_radius",
    "build_prm_star",
    "roadmap_from_points",
    "nine_grid_roadmap",
    "goal_distance_table",
    "roadmap_neighbors",
    "save_roadmap",
    "load_roadmap",
    "roadmap_to_dict",
    "roadmap_from_dict",
]

START, GOAL = 0, 1
DEFAULT_ETA = 0.1
DEFAULT_STEP = 0.05
FORMAT_TAG = "drrtstar-roadmap"


class RoadmapError(Exception):
    pass


class SamplingError(RoadmapError):
    """Rejection sampling hit its retry cap; the free space is (nearly) empty."""


class InfeasibleEndpointError(RoadmapError):
    """The robot's start or goal is not in its free space."""


@dataclass(frozen=True, eq=False)
class Roadmap:
    """Undirected roadmap for one robot.

    ``neighbors[v]`` holds neighbour ids in ascending order and ``lengths[v]``
    the matching Euclidean edge lengths.
    """

    vertices: NDArray[np.float64]
    neighbors: tuple[NDArray[np.intp], ...]
    lengths: tuple[NDArray[np.float64], ...]
    radius_used: float
    robot_index: int = 0
    eta: float = DEFAULT_ETA
    seed: Any = None

    @property
    def n(self) -> int:
        return len(self.vertices)

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for i, (nb, ln) in enumerate(zip(self.neighbors, self.lengths)):
            for j, length in zip(nb.tolist(), ln.tolist()):
                if i < j:
                    out.append((i, j, length))
        return out

    @property
    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.neighbors) // 2


@dataclass(frozen=True, eq=False)
class GoalDistanceTable:
    """Shortest roadmap distance from every vertex to the goal vertex."""

    dist: NDArray[np.float64]

    def __getitem__(self, v: int) -> float:
        return float(self.dist[v])


def connection_radius(n: int, d: int = 2, eta: float = DEFAULT_ETA) -> float:
    """PRM* connection radius for ``n`` samples in the unit ``d``-cube.

    ``(1 + eta) * 2 * (1/d)**(1/d) * (ln n / n)**(1/d)``
    """
    if int(n) != n or n < 2:
        raise ValueError(f"connection radius needs n >= 2, got {n}")
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    return (1.0 + eta) * 2.0 * (1.0 / d) ** (1.0 / d) * (math.log(n) / n) ** (1.0 / d)


def _make_roadmap(pts: NDArray, edges: list[tuple[int, int]], radius: float,
                  robot_index: int, eta: float, seed: Any) -> Roadmap:
    n = len(pts)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    nbrs, lens = [], []
    for i in range(n):
        ids = np.array(sorted(adj[i]), dtype=np.intp)
        d = pts[ids] - pts[i] if len(ids) else np.zeros((0, 2))
        nbrs.append(ids)
        lens.append(np.hypot(d[:, 0], d[:, 1]))
    pts = np.array(pts, dtype=float)
    pts.setflags(write=False)
    return Roadmap(pts, tuple(nbrs), tuple(lens), float(radius), robot_index, eta, seed)


def roadmap_from_points(w: Workspace, robot: DiskRobot, samples: ArrayLike, radius: float, *,
                        robot_index: int = 0, eta: float = DEFAULT_ETA, seed: Any = None,
                        step: float = DEFAULT_STEP) -> Roadmap:
    """Connect ``[start, goal, *samples]`` with every free straight edge no longer than ``radius``."""
    extra = np.asarray(samples, dtype=float).reshape(-1, 2)
    pts = np.vstack([np.array([robot.start, robot.goal]), extra])
    free = points_free(pts, robot.radius, w)
    if not free[START]:
        raise InfeasibleEndpointError(f"start {robot.start} of robot {robot_index} is not free")
    if not free[GOAL]:
        raise InfeasibleEndpointError(f"goal {robot.goal} of robot {robot_index} is not free")
    if not free.all():
        bad = np.flatnonzero(~free).tolist()
        raise RoadmapError(f"roadmap vertices {bad} are in collision")
    pairs = cKDTree(pts).query_pairs(radius, output_type="ndarray")
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))] if len(pairs) else pairs.reshape(0, 2)
    edges = []
    for k in range(0, len(pairs), 50_000):
        chunk = pairs[k:k + 50_000]
        ok = segments_free(pts[chunk[:, 0]], pts[chunk[:, 1]], robot.radius, w, step)
        edges.extend(map(tuple, chunk[ok].tolist()))
    return _make_roadmap(pts, edges, radius, robot_index, eta, seed)


def build_prm_star(w: Workspace, robot: DiskRobot, n: int, eta: float = DEFAULT_ETA, seed: Any = 0, *,
                   robot_index: int = 0, step: float = DEFAULT_STEP) -> Roadmap:
    """Build a PRM* roadmap with ``n`` vertices (start and goal included).

    The unit-cube radius from :func:`connection_radius` is scaled by the side
    of the square with the same area as the workspace bounds.
    """
    if n < 2:
        raise ValueError(f"roadmap needs n >= 2, got {n}")
    free = points_free(np.array([robot.start, robot.goal]), robot.radius, w)
    if not free[START]:
        raise InfeasibleEndpointError(f"start {robot.start} of robot {robot_index} is not free")
    if not free[GOAL]:
        raise InfeasibleEndpointError(f"goal {robot.goal} of robot {robot_index} is not free")
    rng = np.random.default_rng(seed)
    need = n - 2
    cap = 1000 * n
    drawn = 0
    accepted: list[NDArray] = []
    got = 0
    while got < need:
        batch = min(max(64, 2 * (need - got)), cap - drawn)
        if batch <= 0:
            raise SamplingError(f"free-space sampling exceeded {cap} draws for robot {robot_index}")
        cand = w.sample_uniform(rng, batch)
        drawn += batch
        ok = cand[points_free(cand, robot.radius, w)]
        take = ok[: need - got]
        accepted.append(take)
        got += len(take)
    samples = np.concatenate(accepted) if accepted else np.zeros((0, 2))
    radius = connection_radius(n, 2, eta) * math.sqrt(w.area)
    return roadmap_from_points(w, robot, samples, radius, robot_index=robot_index,
                               eta=eta, seed=seed, step=step)


def nine_grid_roadmap(w: Workspace, robot: DiskRobot, seed: Any = 0, *, jitter: float = 0.05,
                      robot_index: int = 0, step: float = DEFAULT_STEP) -> Roadmap:
    """Minimal 3x3 grid roadmap spanning the robot's start and goal.

    Start and goal must be opposite grid corners. The seven other nodes are
    perturbed uniformly within ``jitter`` (times the grid spacing) per axis and
    nodes are joined to their 8-connected grid neighbours.
    """
    s, g = np.array(robot.start), np.array(robot.goal)
    span = g - s
    if abs(abs(span[0]) - abs(span[1])) > 1e-9 or span[0] == 0:
        raise ValueError("nine-grid roadmap needs start and goal at opposite corners of a square")
    spacing = abs(span[0]) / 2
    rng = np.random.default_rng(seed)
    cells = [(i, j) for i in range(3) for j in range(3) if (i, j) not in ((0, 0), (2, 2))]
    pts = []
    for i, j in cells:
        base = s + span * np.array([i, j]) / 2
        pts.append(base + rng.uniform(-jitter, jitter, 2) * spacing)
    radius = 1.6 * spacing
    return roadmap_from_points(w, robot, np.array(pts), radius, robot_index=robot_index,
                               eta=0.0, seed=seed, step=step)


def goal_distance_table(g: Roadmap) -> GoalDistanceTable:
    """Dijkstra from the goal vertex over edge lengths; unreachable vertices get +inf."""
    dist = np.full(g.n, math.inf)
    dist[GOAL] = 0.0
    heap = [(0.0, GOAL)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, length in zip(g.neighbors[u].tolist(), g.lengths[u].tolist()):
            nd = d + length
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    dist.setflags(write=False)
    return GoalDistanceTable(dist)


def roadmap_neighbors(g: Roadmap, v: int) -> list[tuple[int, float]]:
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range for roadmap with {g.n} vertices")
    return list(zip(g.neighbors[v].tolist(), g.lengths[v].tolist()))


def roadmap_to_dict(g: Roadmap) -> dict:
    return {
        "format": FORMAT_TAG,
        "version": 1,
        "robot_index": g.robot_index,
        "n": g.n,
        "eta": g.eta,
        "seed": g.seed,
        "radius_used": g.radius_used,
        "vertices": g.vertices.tolist(),
        "edges": [[i, j] for i, j, _ in g.edges()],
    }


def roadmap_from_dict(data: dict) -> Roadmap:
    if data.get("format") != FORMAT_TAG:
        raise ValueError(f"not a roadmap file (format={data.get('format')!r})")
    pts = np.array(data["vertices"], dtype=float).reshape(-1, 2)
    if len(pts) != data["n"]:
        raise ValueError(f"roadmap declares n={data['n']} but lists {len(pts)} vertices")
    edges = [(int(i), int(j)) for i, j in data["edges"]]
    for i, j in edges:
        if not (0 <= i < len(pts) and 0 <= j < len(pts)) or i == j:
            raise ValueError(f"bad edge ({i}, {j})")
    seed = data.get("seed")
    return _make_roadmap(pts, edges, data["radius_used"], data.get("robot_index", 0),
                         data.get("eta", DEFAULT_ETA), seed)


def save_roadmap(g: Roadmap, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(roadmap_to_dict(g), fh, indent=1)
        fh.write("\n")


def load_roadmap(path: str | PathLike) -> Roadmap:
    with open(path, encoding="utf-8") as fh:
        return roadmap_from_dict(json.load(fh))


def roadmaps_equal(a: Roadmap, b: Roadmap) -> bool:
    if a.n != b.n or not np.array_equal(a.vertices, b.vertices):
        return False
    return all(np.array_equal(x, y) for x, y in zip(a.neighbors, b.neighbors))


def shortest_single_robot_costs(roadmaps: Sequence[Roadmap]) -> list[float]:
    """Per-robot optimal start-to-goal roadmap cost, ignoring other robots."""
    return [goal_distance_table(g)[START] for g in roadmaps]
