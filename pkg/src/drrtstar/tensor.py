"""Implicit tensor-product roadmap over several single-robot roadmaps.

A composite vertex is a tuple of per-robot vertex ids. Two composite vertices
are adjacent when every robot either stays put or follows one of its roadmap
edges. Robots move synchronously and linearly along a composite edge.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.sparse import csgraph

from .geometry2d import DiskRobot, Workspace, segments_free
from .roadmap import GOAL, START, GoalDistanceTable, Roadmap, goal_distance_table

__all__ = [
    "CompositeVertex",
    "TensorRoadmap",
    "EdgeValidator",
    "ExplicitTensorGraph",
    "GraphTooLargeError",
    "composite_adjacent",
    "oracle_direction",
    "composite_edge_free",
    "composite_cost",
    "composite_cost_max",
    "motions_free",
    "explicit_tensor_graph",
]

CompositeVertex = tuple[int, ...]

# caps the (motions x samples x pairs) working set of one vectorized check
_CHUNK_ELEMS = 1 << 21


class GraphTooLargeError(ValueError):
    def __init__(self, size: int, limit: int):
        super().__init__(f"explicit tensor graph would have {size} vertices, above the limit of {limit}")
        self.size = size
        self.limit = limit


def composite_cost(a: ArrayLike, b: ArrayLike) -> float:
    """Sum over robots of straight-line displacement between two composite configurations."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return float(np.hypot(d[..., 0], d[..., 1]).sum())


def composite_cost_max(a: ArrayLike, b: ArrayLike) -> float:
    """Largest single-robot displacement; reported alongside the sum metric only."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return float(np.hypot(d[..., 0], d[..., 1]).max())


def _dyadic_counts(maxlen: NDArray, step: float) -> NDArray[np.int64]:
    k = np.ones(maxlen.shape, dtype=np.int64)
    big = maxlen > step
    if big.any():
        k[big] = 1 << np.ceil(np.log2(maxlen[big] / step)).astype(np.int64)
    return k


def motions_free(p0: ArrayLike, p1: ArrayLike, radii: ArrayLike, step: float,
                 workspace: Workspace | None = None) -> NDArray[np.bool_]:
    """Check synchronized straight composite motions ``p0[m] -> p1[m]``.

    ``p0`` and ``p1`` have shape ``(M, R, 2)``. Robot pairs are sampled at
    ``K + 1`` evenly spaced instants, ``K`` being the smallest power of two
    that keeps every robot's per-interval displacement at or below ``step``;
    touching is allowed. When ``workspace`` is given each robot's own segment
    must also pass :func:`segments_free` at the same step.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    radii = np.asarray(radii, dtype=float)
    m, r = p0.shape[:2]
    out = np.ones(m, dtype=bool)
    if m == 0:
        return out
    delta = p1 - p0
    if workspace is not None:
        for k in range(r):
            out &= segments_free(p0[:, k], p1[:, k], radii[k], workspace, step)
    ii, jj = np.triu_indices(r, k=1)
    if len(ii) == 0:
        return out
    lim2 = (radii[ii] + radii[jj]) ** 2
    # relative motion of each pair is linear in t
    rel0 = p0[:, ii] - p0[:, jj]
    reld = delta[:, ii] - delta[:, jj]
    ks = _dyadic_counts(np.hypot(delta[..., 0], delta[..., 1]).max(axis=1), step)
    for k in np.unique(ks).tolist():
        sel = np.flatnonzero((ks == k) & out)
        if len(sel) == 0:
            continue
        t = np.arange(k + 1) / k
        per = max(1, _CHUNK_ELEMS // ((k + 1) * len(ii)))
        for c in range(0, len(sel), per):
            idx = sel[c: c + per]
            d = rel0[idx, None] + t[None, :, None, None] * reld[idx, None]  # (c, K+1, P, 2)
            d2 = d[..., 0] ** 2 + d[..., 1] ** 2
            out[idx] = ~(d2 < lim2).any(axis=(1, 2))
    return out


class TensorRoadmap:
    """Implicit product of ``R >= 2`` roadmaps over one workspace.

    Immutable after construction; the per-vertex neighbour vectors and goal
    distances are precomputed for the oracle and heuristic.
    """

    def __init__(self, roadmaps: Sequence[Roadmap], robots: Sequence[DiskRobot], workspace: Workspace,
                 goal_tables: Sequence[GoalDistanceTable] | None = None):
        if len(roadmaps) < 2 or len(roadmaps) != len(robots):
            raise ValueError("need R >= 2 roadmaps, one per robot")
        self.roadmaps = tuple(roadmaps)
        self.robots = tuple(robots)
        self.workspace = workspace
        if goal_tables is None:
            goal_tables = [goal_distance_table(g) for g in roadmaps]
        self.goal_tables = tuple(goal_tables)
        self.R = len(roadmaps)
        self.sizes = tuple(g.n for g in roadmaps)
        self.radii = np.array([rb.radius for rb in robots], dtype=float)
        self.positions = tuple(g.vertices for g in roadmaps)
        self.goal_dist = tuple(np.asarray(t.dist) for t in self.goal_tables)
        self._nvec = tuple(tuple(g.vertices[nb] - g.vertices[v] for v, nb in enumerate(g.neighbors))
                           for g in roadmaps)
        self._options = tuple(
            tuple(np.sort(np.concatenate([[v], nb])).astype(np.intp) for v, nb in enumerate(g.neighbors))
            for g in roadmaps)
        self._adj = []
        for g in roadmaps:
            a = np.zeros((g.n, g.n), dtype=bool)
            for v, nb in enumerate(g.neighbors):
                a[v, nb] = True
            self._adj.append(a)
        self._pairs = np.triu_indices(self.R, k=1)

    @property
    def start(self) -> CompositeVertex:
        return (START,) * self.R

    @property
    def target(self) -> CompositeVertex:
        return (GOAL,) * self.R

    @property
    def num_vertices(self) -> int:
        return math.prod(self.sizes)

    def check_vertex(self, v: Iterable[int]) -> CompositeVertex:
        v = tuple(int(x) for x in v)
        if len(v) != self.R:
            raise ValueError(f"composite vertex has {len(v)} entries, expected {self.R}")
        for i, (x, n) in enumerate(zip(v, self.sizes)):
            if not 0 <= x < n:
                raise ValueError(f"robot {i} vertex {x} out of range [0, {n})")
        return v

    def config(self, v: Sequence[int]) -> NDArray[np.float64]:
        """Composite configuration of ``v`` as an ``(R, 2)`` array."""
        return np.array([self.positions[i][x] for i, x in enumerate(v)])

    def configs(self, vs: NDArray) -> NDArray[np.float64]:
        """Configurations of an ``(M, R)`` array of composite vertices, shape ``(M, R, 2)``."""
        vs = np.asarray(vs, dtype=np.intp).reshape(-1, self.R)
        return np.stack([self.positions[i][vs[:, i]] for i in range(self.R)], axis=1)

    def heuristic(self, v: Sequence[int]) -> float:
        """Sum of per-robot roadmap distances to goal; admissible for the sum metric."""
        return float(sum(self.goal_dist[i][x] for i, x in enumerate(v)))

    def heuristics(self, vs: NDArray) -> NDArray[np.float64]:
        vs = np.asarray(vs, dtype=np.intp).reshape(-1, self.R)
        return sum(self.goal_dist[i][vs[:, i]] for i in range(self.R))

    def edge_cost(self, a: Sequence[int], b: Sequence[int]) -> float:
        return composite_cost(self.config(a), self.config(b))

    def edge_costs(self, a: Sequence[int], bs: NDArray) -> NDArray[np.float64]:
        d = self.configs(bs) - self.config(a)[None]
        return np.hypot(d[..., 0], d[..., 1]).sum(axis=1)

    def adjacent(self, a: Sequence[int], b: Sequence[int]) -> bool:
        """True when ``b`` differs from ``a`` and each robot stays or follows an edge."""
        if tuple(a) == tuple(b):
            return False
        return all(x == y or self._adj[i][x, y] for i, (x, y) in enumerate(zip(a, b)))

    def options(self, i: int, x: int) -> NDArray[np.intp]:
        """``{x} | neighbours(x)`` in robot ``i``'s roadmap, ascending."""
        return self._options[i][x]

    def adjacency_size(self, v: Sequence[int]) -> int:
        return math.prod(len(self._options[i][x]) for i, x in enumerate(v)) - 1

    def adjacent_array(self, v: Sequence[int]) -> NDArray[np.intp]:
        """All composite neighbours of ``v`` as an ``(M, R)`` array in lexicographic order."""
        opts = [self._options[i][x] for i, x in enumerate(v)]
        grid = np.stack(np.meshgrid(*opts, indexing="ij"), axis=-1).reshape(-1, self.R)
        keep = np.any(grid != np.asarray(v)[None], axis=1)
        return grid[keep]

    def oracle(self, v: Sequence[int], target: ArrayLike) -> CompositeVertex:
        """Per robot, the neighbour whose direction deviates least from the target direction.

        A robot with no neighbours, or whose target coincides with its current
        vertex, stays. Equal angles resolve to the lowest vertex id.
        """
        q = np.asarray(target, dtype=float).reshape(self.R, 2)
        out = []
        for i, x in enumerate(v):
            vecs = self._nvec[i][x]
            if len(vecs) == 0:
                out.append(int(x))
                continue
            ray = q[i] - self.positions[i][x]
            if ray[0] == 0.0 and ray[1] == 0.0:
                out.append(int(x))
                continue
            cross = np.abs(vecs[:, 0] * ray[1] - vecs[:, 1] * ray[0])
            dot = vecs[:, 0] * ray[0] + vecs[:, 1] * ray[1]
            ang = np.arctan2(cross, dot)
            out.append(int(self.roadmaps[i].neighbors[x][int(np.argmin(ang))]))
        return tuple(out)

    def motion_free(self, a: Sequence[int], b: Sequence[int], step: float, check_obstacles: bool = False) -> bool:
        return bool(self.motions_free(a, np.asarray([b]), step, check_obstacles)[0])

    def motions_free(self, a: Sequence[int], bs: NDArray, step: float,
                     check_obstacles: bool = False) -> NDArray[np.bool_]:
        """Batch composite-edge check from ``a`` to each row of ``bs``.

        Obstacle clearance of structural edges is guaranteed by roadmap
        construction, so only robot-robot separation is sampled unless
        ``check_obstacles`` is set.
        """
        bs = np.asarray(bs, dtype=np.intp).reshape(-1, self.R)
        p1 = self.configs(bs)
        p0 = np.broadcast_to(self.config(a)[None], p1.shape)
        return motions_free(p0, p1, self.radii, step, self.workspace if check_obstacles else None)

    def config_free(self, q: ArrayLike) -> bool:
        """Composite configuration check: every robot free and no pair overlapping."""
        q = np.asarray(q, dtype=float).reshape(self.R, 2)
        return bool(motions_free(q[None], q[None], self.radii, 1.0, self.workspace)[0])


class EdgeValidator:
    """Memoized composite-edge checks for one planner run."""

    def __init__(self, tensor: TensorRoadmap, step: float, max_entries: int = 2_000_000):
        self.tensor = tensor
        self.step = step
        self.max_entries = max_entries
        self._cache: dict[tuple, bool] = {}
        self.checks = 0

    def free(self, a: CompositeVertex, b: CompositeVertex) -> bool:
        key = (a, b) if a <= b else (b, a)
        hit = self._cache.get(key)
        if hit is None:
            self.checks += 1
            hit = self.tensor.motion_free(a, b, self.step)
            if len(self._cache) >= self.max_entries:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def first_free(self, v: CompositeVertex, cands: NDArray, chunk: int = 16) -> int:
        """Index of the first row of ``cands`` joined to ``v`` by a free edge, or -1."""
        for s in range(0, len(cands), chunk):
            rows = [tuple(r) for r in cands[s: s + chunk].tolist()]
            keys = [(r, v) if r <= v else (v, r) for r in rows]
            known = [self._cache.get(k) for k in keys]
            todo = [j for j, h in enumerate(known) if h is None]
            if todo:
                self.checks += len(todo)
                res = self.tensor.motions_free(v, np.asarray([rows[j] for j in todo]), self.step)
                if len(self._cache) + len(todo) > self.max_entries:
                    self._cache.clear()
                for j, ok in zip(todo, res.tolist()):
                    known[j] = ok
                    self._cache[keys[j]] = ok
            for j, ok in enumerate(known):
                if ok:
                    return s + j
        return -1


def composite_adjacent(t: TensorRoadmap, v: Sequence[int]) -> list[CompositeVertex]:
    """Structural tensor neighbours of ``v`` (robot-robot validity not checked)."""
    v = t.check_vertex(v)
    return [tuple(row) for row in t.adjacent_array(v).tolist()]


def oracle_direction(t: TensorRoadmap, v_near: Sequence[int], q_target: ArrayLike) -> CompositeVertex:
    return t.oracle(t.check_vertex(v_near), q_target)


def composite_edge_free(t: TensorRoadmap, a: Sequence[int], b: Sequence[int], step: float = 0.05) -> bool:
    """Full check of the synchronized motion ``a -> b``, obstacles included."""
    return t.motion_free(t.check_vertex(a), t.check_vertex(b), step, check_obstacles=True)


@dataclass
class ExplicitTensorGraph:
    """Materialized tensor roadmap with validated edges, for exact queries."""

    sizes: tuple[int, ...]
    matrix: sparse.csr_matrix
    num_edges: int

    def index(self, v: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(v), self.sizes))

    def vertex(self, k: int) -> CompositeVertex:
        return tuple(int(x) for x in np.unravel_index(k, self.sizes))

    @property
    def num_vertices(self) -> int:
        return math.prod(self.sizes)

    def has_edge(self, a: Sequence[int], b: Sequence[int]) -> bool:
        return self.matrix[self.index(a), self.index(b)] != 0

    def shortest_path(self, s: Sequence[int], t: Sequence[int]) -> tuple[float, list[CompositeVertex]]:
        """Dijkstra from ``s``; returns ``(inf, [])`` when ``t`` is unreachable."""
        si, ti = self.index(s), self.index(t)
        if si == ti:
            return 0.0, [tuple(s)]
        dist, pred = csgraph.dijkstra(self.matrix, directed=False, indices=si, return_predecessors=True)
        if not np.isfinite(dist[ti]):
            return math.inf, []
        path = [ti]
        while path[-1] != si:
            path.append(int(pred[path[-1]]))
        return float(dist[ti]), [self.vertex(k) for k in reversed(path)]


def explicit_tensor_graph(t: TensorRoadmap, max_vertices: int = 250_000, step: float = 0.05,
                          check_obstacles: bool = False) -> ExplicitTensorGraph:
    """Materialize every composite vertex and every free structural edge.

    Edges get the same robot-robot check as the planners. ``check_obstacles``
    re-checks each robot's segment against the obstacles as well, which only
    matters for hand-made roadmaps that skipped the construction-time check.
    """
    total = t.num_vertices
    if total > max_vertices:
        raise GraphTooLargeError(total, max_vertices)
    rows, cols, weights = [], [], []
    for k, v in enumerate(itertools.product(*(range(n) for n in t.sizes))):
        nbrs = t.adjacent_array(v)
        if len(nbrs) == 0:
            continue
        idx = np.ravel_multi_index(tuple(nbrs.T), t.sizes)
        up = idx > k
        if not up.any():
            continue
        nbrs, idx = nbrs[up], idx[up]
        ok = t.motions_free(v, nbrs, step, check_obstacles)
        if not ok.any():
            continue
        rows.append(np.full(int(ok.sum()), k))
        cols.append(idx[ok])
        weights.append(t.edge_costs(v, nbrs[ok]))
    if rows:
        r, c, w = np.concatenate(rows), np.concatenate(cols), np.concatenate(weights)
    else:
        r = c = np.zeros(0, dtype=np.intp)
        w = np.zeros(0)
    m = sparse.coo_matrix((np.concatenate([w, w]), (np.concatenate([r, c]), np.concatenate([c, r]))),
                          shape=(total, total)).tocsr()
    return ExplicitTensorGraph(tuple(t.sizes), m, len(w))
