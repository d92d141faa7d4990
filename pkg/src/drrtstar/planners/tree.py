from __future__ import annotations

import itertools
import math

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from ..tensor import CompositeVertex, TensorRoadmap

# dense vertex->node tables are used while prod(sizes) stays below this
_DENSE_LIMIT = 1 << 23


class NearestIndex:
    """Growing point set with nearest and radius queries.

    Small sets use a linear scan. Larger ones keep a KD-tree over a prefix
    and scan the short tail of points added since the last rebuild.
    """

    def __init__(self, dim: int, tail_limit: int = 2048):
        self.dim = dim
        self.tail_limit = tail_limit
        self._pts = np.empty((1024, dim))
        self._n = 0
        self._kd: cKDTree | None = None
        self._kd_n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def points(self) -> NDArray[np.float64]:
        return self._pts[: self._n]

    def add(self, p: NDArray) -> int:
        if self._n == len(self._pts):
            grown = np.empty((2 * len(self._pts), self.dim))
            grown[: self._n] = self._pts[: self._n]
            self._pts = grown
        self._pts[self._n] = p
        self._n += 1
        if self._n - self._kd_n > self.tail_limit:
            self._kd = cKDTree(self._pts[: self._n].copy())
            self._kd_n = self._n
        return self._n - 1

    def nearest(self, q: NDArray) -> int:
        tail = self._pts[self._kd_n: self._n]
        best, best_d2 = -1, math.inf
        if self._kd is not None:
            d, i = self._kd.query(q)
            best, best_d2 = int(i), float(d) ** 2
        if len(tail):
            diff = tail - q
            d2 = np.einsum("ij,ij->i", diff, diff)
            j = int(np.argmin(d2))
            if d2[j] < best_d2:
                best, best_d2 = self._kd_n + j, float(d2[j])
        return best

    def within(self, q: NDArray, r: float) -> NDArray[np.intp]:
        parts = []
        if self._kd is not None:
            parts.append(np.asarray(self._kd.query_ball_point(q, r), dtype=np.intp))
        tail = self._pts[self._kd_n: self._n]
        if len(tail):
            diff = tail - q
            d2 = np.einsum("ij,ij->i", diff, diff)
            parts.append(self._kd_n + np.flatnonzero(d2 <= r * r))
        if not parts:
            return np.zeros(0, dtype=np.intp)
        return np.sort(np.concatenate(parts))


class SearchTree:
    """Tree over composite vertices with parent links and cost-to-come.

    Costs are recomputed as ``cost[parent] + edge`` whenever a subtree moves,
    so the stored values always equal the root-to-node sum of edge costs.
    """

    def __init__(self, tensor: TensorRoadmap, root: CompositeVertex):
        self.tensor = tensor
        self.R = tensor.R
        cap = 1024
        self.verts = np.empty((cap, self.R), dtype=np.intp)
        self.cost = np.empty(cap)
        self.edge = np.empty(cap)
        self.parent = np.full(cap, -1, dtype=np.intp)
        self.children: list[set[int]] = []
        self.index: dict[CompositeVertex, int] = {}
        self.nn = NearestIndex(2 * self.R)
        self._size = 0
        self._dense = None
        if math.prod(tensor.sizes) <= _DENSE_LIMIT:
            self._dense = np.full(tensor.sizes, -1, dtype=np.int32)
        self._buckets = [[[] for _ in range(n)] for n in tensor.sizes]
        self._add(tuple(root), -1, 0.0)

    def __len__(self) -> int:
        return self._size

    def __contains__(self, v) -> bool:
        return tuple(v) in self.index

    @property
    def root(self) -> CompositeVertex:
        return tuple(self.verts[0].tolist())

    def node(self, v: CompositeVertex) -> int:
        return self.index[v]

    def vertex(self, node: int) -> CompositeVertex:
        return tuple(self.verts[node].tolist())

    def cost_of(self, v: CompositeVertex) -> float:
        return float(self.cost[self.index[v]])

    def _grow(self):
        cap = 2 * len(self.cost)
        for name in ("verts", "cost", "edge", "parent"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:], dtype=old.dtype)
            new[: self._size] = old[: self._size]
            setattr(self, name, new)

    def _add(self, v: CompositeVertex, parent: int, edge: float) -> int:
        if self._size == len(self.cost):
            self._grow()
        k = self._size
        self.verts[k] = v
        self.parent[k] = parent
        self.edge[k] = edge
        self.cost[k] = 0.0 if parent < 0 else self.cost[parent] + edge
        self.children.append(set())
        if parent >= 0:
            self.children[parent].add(k)
        self.index[v] = k
        self.nn.add(self.tensor.config(v).ravel())
        if self._dense is not None:
            self._dense[v] = k
        for i, x in enumerate(v):
            self._buckets[i][x].append(k)
        self._size += 1
        return k

    def add(self, v: CompositeVertex, parent: int, edge: float) -> int:
        if v in self.index:
            raise ValueError(f"{v} already in tree")
        return self._add(v, parent, edge)

    def rewire(self, node: int, new_parent: int, edge: float) -> None:
        """Re-attach ``node`` under ``new_parent`` and refresh its subtree costs."""
        old = int(self.parent[node])
        if old >= 0:
            self.children[old].discard(node)
        self.parent[node] = new_parent
        self.children[new_parent].add(node)
        self.edge[node] = edge
        self.cost[node] = self.cost[new_parent] + edge
        stack = list(self.children[node])
        while stack:
            c = stack.pop()
            self.cost[c] = self.cost[self.parent[c]] + self.edge[c]
            stack.extend(self.children[c])

    def nearest(self, q: NDArray) -> int:
        return self.nn.nearest(np.asarray(q, dtype=float).ravel())

    def neighbors_in_tree(self, v: CompositeVertex) -> NDArray[np.intp]:
        """Tree nodes structurally adjacent to ``v`` (``v`` itself excluded)."""
        t = self.tensor
        opts = [t.options(i, x) for i, x in enumerate(v)]
        size = math.prod(len(o) for o in opts)
        if self._dense is not None and size <= 4 * self._size + 64:
            grid = np.meshgrid(*opts, indexing="ij")
            ids = self._dense[tuple(grid)].ravel()
            ids = ids[ids >= 0].astype(np.intp)
        else:
            # scan the smallest per-robot bucket union, then filter the rest
            loads = [sum(len(self._buckets[i][c]) for c in o.tolist()) for i, o in enumerate(opts)]
            k = int(np.argmin(loads))
            if loads[k] == 0:
                return np.zeros(0, dtype=np.intp)
            cand = np.fromiter(itertools.chain.from_iterable(self._buckets[k][c] for c in opts[k].tolist()),
                               dtype=np.intp, count=loads[k])
            mask = np.ones(len(cand), dtype=bool)
            for i, o in enumerate(opts):
                if i == k:
                    continue
                allowed = np.zeros(t.sizes[i], dtype=bool)
                allowed[o] = True
                mask &= allowed[self.verts[cand, i]]
            ids = np.sort(cand[mask])
        me = self.index.get(v)
        if me is not None:
            ids = ids[ids != me]
        return ids

    def path_to(self, node: int) -> list[CompositeVertex]:
        out = []
        while node >= 0:
            out.append(self.vertex(node))
            node = int(self.parent[node])
        out.reverse()
        return out

    def audit(self) -> float:
        """Largest gap between stored costs and root-to-node edge sums recomputed from configs."""
        t = self.tensor
        n = self._size
        recomputed = np.full(n, math.nan)
        recomputed[0] = 0.0
        order = [0]
        seen = 1
        for k in order:
            for c in self.children[k]:
                p = int(self.parent[c])
                if p != k:
                    raise AssertionError(f"child {c} of {k} records parent {p}")
                recomputed[c] = recomputed[k] + t.edge_cost(self.vertex(k), self.vertex(c))
                order.append(c)
                seen += 1
        if seen != n:
            raise AssertionError(f"tree reaches {seen} of {n} nodes from the root")
        return float(np.max(np.abs(recomputed - self.cost[:n])))


def trace_path(tree: SearchTree, S: CompositeVertex, T: CompositeVertex) -> list[CompositeVertex]:
    """Root-to-``T`` vertex chain, or an empty list when ``T`` is not in the tree."""
    if tree.root != tuple(S):
        raise ValueError("tree is not rooted at S")
    node = tree.index.get(tuple(T))
    return [] if node is None else tree.path_to(node)
