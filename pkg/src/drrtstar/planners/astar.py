from __future__ import annotations

import heapq
import itertools
import math

import numpy as np

from ..tensor import TensorRoadmap
from .common import Budget, PlannerConfig, PlanResult
from .drrt import _trivial, _validate_query

__all__ = ["implicit_astar"]


def implicit_astar(t: TensorRoadmap, S, T, cfg: PlannerConfig) -> PlanResult:
    """A* over the implicit tensor roadmap with the summed goal-distance heuristic.

    One iteration is one node expansion. Neighbours are generated lazily and
    their edges validated only when they improve the best known cost-to-come.
    The run reports status ``"timeout"`` when the expansion budget, the time
    limit or the ``max_states`` memory guard is hit first, and
    ``"infeasible"`` when the open list empties without reaching ``T``.
    """
    S, T = _validate_query(t, S, T)
    if S == T:
        return _trivial(cfg.name, t, S)
    budget = Budget(cfg)
    sizes = t.sizes
    s_key = int(np.ravel_multi_index(S, sizes))
    t_key = int(np.ravel_multi_index(T, sizes))
    g = {s_key: 0.0}
    parent = {s_key: -1}
    closed: set[int] = set()
    tie = itertools.count()
    h0 = t.heuristic(S)
    heap = [(h0, 0.0, next(tie), s_key)] if math.isfinite(h0) else []
    expanded = 0
    status = "infeasible"
    while heap:
        _, neg_g, _, u = heapq.heappop(heap)
        if u in closed:
            continue
        if u == t_key:
            status = "solved"
            break
        if budget.exhausted(expanded):
            status = "timeout"
            break
        closed.add(u)
        expanded += 1
        uv = tuple(int(x) for x in np.unravel_index(u, sizes))
        if t.adjacency_size(uv) + len(g) > cfg.max_states:
            status = "timeout"
            break
        nbrs = t.adjacent_array(uv)
        keys = np.ravel_multi_index(tuple(nbrs.T), sizes)
        cand = g[u] + t.edge_costs(uv, nbrs)
        keep = [k for k, (key, c) in enumerate(zip(keys.tolist(), cand.tolist()))
                if key not in closed and c < g.get(key, math.inf)]
        if not keep:
            continue
        nbrs, keys, cand = nbrs[keep], keys[keep], cand[keep]
        h = t.heuristics(nbrs)
        fin = np.isfinite(h)
        nbrs, keys, cand, h = nbrs[fin], keys[fin], cand[fin], h[fin]
        ok = t.motions_free(uv, nbrs, cfg.collision_step)
        for key, c, hv in zip(keys[ok].tolist(), cand[ok].tolist(), h[ok].tolist()):
            g[key] = c
            parent[key] = u
            heapq.heappush(heap, (c + hv, -c, next(tie), key))
    elapsed = budget.elapsed()
    if status != "solved":
        return PlanResult(cfg.name, [], [], math.inf, expanded, elapsed, None, [], status,
                          expanded=expanded, tree_size=len(g), checkpoints=budget.marks)
    keys = [t_key]
    while parent[keys[-1]] >= 0:
        keys.append(parent[keys[-1]])
    path = [tuple(int(x) for x in np.unravel_index(k, sizes)) for k in reversed(keys)]
    cost = g[t_key]
    return PlanResult(cfg.name, path, [t.config(v) for v in path], cost, expanded, elapsed, expanded,
                      [(expanded, elapsed, cost)], status, expanded=expanded, tree_size=len(g), checkpoints=budget.marks)
