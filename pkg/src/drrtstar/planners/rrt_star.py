from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..geometry2d import DiskRobot, Workspace
from ..tensor import motions_free
from .common import Budget, InfeasibleQueryError, PlannerConfig, PlanResult
from .tree import NearestIndex

__all__ = ["composite_rrt_star", "rrt_star_gamma"]


def rrt_star_gamma(w: Workspace, R: int) -> float:
    """Rewire-radius constant ``2 (1 + 1/D)^(1/D) (mu / zeta_D)^(1/D)`` for the ``2R``-dim bounds box."""
    dim = 2 * R
    zeta = math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)
    return 2.0 * (1 + 1 / dim) ** (1 / dim) * (w.area ** R / zeta) ** (1 / dim)


def _sum_lengths(a: np.ndarray, b: np.ndarray, R: int) -> np.ndarray:
    d = (b - a).reshape(-1, R, 2)
    return np.hypot(d[..., 0], d[..., 1]).sum(axis=1)


def composite_rrt_star(w: Workspace, robots: Sequence[DiskRobot], S=None, T=None,
                       cfg: PlannerConfig | None = None, *, stop_on_solution: bool = False,
                       audit_tree: bool = False) -> PlanResult:
    """RRT* directly in the ``2R``-dimensional composite space.

    ``S`` and ``T`` default to the robots' starts and goals. Nearest-neighbour
    search and steering use the composite Euclidean distance while path cost
    is the sum of per-robot lengths. Whenever a new node lands within one
    steer length of the goal, a direct connection to the goal is attempted.
    """
    cfg = cfg or PlannerConfig(mode="composite_rrt_star")
    R = len(robots)
    radii = np.array([r.radius for r in robots])
    start = np.asarray(S if S is not None else [r.start for r in robots], dtype=float).reshape(-1)
    goal = np.asarray(T if T is not None else [r.goal for r in robots], dtype=float).reshape(-1)
    step = cfg.collision_step

    def config_ok(x):
        q = x.reshape(1, R, 2)
        return bool(motions_free(q, q, radii, 1.0, w)[0])

    def edges_ok(a, bs):
        bs = bs.reshape(-1, R, 2)
        return motions_free(np.broadcast_to(a.reshape(1, R, 2), bs.shape), bs, radii, step, w)

    if not config_ok(start):
        raise InfeasibleQueryError("composite start is in collision")
    budget = Budget(cfg)
    if np.array_equal(start, goal):
        return PlanResult(cfg.name, [], [start.reshape(R, 2)], 0.0, 0, 0.0, 0, [(0, 0.0, 0.0)], "solved",
                          tree_size=1)

    rng = np.random.default_rng(cfg.seed)
    dim = 2 * R
    gamma = rrt_star_gamma(w, R)
    steer = cfg.rrt_star_steer
    nn = NearestIndex(dim)
    cost = np.zeros(1024)
    edge = np.zeros(1024)
    parent = np.full(1024, -1, dtype=np.intp)
    children: list[set[int]] = [set()]
    nn.add(start)
    goal_node = -1
    goal_ok = config_ok(goal)
    best, first = math.inf, None
    history: list[tuple[int, float, float]] = []

    def attach(x, par, e):
        nonlocal cost, edge, parent
        k = nn.add(x)
        if k == len(cost):
            cost, edge = np.resize(cost, 2 * k), np.resize(edge, 2 * k)
            parent = np.resize(parent, 2 * k)
        parent[k] = par
        edge[k] = e
        cost[k] = cost[par] + e
        children.append(set())
        children[par].add(k)
        return k

    def rewire(k, par, e):
        children[int(parent[k])].discard(k)
        parent[k] = par
        edge[k] = e
        children[par].add(k)
        cost[k] = cost[par] + e
        stack = list(children[k])
        while stack:
            c = stack.pop()
            cost[c] = cost[parent[c]] + edge[c]
            stack.extend(children[c])

    it = 0
    while not budget.exhausted(it):
        it += 1
        lo = np.tile(np.array(w.bounds[:2]), R)
        hi = np.tile(np.array(w.bounds[2:]), R)
        x_rand = lo + rng.random(dim) * (hi - lo)
        near = nn.nearest(x_rand)
        x_near = nn.points[near]
        d = x_rand - x_near
        dist = float(np.sqrt(d @ d))
        if dist == 0:
            continue
        x_new = x_near + d * min(1.0, steer / dist)
        if not config_ok(x_new):
            continue
        n = len(nn)
        radius = min(steer, gamma * (math.log(n + 1) / (n + 1)) ** (1 / dim))
        cand = nn.within(x_new, radius)
        if near not in set(cand.tolist()):
            cand = np.append(cand, near)
        pts = nn.points[cand]
        e = _sum_lengths(x_new, pts, R)
        tot = cost[cand] + e
        order = np.argsort(tot, kind="stable")
        ok = edges_ok(x_new, pts[order])
        if not ok.any():
            continue
        j = int(order[int(np.argmax(ok))])
        k = attach(x_new.copy(), int(cand[j]), float(e[j]))
        improve = np.flatnonzero(cost[k] + e < cost[cand])
        if len(improve):
            free = edges_ok(x_new, pts[improve])
            for m in improve[free].tolist():
                if cost[k] + e[m] < cost[int(cand[m])]:
                    rewire(int(cand[m]), k, float(e[m]))
        if goal_ok and goal_node < 0:
            gd = goal - x_new
            if float(np.sqrt(gd @ gd)) <= steer and edges_ok(x_new, goal[None])[0]:
                goal_node = attach(goal.copy(), k, float(_sum_lengths(x_new, goal, R)[0]))
        if goal_node >= 0 and cost[goal_node] < best:
            best = float(cost[goal_node])
            if first is None:
                first = it
            history.append((it, budget.elapsed(), best))
            if stop_on_solution:
                break

    configs = []
    if goal_node >= 0:
        node = goal_node
        while node >= 0:
            configs.append(nn.points[node].reshape(R, 2).copy())
            node = int(parent[node])
        configs.reverse()
    status = "solved" if configs else "budget"
    gap = None
    if audit_tree:
        n = len(nn)
        recomputed = np.zeros(n)
        order = [0]
        for k in order:
            for c in children[k]:
                recomputed[c] = recomputed[k] + _sum_lengths(nn.points[k], nn.points[c], R)[0]
                order.append(c)
        if len(order) != n:
            raise AssertionError(f"tree reaches {len(order)} of {n} nodes from the root")
        gap = float(np.max(np.abs(recomputed - cost[:n])))
    return PlanResult(cfg.name, [], configs, best, it, budget.elapsed(), first, history, status,
                      tree_size=len(nn), checkpoints=budget.marks, tree_audit=gap)
