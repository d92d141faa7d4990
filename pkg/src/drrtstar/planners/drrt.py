"""dRRT* and its predecessor dRRT over an implicit tensor roadmap."""

from __future__ import annotations

import math

import numpy as np

from ..tensor import CompositeVertex, EdgeValidator, TensorRoadmap
from .common import Budget, InfeasibleQueryError, PlannerConfig, PlanResult
from .tree import SearchTree, trace_path

__all__ = ["drrt_star", "expand_drrt_star", "drrt", "expand_drrt", "random_sample"]


def random_sample(t: TensorRoadmap, rng: np.random.Generator) -> np.ndarray:
    """Composite configuration drawn uniformly from the workspace bounds, shape ``(R, 2)``."""
    return t.workspace.sample_uniform(rng, t.R)


def _explore(t: TensorRoadmap, tree: SearchTree, rng: np.random.Generator) -> CompositeVertex:
    q = random_sample(t, rng)
    near = tree.vertex(tree.nearest(q))
    return t.oracle(near, q)


def expand_drrt_star(t: TensorRoadmap, tree: SearchTree, v_last: CompositeVertex | None, T: CompositeVertex,
                     rng: np.random.Generator, *, validator: EdgeValidator | None = None,
                     bound: float = math.inf, step: float = 0.05) -> CompositeVertex | None:
    """One dRRT* expansion; returns the new vertex when it should be expanded greedily next.

    ``bound`` is the incumbent solution cost used for branch-and-bound
    pruning; leave it infinite to disable pruning.
    """
    if validator is None:
        validator = EdgeValidator(t, step)
    if v_last is None:
        v_new = _explore(t, tree, rng)
    else:
        v_new = t.oracle(v_last, t.config(T))
        if v_new == v_last:
            # nowhere to go greedily (every robot at its goal or stuck)
            v_new = _explore(t, tree, rng)

    nbrs = tree.neighbors_in_tree(v_new)
    if len(nbrs) == 0:
        return None
    nverts = tree.verts[nbrs]
    edges = t.edge_costs(v_new, nverts)
    totals = tree.cost[nbrs] + edges
    order = np.argsort(totals, kind="stable")
    j = validator.first_free(v_new, nverts[order])
    if j < 0:
        return None
    pick = int(order[j])
    best_node = int(nbrs[pick])
    new_cost = float(totals[pick])
    h_new = t.heuristic(v_new)
    if new_cost + h_new >= bound:
        return None

    node = tree.index.get(v_new)
    changed = True
    if node is None:
        node = tree.add(v_new, best_node, float(edges[pick]))
    elif new_cost < tree.cost[node]:
        tree.rewire(node, best_node, float(edges[pick]))
    else:
        changed = False

    c_new = tree.cost[node]
    for k in np.flatnonzero(c_new + edges < tree.cost[nbrs]).tolist():
        other = int(nbrs[k])
        # earlier rewires in this loop may already have lowered this cost
        if c_new + edges[k] < tree.cost[other] and validator.free(v_new, tree.vertex(other)):
            tree.rewire(other, node, float(edges[k]))

    # stay greedy only after real progress; revisiting an existing vertex
    # without improving it can otherwise cycle forever
    if changed and h_new < t.heuristic(tree.vertex(best_node)):
        return v_new
    return None


def _validate_query(t: TensorRoadmap, S, T) -> tuple[CompositeVertex, CompositeVertex]:
    S, T = t.check_vertex(S), t.check_vertex(T)
    if not t.config_free(t.config(S)):
        raise InfeasibleQueryError(f"composite start {S} is in collision")
    return S, T


def _trivial(name: str, t: TensorRoadmap, S: CompositeVertex) -> PlanResult:
    return PlanResult(name, [S], [t.config(S)], 0.0, 0, 0.0, 0, [(0, 0.0, 0.0)], "solved", tree_size=1)


def drrt_star(t: TensorRoadmap, S, T, cfg: PlannerConfig, *, stop_cost: float | None = None,
              stop_on_solution: bool = False, audit_tree: bool = False) -> PlanResult:
    """Anytime dRRT* query from ``S`` to ``T``.

    The run ends when the budget in ``cfg`` is spent, or earlier when the
    best cost reaches ``stop_cost`` or, with ``stop_on_solution``, at the
    first solution. ``audit_tree`` recomputes every cost-to-come at the end.
    """
    S, T = _validate_query(t, S, T)
    if S == T:
        return _trivial(cfg.name, t, S)
    rng = np.random.default_rng(cfg.seed)
    budget = Budget(cfg)
    tree = SearchTree(t, S)
    validator = EdgeValidator(t, cfg.collision_step)
    best, best_path, first = math.inf, [], None
    history: list[tuple[int, float, float]] = []
    v_last: CompositeVertex | None = S
    it = 0
    while not budget.exhausted(it):
        it += 1
        bound = best if cfg.branch_and_bound else math.inf
        v_last = expand_drrt_star(t, tree, v_last, T, rng, validator=validator, bound=bound)
        node = tree.index.get(T)
        # ignore float-noise "improvements" from re-summed equal-cost paths
        if node is not None and tree.cost[node] < best * (1 - 1e-12):
            best = float(tree.cost[node])
            best_path = trace_path(tree, S, T)
            if first is None:
                first = it
            history.append((it, budget.elapsed(), best))
            if stop_on_solution or (stop_cost is not None and best <= stop_cost):
                break
    status = "solved" if best_path else "budget"
    return PlanResult(cfg.name, best_path, [t.config(v) for v in best_path], best, it, budget.elapsed(),
                      first, history, status, tree_size=len(tree), checkpoints=budget.marks,
                      tree_audit=tree.audit() if audit_tree else None)


def expand_drrt(t: TensorRoadmap, tree: SearchTree, T: CompositeVertex, rng: np.random.Generator,
                validator: EdgeValidator, target_bias: float = 0.1) -> CompositeVertex | None:
    """One dRRT expansion: no rewiring, the expanded node becomes the parent."""
    q = t.config(T) if rng.random() < target_bias else random_sample(t, rng)
    near_node = tree.nearest(q)
    near = tree.vertex(near_node)
    v_new = t.oracle(near, q)
    if v_new == near or v_new in tree.index:
        return None
    if not validator.free(near, v_new):
        return None
    tree.add(v_new, near_node, t.edge_cost(near, v_new))
    return v_new


def drrt(t: TensorRoadmap, S, T, cfg: PlannerConfig, *, audit_tree: bool = False) -> PlanResult:
    """dRRT baseline; stops at its first solution."""
    S, T = _validate_query(t, S, T)
    if S == T:
        return _trivial(cfg.name, t, S)
    rng = np.random.default_rng(cfg.seed)
    budget = Budget(cfg)
    tree = SearchTree(t, S)
    validator = EdgeValidator(t, cfg.collision_step)
    it = 0
    while not budget.exhausted(it):
        it += 1
        if expand_drrt(t, tree, T, rng, validator, cfg.target_bias) == T:
            path = trace_path(tree, S, T)
            cost = tree.cost_of(T)
            return PlanResult(cfg.name, path, [t.config(v) for v in path], cost, it, budget.elapsed(), it,
                              [(it, budget.elapsed(), cost)], "solved", tree_size=len(tree),
                              checkpoints=budget.marks, tree_audit=tree.audit() if audit_tree else None)
    return PlanResult(cfg.name, [], [], math.inf, it, budget.elapsed(), None, [], "budget", tree_size=len(tree),
                      checkpoints=budget.marks, tree_audit=tree.audit() if audit_tree else None)
