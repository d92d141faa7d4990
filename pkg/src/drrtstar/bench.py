"""Benchmark execution, CSV telemetry and the explicit-graph verification report."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
import time
from dataclasses import dataclass, field, replace
from os import PathLike
from pathlib import Path
from typing import Iterable, Sequence

from .planners import PlannerConfig, PlanResult, audit_result, implicit_astar, plan
from .planners.common import log_grid
from .planners.drrt import drrt, drrt_star
from .roadmap import RoadmapError, START
from .scenario import Scenario, build_tensor
from .tensor import TensorRoadmap, explicit_tensor_graph

__all__ = [
    "BenchRecord",
    "RunOutcome",
    "CSV_COLUMNS",
    "normalizer",
    "execute_runs",
    "records_from_outcome",
    "run_benchmark",
    "emit_csv",
    "format_csv",
    "VerifyReport",
    "verify_small_instance",
]

CSV_COLUMNS = ("scenario", "planner", "seed", "R", "n", "iteration", "elapsed_ms", "best_cost", "success",
               "normalized_cost")


@dataclass(frozen=True)
class BenchRecord:
    scenario: str
    planner: str
    seed: int
    R: int
    n: int
    iteration: int
    elapsed_ms: float
    best_cost: float
    success: bool
    normalized_cost: float


@dataclass
class RunOutcome:
    """One (seed, planner) run with its soundness checks."""

    scenario: str
    planner: str
    seed: int
    R: int
    n: int
    result: PlanResult | None
    normalizer: float
    path_audit: bool = True
    error: str | None = None


def normalizer(t: TensorRoadmap) -> float:
    """Sum of single-robot optimal roadmap costs from each start, ignoring the other robots."""
    return float(sum(tab[START] for tab in t.goal_tables))


def _run_one(s: Scenario, t: TensorRoadmap, cfg: PlannerConfig, seed: int, norm: float, audit_factor: float,
             **kwargs) -> RunOutcome:
    cfg = replace(cfg, seed=seed)
    out = RunOutcome(s.name, cfg.name, seed, s.R, s.n, None, norm)
    try:
        res = plan(t, cfg, **kwargs)
    except Exception as e:  # a failing run becomes a success=false row
        out.error = f"{type(e).__name__}: {e}"
        return out
    out.result = res
    if res.success:
        start, goal = t.config(t.start), t.config(t.target)
        out.path_audit = audit_result(t, res, start, goal, cfg.collision_step / audit_factor)
    return out


def execute_runs(s: Scenario, *, planners: Sequence[PlannerConfig] | None = None,
                 seeds: Iterable[int] | None = None, audit_factor: float = 10.0,
                 run_kwargs: dict | None = None) -> list[RunOutcome]:
    """Run every planner on every seed; roadmaps are built once per seed and shared.

    ``run_kwargs`` maps planner names to extra keyword arguments for the
    planner call (for instance an early ``stop_cost``).
    """
    planners = list(planners if planners is not None else s.planners)
    run_kwargs = run_kwargs or {}
    outcomes = []
    for seed in (s.seeds if seeds is None else seeds):
        try:
            t = build_tensor(s, seed)
        except (RoadmapError, ValueError) as e:
            for cfg in planners:
                outcomes.append(RunOutcome(s.name, cfg.name, seed, s.R, s.n, None, math.inf,
                                           error=f"{type(e).__name__}: {e}"))
            continue
        norm = normalizer(t)
        for cfg in planners:
            outcomes.append(_run_one(s, t, cfg, seed, norm, audit_factor, **run_kwargs.get(cfg.name, {})))
    return outcomes


def records_from_outcome(o: RunOutcome) -> list[BenchRecord]:
    """Sample a run's history at the 1-2-5 grid plus the first-solution and final iterations."""

    def rec(it, elapsed, cost):
        ok = math.isfinite(cost) and o.path_audit
        cost = cost if ok else math.inf
        nc = cost / o.normalizer if ok and o.normalizer > 0 else (1.0 if ok and cost == 0 else math.inf)
        return BenchRecord(o.scenario, o.planner, o.seed, o.R, o.n, it, elapsed * 1000.0, cost, ok, nc)

    res = o.result
    if res is None:
        return [rec(0, 0.0, math.inf)]
    its = set(log_grid(res.iterations_used))
    its.add(res.iterations_used)
    if res.first_solution_iteration is not None:
        its.add(res.first_solution_iteration)
    hist = {it: el for it, el, _ in res.history}
    rows = []
    for it in sorted(its):
        if it in hist:
            elapsed = hist[it]
        elif it == res.iterations_used:
            elapsed = res.time_used
        else:
            elapsed = res.checkpoints.get(it, res.time_used)
        rows.append(rec(it, elapsed, res.best_cost_at(it)))
    return rows


def run_benchmark(s: Scenario, **kwargs) -> list[BenchRecord]:
    """``execute_runs`` flattened into telemetry rows."""
    return [r for o in execute_runs(s, **kwargs) for r in records_from_outcome(o)]


def _fmt(x: float) -> str:
    return "" if math.isinf(x) else repr(float(x))


def format_csv(records: Iterable[BenchRecord]) -> str:
    rows = sorted(records, key=lambda r: (r.scenario, r.planner, r.seed, r.iteration))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.scenario, r.planner, r.seed, r.R, r.n, r.iteration, _fmt(r.elapsed_ms), _fmt(r.best_cost),
                    "true" if r.success else "false", _fmt(r.normalized_cost)])
    return buf.getvalue()


def emit_csv(records: Iterable[BenchRecord], path: str | PathLike) -> None:
    """Write records atomically: the target appears only once fully written."""
    text = format_csv(records)
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---- small-instance verification ---------------------------------------------

@dataclass
class VerifyReport:
    scenario: str
    num_vertices: int
    num_edges: int
    explicit_cost: float
    astar_cost: float
    astar_status: str
    budgets: list[int]
    runs: int
    attained: dict[int, float]
    drrt_star_failures: int
    drrt_failures: int
    threshold: float
    verdicts: dict[str, bool] = field(default_factory=dict)
    elapsed_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        def num(x):
            return None if math.isinf(x) else x

        return {
            "scenario": self.scenario,
            "num_vertices": self.num_vertices,
            "num_edges": self.num_edges,
            "explicit_cost": num(self.explicit_cost),
            "astar_cost": num(self.astar_cost),
            "astar_status": self.astar_status,
            "runs": self.runs,
            "attained_fraction": {str(b): self.attained[b] for b in self.budgets},
            "threshold": self.threshold,
            "drrt_star_failures": self.drrt_star_failures,
            "drrt_failures": self.drrt_failures,
            "verdicts": self.verdicts,
            "passed": self.passed,
            "elapsed_s": round(self.elapsed_s, 3),
        }


def verify_small_instance(s: Scenario, max_vertices: int = 250_000, *, runs: int = 100,
                          budgets: Sequence[int] = (10_000, 100_000), threshold: float = 0.95,
                          tol: float = 1e-6, seed: int | None = None) -> VerifyReport:
    """Compare implicit A* and seeded dRRT* runs against Dijkstra on the explicit tensor graph.

    Roadmaps come from the scenario's first seed (or ``seed``); dRRT* runs
    use seeds ``0 .. runs-1``. A run counts as attaining the optimum at budget
    ``b`` when its best cost after ``b`` iterations is within ``tol`` of the
    explicit optimum. Runs stop early once they attain it, which does not
    change any reported fraction. On an infeasible instance every planner
    must report failure.

    Raises ``GraphTooLargeError`` when the explicit graph exceeds ``max_vertices``.
    """
    t0 = time.perf_counter()
    t = build_tensor(s, s.seeds[0] if seed is None else seed)
    base = next((c for c in s.planners if c.mode == "drrt_star"), PlannerConfig())
    step = base.collision_step
    g = explicit_tensor_graph(t, max_vertices, step)
    opt, _ = g.shortest_path(t.start, t.target)
    astar = implicit_astar(t, t.start, t.target, PlannerConfig(mode="implicit_astar", iteration_limit=None,
                                                                time_limit=600.0, collision_step=step))
    budgets = sorted(int(b) for b in budgets)
    top = budgets[-1]
    hits = {b: 0 for b in budgets}
    fails = drrt_fails = 0
    feasible = math.isfinite(opt)
    for k in range(runs):
        cfg = replace(base, seed=k, iteration_limit=top, time_limit=None)
        res = drrt_star(t, t.start, t.target, cfg, stop_cost=opt + tol if feasible else None)
        if not res.success:
            fails += 1
        for b in budgets:
            if feasible and res.best_cost_at(b) <= opt + tol:
                hits[b] += 1
        if not feasible:
            d = drrt(t, t.start, t.target, PlannerConfig(mode="drrt", iteration_limit=top, seed=k,
                                                        collision_step=step))
            drrt_fails += not d.success
    attained = {b: hits[b] / runs for b in budgets}

    rep = VerifyReport(s.name, g.num_vertices, g.num_edges, opt, astar.cost, astar.status, budgets, runs, attained,
                       fails, drrt_fails, threshold)
    if feasible:
        rep.verdicts["astar_matches_explicit"] = astar.status == "solved" and abs(astar.cost - opt) <= 1e-9
        rep.verdicts["attainment_threshold"] = attained[top] >= threshold
        rep.verdicts["attainment_monotone"] = all(attained[a] <= attained[b] for a, b in zip(budgets, budgets[1:]))
    else:
        rep.verdicts["astar_reports_infeasible"] = astar.status == "infeasible"
        rep.verdicts["drrt_star_all_fail"] = fails == runs
        rep.verdicts["drrt_all_fail"] = drrt_fails == runs
    rep.elapsed_s = time.perf_counter() - t0
    return rep
