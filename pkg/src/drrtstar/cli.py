"""Command line: ``drrtstar {build,plan,bench,verify} SCENARIO [options]``.

SCENARIO is a scenario file or the name of a shipped scenario. Errors are
reported on stderr as one JSON object per line, e.g.
``{"error": "scenario", "kind": "invariant", "problems": [...]}``.

Exit codes: 0 success, 1 verification verdict failed, 2 usage or input
error, 3 planner found no solution within its budget.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .bench import emit_csv, run_benchmark, verify_small_instance
from .planners import MODES, PlannerConfig, plan
from .roadmap import RoadmapError, save_roadmap
from .scenario import Scenario, ScenarioError, build_roadmaps, resolve_scenario, shipped_scenarios
from .tensor import GraphTooLargeError, TensorRoadmap

EXIT_OK, EXIT_VERDICT, EXIT_INPUT, EXIT_NO_SOLUTION = 0, 1, 2, 3


def _diag(**fields) -> None:
    print(json.dumps(fields), file=sys.stderr)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drrtstar", description="Multi-robot planning over implicit tensor roadmaps.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, planner=False, output_help="output path"):
        sp.add_argument("scenario", help=f"scenario file or shipped name ({', '.join(shipped_scenarios())})")
        sp.add_argument("--seed", type=int, help="roadmap/planner seed (default: the scenario's seeds)")
        sp.add_argument("--n", type=int, help="override roadmap size per robot")
        sp.add_argument("--eta", type=float, help="override PRM* radius slack")
        sp.add_argument("--output", "-o", help=output_help)
        if planner:
            sp.add_argument("--planner", choices=MODES, help="planner mode (default: the scenario's planners)")
            sp.add_argument("--iterations", type=int, help="iteration budget")
            sp.add_argument("--time-limit", type=float, help="wall-clock budget in seconds")

    common(sub.add_parser("build", help="construct and save per-robot roadmaps"),
           output_help="directory for robot_<i>.json files (default: current directory)")
    common(sub.add_parser("plan", help="run one planner and print its path and cost"), planner=True,
           output_help="also write the result as JSON to this file")
    common(sub.add_parser("bench", help="run the benchmark and write the CSV"), planner=True,
           output_help="CSV path (default: <scenario>.csv)")
    v = sub.add_parser("verify", help="check planners against the explicit tensor graph")
    common(v, output_help="also write the report as JSON to this file")
    v.add_argument("--runs", type=int, default=100, help="seeded dRRT* runs (default 100)")
    v.add_argument("--budgets", type=int, nargs="+", default=[10_000, 100_000], help="iteration budgets")
    v.add_argument("--threshold", type=float, default=0.95, help="required attainment fraction at the top budget")
    v.add_argument("--max-vertices", type=int, default=250_000, help="explicit graph size guard")
    return p


def _apply_overrides(s: Scenario, args) -> Scenario:
    if args.n is not None:
        s = replace(s, n=args.n)
    if args.eta is not None:
        s = replace(s, eta=args.eta)
    if args.seed is not None:
        s = replace(s, seeds=[args.seed])
    planners = list(s.planners)
    if getattr(args, "planner", None):
        planners = [c for c in planners if c.mode == args.planner] or [PlannerConfig(mode=args.planner)]
    if getattr(args, "iterations", None) is not None or getattr(args, "time_limit", None) is not None:
        planners = [replace(c, iteration_limit=args.iterations, time_limit=args.time_limit) for c in planners]
    return replace(s, planners=planners)


def _num(x: float):
    return None if math.isinf(x) else x


def cmd_build(s: Scenario, args) -> int:
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    seed = s.seeds[0]
    for i, g in enumerate(build_roadmaps(s, seed)):
        path = out / f"robot_{i}.json"
        save_roadmap(g, path)
        print(f"robot {i}: {g.n} vertices, {g.num_edges} edges, radius {g.radius_used:.6g} -> {path}")
    return EXIT_OK


def cmd_plan(s: Scenario, args) -> int:
    seed = s.seeds[0]
    cfg = replace(s.planners[0], seed=seed)
    t = TensorRoadmap(build_roadmaps(s, seed), s.robots, s.workspace)
    res = plan(t, cfg)
    print(f"planner {cfg.name} seed {seed} status {res.status} iterations {res.iterations_used}")
    if not res.success:
        print("no solution")
    else:
        print(f"cost {res.cost!r}")
        for k, q in enumerate(res.configs):
            tag = f" {tuple(res.path[k])}" if res.path else ""
            coords = " ".join(f"({x:.6f}, {y:.6f})" for x, y in q.tolist())
            print(f"{k:4d}{tag} {coords}")
    if args.output:
        doc = {"planner": cfg.name, "seed": seed, "status": res.status, "cost": _num(res.cost),
               "iterations": res.iterations_used, "path": [list(v) for v in res.path],
               "configs": [q.tolist() for q in res.configs]}
        Path(args.output).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK if res.success else EXIT_NO_SOLUTION


def cmd_bench(s: Scenario, args) -> int:
    path = Path(args.output or f"{s.name}.csv")
    records = run_benchmark(s)
    emit_csv(records, path)
    print(f"{len(records)} records -> {path}")
    return EXIT_OK


def cmd_verify(s: Scenario, args) -> int:
    try:
        rep = verify_small_instance(s, args.max_vertices, runs=args.runs, budgets=args.budgets,
                                    threshold=args.threshold)
    except GraphTooLargeError as e:
        _diag(error="graph_too_large", size=e.size, limit=e.limit,
              message=f"explicit tensor graph would have {e.size} vertices (limit {e.limit}); "
                      "use smaller roadmaps (--n) or raise --max-vertices")
        return EXIT_INPUT
    doc = rep.to_dict()
    text = json.dumps(doc, indent=1)
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    return EXIT_OK if rep.passed else EXIT_VERDICT


COMMANDS = {"build": cmd_build, "plan": cmd_plan, "bench": cmd_bench, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        s = _apply_overrides(resolve_scenario(args.scenario), args)
        return COMMANDS[args.command](s, args)
    except ScenarioError as e:
        _diag(error="scenario", kind=e.kind, problems=[{"field": f, "message": m} for f, m in e.problems])
    except FileNotFoundError as e:
        _diag(error="file_not_found", message=str(e))
    except (RoadmapError, ValueError) as e:
        _diag(error=type(e).__name__, message=str(e))
    except OSError as e:
        _diag(error="io", message=str(e))
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
