"""Benchmark scenarios: JSON schema, validation and the shipped instances.

A scenario file is a JSON object with these keys (unknown keys are rejected)::

    name        string
    workspace   {"bounds": [xmin, ymin, xmax, ymax], "obstacles": [[[x, y], ...], ...]}
    robots      [{"radius": r, "start": [x, y], "goal": [x, y]}, ...]   (R >= 2)
    n           roadmap size per robot, start and goal included
    eta         PRM* radius slack
    seeds       list of integer seeds; one roadmap set and one run per planner each
    planners    list of PlannerConfig fields, e.g. {"mode": "drrt_star", "iteration_limit": 100000}
    roadmaps    optional, how per-robot roadmaps are obtained:
                {"kind": "prm_star"} (default),
                {"kind": "nine_grid", "jitter": 0.05} or
                {"kind": "files", "paths": ["robot0.json", ...]} (relative to the scenario file)
    notes       optional free text

Per-robot roadmaps for seed ``s`` are built with seed ``[s, i]`` for robot ``i``.
"""

from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass, field, fields
from importlib import resources
from os import PathLike
from pathlib import Path
from typing import Any

import numpy as np

from .geometry2d import DiskRobot, Polygon, Workspace, disks_collide, point_free
from .planners import MODES, PlannerConfig
from .roadmap import Roadmap, build_prm_star, load_roadmap, nine_grid_roadmap
from .tensor import TensorRoadmap

__all__ = [
    "Scenario",
    "ScenarioError",
    "ScenarioParseError",
    "ScenarioInvariantError",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "shipped_scenarios",
    "shipped_scenario_path",
    "resolve_scenario",
    "perimeter_scenario",
    "build_roadmaps",
    "build_tensor",
]

TOP_KEYS = {"name", "workspace", "robots", "n", "eta", "seeds", "planners", "roadmaps", "notes"}
REQUIRED = TOP_KEYS - {"roadmaps", "notes"}
ROADMAP_KINDS = ("prm_star", "nine_grid", "files")
_PLANNER_KEYS = {f.name for f in fields(PlannerConfig)} - {"seed"}


class ScenarioError(ValueError):
    """Base class; ``problems`` holds ``(field_path, message)`` pairs."""

    kind = "scenario"

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{p}: {m}" for p, m in problems))


class ScenarioParseError(ScenarioError):
    """File is not JSON or does not follow the schema."""

    kind = "parse"


class ScenarioInvariantError(ScenarioError):
    """Well-formed file whose content is geometrically invalid."""

    kind = "invariant"


@dataclass
class Scenario:
    name: str
    workspace: Workspace
    robots: list[DiskRobot]
    n: int
    eta: float
    seeds: list[int]
    planners: list[PlannerConfig]
    roadmaps: dict = field(default_factory=lambda: {"kind": "prm_star"})
    notes: str = ""
    base_dir: Path | None = None

    @property
    def R(self) -> int:
        return len(self.robots)


class _Reader:
    """Collects schema problems with their field paths instead of stopping at the first."""

    def __init__(self):
        self.problems: list[tuple[str, str]] = []

    def fail(self, path: str, msg: str):
        self.problems.append((path, msg))

    def number(self, value, path, *, integer=False, positive=False, nonneg=False):
        ok = isinstance(value, int) if integer else isinstance(value, (int, float))
        if not ok or isinstance(value, bool):
            self.fail(path, f"expected {'an integer' if integer else 'a number'}, got {value!r}")
            return None
        if not math.isfinite(value):
            self.fail(path, "must be finite")
            return None
        if positive and value <= 0:
            self.fail(path, "must be positive")
            return None
        if nonneg and value < 0:
            self.fail(path, "must be non-negative")
            return None
        return value

    def point(self, value, path):
        if not isinstance(value, list) or len(value) != 2:
            self.fail(path, f"expected [x, y], got {value!r}")
            return None
        xy = [self.number(v, f"{path}[{k}]") for k, v in enumerate(value)]
        return None if None in xy else (float(xy[0]), float(xy[1]))

    def keys(self, obj, path, allowed, required):
        if not isinstance(obj, dict):
            self.fail(path or "<root>", f"expected an object, got {type(obj).__name__}")
            return False
        for k in sorted(set(obj) - set(allowed)):
            self.fail(f"{path}.{k}" if path else k, "unknown key")
        for k in sorted(set(required) - set(obj)):
            self.fail(f"{path}.{k}" if path else k, "missing required key")
        return True


def _read_workspace(r: _Reader, obj) -> Workspace | None:
    if not r.keys(obj, "workspace", {"bounds", "obstacles"}, {"bounds"}):
        return None
    b = obj.get("bounds")
    bounds = None
    if not isinstance(b, list) or len(b) != 4:
        r.fail("workspace.bounds", "expected [xmin, ymin, xmax, ymax]")
    else:
        vals = [r.number(v, f"workspace.bounds[{k}]") for k, v in enumerate(b)]
        if None not in vals:
            if vals[0] >= vals[2] or vals[1] >= vals[3]:
                r.fail("workspace.bounds", "need xmin < xmax and ymin < ymax")
            else:
                bounds = tuple(float(v) for v in vals)
    polys = []
    obs = obj.get("obstacles", [])
    if not isinstance(obs, list):
        r.fail("workspace.obstacles", "expected a list of polygons")
        obs = []
    for k, poly in enumerate(obs):
        path = f"workspace.obstacles[{k}]"
        if not isinstance(poly, list):
            r.fail(path, "expected a list of [x, y] vertices")
            continue
        pts = [r.point(p, f"{path}[{j}]") for j, p in enumerate(poly)]
        if None in pts:
            continue
        try:
            polys.append(Polygon(pts))
        except ValueError as e:
            r.fail(path, str(e))
    if bounds is None or len(polys) != len(obs):
        return None
    return Workspace(bounds, tuple(polys))


def _read_robots(r: _Reader, obj) -> list[DiskRobot] | None:
    if not isinstance(obj, list):
        r.fail("robots", "expected a list")
        return None
    out = []
    for k, rb in enumerate(obj):
        path = f"robots[{k}]"
        if not r.keys(rb, path, {"radius", "start", "goal"}, {"radius", "start", "goal"}):
            continue
        if set(rb) != {"radius", "start", "goal"}:
            continue
        rad = r.number(rb["radius"], f"{path}.radius", positive=True)
        s, g = r.point(rb["start"], f"{path}.start"), r.point(rb["goal"], f"{path}.goal")
        if rad is not None and s is not None and g is not None:
            out.append(DiskRobot(float(rad), s, g))
    return out if len(out) == len(obj) else None


def _read_planners(r: _Reader, obj) -> list[PlannerConfig] | None:
    if not isinstance(obj, list) or not obj:
        r.fail("planners", "expected a non-empty list")
        return None
    out = []
    for k, p in enumerate(obj):
        path = f"planners[{k}]"
        if not r.keys(p, path, _PLANNER_KEYS, {"mode"}):
            continue
        if not set(p) <= _PLANNER_KEYS or "mode" not in p:
            continue
        if p["mode"] not in MODES:
            r.fail(f"{path}.mode", f"unknown planner {p['mode']!r}; expected one of {list(MODES)}")
            continue
        try:
            out.append(PlannerConfig(**p))
        except (TypeError, ValueError) as e:
            r.fail(path, str(e))
    names = [c.name for c in out]
    for name in sorted({x for x in names if names.count(x) > 1}):
        r.fail("planners", f"duplicate planner name {name!r}; set distinct labels")
    return out if len(out) == len(obj) else None


def _read_roadmaps(r: _Reader, obj, n) -> dict | None:
    if not isinstance(obj, dict) or obj.get("kind") not in ROADMAP_KINDS:
        r.fail("roadmaps.kind", f"expected one of {list(ROADMAP_KINDS)}")
        return None
    kind = obj["kind"]
    allowed = {"prm_star": {"kind"}, "nine_grid": {"kind", "jitter"}, "files": {"kind", "paths"}}[kind]
    r.keys(obj, "roadmaps", allowed, {"paths"} if kind == "files" else set())
    if kind == "nine_grid":
        if "jitter" in obj:
            r.number(obj["jitter"], "roadmaps.jitter", nonneg=True)
        if n is not None and n != 9:
            r.fail("n", "nine_grid roadmaps have exactly 9 vertices")
    if kind == "files":
        paths = obj.get("paths")
        if not isinstance(paths, list) or not all(isinstance(p, str) for p in paths):
            r.fail("roadmaps.paths", "expected a list of file paths, one per robot")
    return copy.deepcopy(obj)


def scenario_from_dict(data: Any, base_dir: str | PathLike | None = None) -> Scenario:
    """Validate a decoded scenario document; raises ScenarioParseError or ScenarioInvariantError."""
    r = _Reader()
    if not r.keys(data, "", TOP_KEYS, REQUIRED):
        raise ScenarioParseError(r.problems)
    name = data.get("name")
    if not isinstance(name, str) or not name:
        r.fail("name", "expected a non-empty string")
    w = _read_workspace(r, data["workspace"]) if "workspace" in data else None
    robots = _read_robots(r, data["robots"]) if "robots" in data else None
    n = r.number(data["n"], "n", integer=True) if "n" in data else None
    if n is not None and n < 2:
        r.fail("n", "roadmaps need at least start and goal (n >= 2)")
    eta = r.number(data["eta"], "eta", nonneg=True) if "eta" in data else None
    seeds = data.get("seeds")
    if "seeds" in data:
        if not isinstance(seeds, list) or not seeds:
            r.fail("seeds", "expected a non-empty list of integers")
        else:
            for k, s in enumerate(seeds):
                r.number(s, f"seeds[{k}]", integer=True, nonneg=True)
    planners = _read_planners(r, data["planners"]) if "planners" in data else None
    roadmaps = _read_roadmaps(r, data.get("roadmaps", {"kind": "prm_star"}), n)
    notes = data.get("notes", "")
    if not isinstance(notes, str):
        r.fail("notes", "expected a string")
    if roadmaps is not None and roadmaps["kind"] == "files" and robots is not None:
        if isinstance(roadmaps.get("paths"), list) and len(roadmaps["paths"]) != len(robots):
            r.fail("roadmaps.paths", f"expected {len(robots)} paths, one per robot")
    if r.problems:
        raise ScenarioParseError(r.problems)

    s = Scenario(name, w, robots, int(n), float(eta), [int(x) for x in seeds], planners, roadmaps, notes,
                 Path(base_dir) if base_dir is not None else None)
    check_invariants(s)
    return s


def check_invariants(s: Scenario) -> None:
    """R >= 2, endpoints in free space, starts and goals pairwise apart."""
    problems = []
    if s.R < 2:
        problems.append(("robots", f"need at least 2 robots, got {s.R}"))
    for i, rb in enumerate(s.robots):
        for key, q in (("start", rb.start), ("goal", rb.goal)):
            if not point_free(q, rb.radius, s.workspace):
                problems.append((f"robots[{i}].{key}", "disk is outside the bounds or overlaps an obstacle"))
    for key in ("start", "goal"):
        for i in range(s.R):
            for j in range(i):
                a, b = s.robots[i], s.robots[j]
                if disks_collide(getattr(a, key), a.radius, getattr(b, key), b.radius):
                    problems.append((f"robots[{i}].{key}", f"collides with robots[{j}].{key}"))
    if problems:
        raise ScenarioInvariantError(problems)


def load_scenario(path: str | PathLike) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise FileNotFoundError(f"cannot read scenario {str(p)!r}: {e.strerror or e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError([(f"<line {e.lineno} col {e.colno}>", e.msg)]) from e
    return scenario_from_dict(data, base_dir=p.parent)


def scenario_to_dict(s: Scenario) -> dict:
    defaults = PlannerConfig()
    planners = []
    for c in s.planners:
        d = {"mode": c.mode}
        for f in fields(PlannerConfig):
            if f.name in ("mode", "seed"):
                continue
            v = getattr(c, f.name)
            if v != getattr(defaults, f.name):
                d[f.name] = v
        planners.append(d)
    out = {
        "name": s.name,
        "workspace": {"bounds": list(s.workspace.bounds),
                      "obstacles": [p.tolist() for p in s.workspace.obstacles]},
        "robots": [{"radius": rb.radius, "start": list(rb.start), "goal": list(rb.goal)} for rb in s.robots],
        "n": s.n,
        "eta": s.eta,
        "seeds": list(s.seeds),
        "planners": planners,
        "roadmaps": copy.deepcopy(s.roadmaps),
    }
    if s.notes:
        out["notes"] = s.notes
    return out


_FLAT_LIST = re.compile(r"\[\n\s*(-?[0-9.eE+-]+(?:,\n\s*-?[0-9.eE+-]+)*)\n\s*\]")


def dumps_scenario(s: Scenario) -> str:
    """Indented JSON with number lists kept on one line."""
    text = json.dumps(scenario_to_dict(s), indent=2)
    return _FLAT_LIST.sub(lambda m: "[" + re.sub(r"\s*,\s*", ", ", m.group(1)) + "]", text) + "\n"


def save_scenario(s: Scenario, path: str | PathLike) -> None:
    Path(path).write_text(dumps_scenario(s), encoding="utf-8", newline="\n")


def shipped_scenarios() -> list[str]:
    folder = resources.files("drrtstar") / "scenarios"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def shipped_scenario_path(name: str) -> Path:
    return Path(str(resources.files("drrtstar") / "scenarios" / f"{name}.json"))


def resolve_scenario(ref: str | PathLike) -> Scenario:
    """Load ``ref`` as a file path, falling back to a shipped scenario name."""
    p = Path(ref)
    if p.exists() or str(ref).endswith(".json") or str(ref) not in shipped_scenarios():
        return load_scenario(p)
    return load_scenario(shipped_scenario_path(str(ref)))


def build_roadmaps(s: Scenario, seed: int) -> list[Roadmap]:
    kind = s.roadmaps.get("kind", "prm_star")
    if kind == "files":
        base = s.base_dir or Path(".")
        out = [load_roadmap(base / p) for p in s.roadmaps["paths"]]
        problems = []
        for i, (g, rb) in enumerate(zip(out, s.robots)):
            if not (np.allclose(g.vertices[0], rb.start, atol=1e-9) and np.allclose(g.vertices[1], rb.goal, atol=1e-9)):
                problems.append((f"roadmaps.paths[{i}]", "vertices 0 and 1 must be the robot's start and goal"))
        if problems:
            raise ScenarioInvariantError(problems)
        return out
    out = []
    for i, rb in enumerate(s.robots):
        if kind == "nine_grid":
            out.append(nine_grid_roadmap(s.workspace, rb, [seed, i], jitter=s.roadmaps.get("jitter", 0.05),
                                         robot_index=i))
        else:
            out.append(build_prm_star(s.workspace, rb, s.n, s.eta, [seed, i], robot_index=i))
    return out


def build_tensor(s: Scenario, seed: int) -> TensorRoadmap:
    return TensorRoadmap(build_roadmaps(s, seed), s.robots, s.workspace)


# ---- shipped instances -------------------------------------------------------

SWAP_BOUNDS = (-0.6, -0.6, 9.6, 9.6)
SWAP_OBSTACLES = (
    ((1.5, 5.5), (3.5, 5.5), (3.5, 7.5), (1.5, 7.5)),
    ((5.5, 1.5), (7.5, 1.5), (7.5, 3.5), (5.5, 3.5)),
    ((4.5, 3.9), (5.1, 4.5), (4.5, 5.1), (3.9, 4.5)),
)


def perimeter_points(R: int, side: float = 9.0) -> np.ndarray:
    """``R`` points equally spaced by arc length along the square ``[0, side]^2``, starting at the origin."""
    out = []
    for k in range(R):
        s = 4 * side * k / R
        edge, u = divmod(s, side)
        edge = int(edge)
        x, y = [(u, 0.0), (side, u), (side - u, side), (0.0, side - u)][edge]
        out.append((round(x, 9), round(y, 9)))
    return np.array(out)


def perimeter_scenario(R: int, *, seeds=range(10), iterations: int = 100_000,
                       time_limit: float | None = None) -> Scenario:
    """R disks on the square's perimeter heading for the point opposite the centre."""
    pts = perimeter_points(R)
    robots = [DiskRobot(0.2, (float(x), float(y)), (round(9.0 - x, 9), round(9.0 - y, 9))) for x, y in pts]
    planners = [PlannerConfig(mode=m, iteration_limit=iterations, time_limit=time_limit)
                for m in ("drrt_star", "drrt", "composite_rrt_star", "implicit_astar")]
    w = Workspace(SWAP_BOUNDS, tuple(Polygon(p) for p in SWAP_OBSTACLES))
    notes = ("Same 10.2 x 10.2 frame and obstacles as two_disks_swap. Starts are equally spaced by "
             "arc length along the square [0,9]^2 beginning at (0,0); each goal is the start "
             "reflected through the centre (4.5, 4.5).")
    return Scenario(f"r_disks_perimeter_{R}", w, robots, 50, 0.1, list(seeds), planners, {"kind": "prm_star"},
                    notes)


def swap_scenario() -> Scenario:
    """Two disks exchange opposite corners of the frame, past three obstacles."""
    w = Workspace(SWAP_BOUNDS, tuple(Polygon(p) for p in SWAP_OBSTACLES))
    robots = [DiskRobot(0.2, (0.0, 0.0), (9.0, 9.0)), DiskRobot(0.2, (9.0, 9.0), (0.0, 0.0))]
    planners = [PlannerConfig(mode="drrt_star", iteration_limit=100_000),
                PlannerConfig(mode="implicit_astar", iteration_limit=None, time_limit=600.0),
                PlannerConfig(mode="drrt", iteration_limit=100_000)]
    notes = ("Two disks of radius 0.2 swap between (0,0) and (9,9) in a 10.2 x 10.2 region. The region is "
             "taken as [-0.6, 9.6]^2 so both corner positions have 0.4 clearance from the boundary. "
             "Obstacle layout: two 2 x 2 squares off the diagonal and a small diamond at the centre.")
    return Scenario("two_disks_swap", w, robots, 50, 0.1, list(range(10)), planners, {"kind": "prm_star"}, notes)


def minimal_nine_scenario() -> Scenario:
    """Two disks swap corners of a jittered 3 x 3 grid roadmap; small enough for the explicit graph."""
    robots = [DiskRobot(0.2, (0.0, 0.0), (2.0, 2.0)), DiskRobot(0.2, (2.0, 2.0), (0.0, 0.0))]
    notes = ("Two disks swap corners of a 3 x 3 grid roadmap with unit spacing. The seven non-endpoint "
             "nodes are perturbed uniformly by up to 0.05 per axis and joined to their 8-connected grid "
             "neighbours.")
    return Scenario("minimal_nine", Workspace((-1.0, -1.0, 3.0, 3.0)), robots, 9, 0.0, [0],
                    [PlannerConfig(mode="drrt_star", iteration_limit=100_000)],
                    {"kind": "nine_grid", "jitter": 0.05}, notes)


def generated_scenarios() -> dict[str, Scenario]:
    """Every shipped scenario, rebuilt from code."""
    out = {s.name: s for s in (swap_scenario(), minimal_nine_scenario())}
    for R in (3, 4, 5, 6):
        s = perimeter_scenario(R)
        out[s.name] = s
    return out


def write_shipped_scenarios(folder: str | PathLike) -> list[Path]:
    folder = Path(folder)
    paths = []
    for name, s in generated_scenarios().items():
        p = folder / f"{name}.json"
        save_scenario(s, p)
        paths.append(p)
    return paths
