import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from drrtstar.geometry2d import DiskRobot, Polygon, Workspace
from drrtstar.roadmap import build_prm_star, nine_grid_roadmap
from drrtstar.scenario import resolve_scenario
from drrtstar.tensor import TensorRoadmap


def seg_seg_distance(p1, p2, q1, q2) -> float:
    """Exact distance between two closed segments (brute-force closed form, no sampling)."""
    p1, p2, q1, q2 = (np.asarray(x, dtype=float) for x in (p1, p2, q1, q2))

    def cross(a, b):
        return a[0] * b[1] - a[1] * b[0]

    r, s = p2 - p1, q2 - q1
    den = cross(r, s)
    if den != 0:
        t = cross(q1 - p1, s) / den
        u = cross(q1 - p1, r) / den
        if 0 <= t <= 1 and 0 <= u <= 1:
            return 0.0

    def pt_seg(p, a, b):
        d = b - a
        L2 = d @ d
        t = 0.0 if L2 == 0 else min(1.0, max(0.0, (p - a) @ d / L2))
        return float(np.linalg.norm(p - (a + t * d)))

    return min(pt_seg(p1, q1, q2), pt_seg(p2, q1, q2), pt_seg(q1, p1, p2), pt_seg(q2, p1, p2))


def point_in_polygon(p, verts) -> bool:
    inside = False
    n = len(verts)
    for i in range(n):
        (x1, y1), (x2, y2) = verts[i], verts[(i + 1) % n]
        if (y1 > p[1]) != (y2 > p[1]):
            x = x1 + (p[1] - y1) * (x2 - x1) / (y2 - y1)
            if x > p[0]:
                inside = not inside
    return inside


def exact_sweep_clearance(a, b, w: Workspace) -> float:
    """Minimum distance from segment ab to any obstacle (0 if the segment touches an interior)."""
    best = math.inf
    for poly in w.obstacles:
        v = poly.vertices
        if point_in_polygon(a, v) or point_in_polygon(b, v):
            return 0.0
        for k in range(len(v)):
            best = min(best, seg_seg_distance(a, b, v[k], v[(k + 1) % len(v)]))
    return best


def exact_inside_bounds(a, b, radius, w: Workspace) -> bool:
    xmin, ymin, xmax, ymax = w.bounds
    return all(xmin + radius <= p[0] <= xmax - radius and ymin + radius <= p[1] <= ymax - radius for p in (a, b))


def relative_closest_approach(a0, a1, b0, b1) -> float:
    """Exact minimum distance between two points moving linearly and synchronously."""
    d0 = np.asarray(b0, float) - np.asarray(a0, float)
    d1 = np.asarray(b1, float) - np.asarray(a1, float)
    dv = d1 - d0
    vv = dv @ dv
    t = 0.0 if vv == 0 else min(1.0, max(0.0, -(d0 @ dv) / vv))
    return float(np.linalg.norm(d0 + t * dv))


@pytest.fixture(scope="session")
def swap_scenario():
    return resolve_scenario("two_disks_swap")


@pytest.fixture(scope="session")
def swap_tensor(swap_scenario):
    from drrtstar.scenario import build_tensor

    return build_tensor(swap_scenario, 0)


def random_small_instance(seed: int, n: int = 9, with_obstacles: bool = True) -> TensorRoadmap:
    """R=2 instance with small PRM* roadmaps and random rectangles for exhaustive cross-checks."""
    rng = np.random.default_rng(seed)
    obstacles = []
    if with_obstacles:
        for _ in range(rng.integers(1, 4)):
            cx, cy = rng.uniform(1.0, 4.0, 2)
            hx, hy = rng.uniform(0.2, 0.7, 2)
            obstacles.append(Polygon([(cx - hx, cy - hy), (cx + hx, cy - hy), (cx + hx, cy + hy), (cx - hx, cy + hy)]))
    w = Workspace((0.0, 0.0, 5.0, 5.0), tuple(obstacles))
    robots = []
    while len(robots) < 2:
        s, g = rng.uniform(0.3, 4.7, 2), rng.uniform(0.3, 4.7, 2)
        from drrtstar.geometry2d import disks_collide, point_free

        if not (point_free(s, 0.2, w) and point_free(g, 0.2, w)):
            continue
        if any(disks_collide(s, 0.2, r.start, 0.2) or disks_collide(g, 0.2, r.goal, 0.2) for r in robots):
            continue
        robots.append(DiskRobot(0.2, tuple(s), tuple(g)))
    roadmaps = [build_prm_star(w, rb, n, 0.5, [seed, i], robot_index=i) for i, rb in enumerate(robots)]
    return TensorRoadmap(roadmaps, robots, w)


def nine_instance(seed: int = 0) -> TensorRoadmap:
    sc = resolve_scenario("minimal_nine")
    roadmaps = [nine_grid_roadmap(sc.workspace, rb, [seed, i], robot_index=i) for i, rb in enumerate(sc.robots)]
    return TensorRoadmap(roadmaps, sc.robots, sc.workspace)


def radius_oracle(n: int, d: int, eta: float) -> float:
    """(1 + eta) * 2 * (1/d)^(1/d) * (ln n / n)^(1/d) at 50 significant digits."""
    getcontext().prec = 50
    D, N = Decimal(d), Decimal(n)
    inv = Decimal(1) / D
    val = (Decimal(1) + Decimal(repr(eta))) * 2 * (inv ** inv) * ((N.ln() / N) ** inv)
    return float(val)


ACCEPTANCE_LINES: dict[str, str] = {}


def record_criterion(key: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[key] = f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
