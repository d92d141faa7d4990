"""Planar workspace model and collision predicates for disk robots.

Obstacles are closed solid polygons. A disk is free when it lies inside the
workspace bounds and its centre keeps a distance of at least its radius from
every obstacle; touching counts as free everywhere.

Motion checks are discretized: a straight motion of length ``L`` is split
into ``K`` equal intervals where ``K`` is the smallest power of two with
``L / K <= step``. Power-of-two subdivision keeps the sample sets nested, so
a finer step never accepts a motion that a coarser step rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "Point2",
    "Polygon",
    "Workspace",
    "DiskRobot",
    "as_point",
    "dyadic_intervals",
    "point_free",
    "points_free",
    "segment_free",
    "segments_free",
    "disks_collide",
    "segment_distance",
]

Point2 = tuple[float, float]


def as_point(q: ArrayLike) -> NDArray[np.float64]:
    """Return ``q`` as a finite float array of shape (2,)."""
    p = np.asarray(q, dtype=float)
    if p.shape != (2,):
        raise ValueError(f"expected a 2D point, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"point has non-finite coordinates: {p.tolist()}")
    return p


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        return (v > 0) - (v < 0)

    def on_segment(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_segment(p1, p2, q1):
        return True
    if o2 == 0 and on_segment(p1, p2, q2):
        return True
    if o3 == 0 and on_segment(q1, q2, p1):
        return True
    if o4 == 0 and on_segment(q1, q2, p2):
        return True
    return False


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon, stored counter-clockwise.

    Clockwise input is reversed on construction. Self-intersecting input,
    repeated consecutive vertices and fewer than three vertices are rejected.
    """

    vertices: NDArray[np.float64]

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices of shape (m, 2)")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon has non-finite coordinates")
        nxt = np.roll(v, -1, axis=0)
        if np.any(np.all(v == nxt, axis=1)):
            raise ValueError("polygon has repeated consecutive vertices")
        m = len(v)
        for i in range(m):
            for j in range(i + 1, m):
                # skip edges sharing a vertex
                if j == i + 1 or (i == 0 and j == m - 1):
                    continue
                if _segments_intersect(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                    raise ValueError("polygon is not simple")
        area2 = float(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))
        if area2 == 0.0:
            raise ValueError("polygon has zero area")
        if area2 < 0:
            v = v[::-1].copy()
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def area(self) -> float:
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))

    def tolist(self) -> list[list[float]]:
        return self.vertices.tolist()


@dataclass(frozen=True, eq=False)
class Workspace:
    """Axis-aligned rectangular region with polygonal obstacles.

    ``bounds`` is ``(xmin, ymin, xmax, ymax)``.
    """

    bounds: tuple[float, float, float, float]
    obstacles: tuple[Polygon, ...] = ()
    _edge_a: NDArray[np.float64] = field(init=False, repr=False)
    _edge_d: NDArray[np.float64] = field(init=False, repr=False)
    _edge_len2: NDArray[np.float64] = field(init=False, repr=False)
    _poly_start: NDArray[np.intp] = field(init=False, repr=False)

    def __post_init__(self):
        b = tuple(float(x) for x in self.bounds)
        if len(b) != 4 or not all(math.isfinite(x) for x in b):
            raise ValueError("bounds must be four finite numbers")
        xmin, ymin, xmax, ymax = b
        if not (xmax > xmin and ymax > ymin):
            raise ValueError("bounds must have positive width and height")
        obstacles = tuple(o if isinstance(o, Polygon) else Polygon(o) for o in self.obstacles)
        for k, o in enumerate(obstacles):
            v = o.vertices
            if (v[:, 0].min() < xmin or v[:, 0].max() > xmax
                    or v[:, 1].min() < ymin or v[:, 1].max() > ymax):
                raise ValueError(f"obstacle {k} has a vertex outside the bounds")
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "obstacles", obstacles)
        if obstacles:
            a = np.concatenate([o.vertices for o in obstacles])
            nb = np.concatenate([np.roll(o.vertices, -1, axis=0) for o in obstacles])
            starts = np.cumsum([0] + [len(o.vertices) for o in obstacles[:-1]])
        else:
            a = nb = np.zeros((0, 2))
            starts = np.zeros(0, dtype=np.intp)
        d = nb - a
        object.__setattr__(self, "_edge_a", a)
        object.__setattr__(self, "_edge_d", d)
        object.__setattr__(self, "_edge_len2", np.einsum("ij,ij->i", d, d))
        object.__setattr__(self, "_poly_start", np.asarray(starts, dtype=np.intp))

    @classmethod
    def square(cls, lo: float, hi: float, obstacles: Sequence = ()) -> "Workspace":
        return cls((lo, lo, hi, hi), tuple(obstacles))

    @property
    def width(self) -> float:
        return self.bounds[2] - self.bounds[0]

    @property
    def height(self) -> float:
        return self.bounds[3] - self.bounds[1]

    @property
    def area(self) -> float:
        return self.width * self.height

    def sample_uniform(self, rng: np.random.Generator, size: int | tuple = ()) -> NDArray[np.float64]:
        """Uniform points over the bounds; trailing axis holds (x, y)."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        lo = np.array(self.bounds[:2])
        hi = np.array(self.bounds[2:])
        return lo + rng.random(shape + (2,)) * (hi - lo)


@dataclass(frozen=True)
class DiskRobot:
    radius: float
    start: Point2
    goal: Point2

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"robot radius must be positive, got {self.radius}")
        object.__setattr__(self, "start", tuple(as_point(self.start).tolist()))
        object.__setattr__(self, "goal", tuple(as_point(self.goal).tolist()))


def points_free(pts: ArrayLike, radius: float, w: Workspace) -> NDArray[np.bool_]:
    """Vectorized :func:`point_free` over an ``(m, 2)`` array of centres."""
    p = np.asarray(pts, dtype=float).reshape(-1, 2)
    xmin, ymin, xmax, ymax = w.bounds
    x, y = p[:, 0], p[:, 1]
    ok = (x - radius >= xmin) & (x + radius <= xmax) & (y - radius >= ymin) & (y + radius <= ymax)
    if not w.obstacles or not ok.any():
        return ok
    a, d, l2 = w._edge_a, w._edge_d, w._edge_len2
    rel = p[:, None, :] - a[None, :, :]  # (m, E, 2)
    t = np.clip(np.einsum("mek,ek->me", rel, d) / l2, 0.0, 1.0)
    diff = rel - t[..., None] * d
    dist2 = np.einsum("mek,mek->me", diff, diff)
    clear = dist2.min(axis=1) >= radius * radius
    # even-odd ray crossing, parity counted per polygon
    ay, by = a[:, 1], a[:, 1] + d[:, 1]
    straddle = (ay[None, :] > y[:, None]) != (by[None, :] > y[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = a[None, :, 0] + (y[:, None] - ay[None, :]) * d[None, :, 0] / d[None, :, 1]
    crossing = straddle & (x[:, None] < xcross)
    parity = np.add.reduceat(crossing.astype(np.int64), w._poly_start, axis=1) & 1
    inside = parity.any(axis=1)
    return ok & clear & ~inside


def point_free(q: ArrayLike, radius: float, w: Workspace) -> bool:
    """True iff the closed disk at ``q`` is inside the bounds and clear of obstacles."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    return bool(points_free(as_point(q)[None, :], radius, w)[0])


def dyadic_intervals(length: float, step: float) -> int:
    """Smallest power of two ``K`` with ``length / K <= step``."""
    if step <= 0:
        raise ValueError("step must be positive")
    if length <= step:
        return 1
    return 1 << math.ceil(math.log2(length / step))


def segment_free(a: ArrayLike, b: ArrayLike, radius: float, w: Workspace, step: float = 0.05) -> bool:
    """Discretized check of a straight disk motion from ``a`` to ``b``; both ends included."""
    if step <= 0:
        raise ValueError("step must be positive")
    pa, pb = as_point(a), as_point(b)
    k = dyadic_intervals(float(np.hypot(*(pb - pa))), step)
    ts = np.arange(k + 1) / k
    pts = pa + ts[:, None] * (pb - pa)
    return bool(points_free(pts, radius, w).all())


def segments_free(a: ArrayLike, b: ArrayLike, radius: float, w: Workspace,
                  step: float = 0.05) -> NDArray[np.bool_]:
    """Vectorized :func:`segment_free` over rows of ``(M, 2)`` endpoint arrays."""
    pa = np.asarray(a, dtype=float).reshape(-1, 2)
    pb = np.asarray(b, dtype=float).reshape(-1, 2)
    out = np.ones(len(pa), dtype=bool)
    if len(pa) == 0:
        return out
    d = pb - pa
    lengths = np.hypot(d[:, 0], d[:, 1])
    ks = np.array([dyadic_intervals(x, step) for x in lengths.tolist()])
    for k in np.unique(ks).tolist():
        idx = np.flatnonzero(ks == k)
        ts = np.arange(k + 1) / k
        pts = pa[idx, None] + ts[None, :, None] * d[idx, None]
        out[idx] = points_free(pts.reshape(-1, 2), radius, w).reshape(len(idx), -1).all(axis=1)
    return out


def disks_collide(q1: ArrayLike, r1: float, q2: ArrayLike, r2: float) -> bool:
    """Strict overlap test; touching disks do not collide."""
    if r1 <= 0 or r2 <= 0:
        raise ValueError("radii must be positive")
    dx = float(q1[0]) - float(q2[0])
    dy = float(q1[1]) - float(q2[1])
    s = r1 + r2
    return dx * dx + dy * dy < s * s


def segment_distance(p: ArrayLike, a: ArrayLike, b: ArrayLike) -> float:
    """Euclidean distance from point ``p`` to the closed segment ``ab``."""
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    d = b - a
    l2 = float(d @ d)
    t = 0.0 if l2 == 0 else min(1.0, max(0.0, float((p - a) @ d) / l2))
    return float(np.hypot(*(p - a - t * d)))
