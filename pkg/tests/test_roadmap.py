import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import radius_oracle
from drrtstar.geometry2d import DiskRobot, Polygon, Workspace, point_free, segment_free
from drrtstar.roadmap import (
    GOAL,
    START,
    InfeasibleEndpointError,
    SamplingError,
    build_prm_star,
    connection_radius,
    goal_distance_table,
    load_roadmap,
    nine_grid_roadmap,
    roadmap_from_points,
    roadmap_neighbors,
    roadmaps_equal,
    save_roadmap,
)


def bellman_ford(g) -> list[float]:
    dist = [math.inf] * g.n
    dist[GOAL] = 0.0
    edges = [(i, int(j), float(L)) for i in range(g.n) for j, L in zip(g.neighbors[i], g.lengths[i])]
    for _ in range(g.n):
        changed = False
        for i, j, L in edges:
            if dist[j] + L < dist[i]:
                dist[i] = dist[j] + L
                changed = True
        if not changed:
            break
    return dist


OBST = Workspace((-0.6, -0.6, 9.6, 9.6), (Polygon([(2, 2), (7, 2), (7, 3), (2, 3)]),
                                          Polygon([(3, 5), (5, 8), (1, 7)])))
ROBOT = DiskRobot(0.2, (0, 0), (9, 9))


class TestRadius:
    def test_reference_value(self):
        # frozen from radius_oracle: 2 * sqrt(1/2) * sqrt(ln 100 / 100)
        assert connection_radius(100, 2, 0.0) == pytest.approx(0.30348542587702926, rel=1e-12)
        assert connection_radius(100, 2, 1.0) == pytest.approx(0.6069708517540585, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 10, 50, 100, 1000, 10**4, 10**5, 10**6])
    @pytest.mark.parametrize("d", [2, 3, 4, 6, 12])
    @pytest.mark.parametrize("eta", [0.0, 0.1, 0.5, 1.0, 3.25])
    def test_high_precision_agreement(self, n, d, eta):
        got, want = connection_radius(n, d, eta), radius_oracle(n, d, eta)
        assert abs(got - want) <= 1e-12 * want

    @given(st.integers(3, 10**7), st.integers(2, 8), st.floats(0, 5))
    def test_strictly_decreasing(self, n, d, eta):
        assert connection_radius(n + 1, d, eta) < connection_radius(n, d, eta)

    def test_eta_scales_linearly(self):
        for n in (10, 500):
            assert connection_radius(n, 2, 1.0) == pytest.approx(2 * connection_radius(n, 2, 0.0), rel=1e-15)

    def test_rejects_bad_input(self):
        for args in ((1, 2, 0.1), (0, 2, 0.1), (10, 1, 0.1), (10, 2, -0.5)):
            with pytest.raises(ValueError):
                connection_radius(*args)


@pytest.fixture(scope="module")
def g():
    return build_prm_star(OBST, ROBOT, 50, 0.1, seed=7)


class TestPrmStar:
    def test_shape(self, g):
        assert g.n == 50 and len(g.vertices) == 50
        assert tuple(g.vertices[START]) == (0, 0) and tuple(g.vertices[GOAL]) == (9, 9)
        assert g.radius_used == pytest.approx(connection_radius(50, 2, 0.1) * OBST.width)

    def test_invariants(self, g):
        assert all(point_free(v, 0.2, OBST) for v in g.vertices)
        for i in range(g.n):
            for j, L in roadmap_neighbors(g, i):
                assert i in g.neighbors[j]
                assert L == pytest.approx(float(np.linalg.norm(g.vertices[i] - g.vertices[j])), abs=1e-9)
                assert L <= g.radius_used
                assert segment_free(g.vertices[i], g.vertices[j], 0.2, OBST)

    def test_every_admissible_pair_is_connected(self, g):
        for i in range(g.n):
            for j in range(i + 1, g.n):
                d = float(np.linalg.norm(g.vertices[i] - g.vertices[j]))
                should = d <= g.radius_used and segment_free(g.vertices[i], g.vertices[j], 0.2, OBST)
                assert should == (j in g.neighbors[i])

    def test_deterministic(self, g):
        again = build_prm_star(OBST, ROBOT, 50, 0.1, seed=7)
        assert np.array_equal(g.vertices, again.vertices) and roadmaps_equal(g, again)
        other = build_prm_star(OBST, ROBOT, 50, 0.1, seed=8)
        assert not np.array_equal(g.vertices, other.vertices)

    def test_two_vertex_roadmap(self):
        w = Workspace((0, 0, 10, 10))
        g = build_prm_star(w, DiskRobot(0.2, (1, 1), (4, 5)), 2, eta=5.0)
        assert g.num_edges == 1
        assert goal_distance_table(g)[START] == pytest.approx(5.0)

    def test_endpoint_in_collision(self):
        with pytest.raises(InfeasibleEndpointError):
            build_prm_star(OBST, DiskRobot(0.2, (4, 2.5), (9, 9)), 20)

    def test_sampling_cap(self):
        # a 0.2 disk fits only at exactly two points of this corridor-free box
        w = Workspace((0, 0, 1, 0.4), (Polygon([(0.4, 0.0), (0.6, 0.0), (0.6, 0.4), (0.4, 0.4)]),))
        with pytest.raises(SamplingError):
            build_prm_star(w, DiskRobot(0.2, (0.2, 0.2), (0.8, 0.2)), 10)

    def test_large_roadmap_memory(self):
        g = build_prm_star(Workspace((0, 0, 10, 10)), DiskRobot(0.2, (1, 1), (9, 9)), 5000, seed=1)
        assert g.n == 5000 and g.num_edges > 0


class TestGoalTable:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_bellman_ford(self, seed):
        g = build_prm_star(OBST, ROBOT, 50, 0.1, seed=seed)
        tab = goal_distance_table(g)
        assert list(tab.dist) == bellman_ford(g)
        assert tab[GOAL] == 0.0
        for i in range(g.n):
            for j, L in roadmap_neighbors(g, i):
                assert tab[i] <= L + tab[j] + 1e-12

    def test_disconnected_goal(self):
        w = Workspace((0, 0, 10, 10))
        g = roadmap_from_points(w, DiskRobot(0.2, (1, 1), (9, 9)), np.array([[1.5, 1.5]]), radius=1.0)
        tab = goal_distance_table(g)
        assert math.isinf(tab[START]) and tab[GOAL] == 0.0


class TestNeighbours:
    def test_isolated_and_triangle(self):
        w = Workspace((0, 0, 10, 10))
        g = roadmap_from_points(w, DiskRobot(0.2, (1, 1), (2, 1)), np.array([[1.5, 1.8], [8, 8]]), radius=1.5)
        assert roadmap_neighbors(g, 3) == []
        assert len(roadmap_neighbors(g, 2)) == 2
        with pytest.raises(IndexError):
            roadmap_neighbors(g, 4)


class TestNineGrid:
    def test_structure(self):
        w = Workspace((-1, -1, 3, 3))
        g = nine_grid_roadmap(w, DiskRobot(0.2, (0, 0), (2, 2)), seed=1)
        assert g.n == 9 and g.num_edges == 20
        assert tuple(g.vertices[START]) == (0, 0) and tuple(g.vertices[GOAL]) == (2, 2)
        base = np.array([[i, j] for i in range(3) for j in range(3) if (i, j) not in ((0, 0), (2, 2))])
        assert np.abs(g.vertices[2:] - base).max() <= 0.05


class TestSerialization:
    def test_round_trip(self, tmp_path):
        g = build_prm_star(OBST, ROBOT, 40, 0.2, seed=[3, 1], robot_index=1)
        path = tmp_path / "g.json"
        save_roadmap(g, path)
        h = load_roadmap(path)
        assert roadmaps_equal(g, h)
        assert h.radius_used == g.radius_used and h.eta == g.eta and h.robot_index == 1
        assert all(np.array_equal(a, b) for a, b in zip(g.lengths, h.lengths))
        doc = json.loads(path.read_text())
        assert set(doc) >= {"n", "eta", "seed", "radius_used", "vertices", "edges"}

    def test_rejects_foreign_file(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text('{"format": "something-else"}')
        with pytest.raises(ValueError):
            load_roadmap(p)
