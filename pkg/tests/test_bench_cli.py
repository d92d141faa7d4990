import copy
import csv
import io
import json
import math

import pytest

from drrtstar.bench import (
    CSV_COLUMNS,
    BenchRecord,
    emit_csv,
    execute_runs,
    format_csv,
    records_from_outcome,
    run_benchmark,
    verify_small_instance,
)
from drrtstar.cli import EXIT_INPUT, EXIT_NO_SOLUTION, EXIT_OK, main
from drrtstar.planners import PlannerConfig
from drrtstar.roadmap import save_roadmap
from drrtstar.scenario import (
    ScenarioInvariantError,
    ScenarioParseError,
    build_roadmaps,
    dumps_scenario,
    generated_scenarios,
    load_scenario,
    resolve_scenario,
    scenario_from_dict,
    scenario_to_dict,
    shipped_scenario_path,
    shipped_scenarios,
)

SMALL = {
    "name": "small",
    "workspace": {"bounds": [0, 0, 6, 6], "obstacles": [[[2.5, 0], [3.5, 0], [3.5, 3.5], [2.5, 3.5]]]},
    "robots": [{"radius": 0.2, "start": [1, 1], "goal": [5, 1]},
               {"radius": 0.2, "start": [5, 1], "goal": [1, 1]}],
    "n": 25,
    "eta": 0.3,
    "seeds": [0, 1],
    "planners": [{"mode": "drrt_star", "iteration_limit": 300}, {"mode": "drrt", "iteration_limit": 300},
                 {"mode": "implicit_astar", "iteration_limit": 2000}],
}


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def problems_of(doc):
    with pytest.raises((ScenarioParseError, ScenarioInvariantError)) as e:
        scenario_from_dict(doc)
    return e.value


class TestScenarioLoading:
    def test_valid(self):
        s = scenario_from_dict(SMALL)
        assert s.R == 2 and s.n == 25 and len(s.planners) == 3 and s.roadmaps == {"kind": "prm_star"}

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"name": "x",\n  "n": }')
        with pytest.raises(ScenarioParseError) as e:
            load_scenario(p)
        assert e.value.kind == "parse" and e.value.problems[0][0] == "<line 2 col 8>"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_scenario(tmp_path / "nope.json")

    def test_all_problems_reported_with_paths(self):
        doc = copy.deepcopy(SMALL)
        doc["n"] = "many"
        doc["robots"][1]["radius"] = -1
        doc["planners"][0]["mode"] = "teleport"
        doc["extra"] = 1
        del doc["eta"]
        err = problems_of(doc)
        fields = {f for f, _ in err.problems}
        assert err.kind == "parse"
        assert {"n", "robots[1].radius", "planners[0].mode", "extra", "eta"} <= fields

    def test_nested_paths(self):
        doc = copy.deepcopy(SMALL)
        doc["workspace"]["obstacles"][0][2] = [3.5, "x"]
        doc["robots"][0]["start"] = [1]
        fields = {f for f, _ in problems_of(doc).problems}
        assert fields == {"workspace.obstacles[0][2][1]", "robots[0].start"}

    def test_shared_start_is_invariant_error(self):
        doc = copy.deepcopy(SMALL)
        doc["robots"][1]["start"] = [1.1, 1.0]
        err = problems_of(doc)
        assert err.kind == "invariant" and err.problems == [("robots[1].start", "collides with robots[0].start")]

    def test_endpoint_in_obstacle(self):
        doc = copy.deepcopy(SMALL)
        doc["robots"][0]["goal"] = [3.0, 2.0]
        err = problems_of(doc)
        assert err.kind == "invariant" and err.problems[0][0] == "robots[0].goal"

    def test_single_robot_rejected(self):
        doc = copy.deepcopy(SMALL)
        doc["robots"] = doc["robots"][:1]
        assert problems_of(doc).problems[0][0] == "robots"

    def test_round_trip(self, tmp_path):
        s = scenario_from_dict(SMALL)
        again = scenario_from_dict(scenario_to_dict(s))
        assert dumps_scenario(again) == dumps_scenario(s)
        p = tmp_path / "r.json"
        p.write_text(dumps_scenario(s))
        assert dumps_scenario(load_scenario(p)) == dumps_scenario(s)

    def test_shipped_files_match_generators(self):
        gen = generated_scenarios()
        assert sorted(gen) == shipped_scenarios()
        for name, s in gen.items():
            assert shipped_scenario_path(name).read_text() == dumps_scenario(s)
            assert dumps_scenario(resolve_scenario(name)) == dumps_scenario(s)

    def test_roadmap_files(self, tmp_path):
        s = scenario_from_dict(SMALL)
        for i, g in enumerate(build_roadmaps(s, 0)):
            save_roadmap(g, tmp_path / f"robot_{i}.json")
        doc = copy.deepcopy(SMALL)
        doc["roadmaps"] = {"kind": "files", "paths": ["robot_0.json", "robot_1.json"]}
        loaded = load_scenario(write(tmp_path, doc))
        assert [g.n for g in build_roadmaps(loaded, 5)] == [25, 25]
        doc["roadmaps"]["paths"] = ["robot_1.json", "robot_0.json"]
        with pytest.raises(ScenarioInvariantError):
            build_roadmaps(load_scenario(write(tmp_path, doc)), 0)
        doc["roadmaps"]["paths"] = ["robot_0.json"]
        assert problems_of(doc).problems[0][0] == "roadmaps.paths"


@pytest.fixture(scope="module")
def small_outcomes():
    return execute_runs(scenario_from_dict(SMALL))


class TestBenchmark:
    def test_outcomes(self, small_outcomes):
        assert len(small_outcomes) == 6
        assert all(o.error is None and o.path_audit for o in small_outcomes)

    def test_normalized_cost_at_least_one(self, small_outcomes):
        # the normalizer ignores the other robots, so it bounds every tensor-roadmap path from below
        for o in small_outcomes:
            for r in records_from_outcome(o):
                if r.success:
                    assert r.normalized_cost >= 1 - 1e-9
                    assert r.normalized_cost == pytest.approx(r.best_cost / o.normalizer)

    def test_record_grid(self, small_outcomes):
        o = next(o for o in small_outcomes if o.planner == "drrt_star")
        its = [r.iteration for r in records_from_outcome(o)]
        assert {1, 2, 5, 10, 20, 50, 100, 200, 300} <= set(its) and its == sorted(its)
        costs = [r.best_cost for r in records_from_outcome(o)]
        assert all(b <= a for a, b in zip(costs, costs[1:]))

    def test_failed_roadmap_becomes_rows(self):
        doc = copy.deepcopy(SMALL)
        doc["n"] = 2  # start and goal only: no feasible edge through the wall
        recs = run_benchmark(scenario_from_dict(doc), seeds=[0])
        assert recs and all(not r.success and math.isinf(r.best_cost) for r in recs)

    def test_csv_header_only(self):
        assert format_csv([]) == ",".join(CSV_COLUMNS) + "\n"

    def test_csv_format(self):
        rec = BenchRecord("s", "drrt_star", 3, 2, 50, 10, 1.5, 12.25, True, 1.0625)
        bad = BenchRecord("s", "drrt", 3, 2, 50, 1, 0.5, math.inf, False, math.inf)
        text = format_csv([rec, bad])
        lines = text.split("\n")
        assert lines[1] == "s,drrt,3,2,50,1,0.5,,false,"
        assert lines[2] == "s,drrt_star,3,2,50,10,1.5,12.25,true,1.0625"
        assert "\r" not in text and text.endswith("\n")
        rows = list(csv.DictReader(io.StringIO(text)))
        assert [r["planner"] for r in rows] == ["drrt", "drrt_star"]

    def test_emit_byte_identical_cost_columns(self, tmp_path):
        s = scenario_from_dict(SMALL)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(run_benchmark(s), a)
        emit_csv(run_benchmark(s), b)

        def costs(p):
            return [(r["planner"], r["seed"], r["iteration"], r["best_cost"], r["success"], r["normalized_cost"])
                    for r in csv.DictReader(p.open())]

        assert costs(a) == costs(b)
        assert not list(tmp_path.glob("*.tmp"))

    def test_emit_failure_leaves_no_file(self, tmp_path):
        with pytest.raises(OSError):
            emit_csv([], tmp_path / "missing_dir" / "x.csv")
        assert not (tmp_path / "missing_dir").exists()


class TestVerify:
    def test_minimal_nine(self):
        rep = verify_small_instance(resolve_scenario("minimal_nine"), runs=10, budgets=(1000, 10_000))
        assert rep.num_vertices == 81
        assert rep.astar_cost == pytest.approx(rep.explicit_cost, abs=1e-9)
        assert rep.attained[10_000] >= rep.attained[1000] and rep.passed
        json.dumps(rep.to_dict())

    def test_infeasible(self):
        doc = copy.deepcopy(SMALL)
        doc["n"] = 2
        doc["planners"] = [{"mode": "drrt_star", "iteration_limit": 200}]
        rep = verify_small_instance(scenario_from_dict(doc), runs=3, budgets=(50, 200))
        assert math.isinf(rep.explicit_cost) and rep.astar_status == "infeasible"
        assert rep.drrt_star_failures == 3 and rep.passed
        assert rep.to_dict()["explicit_cost"] is None


class TestCli:
    def test_plan(self, capsys):
        assert main(["plan", "minimal_nine", "--iterations", "2000"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("planner drrt_star seed 0 status solved") and "cost " in out
        assert main(["plan", "minimal_nine", "--iterations", "2000"]) == EXIT_OK
        assert capsys.readouterr().out == out

    def test_plan_json_output(self, tmp_path, capsys):
        o = tmp_path / "p.json"
        assert main(["plan", "minimal_nine", "--planner", "implicit_astar", "-o", str(o)]) == EXIT_OK
        doc = json.loads(o.read_text())
        assert doc["planner"] == "implicit_astar" and doc["path"][0] == [0, 0] and doc["path"][-1] == [1, 1]

    def test_plan_no_solution(self, tmp_path, capsys):
        doc = copy.deepcopy(SMALL)
        doc["n"] = 2
        assert main(["plan", str(write(tmp_path, doc)), "--iterations", "50"]) == EXIT_NO_SOLUTION
        assert "no solution" in capsys.readouterr().out

    def test_build(self, tmp_path, capsys):
        assert main(["build", str(write(tmp_path, SMALL)), "-o", str(tmp_path / "rm")]) == EXIT_OK
        assert sorted(p.name for p in (tmp_path / "rm").iterdir()) == ["robot_0.json", "robot_1.json"]

    def test_bench(self, tmp_path, capsys):
        out = tmp_path / "b.csv"
        code = main(["bench", str(write(tmp_path, SMALL)), "--seed", "1", "--iterations", "100", "-o", str(out)])
        assert code == EXIT_OK
        rows = list(csv.DictReader(out.open()))
        assert {r["planner"] for r in rows} == {"drrt_star", "drrt", "implicit_astar"}
        assert {r["seed"] for r in rows} == {"1"}

    def test_verify(self, capsys):
        code = main(["verify", "minimal_nine", "--runs", "5", "--budgets", "1000", "5000"])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["passed"] is True

    def test_verify_refuses_large_graph(self, capsys):
        assert main(["verify", "two_disks_swap", "--max-vertices", "1000"]) == EXIT_INPUT
        diag = json.loads(capsys.readouterr().err)
        assert diag["error"] == "graph_too_large" and diag["size"] == 2500

    def test_input_errors(self, tmp_path, capsys):
        missing = tmp_path / "none.json"
        assert main(["bench", str(missing), "-o", str(tmp_path / "x.csv")]) == EXIT_INPUT
        assert json.loads(capsys.readouterr().err)["error"] == "file_not_found"
        assert not (tmp_path / "x.csv").exists()
        doc = copy.deepcopy(SMALL)
        doc["robots"][1]["start"] = [1, 1]
        assert main(["plan", str(write(tmp_path, doc))]) == EXIT_INPUT
        diag = json.loads(capsys.readouterr().err)
        assert diag["kind"] == "invariant" and diag["problems"][0]["field"] == "robots[1].start"

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["fly", "minimal_nine"])
        assert e.value.code == 2
