"""End-to-end CLI tests driven through main()."""

import json

import pytest

from slipplan.cli import (EXIT_INVALID_PLAN, EXIT_NOT_CONVERGED, EXIT_OK,
                          EXIT_USAGE, main)


@pytest.fixture(scope="module")
def plan_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_plan")
    code = main(["plan", "flat_ground", "--seed", "0", "-o", str(out)])
    assert code == EXIT_OK
    return out


class TestPlanCommand:
    def test_artifacts_written(self, plan_dir):
        for name in ("plan.json", "environment.yaml", "scenario.yaml",
                     "com.csv", "feet.csv", "plan.svg"):
            assert (plan_dir / name).exists(), name

    def test_plan_json_well_formed(self, plan_dir):
        doc = json.loads((plan_dir / "plan.json").read_text())
        assert doc["converged"] is True
        assert doc["format_version"] == 1
        assert len(doc["com"]) == doc["config"]["n_steps"]

    def test_com_csv_rows(self, plan_dir):
        lines = (plan_dir / "com.csv").read_text().strip().splitlines()
        assert lines[0].startswith("t,x,y,z")
        assert len(lines) == 1 + 10

    def test_no_figure_flag(self, tmp_path):
        out = tmp_path / "nofig"
        code = main(["plan", "flat_ground", "--no-figure", "-o", str(out)])
        assert code == EXIT_OK
        assert not (out / "plan.svg").exists()

    def test_unknown_scenario_usage_error(self, tmp_path, capsys):
        code = main(["plan", "volcano", "-o", str(tmp_path)])
        assert code == EXIT_USAGE
        assert "flat_ground" in capsys.readouterr().err

    def test_infeasible_exit_code(self, tmp_path, capsys):
        # support force far below gravity: no plan can hold the path box
        code = main(["plan", "flat_ground", "--a-max", "0.5",
                     "-o", str(tmp_path / "x")])
        assert code == EXIT_NOT_CONVERGED
        assert "diagnostics" in capsys.readouterr().err

    def test_scenario_file_input(self, tmp_path):
        out1 = tmp_path / "spec"
        assert main(["scenario", "flat_ground", "--seed", "2",
                     "-o", str(out1)]) == EXIT_OK
        out2 = tmp_path / "run"
        code = main(["plan", str(out1 / "flat_ground.yaml"), "--no-figure",
                     "-o", str(out2)])
        assert code == EXIT_OK


class TestValidateCommand:
    def test_round_trip_ok(self, plan_dir, capsys):
        code = main(["validate", str(plan_dir / "plan.json"),
                     "flat_ground", "--seed", "0"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "violations: 0" in out

    def test_env_file_mode(self, plan_dir):
        code = main(["validate", str(plan_dir / "plan.json"),
                     str(plan_dir / "environment.yaml"), "--env-file"])
        assert code == EXIT_OK

    def test_corrupted_plan_flagged(self, plan_dir, tmp_path):
        doc = json.loads((plan_dir / "plan.json").read_text())
        # triple every contact force: breaks kinematic consistency
        for step in doc["active_contacts"]:
            for e in step:
                e["accel"] = [3.0 * v for v in e["accel"]]
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code = main(["validate", str(bad),
                     str(plan_dir / "environment.yaml"), "--env-file"])
        assert code == EXIT_INVALID_PLAN

    def test_unreadable_plan_usage_error(self, plan_dir, tmp_path, capsys):
        bad = tmp_path / "junk.json"
        bad.write_text("{oops")
        code = main(["validate", str(bad),
                     str(plan_dir / "environment.yaml"), "--env-file"])
        assert code == EXIT_USAGE
        assert "error" in capsys.readouterr().err


class TestScenarioCommand:
    def test_writes_spec_and_env(self, tmp_path):
        out = tmp_path / "scn"
        code = main(["scenario", "chasm", "--seed", "4", "--with-env",
                     "-o", str(out)])
        assert code == EXIT_OK
        assert (out / "chasm.yaml").exists()
        assert (out / "chasm_environment.yaml").exists()

    def test_unknown_name(self, tmp_path, capsys):
        code = main(["scenario", "mars", "-o", str(tmp_path)])
        assert code == EXIT_USAGE


class TestBenchCommand:
    def test_small_matrix_with_report(self, tmp_path, capsys):
        report = tmp_path / "bench.json"
        code = main(["bench", "--envs", "flat_ground", "--horizons", "1.5",
                     "--k-values", "10", "--trials", "1",
                     "-o", str(report)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "flat_ground" in out
        doc = json.loads(report.read_text())
        assert doc["cells"][0]["environment"] == "flat_ground"
        assert doc["cells"][0]["convergence_rate"] == 1.0

    def test_unknown_env_rejected(self, capsys):
        code = main(["bench", "--envs", "mordor", "--trials", "1"])
        assert code == EXIT_USAGE
