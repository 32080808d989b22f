"""Round-trip and schema-error tests for plan/environment/scenario files."""

import json

import numpy as np
import pytest

import slipplan as sp
from slipplan.serialization import (FormatError, PLAN_FORMAT_VERSION,
                                    plan_to_dict)


class TestPlanRoundTrip:
    def test_bit_identical_arrays(self, flat_scenario, flat_plan, tmp_path):
        env, _, _ = flat_scenario
        f = tmp_path / "plan.json"
        sp.save_plan(flat_plan, f)
        again = sp.load_plan(f, env)
        np.testing.assert_array_equal(again.com, flat_plan.com)
        np.testing.assert_array_equal(again.com_vel, flat_plan.com_vel)
        np.testing.assert_array_equal(again.s_tilde, flat_plan.s_tilde)
        for a, b in zip(again.alpha, flat_plan.alpha):
            np.testing.assert_array_equal(a, b)
        assert again.config == flat_plan.config
        assert again.converged == flat_plan.converged
        assert again.iterations_used == flat_plan.iterations_used

    def test_candidates_rebuilt_exactly(self, flat_scenario, flat_plan, tmp_path):
        env, _, _ = flat_scenario
        f = tmp_path / "plan.json"
        sp.save_plan(flat_plan, f)
        again = sp.load_plan(f, env)
        for s1, s2 in zip(flat_plan.candidates.steps, again.candidates.steps):
            assert [c.surface_id for c in s1] == [c.surface_id for c in s2]
            for c1, c2 in zip(s1, s2):
                np.testing.assert_array_equal(c1.leg_dir, c2.leg_dir)

    def test_revalidation_matches(self, flat_scenario, flat_plan, tmp_path):
        env, _, config = flat_scenario
        f = tmp_path / "plan.json"
        sp.save_plan(flat_plan, f)
        again = sp.load_plan(f, env)
        r1 = sp.validate(flat_plan, env, config)
        r2 = sp.validate(again, env, config)
        assert r1.max_kinematic_residual == r2.max_kinematic_residual
        assert r1.max_path_deviation == r2.max_path_deviation
        assert len(r1.violations) == len(r2.violations)

    def test_phases_stored_for_converged(self, flat_plan):
        doc = plan_to_dict(flat_plan)
        assert doc["format_version"] == PLAN_FORMAT_VERSION
        assert doc["phases"], "converged plans must carry phase annotations"
        sides = {p["side"] for p in doc["phases"]}
        assert sides <= {"left", "right"}


class TestPlanErrors:
    def test_invalid_json(self, flat_scenario, tmp_path):
        env, _, _ = flat_scenario
        f = tmp_path / "broken.json"
        f.write_text("{not json")
        with pytest.raises(FormatError, match="line"):
            sp.load_plan(f, env)

    def test_missing_version(self, flat_scenario, tmp_path):
        env, _, _ = flat_scenario
        f = tmp_path / "plan.json"
        f.write_text(json.dumps({"com": []}))
        with pytest.raises(FormatError, match="format_version"):
            sp.load_plan(f, env)

    def test_future_version_rejected(self, flat_scenario, flat_plan, tmp_path):
        env, _, _ = flat_scenario
        doc = plan_to_dict(flat_plan)
        doc["format_version"] = PLAN_FORMAT_VERSION + 1
        f = tmp_path / "plan.json"
        f.write_text(json.dumps(doc))
        with pytest.raises(FormatError, match="format_version"):
            sp.load_plan(f, env)

    def test_missing_field(self, flat_scenario, flat_plan, tmp_path):
        env, _, _ = flat_scenario
        doc = plan_to_dict(flat_plan)
        del doc["alpha"]
        f = tmp_path / "plan.json"
        f.write_text(json.dumps(doc))
        with pytest.raises(FormatError, match="malformed"):
            sp.load_plan(f, env)

    def test_wrong_environment_rejected(self, flat_plan, tmp_path):
        # an environment whose surfaces sit out of reach cannot host the
        # stored candidates
        from slipplan.env import Environment, Surface
        n_ids = 1 + max(sid for step in flat_plan.candidates.steps
                        for sid in [c.surface_id for c in step])
        other = Environment([
            Surface(id=i, position=np.array([100.0 + i, 0.0, 0.0]),
                    normal=np.array([0.0, 0.0, 1.0]), mu=0.7, cost=1.0)
            for i in range(n_ids)])
        f = tmp_path / "plan.json"
        sp.save_plan(flat_plan, f)
        with pytest.raises(FormatError):
            sp.load_plan(f, other)


class TestEnvironmentFiles:
    def test_round_trip(self, flat_scenario, tmp_path):
        env, _, _ = flat_scenario
        f = tmp_path / "env.yaml"
        sp.save_environment(env, f)
        again = sp.load_environment(f)
        assert len(again.surfaces) == len(env.surfaces)
        for a, b in zip(again.surfaces, env.surfaces):
            assert a.id == b.id
            np.testing.assert_array_equal(a.position, b.position)
            np.testing.assert_array_equal(a.normal, b.normal)
            assert a.mu == b.mu and a.cost == b.cost

    def test_missing_surfaces_key(self, tmp_path):
        f = tmp_path / "env.yaml"
        f.write_text("points: []\n")
        with pytest.raises(FormatError, match="surfaces"):
            sp.load_environment(f)

    def test_bad_surface_entry(self, tmp_path):
        f = tmp_path / "env.yaml"
        f.write_text("surfaces:\n- id: 0\n  position: [0, 0, 0]\n")
        with pytest.raises(FormatError, match="entry 0"):
            sp.load_environment(f)

    def test_invalid_yaml_reports_location(self, tmp_path):
        f = tmp_path / "env.yaml"
        f.write_text("surfaces: [\n  {id: 0\n")
        with pytest.raises(FormatError, match="line"):
            sp.load_environment(f)


class TestScenarioFiles:
    def test_round_trip(self, tmp_path):
        spec = sp.builtin("chasm", seed=11)
        f = tmp_path / "scenario.yaml"
        sp.save_scenario(spec, f)
        assert sp.load_scenario(f) == spec

    def test_bad_field_rejected(self, tmp_path):
        f = tmp_path / "scenario.yaml"
        f.write_text("kind: flat_ground\nhorizon: 1.5\nwarp_factor: 9\n")
        with pytest.raises(FormatError):
            sp.load_scenario(f)

    def test_non_mapping_rejected(self, tmp_path):
        f = tmp_path / "scenario.yaml"
        f.write_text("- 1\n- 2\n")
        with pytest.raises(FormatError, match="mapping"):
            sp.load_scenario(f)
