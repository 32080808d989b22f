"""Scenario generator tests: determinism, geometry, spec validation."""

import numpy as np
import pytest

import slipplan as sp
from slipplan.scenarios import InvalidSpec, ScenarioKind, ScenarioSpec


class TestSpecValidation:
    def test_horizon_not_divisible(self):
        with pytest.raises(InvalidSpec, match="divisible"):
            ScenarioSpec(horizon=1.0, dt=0.15)

    def test_negative_speed(self):
        with pytest.raises(InvalidSpec):
            ScenarioSpec(speed=-0.1)

    def test_kind_from_string(self):
        spec = ScenarioSpec(kind="chasm", horizon=3.0)
        assert spec.kind is ScenarioKind.CHASM

    def test_round_trip_dict(self):
        spec = sp.builtin("staircase", seed=7)
        again = ScenarioSpec.from_dict(spec.to_dict())
        assert again == spec

    def test_unknown_builtin(self):
        with pytest.raises(InvalidSpec, match="flat_ground"):
            sp.builtin("lava_field")

    def test_builtin_override(self):
        spec = sp.builtin("flat_ground", horizon=3.0, seed=5)
        assert spec.horizon == 3.0 and spec.seed == 5


class TestGeneration:
    def test_deterministic_for_seed(self):
        a_env, a_path, _ = sp.generate(sp.builtin("step_stones", seed=3))
        b_env, b_path, _ = sp.generate(sp.builtin("step_stones", seed=3))
        assert len(a_env.surfaces) == len(b_env.surfaces)
        for s, t in zip(a_env.surfaces, b_env.surfaces):
            np.testing.assert_array_equal(s.position, t.position)
        np.testing.assert_array_equal(a_path.s_star, b_path.s_star)

    def test_seed_changes_jitter(self):
        a_env, _, _ = sp.generate(sp.builtin("flat_ground", seed=0))
        b_env, _, _ = sp.generate(sp.builtin("flat_ground", seed=1))
        pa = np.array([s.position for s in a_env.surfaces])
        pb = np.array([s.position for s in b_env.surfaces])
        assert np.abs(pa - pb).max() > 0

    def test_flat_ground_steps_and_heights(self):
        spec = sp.builtin("flat_ground")
        env, path, overrides = sp.generate(spec)
        assert overrides["n_steps"] == 10
        assert path.n_steps == 10
        assert all(s.position[2] == 0.0 for s in env.surfaces)
        # constant forward speed along x
        np.testing.assert_allclose(np.diff(path.s_star[:, 0]),
                                   spec.speed * spec.dt, atol=1e-12)

    def test_chasm_gap_is_empty(self):
        spec = sp.builtin("chasm", seed=0)
        env, _, _ = sp.generate(spec)
        center = 0.5 * spec.speed * spec.horizon
        lo = center - spec.gap_width / 2
        hi = center + spec.gap_width / 2
        xs = np.array([s.position[0] for s in env.surfaces])
        assert not np.any((xs > lo + spec.jitter) & (xs < hi - spec.jitter))

    def test_staircase_heights(self):
        spec = sp.builtin("staircase", seed=0)
        env, path, _ = sp.generate(spec)
        zs = sorted({float(s.position[2]) for s in env.surfaces})
        expect = [k * spec.stair_rise for k in range(spec.n_stairs + 1)]
        np.testing.assert_allclose(zs, expect, atol=1e-12)
        # the desired path climbs by the total rise and never exceeds it
        climb = path.s_star[-1, 2] - path.s0[2]
        assert 0 < climb <= spec.n_stairs * spec.stair_rise + 1e-9
        assert np.all(np.diff(path.s_star[:, 2]) >= -1e-12)

    def test_bent_path_turns(self):
        spec = sp.builtin("bent_path", seed=0)
        _, path, _ = sp.generate(spec)
        # before the bend the path follows +x; afterwards it gains y
        assert abs(path.s_star[0, 1]) < 1e-9
        assert path.s_star[-1, 1] > 0.1
        headings = path.v_star[:, :2]
        speeds = np.linalg.norm(headings, axis=1)
        np.testing.assert_allclose(speeds, spec.speed, atol=1e-9)

    def test_discrete_stones_sparse(self):
        spec = sp.builtin("discrete_step_stones", seed=0)
        env, _, _ = sp.generate(spec)
        # one surface per stone, spaced at least stone_spacing minus stagger
        pos = np.array([s.position for s in env.surfaces])
        d = np.diff(np.sort(pos[:, 0]))
        assert d.min() > 0.5 * spec.stone_spacing

    def test_path_within_terrain_reach(self):
        # every desired CoM position keeps some surface inside the default
        # candidate radius
        for name in sp.BUILTIN_SPECS:
            spec = sp.builtin(name, seed=0)
            env, path, _ = sp.generate(spec)
            pos = np.array([s.position for s in env.surfaces])
            for s_i in path.s_star:
                dmin = np.linalg.norm(pos - s_i, axis=1).min()
                assert dmin <= 1.5, name


class TestMakeConfig:
    def test_applies_overrides(self):
        spec = sp.builtin("staircase")
        cfg = sp.make_config(spec)
        assert cfg.n_steps == spec.n_steps
        assert cfg.dt == spec.dt
        assert cfg.k_nearest == 30

    def test_extra_kwargs_win(self):
        cfg = sp.make_config(sp.builtin("flat_ground"), tol=0.2, k_nearest=7)
        assert cfg.tol == 0.2 and cfg.k_nearest == 7
