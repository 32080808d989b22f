"""Reweighting-loop and post-hoc validation tests."""

import warnings

import numpy as np
import pytest

import slipplan as sp
from slipplan.config import GRAVITY, PlannerConfig, DesiredPath
from slipplan.env import Environment, Surface
from slipplan.kinematics import build_P, integrate
from slipplan.planner import Infeasible, plan, validate


def hover_setup(n_rw=0):
    env = Environment([Surface(id=0, position=np.zeros(3),
                               normal=np.array([0, 0, 1.0]), mu=0.7, cost=1.0)])
    config = PlannerConfig(n_steps=1, dt=0.15, k_nearest=1, n_rw=n_rw)
    s = np.array([[0.0, 0.0, 1.0]])
    path = DesiredPath(s_star=s, v_star=np.zeros((1, 3)), s0=s[0])
    return env, path, config


class TestPlanLoop:
    def test_hover_converges_at_iteration_zero(self):
        env, path, config = hover_setup(n_rw=0)
        p = plan(env, path, config)
        assert p.converged
        assert p.iterations_used == 1
        assert p.cardinality().tolist() == [1]

    def test_flat_ground_converges(self, flat_scenario, flat_plan):
        env, path, config = flat_scenario
        assert flat_plan.converged
        assert flat_plan.iterations_used <= config.n_rw + 1
        assert np.max(flat_plan.cardinality()) <= 2

    def test_com_is_exact_integration(self, flat_plan):
        config = flat_plan.config
        P = build_P(config.n_steps, config.dt)
        ref = integrate(P, flat_plan.total_accel(), GRAVITY,
                        flat_plan.path.s0, flat_plan.path.v0)
        np.testing.assert_allclose(flat_plan.com, ref, atol=1e-12)

    def test_force_parallel_to_leg(self, flat_plan):
        # by construction each contact acceleration is alpha * leg vector
        for i, step in enumerate(flat_plan.candidates.steps):
            for k, c in enumerate(step):
                a = flat_plan.accel[i][k]
                if np.linalg.norm(a) > 1e-9:
                    cross = np.cross(a, c.leg_dir)
                    angle = np.linalg.norm(cross) / (
                        np.linalg.norm(a) * np.linalg.norm(c.leg_dir))
                    assert angle < 1e-9

    def test_reproducible(self, flat_scenario, flat_plan):
        env, path, config = flat_scenario
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p2 = plan(env, path, config)
        np.testing.assert_array_equal(flat_plan.com, p2.com)
        for a1, a2 in zip(flat_plan.alpha, p2.alpha):
            np.testing.assert_array_equal(a1, a2)

    def test_dimension_mismatch(self):
        env, path, config = hover_setup()
        with pytest.raises(ValueError, match="steps"):
            plan(env, path, config.replace(n_steps=2))

    def test_infeasible_raises(self):
        env, path, config = hover_setup()
        # a_max far below gravity makes hovering impossible
        with pytest.raises(Infeasible):
            plan(env, path, config.replace(a_max=0.5, tol=1e-4))

    def test_final_cardinality_not_above_initial(self, flat_scenario):
        env, path, config = flat_scenario
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p0 = plan(env, path, config.replace(n_rw=0))
            p = plan(env, path, config)
        assert np.max(p.cardinality()) <= np.max(p0.cardinality())


class TestValidate:
    def test_flat_plan_clean(self, flat_scenario, flat_plan):
        env, _, config = flat_scenario
        rep = validate(flat_plan, env, config)
        assert rep.ok
        assert rep.max_kinematic_residual <= 1e-6
        assert rep.max_path_deviation <= config.tol + 1e-5
        assert rep.max_cardinality <= 2

    def test_linearization_angle_bound(self, flat_scenario, flat_plan):
        env, _, config = flat_scenario
        rep = validate(flat_plan, env, config)
        min_leg = min(c.leg_length for c in flat_plan.candidates.flat())
        bound = np.arctan(config.tol * np.sqrt(3.0) / min_leg)
        assert rep.max_linearization_angle <= bound

    def test_corrupted_accel_flagged(self, flat_scenario, flat_plan):
        import copy
        env, _, config = flat_scenario
        p = copy.deepcopy(flat_plan)
        # inject a sideways force that breaks the friction cone
        for i, contacts in enumerate(p.active_contacts):
            if contacts:
                sid, acc, a = contacts[0]
                p.active_contacts[i][0] = (sid, np.array([50.0, 0.0, 1.0]), a)
                break
        rep = validate(p, env, config)
        kinds = {v.kind for v in rep.violations}
        assert "friction" in kinds and "max_accel" in kinds

    def test_free_fall_exits_tol_box(self):
        env, path, config = hover_setup()
        config = config.replace(n_steps=4)
        n = 4
        t = config.dt * np.arange(1, n + 1)
        s = np.column_stack([np.zeros(n), np.zeros(n), np.ones(n)])
        path = DesiredPath(s_star=s, v_star=np.zeros((n, 3)), s0=s[0])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = plan(env, path, config)
        # zero all contacts: ballistic fall
        p.alpha = [np.zeros_like(a) for a in p.alpha]
        p.accel = [np.zeros_like(a) for a in p.accel]
        p.active_contacts = [[] for _ in range(n)]
        P = build_P(n, config.dt)
        p.com = integrate(P, np.zeros((n, 3)), GRAVITY, path.s0, path.v0)
        rep = validate(p, env, config)
        assert rep.max_kinematic_residual <= 1e-6
        assert any(v.kind == "path_tolerance" for v in rep.violations)
        assert not any(v.kind == "friction" for v in rep.violations)
