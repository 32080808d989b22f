"""Shared fixtures: cached planning runs reused across test modules."""

import warnings

import pytest

import slipplan as sp


@pytest.fixture(scope="session")
def flat_scenario():
    spec = sp.builtin("flat_ground", seed=0)
    env, path, _ = sp.generate(spec)
    config = sp.make_config(spec)
    return env, path, config


@pytest.fixture(scope="session")
def flat_plan(flat_scenario):
    env, path, config = flat_scenario
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return sp.plan(env, path, config)


@pytest.fixture(scope="session")
def chasm_plan():
    spec = sp.builtin("chasm", seed=0)
    env, path, _ = sp.generate(spec)
    config = sp.make_config(spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return sp.plan(env, path, config), env, config
