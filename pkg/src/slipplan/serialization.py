"""File formats: plans as versioned JSON, environments/scenarios as YAML.

JSON keeps floats at full precision (Python emits shortest round-trip
representations), so a saved plan reloads bit-identical and re-validation
reproduces the original constraint residuals exactly. The YAML schema for
environments is a list of surfaces with position, normal, mu and cost; a
scenario file stores the ScenarioSpec fields.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import yaml

from .config import PlannerConfig, DesiredPath
from .env import Environment, Surface, CandidateSet, _make_candidate
from .planner import Plan
from .scenarios import ScenarioSpec

PLAN_FORMAT_VERSION = 1


class FormatError(ValueError):
    """Unreadable or schema-violating plan/environment/scenario file."""


# --------------------------------------------------------------------------
# plans


def plan_to_dict(plan: Plan) -> dict:
    phases = []
    if plan.converged:
        from .phases import assign_phases
        phases = [{"side": ph.side.value, "surface_id": ph.surface_id,
                   "foothold": ph.foothold.tolist(),
                   "start_index": ph.start_index, "end_index": ph.end_index,
                   "mean_force_dir": ph.mean_force_dir.tolist()}
                  for ph in assign_phases(plan)]
    return {
        "format_version": PLAN_FORMAT_VERSION,
        "units": {"length": "m", "time": "s", "acceleration": "m/s^2"},
        "config": plan.config.to_dict(),
        "path": {
            "s_star": plan.path.s_star.tolist(),
            "v_star": plan.path.v_star.tolist(),
            "s0": plan.path.s0.tolist(),
            "v0": plan.path.v0.tolist(),
        },
        "com": plan.com.tolist(),
        "com_vel": plan.com_vel.tolist(),
        "s_tilde": plan.s_tilde.tolist(),
        "alpha": [a.tolist() for a in plan.alpha],
        "candidate_surface_ids": [[c.surface_id for c in step]
                                  for step in plan.candidates.steps],
        "active_contacts": [
            [{"surface_id": sid, "accel": acc.tolist(), "alpha": a}
             for sid, acc, a in step]
            for step in plan.active_contacts
        ],
        "phases": phases,
        "iterations_used": plan.iterations_used,
        "converged": plan.converged,
        "solve_time": plan.solve_time,
        "qp_iterations": list(plan.qp_iterations),
        "alpha_zero_tol": plan.alpha_zero_tol,
    }


def save_plan(plan: Plan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan_to_dict(plan), indent=2) + "\n")


def plan_from_dict(doc: dict, env: Environment) -> Plan:
    """Rebuild a Plan from its serialized form against the same environment.

    Candidate geometry (leg vectors, friction decomposition) is recomputed
    from the stored CoM approximation, which reproduces it exactly.
    """
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise FormatError("not a plan document (missing format_version)")
    if doc["format_version"] != PLAN_FORMAT_VERSION:
        raise FormatError(f"unsupported plan format_version {doc['format_version']}")
    try:
        config = PlannerConfig.from_dict(doc["config"])
        p = doc["path"]
        path = DesiredPath(s_star=np.array(p["s_star"]), v_star=np.array(p["v_star"]),
                           s0=np.array(p["s0"]), v0=np.array(p["v0"]))
        s_tilde = np.array(doc["s_tilde"], dtype=float)
        steps = []
        for i, sids in enumerate(doc["candidate_surface_ids"]):
            cands = []
            for sid in sids:
                c = _make_candidate(i, env.surface(sid), s_tilde[i])
                if c is None:
                    raise FormatError(
                        f"stored candidate {sid} at step {i} is not feasible "
                        "against this environment")
                cands.append(c)
            steps.append(cands)
        candidates = CandidateSet(steps=steps)
        alpha = [np.array(a, dtype=float) for a in doc["alpha"]]
        accel = [np.array([a * c.leg_dir for a, c in zip(alpha[i], steps[i])])
                 if len(alpha[i]) else np.zeros((0, 3))
                 for i in range(len(steps))]
        active = [[(e["surface_id"], np.array(e["accel"], dtype=float), e["alpha"])
                   for e in step] for step in doc["active_contacts"]]
        return Plan(
            alpha=alpha, accel=accel,
            com=np.array(doc["com"], dtype=float),
            com_vel=np.array(doc["com_vel"], dtype=float),
            active_contacts=active,
            iterations_used=doc["iterations_used"],
            converged=doc["converged"],
            candidates=candidates, path=path, config=config, s_tilde=s_tilde,
            solve_time=doc.get("solve_time", 0.0),
            qp_iterations=list(doc.get("qp_iterations", [])),
            alpha_zero_tol=doc.get("alpha_zero_tol", 0.0),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"malformed plan document: {exc}") from exc


def load_plan(path: str | Path, env: Environment) -> Plan:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    return plan_from_dict(doc, env)


# --------------------------------------------------------------------------
# environments


def environment_to_dict(env: Environment) -> dict:
    return {"surfaces": [
        {"id": s.id, "position": s.position.tolist(), "normal": s.normal.tolist(),
         "mu": s.mu, "cost": s.cost}
        for s in env.surfaces]}


def save_environment(env: Environment, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(environment_to_dict(env), sort_keys=False))


def environment_from_dict(doc: dict) -> Environment:
    if not isinstance(doc, dict) or "surfaces" not in doc:
        raise FormatError("environment document needs a 'surfaces' list")
    surfaces = []
    for i, s in enumerate(doc["surfaces"]):
        try:
            surfaces.append(Surface(id=int(s["id"]),
                                    position=np.array(s["position"], dtype=float),
                                    normal=np.array(s["normal"], dtype=float),
                                    mu=float(s["mu"]), cost=float(s["cost"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"surface entry {i}: {exc}") from exc
    return Environment(surfaces)


def load_environment(path: str | Path) -> Environment:
    return environment_from_dict(_load_yaml(path))


# --------------------------------------------------------------------------
# scenarios


def save_scenario(spec: ScenarioSpec, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(spec.to_dict(), sort_keys=False))


def load_scenario(path: str | Path) -> ScenarioSpec:
    doc = _load_yaml(path)
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: scenario file must be a mapping of fields")
    try:
        return ScenarioSpec.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _load_yaml(path: str | Path):
    try:
        return yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise FormatError(f"{path}: invalid YAML{where}: {exc}") from exc
