"""Reweighting loop driving the QP to a cardinality-feasible footstep plan.

The first solve uses the desired path as the CoM approximation and carries
no reweighting term or cardinality constraint (the zero initialization of
the previous scale factors would otherwise pin everything to zero). Each
further iteration refines the CoM approximation with the previous solution,
re-selects candidates, reweights by the previous scale factors, and warm
starts the solver. The loop exits once every step has at most two active
contacts or the iteration budget runs out.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import GRAVITY, PlannerConfig, DesiredPath
from .env import Environment, CandidateSet, select_candidates
from .kinematics import build_P, integrate
from . import qp_core, qp_solver
from .qp_solver import SolveStatus, SolverSettings


# candidates kept per step in later reweighting iterations even when the
# previous iterate activated fewer
_PRUNE_RESERVE = 10


class Infeasible(RuntimeError):
    """The QP is primal-infeasible for the given terrain/path combination."""

    def __init__(self, detail: str):
        super().__init__(detail)


@dataclass
class Plan:
    """Result of a planning run (immutable once returned)."""

    alpha: list[np.ndarray]              # per-step scale factors
    accel: list[np.ndarray]              # per-step (n_k, 3) contact accelerations
    com: np.ndarray                      # (N, 3) CoM positions
    com_vel: np.ndarray                  # (N, 3) derived velocities
    active_contacts: list[list[tuple]]   # per step: (surface_id, accel, alpha)
    iterations_used: int
    converged: bool
    candidates: CandidateSet
    path: DesiredPath
    config: PlannerConfig
    s_tilde: np.ndarray                  # CoM approximation used in the final QP
    solve_time: float = 0.0              # total QP time, s
    qp_iterations: list[int] = field(default_factory=list)
    alpha_zero_tol: float = 0.0

    @property
    def n_steps(self) -> int:
        return self.com.shape[0]

    def total_accel(self) -> np.ndarray:
        out = np.zeros((self.n_steps, 3))
        for i, acc in enumerate(self.accel):
            if len(acc):
                out[i] = acc.sum(axis=0)
        return out

    def cardinality(self) -> np.ndarray:
        return np.array([len(c) for c in self.active_contacts])


def _effective_alpha_tol(config: PlannerConfig, candidates: CandidateSet) -> float:
    if config.alpha_zero_tol is not None:
        return config.alpha_zero_tol
    min_leg = min(c.leg_length for c in candidates.flat())
    return 1e-4 * config.a_max / min_leg


def _cardinality(alpha: list[np.ndarray], tol: float) -> np.ndarray:
    return np.array([int((a > tol).sum()) for a in alpha])


def _remap(values: list[np.ndarray], old: CandidateSet,
           new: CandidateSet) -> list[np.ndarray]:
    """Carry per-candidate values across a re-selected candidate set by
    (step, surface) identity; candidates new to the set start at zero."""
    out = []
    for i, step in enumerate(new.steps):
        lookup = {c.surface_id: values[i][k] for k, c in enumerate(old.steps[i])}
        out.append(np.array([lookup.get(c.surface_id, 0.0) for c in step]))
    return out


def plan(env: Environment, path: DesiredPath, config: PlannerConfig,
         solver_settings: SolverSettings | None = None) -> Plan:
    """Run the full reweighting loop and return the final plan."""
    if path.n_steps != config.n_steps:
        raise ValueError(f"path has {path.n_steps} steps, config expects {config.n_steps}")

    s_tilde = path.s_star.copy()
    candidates = select_candidates(env, s_tilde, config)

    prev_alpha = None
    warm_x = None
    warm_y = None
    alpha = None
    total_qp_time = 0.0
    qp_iters = []
    card = np.inf
    r = 0
    problem = None
    sol = None

    while r <= config.n_rw and np.max(card) > 2:
        if r > 0:
            # refine the CoM approximation and re-select footholds around it
            s_tilde = problem.extract_com(sol.x)
            new_candidates = select_candidates(env, s_tilde, config)
            prev_alpha = _remap(alpha, candidates, new_candidates)
            if r >= 2:
                # candidates the previous iterate left at (numerical) zero
                # carry a near-infinite reweighted cost and stay at zero, so
                # keep only the active ones plus a small reserve per step;
                # this shrinks the later QPs without losing escape routes
                a_tol = _effective_alpha_tol(config, new_candidates)
                kept_steps = []
                for i, step in enumerate(new_candidates.steps):
                    order = sorted(range(len(step)),
                                   key=lambda k: (-prev_alpha[i][k],
                                                  step[k].surface_id))
                    n_keep = max(sum(1 for a in prev_alpha[i] if a > a_tol),
                                 _PRUNE_RESERVE)
                    keep = sorted(order[:n_keep])
                    kept_steps.append([step[k] for k in keep])
                kept = CandidateSet(steps=kept_steps)
                if kept.total:
                    prev_alpha = _remap(prev_alpha, new_candidates, kept)
                    new_candidates = kept
            if warm_x is not None:
                warm_alpha = _remap(alpha, candidates, new_candidates)
                warm_x = np.concatenate(
                    [np.concatenate(warm_alpha) if new_candidates.total else np.zeros(0),
                     s_tilde.reshape(-1)])
            candidates = new_candidates

        prev_problem = problem
        problem = qp_core.assemble(candidates, path, s_tilde, config, prev_alpha)
        if (prev_problem is None or warm_y is None
                or prev_problem.A.shape != problem.A.shape):
            warm_y = None  # constraint layout changed; duals are stale
        t0 = time.perf_counter()
        sol = qp_solver.solve(problem, settings=solver_settings,
                              warm_start=warm_x, warm_start_dual=warm_y)
        total_qp_time += time.perf_counter() - t0
        qp_iters.append(sol.iterations)
        if sol.status == SolveStatus.PRIMAL_INFEASIBLE and prev_alpha is not None:
            # the hard cardinality row cannot hold while the previous iterate
            # is still spread; fall back to the penalty-only reweighting and
            # let the between-iteration cardinality check drive the loop
            problem = qp_core.assemble(candidates, path, s_tilde, config,
                                       prev_alpha, card_constraint=False)
            t0 = time.perf_counter()
            sol = qp_solver.solve(problem, settings=solver_settings,
                                  warm_start=warm_x, warm_start_dual=None)
            total_qp_time += time.perf_counter() - t0
            qp_iters[-1] += sol.iterations
        if sol.status == SolveStatus.PRIMAL_INFEASIBLE:
            raise Infeasible(f"QP primal-infeasible at reweighting iteration {r}")
        if sol.status == SolveStatus.MAX_ITERATIONS:
            warnings.warn(
                f"QP hit the iteration cap at reweighting iteration {r} "
                f"(primal residual {sol.primal_residual:.2e}); "
                "continuing with the last iterate", RuntimeWarning,
                stacklevel=2)

        alpha = problem.extract_alpha(sol.x)
        a_tol = _effective_alpha_tol(config, candidates)
        card = _cardinality(alpha, a_tol)
        warm_x = sol.x
        warm_y = sol.y
        r += 1

    a_tol = _effective_alpha_tol(config, candidates)
    card = _cardinality(alpha, a_tol)
    accel = [np.array([a * c.leg_dir for a, c in zip(alpha[i], candidates.steps[i])])
             if len(alpha[i]) else np.zeros((0, 3))
             for i in range(config.n_steps)]
    total = np.zeros((config.n_steps, 3))
    for i, acc in enumerate(accel):
        if len(acc):
            total[i] = acc.sum(axis=0)

    P = build_P(config.n_steps, config.dt)
    com = integrate(P, total, GRAVITY, path.s0, path.v0)
    com_vel = np.empty_like(com)
    com_vel[0] = (com[0] - path.s0) / config.dt
    com_vel[1:] = (com[1:] - com[:-1]) / config.dt

    active = []
    for i in range(config.n_steps):
        entries = []
        for k, c in enumerate(candidates.steps[i]):
            if alpha[i][k] > a_tol:
                entries.append((c.surface_id, accel[i][k], float(alpha[i][k])))
        active.append(entries)

    return Plan(alpha=alpha, accel=accel, com=com, com_vel=com_vel,
                active_contacts=active, iterations_used=r,
                converged=bool(np.max(card) <= 2),
                candidates=candidates, path=path, config=config,
                s_tilde=s_tilde, solve_time=total_qp_time,
                qp_iterations=qp_iters, alpha_zero_tol=a_tol)


# ---------------------------------------------------------------------------
# post-hoc validation against the original (nonlinear) constraint set


@dataclass
class Violation:
    kind: str
    step: int
    value: float
    limit: float
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    max_kinematic_residual: float = 0.0
    max_path_deviation: float = 0.0
    max_accel_magnitude: float = 0.0
    max_cardinality: int = 0
    linearization_angles: list[float] = field(default_factory=list)
    linearization_bound: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def max_linearization_angle(self) -> float:
        return max(self.linearization_angles, default=0.0)

    def summary(self) -> str:
        lines = [f"violations: {len(self.violations)}"]
        for v in self.violations:
            lines.append(f"  [{v.kind}] step {v.step}: {v.value:.6g} > {v.limit:.6g} {v.detail}")
        lines.append(f"max kinematic residual: {self.max_kinematic_residual:.3e} m")
        lines.append(f"max path deviation:     {self.max_path_deviation:.4f} m")
        lines.append(f"max |accel|:            {self.max_accel_magnitude:.3f} m/s^2")
        lines.append(f"max cardinality:        {self.max_cardinality}")
        lines.append(f"max linearization angle: {np.degrees(self.max_linearization_angle):.3f} deg "
                     f"(bound {np.degrees(self.linearization_bound):.3f} deg)")
        return "\n".join(lines)


def validate(p: Plan, env: Environment, config: PlannerConfig,
             eps: float = 1e-5) -> ValidationReport:
    """Check the realized plan against the original problem constraints.

    Force-direction parallelism is re-measured against the solved CoM (not
    the approximation used in the QP); the angular error it reports is the
    cost of the linearization and is bounded by the path-tolerance box.
    """
    rep = ValidationReport()
    n = p.n_steps

    # kinematic consistency
    P = build_P(n, config.dt)
    com_ref = integrate(P, p.total_accel(), GRAVITY, p.path.s0, p.path.v0)
    kin_res = float(np.abs(p.com - com_ref).max())
    rep.max_kinematic_residual = kin_res
    if kin_res > 1e-6:
        rep.violations.append(Violation("kinematics", -1, kin_res, 1e-6))

    # per-axis path deviation
    dev = np.abs(p.com - p.path.s_star)
    rep.max_path_deviation = float(dev.max())
    for i in range(n):
        d = float(dev[i].max())
        if d > config.tol + eps:
            rep.violations.append(Violation("path_tolerance", i, d, config.tol))

    min_leg = min((c.leg_length for c in p.candidates.flat()), default=1.0)
    rep.linearization_bound = float(np.arctan(config.tol * np.sqrt(3.0) / min_leg))

    for i, contacts in enumerate(p.active_contacts):
        rep.max_cardinality = max(rep.max_cardinality, len(contacts))
        if len(contacts) > 2:
            rep.violations.append(Violation("cardinality", i, len(contacts), 2))
        for surface_id, a, _alpha in contacts:
            surf = env.surface(surface_id)
            mag = float(np.linalg.norm(a))
            rep.max_accel_magnitude = max(rep.max_accel_magnitude, mag)
            if mag > config.a_max + eps:
                rep.violations.append(Violation("max_accel", i, mag, config.a_max,
                                                f"surface {surface_id}"))
            a_n = float(a @ surf.normal)
            a_t = float(np.linalg.norm(a - a_n * surf.normal))
            if a_n <= 0 or a_t > surf.mu * a_n + eps:
                rep.violations.append(Violation("friction", i, a_t,
                                                surf.mu * max(a_n, 0.0),
                                                f"surface {surface_id}"))
            true_leg = p.com[i] - surf.position
            denom = mag * float(np.linalg.norm(true_leg))
            if denom > 1e-12:
                cosang = np.clip(float(a @ true_leg) / denom, -1.0, 1.0)
                rep.linearization_angles.append(float(np.arccos(cosang)))
    return rep
