"""Coupled CoM trajectory and footstep planning for a SLIP-like biped.

Footholds are selected by a sparse convex quadratic program: every nearby
surface may push on the point-mass CoM, and iterative l1 reweighting drives
the solution to at most two simultaneous contacts, discovering the gait.
"""

from .config import GRAVITY, PlannerConfig, DesiredPath
from .env import Surface, Environment, Candidate, CandidateSet, select_candidates
from .kinematics import build_P, integrate, velocity_op, jerk_op
from .qp_core import QpProblem, assemble
from .qp_solver import QpSolution, SolveStatus, SolverSettings, solve, solve_qp
from .planner import Plan, plan, validate, ValidationReport, Infeasible
from .phases import (Side, ContactPhase, FootTrajectory, assign_phases,
                     swing_trajectories)
from .scenarios import (ScenarioSpec, ScenarioKind, BUILTIN_SPECS, generate,
                        builtin, make_config)
from .serialization import (save_plan, load_plan, save_environment,
                            load_environment, save_scenario, load_scenario)

__version__ = "0.1.0"

__all__ = [
    "GRAVITY", "PlannerConfig", "DesiredPath",
    "Surface", "Environment", "Candidate", "CandidateSet", "select_candidates",
    "build_P", "integrate", "velocity_op", "jerk_op",
    "QpProblem", "assemble",
    "QpSolution", "SolveStatus", "SolverSettings", "solve", "solve_qp",
    "Plan", "plan", "validate", "ValidationReport", "Infeasible",
    "Side", "ContactPhase", "FootTrajectory", "assign_phases", "swing_trajectories",
    "ScenarioSpec", "ScenarioKind", "BUILTIN_SPECS", "generate", "builtin",
    "make_config",
    "save_plan", "load_plan", "save_environment", "load_environment",
    "save_scenario", "load_scenario",
    "__version__",
]
