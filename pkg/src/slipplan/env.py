"""Terrain representation and per-time-step candidate foothold selection.

The environment is a set of discrete costed contact surfaces. For each
desired CoM position, candidates are the K nearest surfaces within the reach
radius that survive a friction prefilter: the push direction (from foothold
to CoM) must point away from the surface and lie inside the friction cone.
Friction feasibility is scale-invariant along a fixed leg direction, so
filtering on the unit direction is exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .config import PlannerConfig

_UNIT_TOL = 1e-9
_MIN_LEG_LENGTH = 1e-9


class EmptyCandidateSet(RuntimeError):
    """Raised when no time step has any feasible candidate."""

    def __init__(self, steps):
        self.steps = list(steps)
        super().__init__(f"no feasible candidates at any time step ({len(self.steps)} steps)")


@dataclass(frozen=True)
class Surface:
    """A candidate contact patch in the terrain map."""

    id: int
    position: np.ndarray      # (3,), m
    normal: np.ndarray        # (3,), unit
    mu: float                 # friction coefficient
    cost: float               # traversability cost

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float).reshape(3))
        if abs(np.linalg.norm(self.normal) - 1.0) > _UNIT_TOL:
            raise ValueError(f"surface {self.id}: normal must be unit length")
        if self.mu <= 0:
            raise ValueError(f"surface {self.id}: mu must be > 0")
        if self.cost < 0:
            raise ValueError(f"surface {self.id}: cost must be >= 0")


class Environment:
    """Immutable surface set with a spatial index for radius/KNN queries.

    Read-only after construction; safe for concurrent queries.
    """

    def __init__(self, surfaces: list[Surface]):
        if not surfaces:
            raise ValueError("environment needs at least one surface")
        ids = sorted(s.id for s in surfaces)
        if ids != list(range(len(surfaces))):
            raise ValueError("surface ids must be unique and dense 0..M-1")
        self.surfaces = sorted(surfaces, key=lambda s: s.id)
        self.positions = np.array([s.position for s in self.surfaces])
        self.tree = cKDTree(self.positions)

    def __len__(self) -> int:
        return len(self.surfaces)

    def surface(self, surface_id: int) -> Surface:
        return self.surfaces[surface_id]


@dataclass(frozen=True)
class Candidate:
    """A reachable, friction-feasible foothold for one time step."""

    time_index: int
    surface: Surface
    leg_dir: np.ndarray           # s_tilde_i - f_p, m
    unit_dir: np.ndarray
    normal_component: float       # unit_dir . normal
    tangential_magnitude: float
    distance: float

    @property
    def surface_id(self) -> int:
        return self.surface.id

    @property
    def leg_length(self) -> float:
        return self.distance


@dataclass
class CandidateSet:
    """Per-time-step candidate lists (possibly empty at individual steps)."""

    steps: list[list[Candidate]] = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def total(self) -> int:
        return sum(len(s) for s in self.steps)

    def flat(self) -> list[Candidate]:
        return [c for step in self.steps for c in step]


def friction_feasible(unit_dir: np.ndarray, surface: Surface) -> bool:
    """Check the push direction against the surface friction cone."""
    nc = float(unit_dir @ surface.normal)
    if nc <= 0.0:
        return False
    tang = float(np.linalg.norm(unit_dir - nc * surface.normal))
    return surface.mu * nc >= tang - 1e-12


def _make_candidate(i: int, surf: Surface, s_i: np.ndarray) -> Candidate | None:
    leg = s_i - surf.position
    dist = float(np.linalg.norm(leg))
    if dist < _MIN_LEG_LENGTH:
        return None
    unit = leg / dist
    nc = float(unit @ surf.normal)
    if nc <= 0.0:
        return None
    tang = float(np.linalg.norm(unit - nc * surf.normal))
    if surf.mu * nc < tang - 1e-12:
        return None
    return Candidate(time_index=i, surface=surf, leg_dir=leg, unit_dir=unit,
                     normal_component=nc, tangential_magnitude=tang, distance=dist)


def select_candidates(env: Environment, s_tilde: np.ndarray,
                      config: PlannerConfig) -> CandidateSet:
    """K nearest surfaces within the reach radius, friction-prefiltered.

    The K nearest are taken first (distance ascending, ties broken by lower
    cost then lower id), then the friction prefilter is applied, so a step
    may end up with fewer than K candidates. Steps with zero candidates are
    reported as warnings; only an entirely empty set is a hard error.
    """
    s_tilde = np.asarray(s_tilde, dtype=float)
    if s_tilde.ndim != 2 or s_tilde.shape[1] != 3:
        raise ValueError("s_tilde must be (N, 3)")
    steps: list[list[Candidate]] = []
    empty = []
    for i, s_i in enumerate(s_tilde):
        idxs = env.tree.query_ball_point(s_i, r=config.reach_radius)
        order = sorted(
            idxs,
            key=lambda j: (float(np.linalg.norm(s_i - env.positions[j])),
                           env.surfaces[j].cost, j),
        )
        cands = []
        for j in order[: config.k_nearest]:
            c = _make_candidate(i, env.surfaces[j], s_i)
            if c is not None:
                cands.append(c)
        if not cands:
            empty.append(i)
        steps.append(cands)
    if len(empty) == len(steps):
        raise EmptyCandidateSet(empty)
    if empty:
        warnings.warn(f"no feasible candidates at steps {empty}; "
                      "planning will rely on flight phases there",
                      stacklevel=2)
    return CandidateSet(steps=steps)
