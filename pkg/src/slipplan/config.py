"""Planner configuration and desired-path containers."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

# Gravity acceleration acting on the CoM, m/s^2 (z up).
GRAVITY = np.array([0.0, 0.0, -9.81])


@dataclass
class PlannerConfig:
    """All horizon, weight, tolerance and reweighting parameters.

    Accelerations are mass-normalized forces (m/s^2); the point-mass model
    never needs the robot mass explicitly.
    """

    n_steps: int = 10            # horizon length N
    dt: float = 0.15             # sample time, s
    k_nearest: int = 20          # max candidate surfaces per time step
    reach_radius: float = 1.5    # candidate search radius around the CoM, m
    a_max: float = 3 * 9.81      # max acceleration magnitude per contact, m/s^2
    tol: float = 0.1             # per-axis CoM deviation bound from the path, m

    w0: float = 1.0              # sparsity / terrain-cost weight
    w1: float = 0.02             # temporal-consistency weight
    w2: float = 10.0             # path-following weight
    w_vel: float = 1.0           # velocity sub-weight inside the path term
    w3: float = 0.01             # jerk weight
    w4: float = 20.0             # reweighting-penalty weight

    epsilon: float = 1e-3        # reweighting regularizer
    card_limit: float = 2.9      # per-step reweighted-sum bound (max two contacts)
    n_rw: int = 4                # max reweighting iterations
    # Threshold above which an alpha entry counts as an active contact.
    # None = auto: 1e-4 * a_max / (shortest leg length in the candidate set).
    alpha_zero_tol: float | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.k_nearest < 1:
            raise ValueError("k_nearest must be >= 1")
        if self.reach_radius <= 0:
            raise ValueError("reach_radius must be > 0")
        if self.a_max <= 0 or self.tol <= 0:
            raise ValueError("a_max and tol must be > 0")
        for name in ("w0", "w1", "w2", "w_vel", "w3", "w4"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.epsilon <= 0 or self.card_limit <= 0:
            raise ValueError("epsilon and card_limit must be > 0")
        if self.n_rw < 0:
            raise ValueError("n_rw must be >= 0")
        if self.alpha_zero_tol is not None and self.alpha_zero_tol <= 0:
            raise ValueError("alpha_zero_tol must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PlannerConfig":
        return cls(**d)

    def replace(self, **kwargs) -> "PlannerConfig":
        d = self.to_dict()
        d.update(kwargs)
        return PlannerConfig.from_dict(d)


@dataclass
class DesiredPath:
    """Desired CoM positions and velocities over the horizon.

    Row i corresponds to time (i+1)*dt; s0 is the CoM position at t=0 and
    v0 its initial velocity (defaults to rest).
    """

    s_star: np.ndarray           # (N, 3) positions, m
    v_star: np.ndarray           # (N, 3) velocities, m/s
    s0: np.ndarray = None        # (3,) initial CoM position
    v0: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.s_star = np.asarray(self.s_star, dtype=float)
        self.v_star = np.asarray(self.v_star, dtype=float)
        if self.s_star.ndim != 2 or self.s_star.shape[1] != 3:
            raise ValueError("s_star must be (N, 3)")
        if self.v_star.shape != self.s_star.shape:
            raise ValueError("v_star shape must match s_star")
        if self.s0 is None:
            self.s0 = self.s_star[0].copy()
        self.s0 = np.asarray(self.s0, dtype=float).reshape(3)
        self.v0 = np.asarray(self.v0, dtype=float).reshape(3)
        if not (np.isfinite(self.s_star).all() and np.isfinite(self.v_star).all()
                and np.isfinite(self.s0).all() and np.isfinite(self.v0).all()):
            raise ValueError("path entries must be finite")

    @property
    def n_steps(self) -> int:
        return self.s_star.shape[0]
