"""Discrete double-integration and finite-difference operators for the CoM.

Positions are advanced with piecewise-constant accelerations over a fixed
sample time. Row i of the integration matrix gives the position sensitivity
after i+1 intervals, assuming zero initial velocity; an optional initial
velocity adds dt*(i+1)*v0 to row i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class InvalidHorizon(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class IntegrationMatrix:
    """Lower-triangular acceleration-to-position operator (units s^2)."""

    P: np.ndarray
    dt: float
    n_steps: int


def build_P(n_steps: int, dt: float) -> IntegrationMatrix:
    """Closed-form double-integration matrix.

    P[i, j] = dt^2 * (2*(i-j) + 1) / 2 for j <= i, zero above the diagonal.
    """
    if n_steps < 1 or dt <= 0:
        raise InvalidHorizon(f"need n_steps >= 1 and dt > 0, got {n_steps}, {dt}")
    i = np.arange(n_steps)[:, None]
    j = np.arange(n_steps)[None, :]
    P = np.where(j <= i, dt * dt * (2 * (i - j) + 1) / 2.0, 0.0)
    return IntegrationMatrix(P=P, dt=float(dt), n_steps=int(n_steps))


def integrate(P: IntegrationMatrix, total_accel: np.ndarray, gravity: np.ndarray,
              s0: np.ndarray, v0: np.ndarray | None = None) -> np.ndarray:
    """Integrate per-step net contact accelerations into CoM positions.

    total_accel is the (N, 3) sum of contact accelerations per step; gravity
    is added to it (free fall corresponds to total_accel = 0). Each axis is
    integrated independently.
    """
    total_accel = np.asarray(total_accel, dtype=float)
    if total_accel.shape != (P.n_steps, 3):
        raise DimensionMismatch(
            f"total_accel must be ({P.n_steps}, 3), got {total_accel.shape}")
    gravity = np.asarray(gravity, dtype=float).reshape(3)
    s0 = np.asarray(s0, dtype=float).reshape(3)
    s = P.P @ (total_accel + gravity[None, :]) + s0[None, :]
    if v0 is not None:
        v0 = np.asarray(v0, dtype=float).reshape(3)
        steps = np.arange(1, P.n_steps + 1, dtype=float)[:, None]
        s = s + P.dt * steps * v0[None, :]
    return s


def velocity_op(n_steps: int, dt: float) -> sp.csr_matrix:
    """(N-1) x N forward-difference operator divided by dt."""
    if n_steps < 2 or dt <= 0:
        raise InvalidHorizon(f"need n_steps >= 2 and dt > 0, got {n_steps}, {dt}")
    D = sp.diags([-np.ones(n_steps - 1), np.ones(n_steps - 1)], offsets=[0, 1],
                 shape=(n_steps - 1, n_steps))
    return (D / dt).tocsr()


def jerk_op(n_steps: int, dt: float) -> sp.csr_matrix:
    """First-difference operator on the acceleration sequence, divided by dt.

    Jerk is the derivative of acceleration; with piecewise-constant
    accelerations this is the (N-1) x N forward difference over dt.
    """
    return velocity_op(n_steps, dt)
