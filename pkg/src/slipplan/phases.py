"""Contact-phase extraction, left/right assignment, and foot trajectories.

Consecutive forces on the same surface merge into a single stance phase.
Sides are assigned from the lateral coordinate of the foothold in the CoM
heading frame (positive lateral = Left), greedily forward in time so that a
foot in stance never receives a new phase before its current one ends.
Swing trajectories between same-side stances are two cubic Hermite segments
through an apex at the temporal midpoint.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .planner import Plan

_MIN_HEADING_SPEED = 1e-3


class SideConflict(RuntimeError):
    pass


class ZeroDurationSwing(UserWarning):
    pass


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


@dataclass
class ContactPhase:
    side: Side
    surface_id: int
    foothold: np.ndarray
    start_index: int
    end_index: int              # inclusive
    mean_force_dir: np.ndarray


@dataclass
class HermiteSegment:
    """Cubic Hermite segment on [t0, t1] with endpoint positions/velocities."""

    t0: float
    t1: float
    p0: np.ndarray
    p1: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    apex_height: float | None = None   # swing apex z, None for stance segments

    def position(self, t: float) -> np.ndarray:
        h = self.t1 - self.t0
        if h <= 0:
            return self.p0.copy()
        u = np.clip((t - self.t0) / h, 0.0, 1.0)
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        return h00 * self.p0 + h10 * h * self.v0 + h01 * self.p1 + h11 * h * self.v1

    def velocity(self, t: float) -> np.ndarray:
        h = self.t1 - self.t0
        if h <= 0:
            return np.zeros(3)
        u = np.clip((t - self.t0) / h, 0.0, 1.0)
        dh00 = (6 * u**2 - 6 * u) / h
        dh10 = (3 * u**2 - 4 * u + 1) / h
        dh01 = (-6 * u**2 + 6 * u) / h
        dh11 = (3 * u**2 - 2 * u) / h
        return dh00 * self.p0 + dh10 * h * self.v0 + dh01 * self.p1 + dh11 * h * self.v1


@dataclass
class FootTrajectory:
    side: Side
    segments: list[HermiteSegment] = field(default_factory=list)

    def position(self, t: float) -> np.ndarray:
        for seg in self.segments:
            if t <= seg.t1:
                return seg.position(t)
        return self.segments[-1].position(t) if self.segments else np.zeros(3)


def _heading(plan: Plan, i: int) -> np.ndarray:
    h = plan.com_vel[i].copy()
    h[2] = 0.0
    if np.linalg.norm(h) < _MIN_HEADING_SPEED:
        h = plan.path.v_star[i].copy()
        h[2] = 0.0
    norm = np.linalg.norm(h)
    if norm < 1e-12:
        return np.array([1.0, 0.0, 0.0])
    return h / norm


def _lateral(plan: Plan, i: int, foothold: np.ndarray) -> float:
    """Signed lateral offset of the foothold in the heading frame (+ = left)."""
    h = _heading(plan, i)
    rel = foothold - plan.com[i]
    return float(h[0] * rel[1] - h[1] * rel[0])


def assign_phases(plan: Plan) -> list[ContactPhase]:
    """Merge per-step contacts into stance phases and assign sides."""
    n = plan.n_steps

    # merge maximal runs of consecutive steps on the same surface
    groups = []   # (surface_id, start, end, force dirs)
    open_runs: dict[int, list] = {}
    for i in range(n):
        present = {sid: (acc, a) for sid, acc, a in plan.active_contacts[i]}
        for sid in list(open_runs):
            if sid not in present:
                groups.append(open_runs.pop(sid))
        for sid, (acc, _a) in present.items():
            if sid in open_runs:
                open_runs[sid][2] = i
                open_runs[sid][3].append(acc)
            else:
                open_runs[sid] = [sid, i, i, [acc]]
        if len(present) > 2:
            raise SideConflict(f"more than two simultaneous contacts at step {i}")
    groups.extend(open_runs.values())

    def _foothold_position(plan_, sid):
        for step in plan_.candidates.steps:
            for c in step:
                if c.surface_id == sid:
                    return c.surface.position
        raise KeyError(f"surface {sid} not in candidate set")

    # greedy side assignment, simultaneous starts ordered by lateral
    # descending so the more-positive foothold takes Left
    groups.sort(key=lambda g: (g[1], -_lateral(plan, g[1], _foothold_position(plan, g[0]))))

    phases: list[ContactPhase] = []
    busy_until = {Side.LEFT: -1, Side.RIGHT: -1}
    for sid, start, end, dirs in groups:
        foothold = _foothold_position(plan, sid)
        lat = _lateral(plan, start, foothold)
        preferred = Side.LEFT if lat > 0 else Side.RIGHT
        if busy_until[preferred] < start:
            side = preferred
        elif busy_until[preferred.other()] < start:
            side = preferred.other()
        else:
            raise SideConflict(
                f"no free foot for surface {sid} at steps {start}..{end}")
        busy_until[side] = end
        mean_dir = np.mean(np.array(dirs), axis=0)
        norm = np.linalg.norm(mean_dir)
        if norm > 1e-12:
            mean_dir = mean_dir / norm
        phases.append(ContactPhase(side=side, surface_id=sid, foothold=foothold,
                                   start_index=start, end_index=end,
                                   mean_force_dir=mean_dir))
    phases.sort(key=lambda p: (p.start_index, p.side.value))
    return phases


def swing_trajectories(phases: list[ContactPhase], dt: float,
                       clearance: float = 0.1) -> list[FootTrajectory]:
    """Stance and swing segments per foot.

    Stance covers [start*dt, (end+1)*dt]. Swings between consecutive
    same-side stances run liftoff -> apex -> touchdown with zero endpoint
    velocities; the apex sits at the temporal midpoint, laterally midway,
    at max(endpoint z) + clearance. Temporally adjacent stances get a
    minimum-duration swing of one dt (with a warning).
    """
    out = []
    for side in (Side.LEFT, Side.RIGHT):
        ps = sorted((p for p in phases if p.side is side), key=lambda p: p.start_index)
        if not ps:
            continue
        traj = FootTrajectory(side=side)
        for idx, p in enumerate(ps):
            t_start = p.start_index * dt
            t_end = (p.end_index + 1) * dt
            if idx + 1 < len(ps):
                nxt = ps[idx + 1]
                t_lift = t_end
                t_down = nxt.start_index * dt
                if t_down <= t_lift:
                    warnings.warn(
                        f"adjacent same-side stances at step {nxt.start_index}; "
                        "inserting a one-dt swing", ZeroDurationSwing, stacklevel=2)
                    t_lift = t_down - dt
                t_end = min(t_end, t_lift)
                traj.segments.append(_stance_segment(p, t_start, t_end))
                traj.segments.extend(
                    _swing_segments(p.foothold, nxt.foothold, t_lift, t_down, clearance))
            else:
                traj.segments.append(_stance_segment(p, t_start, t_end))
        out.append(traj)
    return out


def _stance_segment(p: ContactPhase, t0: float, t1: float) -> HermiteSegment:
    pos = np.asarray(p.foothold, dtype=float)
    return HermiteSegment(t0=t0, t1=t1, p0=pos.copy(), p1=pos.copy(),
                          v0=np.zeros(3), v1=np.zeros(3))


def _swing_segments(p0: np.ndarray, p1: np.ndarray, t0: float, t1: float,
                    clearance: float) -> list[HermiteSegment]:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    tm = 0.5 * (t0 + t1)
    apex = 0.5 * (p0 + p1)
    apex_z = max(p0[2], p1[2]) + clearance
    apex[2] = apex_z
    v_apex = (p1 - p0) / max(t1 - t0, 1e-9)
    v_apex[2] = 0.0
    zero = np.zeros(3)
    return [
        HermiteSegment(t0=t0, t1=tm, p0=p0.copy(), p1=apex.copy(),
                       v0=zero.copy(), v1=v_apex.copy(), apex_height=apex_z),
        HermiteSegment(t0=tm, t1=t1, p0=apex.copy(), p1=p1.copy(),
                       v0=v_apex.copy(), v1=zero.copy(), apex_height=apex_z),
    ]
