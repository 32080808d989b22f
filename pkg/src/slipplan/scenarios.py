"""Built-in terrain/path scenario generators for demos, tests, benchmarks.

Terrain is emitted as grids or clusters of point surfaces with upward
normals on flat regions. Generation is deterministic for a fixed seed. The
flat grid rows are staggered off the path centerline so footholds always
carry a definite lateral sign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, asdict

import numpy as np

from .config import PlannerConfig, DesiredPath
from .env import Environment, Surface


class InvalidSpec(ValueError):
    pass


class ScenarioKind(enum.Enum):
    FLAT_GROUND = "flat_ground"
    STEP_STONES = "step_stones"
    CHASM = "chasm"
    STAIRCASE_UP = "staircase"
    BENT_PATH = "bent_path"
    DISCRETE_STEP_STONES = "discrete_step_stones"


@dataclass
class ScenarioSpec:
    kind: ScenarioKind = ScenarioKind.FLAT_GROUND
    horizon: float = 1.5          # s
    dt: float = 0.15              # s
    speed: float = 0.32           # m/s
    com_height: float = 1.0       # m
    resolution: float = 0.1       # surface grid spacing, m
    half_width: float = 0.35      # lateral extent of the terrain strip, m
    mu: float = 0.7
    base_cost: float = 1.0
    edge_cost: float = 3.0        # cost near patch edges
    gap_width: float = 0.5        # chasm gap, m
    gap_center: float | None = None
    stone_radius: float = 0.1     # m
    stone_spacing: float = 0.35   # m
    stone_height_range: float = 0.08   # m
    stair_rise: float = 0.15      # m
    stair_run: float = 0.3        # m
    n_stairs: int = 5
    bend_angle_deg: float = 45.0
    jitter: float = 0.02          # seeded positional jitter of surfaces, m
    k_nearest: int | None = None  # candidate count override for this terrain
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = ScenarioKind(self.kind)
        n = self.horizon / self.dt
        if abs(n - round(n)) > 1e-9:
            raise InvalidSpec(f"horizon {self.horizon} not divisible by dt {self.dt}")
        if self.speed < 0:
            raise InvalidSpec("speed must be >= 0")
        if self.dt <= 0 or self.horizon <= 0 or self.resolution <= 0:
            raise InvalidSpec("horizon, dt and resolution must be > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        return cls(**d)


def generate(spec: ScenarioSpec) -> tuple[Environment, DesiredPath, dict]:
    """Build (environment, desired path, config overrides) for a scenario."""
    builders = {
        ScenarioKind.FLAT_GROUND: _flat_ground,
        ScenarioKind.STEP_STONES: _step_stones,
        ScenarioKind.CHASM: _chasm,
        ScenarioKind.STAIRCASE_UP: _staircase,
        ScenarioKind.BENT_PATH: _bent_path,
        ScenarioKind.DISCRETE_STEP_STONES: _discrete_step_stones,
    }
    env, path = builders[spec.kind](spec)
    overrides = {"n_steps": spec.n_steps, "dt": spec.dt}
    if spec.k_nearest is not None:
        overrides["k_nearest"] = spec.k_nearest
    return env, path, overrides


def make_config(spec: ScenarioSpec, base: PlannerConfig | None = None,
                **extra) -> PlannerConfig:
    cfg = base or PlannerConfig()
    kw = {"n_steps": spec.n_steps, "dt": spec.dt}
    if spec.k_nearest is not None:
        kw["k_nearest"] = spec.k_nearest
    kw.update(extra)
    return cfg.replace(**kw)


def _grid_points(spec: ScenarioSpec, x0: float, x1: float, rng: np.random.Generator,
                 z_of=lambda x, y: 0.0, skip=lambda x, y: False):
    """Strip of grid points staggered off the y=0 centerline."""
    res = spec.resolution
    xs = np.arange(x0, x1 + res / 2, res)
    ys_half = np.arange(res / 2, spec.half_width + 1e-9, res)
    ys = np.concatenate([-ys_half[::-1], ys_half])
    pts = []
    for x in xs:
        for y in ys:
            if skip(x, y):
                continue
            jx = jy = 0.0
            if spec.jitter > 0:
                jx, jy = rng.uniform(-spec.jitter, spec.jitter, size=2)
            pts.append((x + jx, y + jy, z_of(x, y)))
    return pts


def _edge_cost(spec: ScenarioSpec, y: float) -> float:
    near_edge = abs(abs(y) - spec.half_width) < spec.resolution
    return spec.edge_cost if near_edge else spec.base_cost


def _make_env(spec: ScenarioSpec, pts, costs=None, normals=None) -> Environment:
    surfaces = []
    for i, p in enumerate(pts):
        cost = costs[i] if costs is not None else _edge_cost(spec, p[1])
        normal = normals[i] if normals is not None else np.array([0.0, 0.0, 1.0])
        surfaces.append(Surface(id=i, position=np.array(p), normal=normal,
                                mu=spec.mu, cost=cost))
    return Environment(surfaces)


def _straight_path(spec: ScenarioSpec, z_of=lambda x: 0.0) -> DesiredPath:
    n = spec.n_steps
    t = spec.dt * np.arange(1, n + 1)
    x = spec.speed * t
    s = np.column_stack([x, np.zeros(n), [spec.com_height + z_of(xi) for xi in x]])
    v = np.column_stack([np.full(n, spec.speed), np.zeros(n),
                         np.gradient([z_of(xi) for xi in x], spec.dt)
                         if n > 1 else np.zeros(n)])
    s0 = np.array([0.0, 0.0, spec.com_height + z_of(0.0)])
    return DesiredPath(s_star=s, v_star=v, s0=s0)


def _x_extent(spec: ScenarioSpec) -> tuple[float, float]:
    return -0.8, spec.speed * spec.horizon + 0.8


def _flat_ground(spec: ScenarioSpec):
    rng = np.random.default_rng(spec.seed)
    x0, x1 = _x_extent(spec)
    pts = _grid_points(spec, x0, x1, rng)
    return _make_env(spec, pts), _straight_path(spec)


def _chasm(spec: ScenarioSpec):
    rng = np.random.default_rng(spec.seed)
    x0, x1 = _x_extent(spec)
    center = spec.gap_center
    if center is None:
        center = 0.5 * spec.speed * spec.horizon
    lo, hi = center - spec.gap_width / 2, center + spec.gap_width / 2
    pts = _grid_points(spec, x0, x1, rng, skip=lambda x, y: lo <= x <= hi)
    # the crumbly rim of the chasm is expensive to stand on, so crossing by
    # a ballistic step beats striding over the gap on tilted legs
    costs = [spec.edge_cost
             if min(abs(p[0] - lo), abs(p[0] - hi)) < 0.3 + spec.jitter
             else _edge_cost(spec, p[1])
             for p in pts]
    return _make_env(spec, pts, costs=costs), _straight_path(spec)


def _staircase(spec: ScenarioSpec):
    rng = np.random.default_rng(spec.seed)
    x0, x1 = _x_extent(spec)
    stair_x0 = 0.4   # flat approach before the first riser

    def z_of(x, y=0.0):
        if x < stair_x0:
            return 0.0
        step = min(int((x - stair_x0) // spec.stair_run) + 1, spec.n_stairs)
        return step * spec.stair_rise

    # the desired CoM height ramps smoothly up the stair slope; a stepped
    # desired path would demand z jumps larger than the tolerance box
    slope = spec.stair_rise / spec.stair_run

    def z_path(x):
        return float(np.clip(slope * (x - stair_x0 + spec.stair_run / 2), 0.0,
                             spec.n_stairs * spec.stair_rise))

    pts = _grid_points(spec, x0, x1, rng, z_of=z_of)
    return _make_env(spec, pts), _straight_path(spec, z_of=z_path)


def _bent_path(spec: ScenarioSpec):
    rng = np.random.default_rng(spec.seed)
    total = spec.speed * spec.horizon
    bend_at = total / 2
    ang = np.radians(spec.bend_angle_deg)
    d1 = np.array([1.0, 0.0])
    d2 = np.array([np.cos(ang), np.sin(ang)])

    def point_at(dist):
        if dist <= bend_at:
            return d1 * dist
        return d1 * bend_at + d2 * (dist - bend_at)

    n = spec.n_steps
    t = spec.dt * np.arange(1, n + 1)
    xy = np.array([point_at(spec.speed * ti) for ti in t])
    s = np.column_stack([xy, np.full(n, spec.com_height)])
    v = np.zeros((n, 3))
    for i, ti in enumerate(t):
        d = d2 if spec.speed * ti > bend_at else d1
        v[i, :2] = spec.speed * d
    path = DesiredPath(s_star=s, v_star=v,
                       s0=np.array([0.0, 0.0, spec.com_height]))

    # terrain strip following the bent centerline
    res = spec.resolution
    pts = []
    seen = set()
    dists = np.arange(-0.8, total + 0.8, res)
    laterals = np.concatenate([
        -np.arange(res / 2, spec.half_width + 1e-9, res)[::-1],
        np.arange(res / 2, spec.half_width + 1e-9, res)])
    for dist in dists:
        base = point_at(max(dist, 0.0)) if dist >= 0 else d1 * dist
        d = d2 if dist > bend_at else d1
        lat_dir = np.array([-d[1], d[0]])
        for lat in laterals:
            p = base + lat * lat_dir
            key = (round(p[0] / res * 2), round(p[1] / res * 2))
            if key in seen:
                continue
            seen.add(key)
            jx = jy = 0.0
            if spec.jitter > 0:
                jx, jy = rng.uniform(-spec.jitter, spec.jitter, size=2)
            pts.append((p[0] + jx, p[1] + jy, 0.0))
    costs = [spec.base_cost] * len(pts)
    return _make_env(spec, pts, costs=costs), path


def _stone_centers(spec: ScenarioSpec, rng: np.random.Generator, with_gap: bool):
    total = spec.speed * spec.horizon
    xs = np.arange(-0.4, total + 0.6, spec.stone_spacing)
    centers = []
    for i, x in enumerate(xs):
        y = ((-1) ** i) * spec.resolution   # staggered left/right of the path
        z = float(rng.uniform(0.0, spec.stone_height_range))
        if with_gap and abs(x - total / 2) < spec.stone_spacing * 0.45:
            continue
        centers.append((x, y, z))
    return centers


def _step_stones(spec: ScenarioSpec):
    rng = np.random.default_rng(spec.seed)
    centers = _stone_centers(spec, rng, with_gap=False)
    res = spec.resolution
    pts, costs = [], []
    for cx, cy, cz in centers:
        for dx in (-res / 2, res / 2):
            for dy in (-res / 2, res / 2):
                if dx * dx + dy * dy <= spec.stone_radius ** 2 + 1e-9:
                    jx, jy = (rng.uniform(-spec.jitter, spec.jitter, size=2)
                              if spec.jitter > 0 else (0.0, 0.0))
                    pts.append((cx + dx + jx, cy + dy + jy, cz))
                    costs.append(spec.base_cost)
    return _make_env(spec, pts, costs=costs), _straight_path(spec)


def _discrete_step_stones(spec: ScenarioSpec):
    rng = np.random.default_rng(spec.seed)
    centers = _stone_centers(spec, rng, with_gap=True)
    pts = [(cx, cy, cz) for cx, cy, cz in centers]
    costs = [spec.base_cost] * len(pts)
    return _make_env(spec, pts, costs=costs), _straight_path(spec)


# Per-scenario defaults; builtin() overrides win. The staircase uses a
# coarser grid plus a wider candidate pool so footholds below the CoM stay
# in play when the terrain ahead rises toward it; the sparse stones need a
# faster reference speed to make the gap crossable.
BUILTIN_SPECS = {
    "flat_ground": {"kind": ScenarioKind.FLAT_GROUND, "horizon": 1.5},
    "step_stones": {"kind": ScenarioKind.STEP_STONES, "horizon": 2.4},
    "chasm": {"kind": ScenarioKind.CHASM, "horizon": 3.0, "speed": 0.6,
              "gap_width": 0.7},
    "staircase": {"kind": ScenarioKind.STAIRCASE_UP, "horizon": 3.0,
                  "resolution": 0.15, "k_nearest": 30},
    "bent_path": {"kind": ScenarioKind.BENT_PATH, "horizon": 3.0},
    "discrete_step_stones": {"kind": ScenarioKind.DISCRETE_STEP_STONES,
                             "horizon": 3.0, "speed": 0.5,
                             "stone_spacing": 0.3},
}


def builtin(name: str, **overrides) -> ScenarioSpec:
    if name not in BUILTIN_SPECS:
        raise InvalidSpec(
            f"unknown scenario '{name}'; valid names: {', '.join(sorted(BUILTIN_SPECS))}")
    return ScenarioSpec(**{**BUILTIN_SPECS[name], **overrides})
