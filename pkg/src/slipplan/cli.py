"""Command-line front-end: plan, bench, validate, scenario.

Exit codes: 0 success, 1 usage/config error, 2 planner did not converge
(or the program is infeasible), 3 validation found hard violations.
PLANNER_THREADS caps benchmark parallelism (default: serial).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import serialization
from .config import PlannerConfig
from .env import EmptyCandidateSet
from .planner import plan as run_planner, validate as validate_plan, Infeasible
from .scenarios import (ScenarioSpec, BUILTIN_SPECS, builtin, generate,
                        make_config, InvalidSpec)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_INVALID_PLAN = 3

_CONFIG_FLAGS = {
    "k": "k_nearest",
    "radius": "reach_radius",
    "tol": "tol",
    "a_max": "a_max",
    "w0": "w0", "w1": "w1", "w2": "w2", "w3": "w3", "w4": "w4",
    "w_vel": "w_vel",
    "epsilon": "epsilon",
    "n_rw": "n_rw",
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidSpec, serialization.FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slipplan",
        description="Footstep and CoM trajectory planning on discrete terrain.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="plan a scenario and write artifacts")
    p_plan.add_argument("scenario", help="built-in scenario name or YAML file")
    _add_scenario_flags(p_plan)
    _add_config_flags(p_plan)
    p_plan.add_argument("-o", "--out", default="out", help="output directory")
    p_plan.add_argument("--no-figure", action="store_true",
                        help="skip the SVG figure")
    p_plan.set_defaults(func=cmd_plan)

    p_bench = sub.add_parser("bench", help="run the benchmark matrix")
    p_bench.add_argument("--envs", default="flat_ground,step_stones,chasm,staircase",
                         help="comma-separated scenario names")
    p_bench.add_argument("--horizons", default="1.5,3.0",
                         help="comma-separated horizons, s")
    p_bench.add_argument("--k-values", default="10,20",
                         help="comma-separated candidate counts")
    p_bench.add_argument("--trials", type=int, default=3)
    p_bench.add_argument("--seed", type=int, default=0, help="base seed")
    p_bench.add_argument("--n-sweep", action="store_true",
                         help="also sweep the horizon length on flat ground "
                              "and fit the log-log time slope")
    p_bench.add_argument("-o", "--out", default=None, help="report file (JSON)")
    p_bench.set_defaults(func=cmd_bench)

    p_val = sub.add_parser("validate", help="re-check a stored plan")
    p_val.add_argument("plan_file", help="plan JSON written by 'plan'")
    p_val.add_argument("scenario", help="built-in name, scenario YAML, or "
                                        "environment YAML (--env-file)")
    p_val.add_argument("--env-file", action="store_true",
                       help="treat the scenario argument as an environment file")
    _add_scenario_flags(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_scn = sub.add_parser("scenario", help="emit a built-in scenario to file")
    p_scn.add_argument("name", help="built-in scenario name")
    _add_scenario_flags(p_scn)
    p_scn.add_argument("-o", "--out", default="out", help="output directory")
    p_scn.add_argument("--with-env", action="store_true",
                       help="also write the generated environment")
    p_scn.set_defaults(func=cmd_scenario)
    return parser


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--horizon", type=float, default=None, help="horizon, s")
    p.add_argument("--dt", type=float, default=None, help="time step, s")
    p.add_argument("--speed", type=float, default=None, help="desired speed, m/s")
    p.add_argument("--seed", type=int, default=None, help="scenario seed")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=None, help="candidates per step")
    p.add_argument("--radius", type=float, default=None, help="reach radius, m")
    p.add_argument("--tol", type=float, default=None, help="path tolerance, m")
    p.add_argument("--a-max", type=float, default=None,
                   help="max contact acceleration, m/s^2")
    for w in ("w0", "w1", "w2", "w3", "w4"):
        p.add_argument(f"--{w}", type=float, default=None,
                       help=f"objective weight {w}")
    p.add_argument("--w-vel", type=float, default=None,
                   help="velocity sub-weight of the path term")
    p.add_argument("--epsilon", type=float, default=None,
                   help="reweighting regularizer")
    p.add_argument("--n-rw", type=int, default=None,
                   help="max reweighting iterations")


def _load_spec(name_or_file: str, args) -> ScenarioSpec:
    overrides = {k: getattr(args, k) for k in ("horizon", "dt", "speed", "seed")
                 if getattr(args, k, None) is not None}
    if name_or_file in BUILTIN_SPECS:
        return builtin(name_or_file, **overrides)
    if Path(name_or_file).exists():
        spec = serialization.load_scenario(name_or_file)
        if overrides:
            spec = ScenarioSpec.from_dict({**spec.to_dict(), **overrides})
        return spec
    raise InvalidSpec(
        f"unknown scenario '{name_or_file}' (not a built-in name or readable "
        f"file); valid names: {', '.join(sorted(BUILTIN_SPECS))}")


def _config_from_args(spec: ScenarioSpec, args) -> PlannerConfig:
    extra = {field: getattr(args, flag) for flag, field in _CONFIG_FLAGS.items()
             if getattr(args, flag, None) is not None}
    return make_config(spec, **extra)


def cmd_plan(args) -> int:
    spec = _load_spec(args.scenario, args)
    env, path, _ = generate(spec)
    config = _config_from_args(spec, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = run_planner(env, path, config)
    except (Infeasible, EmptyCandidateSet) as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        print("diagnostics: the terrain/path combination admits no solution "
              "within the path tolerance; widen --tol, slow the path, or "
              "densify the terrain", file=sys.stderr)
        return EXIT_NOT_CONVERGED

    report = validate_plan(p, env, config)
    serialization.save_plan(p, out / "plan.json")
    serialization.save_environment(env, out / "environment.yaml")
    serialization.save_scenario(spec, out / "scenario.yaml")
    _write_com_csv(p, out / "com.csv")
    if p.converged:
        _write_feet_csv(p, out / "feet.csv")
    if not args.no_figure:
        from .plotting import save_plan_figure
        save_plan_figure(p, env, out / "plan.svg")

    print(f"converged: {p.converged} (reweighting iterations: "
          f"{p.iterations_used}, QP time: {p.solve_time:.3f} s)")
    print(report.summary())
    print(f"artifacts written to {out}/")
    if not p.converged or report.violations:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _write_com_csv(p, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "z", "vx", "vy", "vz", "n_contacts"])
        for i in range(p.n_steps):
            t = (i + 1) * p.config.dt
            w.writerow([repr(t)] + [repr(v) for v in p.com[i]]
                       + [repr(v) for v in p.com_vel[i]]
                       + [len(p.active_contacts[i])])


def _write_feet_csv(p, path: Path, samples_per_step: int = 5) -> None:
    from .phases import assign_phases, swing_trajectories, ZeroDurationSwing
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroDurationSwing)
        trajectories = swing_trajectories(assign_phases(p), p.config.dt)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "side", "x", "y", "z"])
        h = p.config.dt / samples_per_step
        for traj in trajectories:
            if not traj.segments:
                continue
            t0, t1 = traj.segments[0].t0, traj.segments[-1].t1
            for t in np.arange(t0, t1 + h / 2, h):
                pos = traj.position(t)
                w.writerow([repr(float(t)), traj.side.value]
                           + [repr(float(v)) for v in pos])


# --------------------------------------------------------------------------
# bench


def _bench_cell(task: tuple) -> dict:
    name, horizon, k, trials, base_seed = task
    times, iters, converged = [], [], 0
    failures = 0
    for trial in range(trials):
        try:
            spec = builtin(name, horizon=horizon, seed=base_seed + trial,
                           k_nearest=k)
            env, path, _ = generate(spec)
            config = make_config(spec)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                t0 = time.perf_counter()
                p = run_planner(env, path, config)
                elapsed = time.perf_counter() - t0
            times.append(elapsed)
            iters.append(p.iterations_used)
            converged += int(p.converged)
        except (Infeasible, EmptyCandidateSet, InvalidSpec):
            failures += 1
    cell = {"environment": name, "horizon": horizon, "k": k, "trials": trials,
            "failures": failures}
    if times:
        cell.update({
            "mean_time": statistics.fmean(times),
            "std_time": statistics.stdev(times) if len(times) > 1 else 0.0,
            "iters_avg": statistics.fmean(iters),
            "iters_min": min(iters), "iters_max": max(iters),
            "convergence_rate": converged / len(times),
        })
    return cell


def _sweep_slope(trials: int, base_seed: int, dt: float = 0.15,
                 steps=(10, 15, 20, 25, 30)) -> dict:
    times = []
    for n in steps:
        cell_times = []
        for trial in range(trials):
            spec = builtin("flat_ground", horizon=round(n * dt, 10),
                           seed=base_seed + trial)
            env, path, _ = generate(spec)
            config = make_config(spec)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                t0 = time.perf_counter()
                run_planner(env, path, config)
                cell_times.append(time.perf_counter() - t0)
        times.append(statistics.fmean(cell_times))
    slope = float(np.polyfit(np.log(steps), np.log(times), 1)[0])
    return {"steps": list(steps), "mean_times": times, "slope": slope}


def cmd_bench(args) -> int:
    names = [s.strip() for s in args.envs.split(",") if s.strip()]
    horizons = [float(s) for s in args.horizons.split(",") if s.strip()]
    ks = [int(s) for s in args.k_values.split(",") if s.strip()]
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    unknown = [n for n in names if n not in BUILTIN_SPECS]
    if unknown:
        raise InvalidSpec(f"unknown scenario(s): {', '.join(unknown)}")

    tasks = [(n, h, k, args.trials, args.seed)
             for n in names for h in horizons for k in ks]
    workers = int(os.environ.get("PLANNER_THREADS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_bench_cell, tasks))
    else:
        cells = [_bench_cell(t) for t in tasks]

    header = (f"{'environment':<22}{'T [s]':>7}{'K':>5}{'time [s]':>18}"
              f"{'iters avg/min/max':>20}{'conv':>7}")
    print(header)
    print("-" * len(header))
    for c in cells:
        if "mean_time" in c:
            print(f"{c['environment']:<22}{c['horizon']:>7.2f}{c['k']:>5d}"
                  f"{c['mean_time']:>10.3f} ± {c['std_time']:<5.3f}"
                  f"{c['iters_avg']:>10.2f}/{c['iters_min']}/{c['iters_max']}"
                  f"{c['convergence_rate']:>7.0%}")
        else:
            print(f"{c['environment']:<22}{c['horizon']:>7.2f}{c['k']:>5d}"
                  f"{'all trials failed':>18}")

    report = {"cells": cells, "trials": args.trials,
              "machine": {"platform": sys.platform,
                          "cpu_count": os.cpu_count(),
                          "python": sys.version.split()[0]}}
    if args.n_sweep:
        sweep = _sweep_slope(args.trials, args.seed)
        report["n_sweep"] = sweep
        print(f"\nhorizon sweep N={sweep['steps']}: log-log slope of solve "
              f"time vs N = {sweep['slope']:.2f}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
        print(f"report written to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# validate / scenario


def cmd_validate(args) -> int:
    if args.env_file:
        env = serialization.load_environment(args.scenario)
    else:
        spec = _load_spec(args.scenario, args)
        env, _, _ = generate(spec)
    try:
        p = serialization.load_plan(args.plan_file, env)
    except IndexError as exc:
        print(f"error: plan does not match the environment: {exc}",
              file=sys.stderr)
        return EXIT_USAGE
    if p.config.n_steps != p.path.n_steps or p.com.shape[0] != p.path.n_steps:
        print("error: plan/scenario dimension mismatch "
              f"({p.com.shape[0]} vs {p.path.n_steps} steps)", file=sys.stderr)
        return EXIT_USAGE
    report = validate_plan(p, env, p.config)
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_INVALID_PLAN


def cmd_scenario(args) -> int:
    spec = _load_spec(args.name, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    serialization.save_scenario(spec, out / f"{args.name}.yaml")
    written = [out / f"{args.name}.yaml"]
    if args.with_env:
        env, _, _ = generate(spec)
        serialization.save_environment(env, out / f"{args.name}_environment.yaml")
        written.append(out / f"{args.name}_environment.yaml")
    for w in written:
        print(f"wrote {w}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
