"""Deterministic SVG rendering of a plan: top view and side view.

Both panels show the terrain surfaces, the desired path with its tolerance
band, the CoM trace colored by time, and force arrows at the active
contacts (arrow color also encodes time). Determinism for fixed inputs is
enforced by pinning matplotlib's SVG hash salt and stripping the date
metadata.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .env import Environment
from .planner import Plan

_CMAP = "viridis"
_FORCE_SCALE = 0.02    # m per m/s^2 of arrow length


def save_plan_figure(plan: Plan, env: Environment, path: str | Path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": "slipplan"}):
        fig = _plan_figure(plan, env)
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)


def _plan_figure(plan: Plan, env: Environment):
    fig, (ax_top, ax_side) = plt.subplots(2, 1, figsize=(8, 8))
    n = plan.n_steps
    t = plan.config.dt * np.arange(1, n + 1)
    pts = np.array([s.position for s in env.surfaces])
    tol = plan.config.tol
    s_star = plan.path.s_star

    for ax, ax_i, ax_name in ((ax_top, 1, "y"), (ax_side, 2, "z")):
        ax.scatter(pts[:, 0], pts[:, ax_i], s=6, c="0.6", marker="s",
                   label="surfaces", zorder=1)
        ax.fill_between(s_star[:, 0], s_star[:, ax_i] - tol, s_star[:, ax_i] + tol,
                        color="tab:blue", alpha=0.15, label="tolerance band",
                        zorder=2)
        ax.plot(s_star[:, 0], s_star[:, ax_i], "--", color="tab:blue",
                label="desired path", zorder=3)
        sc = ax.scatter(plan.com[:, 0], plan.com[:, ax_i], c=t, cmap=_CMAP,
                        s=18, label="CoM", zorder=5)
        for i, contacts in enumerate(plan.active_contacts):
            color = plt.get_cmap(_CMAP)(i / max(n - 1, 1))
            for sid, acc, _alpha in contacts:
                foot = env.surface(sid).position
                ax.annotate(
                    "", xy=(foot[0] + _FORCE_SCALE * acc[0],
                            foot[ax_i] + _FORCE_SCALE * acc[ax_i]),
                    xytext=(foot[0], foot[ax_i]),
                    arrowprops=dict(arrowstyle="->", color=color, lw=1.0),
                    zorder=4)
        ax.set_xlabel("x [m]")
        ax.set_ylabel(f"{ax_name} [m]")
        ax.set_aspect("equal", adjustable="datalim")
    fig.colorbar(sc, ax=[ax_top, ax_side], label="time [s]")
    ax_top.legend(loc="upper left", fontsize=8)
    ax_top.set_title("top view")
    ax_side.set_title("side view")
    return fig
