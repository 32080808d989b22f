"""Assembly of the sparse convex foothold-selection quadratic program.

Decision variables are the per-candidate force scale factors alpha (one per
reachable foothold per step) and the CoM positions s (3 per step). Contact
accelerations are never materialized: each candidate contributes
alpha * leg_dir, substituted symbolically, which keeps the variable count
small. The CoM positions are kept explicit and tied to the accelerations
through equality constraints to preserve sparsity of the quadratic term.

All norm-type objective terms are squared l2 so the program stays a QP.
The path tolerance is a per-axis box.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .config import GRAVITY, PlannerConfig, DesiredPath
from .env import CandidateSet
from .kinematics import build_P


class NoCandidates(ValueError):
    pass


class InfeasibleDimensions(ValueError):
    pass


@dataclass
class QpProblem:
    """Standard-form sparse QP: min 0.5 x'Hx + q'x  s.t. l <= Ax <= u."""

    hessian: sp.csc_matrix
    linear: np.ndarray
    A: sp.csc_matrix
    lower: np.ndarray
    upper: np.ndarray
    alpha_index: dict            # (time_index, candidate_index) -> column
    com_index: dict              # (time_index, axis) -> column
    n_alpha: int
    candidates: CandidateSet
    rows: dict = field(default_factory=dict)   # row slices by constraint group

    @property
    def n_vars(self) -> int:
        return self.hessian.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return 0.5 * float(x @ (self.hessian @ x)) + float(self.linear @ x)

    def extract_alpha(self, x: np.ndarray) -> list[np.ndarray]:
        """Per-step alpha arrays, candidate order matching the candidate set."""
        out = []
        for i, step in enumerate(self.candidates.steps):
            out.append(np.array([x[self.alpha_index[(i, k)]] for k in range(len(step))]))
        return out

    def extract_com(self, x: np.ndarray) -> np.ndarray:
        n = len(self.candidates.steps)
        return x[self.n_alpha:self.n_alpha + 3 * n].reshape(n, 3)


def _accel_map(candidates: CandidateSet, n_alpha: int) -> sp.csr_matrix:
    """(3N x n_alpha) map from alpha to the summed acceleration per step/axis."""
    n = candidates.n_steps
    rows, cols, vals = [], [], []
    col = 0
    for i, step in enumerate(candidates.steps):
        for c in step:
            for ax in range(3):
                rows.append(3 * i + ax)
                cols.append(col)
                vals.append(c.leg_dir[ax])
            col += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(3 * n, n_alpha))


def assemble(candidates: CandidateSet, path: DesiredPath, s_tilde: np.ndarray,
             config: PlannerConfig,
             prev_alpha: list[np.ndarray] | None = None,
             card_constraint: bool = True) -> QpProblem:
    """Build the QP for one reweighting iteration.

    prev_alpha, when given, must index the same candidate set; it activates
    the reweighting penalty term and (unless card_constraint is False) the
    per-step cardinality constraint. The hard row is only satisfiable once
    the previous solution is close to sparse, so the reweighting loop may
    drop it for early iterations.
    """
    n = candidates.n_steps
    if path.n_steps != n:
        raise InfeasibleDimensions(f"path has {path.n_steps} steps, candidates {n}")
    s_tilde = np.asarray(s_tilde, dtype=float)
    if s_tilde.shape != (n, 3):
        raise InfeasibleDimensions(f"s_tilde must be ({n}, 3), got {s_tilde.shape}")
    n_alpha = candidates.total
    if n_alpha == 0:
        raise NoCandidates("candidate set is empty")
    if prev_alpha is not None:
        if len(prev_alpha) != n or any(len(p) != len(s) for p, s in
                                       zip(prev_alpha, candidates.steps)):
            raise InfeasibleDimensions("prev_alpha does not match the candidate set")

    n_s = 3 * n
    n_var = n_alpha + n_s
    dt = config.dt

    alpha_index = {}
    col = 0
    for i, step in enumerate(candidates.steps):
        for k in range(len(step)):
            alpha_index[(i, k)] = col
            col += 1
    com_index = {(i, ax): n_alpha + 3 * i + ax for i in range(n) for ax in range(3)}

    B = _accel_map(candidates, n_alpha)                       # alpha -> accel (3N)
    s_sel = sp.hstack([sp.csr_matrix((n_s, n_alpha)), sp.identity(n_s)]).tocsr()

    # --- objective -------------------------------------------------------
    H = sp.csc_matrix((n_var, n_var))
    q = np.zeros(n_var)

    # terrain-cost weighted l1 on alpha (alpha >= 0 makes |.|_1 linear)
    costs = np.array([c.surface.cost for c in candidates.flat()])
    q[:n_alpha] += config.w0 * costs

    # temporal consistency: squared change of each surface's scale between
    # consecutive steps; a surface leaving the candidate set decays to zero
    if config.w1 > 0 and n >= 2:
        rows, cols, vals = [], [], []
        r = 0
        for i in range(n - 1):
            nxt = {c.surface_id: k for k, c in enumerate(candidates.steps[i + 1])}
            for k, c in enumerate(candidates.steps[i]):
                rows.append(r); cols.append(alpha_index[(i, k)]); vals.append(1.0)
                if c.surface_id in nxt:
                    rows.append(r)
                    cols.append(alpha_index[(i + 1, nxt[c.surface_id])])
                    vals.append(-1.0)
                r += 1
        if r > 0:
            D = sp.csr_matrix((vals, (rows, cols)), shape=(r, n_var))
            H = H + 2.0 * (config.w1 / dt**2) * (D.T @ D)

    # path following: positions and forward-difference velocities
    if config.w2 > 0:
        H = H + 2.0 * config.w2 * (s_sel.T @ s_sel)
        q += -2.0 * config.w2 * (s_sel.T @ path.s_star.reshape(-1))
        if config.w_vel > 0 and n >= 2:
            Dv = sp.kron(
                sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n)),
                sp.identity(3)) / dt
            Mv = (Dv @ s_sel).tocsr()
            v_ref = path.v_star[: n - 1].reshape(-1)
            H = H + 2.0 * config.w2 * config.w_vel * (Mv.T @ Mv)
            q += -2.0 * config.w2 * config.w_vel * (Mv.T @ v_ref)

    # jerk: first difference of the summed acceleration over dt
    if config.w3 > 0 and n >= 2:
        Dj = sp.kron(
            sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n)),
            sp.identity(3)) / dt
        J = (Dj @ sp.hstack([B, sp.csr_matrix((n_s, n_s))])).tocsr()
        H = H + 2.0 * config.w3 * (J.T @ J)

    # reweighting penalty (linear; absent on the first iteration)
    if prev_alpha is not None and config.w4 > 0:
        prev_flat = np.concatenate([np.asarray(p, dtype=float) for p in prev_alpha])
        q[:n_alpha] += config.w4 / (prev_flat + config.epsilon)

    # tiny diagonal regularization keeps the quadratic term PD on the alpha
    # block even when w1 = w3 = 0
    H = H + 1e-9 * sp.identity(n_var)

    # --- constraints -----------------------------------------------------
    P = build_P(n, dt)
    P3 = sp.kron(sp.csr_matrix(P.P), sp.identity(3)).tocsr()

    # kinematics equalities: s - P3 * B * alpha = s0 + P3*g + V*v0
    A_kin = sp.hstack([-(P3 @ B), sp.identity(n_s)]).tocsr()
    steps = np.arange(1, n + 1, dtype=float)
    rhs = (np.tile(path.s0, n)
           + P3 @ np.tile(GRAVITY, n)
           + (dt * steps[:, None] * path.v0[None, :]).reshape(-1))

    blocks = [A_kin]
    lowers = [rhs]
    uppers = [rhs]
    row = n_s
    rows_map = {"kinematics": slice(0, n_s)}

    # path tolerance box on s (per axis); planned slightly inside the bound
    # so first-order solver slack cannot push the realized CoM past tol
    qp_tol = config.tol - min(1e-3, 0.05 * config.tol)
    blocks.append(s_sel)
    lowers.append(path.s_star.reshape(-1) - qp_tol)
    uppers.append(path.s_star.reshape(-1) + qp_tol)
    rows_map["path_box"] = slice(row, row + n_s)
    row += n_s

    # on reweighting iterations, also box the CoM around the approximation
    # used for the leg directions; this caps the force-direction
    # linearization error at the single-box geometric bound
    if prev_alpha is not None and np.abs(s_tilde - path.s_star).max() > 1e-12:
        blocks.append(s_sel)
        lowers.append(s_tilde.reshape(-1) - qp_tol)
        uppers.append(s_tilde.reshape(-1) + qp_tol)
        rows_map["linearization_box"] = slice(row, row + n_s)
        row += n_s

    # alpha bounds: push only, and |alpha * leg_dir| <= a_max
    A_alpha = sp.hstack([sp.identity(n_alpha), sp.csr_matrix((n_alpha, n_s))]).tocsr()
    leg_len = np.array([c.leg_length for c in candidates.flat()])
    blocks.append(A_alpha)
    lowers.append(np.zeros(n_alpha))
    uppers.append(config.a_max / leg_len)
    rows_map["alpha_bounds"] = slice(row, row + n_alpha)
    row += n_alpha

    # per-step reweighted cardinality bound (active from iteration 1 on)
    if prev_alpha is not None and card_constraint:
        rws, cls, vls = [], [], []
        for i, step in enumerate(candidates.steps):
            for k in range(len(step)):
                rws.append(i)
                cls.append(alpha_index[(i, k)])
                vls.append(1.0 / (prev_alpha[i][k] + config.epsilon))
        A_card = sp.csr_matrix((vls, (rws, cls)), shape=(n, n_var))
        blocks.append(A_card)
        lowers.append(np.full(n, -np.inf))
        uppers.append(np.full(n, config.card_limit))
        rows_map["cardinality"] = slice(row, row + n)
        row += n

    A = sp.vstack(blocks).tocsc()
    return QpProblem(
        hessian=H.tocsc(), linear=q, A=A,
        lower=np.concatenate(lowers), upper=np.concatenate(uppers),
        alpha_index=alpha_index, com_index=com_index,
        n_alpha=n_alpha, candidates=candidates, rows=rows_map,
    )
