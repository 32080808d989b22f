"""Reference operator-splitting (ADMM) solver for sparse convex QPs.

Solves  min 0.5 x'Hx + q'x  s.t.  l <= Ax <= u  with Ruiz equilibration,
over-relaxation and adaptive penalty. Equality rows (l == u) get a stiffer
penalty. Convergence and infeasibility checks are performed on the
unscaled data, so reported residuals refer to the original problem. The
solver contract is intentionally small so a higher-performance backend can
be bound behind the same interface.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .qp_core import QpProblem

_RHO_EQ_SCALE = 1e3
_RHO_MIN, _RHO_MAX = 1e-6, 1e6


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max_iterations"
    PRIMAL_INFEASIBLE = "primal_infeasible"


@dataclass
class SolverSettings:
    abs_tol: float = 1e-6
    rel_tol: float = 1e-6
    max_iter: int = 20000
    rho: float = 0.1
    sigma: float = 1e-6
    over_relaxation: float = 1.6
    check_interval: int = 25
    adaptive_rho: bool = True
    scaling_iters: int = 10


@dataclass
class QpSolution:
    x: np.ndarray
    status: SolveStatus
    iterations: int
    primal_residual: float
    dual_residual: float
    solve_time: float
    objective: float
    y: np.ndarray = None      # dual iterate (unscaled), useful for warm starts


def _col_inf_norms(M: sp.spmatrix) -> np.ndarray:
    return np.asarray(abs(M).max(axis=0).todense()).ravel()


def _row_inf_norms(M: sp.spmatrix) -> np.ndarray:
    return np.asarray(abs(M).max(axis=1).todense()).ravel()


def _ruiz_equilibrate(H, q, A, iters):
    """Modified Ruiz scaling of the stacked [H A'; A 0] system plus a cost
    normalization. Returns scaled (H, q, A) and the diagonal factors."""
    n = H.shape[0]
    m = A.shape[0]
    d = np.ones(n)
    e = np.ones(m)
    c = 1.0
    H = H.copy()
    A = A.copy()
    q = q.copy()
    for _ in range(iters):
        norms_x = np.maximum(_col_inf_norms(H), _col_inf_norms(A) if m else 0.0)
        norms_x = np.where(norms_x > 1e-12, norms_x, 1.0)
        dx = 1.0 / np.sqrt(norms_x)
        if m:
            norms_r = _row_inf_norms(A)
            norms_r = np.where(norms_r > 1e-12, norms_r, 1.0)
            de = 1.0 / np.sqrt(norms_r)
        else:
            de = np.zeros(0)
        Dx = sp.diags(dx)
        H = Dx @ H @ Dx
        q = dx * q
        if m:
            A = sp.diags(de) @ A @ Dx
        d *= dx
        e *= de
        # cost normalization
        col_means = _col_inf_norms(H).mean() if H.nnz else 0.0
        denom = max(col_means, np.abs(q).max(initial=0.0))
        if denom > 1e-12:
            gamma = 1.0 / denom
            H = gamma * H
            q = gamma * q
            c *= gamma
    return H.tocsc(), q, A.tocsc(), d, e, c


def _factor(H, A, sigma, rho_vec):
    n = H.shape[0]
    K = sp.bmat([
        [H + sigma * sp.identity(n), A.T],
        [A, -sp.diags(1.0 / rho_vec)],
    ], format="csc")
    return spla.splu(K)


def solve_qp(H: sp.spmatrix, q: np.ndarray, A: sp.spmatrix,
             l: np.ndarray, u: np.ndarray,
             settings: SolverSettings | None = None,
             x0: np.ndarray | None = None,
             y0: np.ndarray | None = None) -> QpSolution:
    """ADMM solve of a standard-form QP; deterministic for fixed inputs."""
    st = settings or SolverSettings()
    t_start = time.perf_counter()
    H0 = sp.csc_matrix(H)
    n = H0.shape[0]
    q0 = np.asarray(q, dtype=float).reshape(n)

    if A is None or A.shape[0] == 0:
        x = spla.spsolve(H0 + st.sigma * sp.identity(n), -q0)
        x = np.atleast_1d(x)
        return QpSolution(x=x, status=SolveStatus.OPTIMAL, iterations=1,
                          primal_residual=0.0,
                          dual_residual=float(np.abs(H0 @ x + q0).max(initial=0.0)),
                          solve_time=time.perf_counter() - t_start,
                          objective=0.5 * x @ (H0 @ x) + q0 @ x,
                          y=np.zeros(0))

    A0 = sp.csc_matrix(A)
    m = A0.shape[0]
    l0 = np.asarray(l, dtype=float).reshape(m)
    u0 = np.asarray(u, dtype=float).reshape(m)

    Hs, qs, As, d, e, c = _ruiz_equilibrate(H0, q0, A0, st.scaling_iters)
    ls = e * l0
    us = e * u0
    eq = (u0 - l0) < 1e-12

    rho_base = st.rho
    rho = np.where(eq, rho_base * _RHO_EQ_SCALE, rho_base)
    lu = _factor(Hs, As, st.sigma, rho)

    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float) / d
    z = np.clip(As @ x, ls, us)
    y = np.zeros(m) if y0 is None else c * np.asarray(y0, dtype=float) / e
    y_prev_check = y.copy()
    alpha = st.over_relaxation

    status = SolveStatus.MAX_ITERATIONS
    r_prim = r_dual = np.inf
    it = 0
    # next iteration at which the penalty may adapt; the spacing grows only
    # when the heuristic is caught cycling between two values, so a thrashing
    # run decays into a fixed-penalty one while well-behaved runs keep
    # adapting at the base rate
    adapt_at = st.check_interval * 4
    adapt_spacing = st.check_interval * 4
    rho_two_ago = rho_base
    while it < st.max_iter:
        it += 1
        rhs = np.concatenate([st.sigma * x - qs, z - y / rho])
        sol = lu.solve(rhs)
        x_tilde, nu = sol[:n], sol[n:]
        z_tilde = z + (nu - y) / rho
        x = alpha * x_tilde + (1 - alpha) * x
        z_hat = alpha * z_tilde + (1 - alpha) * z
        z = np.clip(z_hat + y / rho, ls, us)
        y = y + rho * (z_hat - z)

        if it % st.check_interval == 0 or it == st.max_iter:
            # residuals on the original (unscaled) data
            x_un = d * x
            z_un = z / e
            y_un = (e * y) / c
            Ax = A0 @ x_un
            Hx = H0 @ x_un
            Aty = A0.T @ y_un
            r_prim = float(np.abs(Ax - z_un).max(initial=0.0))
            r_dual = float(np.abs(Hx + q0 + Aty).max(initial=0.0))
            eps_prim = st.abs_tol + st.rel_tol * max(
                np.abs(Ax).max(initial=0.0), np.abs(z_un).max(initial=0.0))
            eps_dual = st.abs_tol + st.rel_tol * max(
                np.abs(Hx).max(initial=0.0), np.abs(Aty).max(initial=0.0),
                np.abs(q0).max(initial=0.0))
            if r_prim <= eps_prim and r_dual <= eps_dual:
                # certify against the raw constraint data before declaring
                # optimality
                viol = np.maximum(Ax - u0, 0.0).max(initial=0.0) + \
                    np.maximum(l0 - Ax, 0.0).max(initial=0.0)
                if viol <= 10 * st.abs_tol:
                    status = SolveStatus.OPTIMAL
                    break

            dy = (y - y_prev_check) * e
            if _primal_infeasible(A0, l0, u0, dy):
                status = SolveStatus.PRIMAL_INFEASIBLE
                break
            y_prev_check = y.copy()

            if st.adaptive_rho and it >= adapt_at:
                adapt_at = it + adapt_spacing
                num = r_prim / max(np.abs(Ax).max(initial=0.0),
                                   np.abs(z_un).max(initial=0.0), 1e-12)
                den = r_dual / max(np.abs(Hx).max(initial=0.0),
                                   np.abs(Aty).max(initial=0.0),
                                   np.abs(q0).max(initial=0.0), 1e-12)
                scale = np.sqrt(num / max(den, 1e-12))
                if scale > 5.0 or scale < 0.2:
                    # geometric steps keep the penalty from thrashing between
                    # the extremes when one residual is near zero
                    factor = float(np.clip(scale, 0.1, 10.0))
                    new_base = float(np.clip(rho_base * factor, _RHO_MIN, _RHO_MAX))
                    if 0.8 < new_base / rho_two_ago < 1.25:
                        adapt_spacing *= 2
                    rho_two_ago = rho_base
                    rho_base = new_base
                    rho = np.where(eq, rho_base * _RHO_EQ_SCALE, rho_base)
                    lu = _factor(Hs, As, st.sigma, rho)
                    adapt_at = it + adapt_spacing

    x_un = d * x
    y_un = (e * y) / c
    obj = 0.5 * float(x_un @ (H0 @ x_un)) + float(q0 @ x_un)
    return QpSolution(x=x_un, status=status, iterations=it,
                      primal_residual=r_prim, dual_residual=r_dual,
                      solve_time=time.perf_counter() - t_start,
                      objective=obj, y=y_un)


def _primal_infeasible(A, l, u, dy) -> bool:
    """Divergence certificate: dy with A'dy ~ 0 yet a strictly negative
    support gap over the bounds proves primal infeasibility."""
    norm = np.abs(dy).max(initial=0.0)
    if norm <= 1e-10:
        return False
    dy = dy / norm
    if np.abs(A.T @ dy).max(initial=0.0) > 1e-4:
        return False
    pos = np.maximum(dy, 0.0)
    neg = np.minimum(dy, 0.0)
    # unbounded rows cannot support the certificate
    if pos[np.isinf(u)].max(initial=0.0) > 1e-10:
        return False
    if (-neg[np.isinf(l)]).max(initial=0.0) > 1e-10:
        return False
    fin_u = np.where(np.isinf(u), 0.0, u)
    fin_l = np.where(np.isinf(l), 0.0, l)
    gap = float(fin_u @ pos + fin_l @ neg)
    return gap < -1e-6


def solve(problem: QpProblem, settings: SolverSettings | None = None,
          warm_start: np.ndarray | None = None,
          warm_start_dual: np.ndarray | None = None) -> QpSolution:
    """Solve an assembled foothold-selection QP."""
    return solve_qp(problem.hessian, problem.linear, problem.A,
                    problem.lower, problem.upper,
                    settings=settings, x0=warm_start, y0=warm_start_dual)
